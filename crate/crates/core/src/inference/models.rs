use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::data::ObservedGroups;
use crate::closeness::BaseMeasure;
use crate::numerics::{ln_beta_unchecked, ln_choose, ln_gamma_unchecked, sigmoid, DistributionSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

impl BetaPrior {
    pub(crate) fn ln_pdf(&self, x: f64) -> f64 {
        (self.a - 1.0) * x.ln() + (self.b - 1.0) * (-x).ln_1p() - ln_beta_unchecked(self.a, self.b)
    }
}

/// Shape/rate Gamma prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub(crate) fn ln_pdf(&self, x: f64) -> f64 {
        self.shape * self.rate.ln() - ln_gamma_unchecked(self.shape) + (self.shape - 1.0) * x.ln() - self.rate * x
    }

    pub(crate) fn validate(&self) -> Result<()> {
        DistributionSpec::gamma(self.shape, self.rate).map(drop)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClosenessModelConfig {
    pub mu_prior: BetaPrior,
    pub gamma_prior: GammaPrior,
    pub base_measure: BaseMeasure,
}

impl Default for ClosenessModelConfig {
    fn default() -> Self {
        Self {
            mu_prior: BetaPrior { a: 0.5, b: 0.5 },
            gamma_prior: GammaPrior { shape: 1.0, rate: 0.1 },
            base_measure: BaseMeasure::Fisher,
        }
    }
}

impl ClosenessModelConfig {
    pub fn with_gamma_rate(mut self, rate: f64) -> Self {
        self.gamma_prior.rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        DistributionSpec::beta(self.mu_prior.a, self.mu_prior.b)
            .map_err(|e| Error::Config(format!("mu_prior: {e}")))?;
        self.gamma_prior.validate().map_err(|e| Error::Config(format!("gamma_prior: {e}")))
    }
}

/// `p(α, β) ∝ (α + β)^prior_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GelmanModelConfig {
    pub prior_exponent: f64,
}

impl Default for GelmanModelConfig {
    fn default() -> Self {
        Self { prior_exponent: -2.5 }
    }
}

impl GelmanModelConfig {
    /// Exponents at or above −2 leave the posterior improper in `α + β`.
    pub fn validate(&self) -> Result<()> {
        if !(self.prior_exponent.is_finite() && self.prior_exponent < -2.0) {
            return Err(Error::Config(format!(
                "prior_exponent must be < -2 for a proper posterior, got {}",
                self.prior_exponent
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Model {
    Closeness(ClosenessModelConfig),
    Gelman(GelmanModelConfig),
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Closeness(c) => c.validate(),
            Model::Gelman(g) => g.validate(),
        }
    }
}

/// Conjugate update `θ | y, μ, γ ~ Beta(γμ + o + y, γ(1−μ) + o + n − y)`.
pub fn theta_full_conditional(y: u64, n: u64, mu: f64, gamma: f64, base: BaseMeasure) -> Result<DistributionSpec> {
    if n == 0 || y > n {
        return Err(Error::domain(format!("need 0 <= y <= n and n >= 1, got y = {y}, n = {n}")));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain(format!("mu must lie in (0, 1), got {mu}")));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::domain(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    let o = base.offset();
    DistributionSpec::beta(gamma * mu + o + y as f64, gamma * (1.0 - mu) + o + (n - y) as f64)
}

/// Beta-Binomial log likelihood with repeated `(y, n)` pairs merged.
#[derive(Debug, Clone)]
pub(crate) struct CollapsedLikelihood {
    terms: Vec<(f64, f64, f64)>,
    ln_choose_total: f64,
}

impl CollapsedLikelihood {
    pub(crate) fn new(data: &ObservedGroups) -> Self {
        let mut counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        for g in data.groups() {
            *counts.entry((g.y, g.n)).or_default() += 1;
        }
        let ln_choose_total = counts.iter().map(|(&(y, n), &c)| c as f64 * ln_choose(n, y)).sum();
        let terms = counts.into_iter().map(|((y, n), c)| (y as f64, (n - y) as f64, c as f64)).collect();
        Self { terms, ln_choose_total }
    }

    /// `Σ_i ln BetaBinomial(y_i; n_i, a, b)`.
    pub(crate) fn eval(&self, a: f64, b: f64) -> f64 {
        let base = ln_beta_unchecked(a, b);
        let mut acc = self.ln_choose_total;
        for &(y, f, c) in &self.terms {
            acc += c * (ln_beta_unchecked(a + y, b + f) - base);
        }
        acc
    }
}

pub(crate) fn closeness_collapsed(mu: f64, gamma: f64, lik: &CollapsedLikelihood, cfg: &ClosenessModelConfig) -> f64 {
    if !(mu > 0.0 && mu < 1.0 && gamma > 0.0 && gamma.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let o = cfg.base_measure.offset();
    cfg.mu_prior.ln_pdf(mu) + cfg.gamma_prior.ln_pdf(gamma) + lik.eval(gamma * mu + o, gamma * (1.0 - mu) + o)
}

pub(crate) fn gelman_collapsed(alpha: f64, beta: f64, lik: &CollapsedLikelihood, cfg: &GelmanModelConfig) -> f64 {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return f64::NEG_INFINITY;
    }
    cfg.prior_exponent * (alpha + beta).ln() + lik.eval(alpha, beta)
}

/// Collapsed log posterior of `(μ, γ)`, up to a constant. Returns `-inf`
/// outside `(0, 1) × (0, ∞)`; invalid configuration is an error.
pub fn closeness_log_posterior(mu: f64, gamma: f64, data: &ObservedGroups, cfg: &ClosenessModelConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(closeness_collapsed(mu, gamma, &CollapsedLikelihood::new(data), cfg))
}

/// [`closeness_log_posterior`] in `(logit μ, ln γ)` including the Jacobian
/// `μ(1 − μ)γ`.
pub fn closeness_log_posterior_transformed(
    logit_mu: f64,
    log_gamma: f64,
    data: &ObservedGroups,
    cfg: &ClosenessModelConfig,
) -> Result<f64> {
    cfg.validate()?;
    let lik = CollapsedLikelihood::new(data);
    Ok(closeness_in_chart(logit_mu, log_gamma, &lik, cfg))
}

pub(crate) fn closeness_in_chart(u: f64, v: f64, lik: &CollapsedLikelihood, cfg: &ClosenessModelConfig) -> f64 {
    let mu = sigmoid(u);
    let gamma = v.exp();
    closeness_collapsed(mu, gamma, lik, cfg) + ln_sigmoid_jacobian(u) + v
}

/// `ln(σ(u)(1 − σ(u)))` computed without cancellation.
pub(crate) fn ln_sigmoid_jacobian(u: f64) -> f64 {
    -u.abs() - 2.0 * (-u.abs()).exp().ln_1p()
}

/// Gelman's unnormalized log posterior `e·ln(α+β) + Σ ln BetaBinomial`.
pub fn gelman_log_posterior(alpha: f64, beta: f64, data: &ObservedGroups, cfg: &GelmanModelConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(gelman_collapsed(alpha, beta, &CollapsedLikelihood::new(data), cfg))
}

/// [`gelman_log_posterior`] in `(logit(α/(α+β)), ln(α+β))`; the Jacobian is `αβ`.
pub fn gelman_log_posterior_transformed(
    logit_mean: f64,
    log_total: f64,
    data: &ObservedGroups,
    cfg: &GelmanModelConfig,
) -> Result<f64> {
    cfg.validate()?;
    Ok(gelman_in_chart(logit_mean, log_total, &CollapsedLikelihood::new(data), cfg))
}

pub(crate) fn gelman_in_chart(u: f64, v: f64, lik: &CollapsedLikelihood, cfg: &GelmanModelConfig) -> f64 {
    let (alpha, beta) = gelman_from_chart(u, v);
    gelman_collapsed(alpha, beta, lik, cfg) + alpha.ln() + beta.ln()
}

pub(crate) fn gelman_from_chart(u: f64, v: f64) -> (f64, f64) {
    let total = v.exp();
    (total * sigmoid(u), total * sigmoid(-u))
}

#[cfg(test)]
fn gelman_to_chart(alpha: f64, beta: f64) -> (f64, f64) {
    (crate::numerics::logit(alpha / (alpha + beta)), (alpha + beta).ln())
}
