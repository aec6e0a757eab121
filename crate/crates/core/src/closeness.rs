//! KL closeness distributions on `M_n`.
//!
//! With remoteness `r(μ, θ) = γ·D(μ‖θ)` the joint closeness density is
//! `p(μ, θ) ∝ exp(−γ D(μ‖θ))` with respect to the product Fisher measure.
//! Its conditional `θ | μ`, written against the Lebesgue measure of the
//! expectation chart, is `Dirichlet(γμ + 1/2)`. The reverse conditional
//! `μ | θ` has no closed form and is evaluated by quadrature.
//!
//! Every density-returning path distinguishes the intrinsic density `p`
//! (w.r.t. the Fisher measure) from the integration density
//! `ρ = p·√|G|` (w.r.t. `dθ`). Under [`BaseMeasure::Lebesgue`] the base
//! measure is `dθ` itself and the Dirichlet offset becomes 1.

use serde::{Deserialize, Serialize};

use crate::manifold::{fisher_log_sqrt_det, kl_boundary_limit, kl_unchecked, SimplexPoint};
use crate::numerics::{ln_multivariate_beta_unchecked, DistributionSpec};
use crate::quadrature::{FisherGrid, QuadratureConfig};
use crate::{Error, Result};

/// Reference measure the closeness density is normalized against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BaseMeasure {
    /// Fisher (Riemannian volume) measure; conditional offset 1/2.
    #[default]
    #[serde(alias = "fisher_intrinsic")]
    Fisher,
    /// Lebesgue measure of the expectation chart; conditional offset 1.
    Lebesgue,
}

impl BaseMeasure {
    /// Constant added to `γμ` in the Dirichlet concentration.
    pub fn offset(self) -> f64 {
        match self {
            BaseMeasure::Fisher => 0.5,
            BaseMeasure::Lebesgue => 1.0,
        }
    }
}

impl std::str::FromStr for BaseMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fisher" | "fisher_intrinsic" | "intrinsic" => Ok(BaseMeasure::Fisher),
            "lebesgue" => Ok(BaseMeasure::Lebesgue),
            other => Err(Error::Config(format!("unknown base measure '{other}'"))),
        }
    }
}

/// Whether a density is reported against the base measure (`p`) or
/// against `dθ` in the expectation chart (`ρ = p·√|G|`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMode {
    Intrinsic,
    Integration,
}

/// Scaled KL remoteness `γ·D(μ‖θ)` on `M_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemotenessSpec {
    gamma: f64,
    base_measure: BaseMeasure,
    n: usize,
}

impl RemotenessSpec {
    pub fn new(gamma: f64, base_measure: BaseMeasure, n: usize) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::domain(format!("strength gamma must be finite and >= 0, got {gamma}")));
        }
        if n < 1 {
            return Err(Error::domain("manifold dimension must be at least 1"));
        }
        Ok(Self { gamma, base_measure, n })
    }

    pub fn fisher(gamma: f64, n: usize) -> Result<Self> {
        Self::new(gamma, BaseMeasure::Fisher, n)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn base_measure(&self) -> BaseMeasure {
        self.base_measure
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, p: &SimplexPoint) -> Result<()> {
        if p.dim() != self.n {
            return Err(Error::domain(format!(
                "point of dimension {} used with a remoteness on M_{}",
                p.dim(),
                self.n
            )));
        }
        Ok(())
    }
}

pub fn remoteness(spec: &RemotenessSpec, mu: &SimplexPoint, theta: &SimplexPoint) -> Result<f64> {
    spec.check(mu)?;
    spec.check(theta)?;
    Ok(spec.gamma * kl_unchecked(mu.coords(), theta.coords()))
}

/// `−γ D(μ‖θ)`, the joint closeness log density without `ln Z`.
pub fn log_joint_unnormalized(spec: &RemotenessSpec, mu: &SimplexPoint, theta: &SimplexPoint) -> Result<f64> {
    remoteness(spec, mu, theta).map(|r| -r)
}

/// `ln ∫ exp(−γD(μ‖θ)) dθ_base = −γ Σ μ_i ln μ_i + ln B(γμ + offset)`.
pub fn log_marginal_mu_unnormalized(spec: &RemotenessSpec, mu: &SimplexPoint) -> Result<f64> {
    spec.check(mu)?;
    let offset = spec.base_measure.offset();
    let neg_entropy: f64 = mu.coords().iter().map(|m| m * m.ln()).sum();
    let alpha: Vec<f64> = mu.coords().iter().map(|m| spec.gamma * m + offset).collect();
    Ok(-spec.gamma * neg_entropy + ln_multivariate_beta_unchecked(&alpha))
}

/// Conditional `θ | μ`: a Dirichlet with concentration `γμ + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosenessConditional {
    concentration: Vec<f64>,
    base_measure: BaseMeasure,
}

impl ClosenessConditional {
    pub fn concentration(&self) -> &[f64] {
        &self.concentration
    }

    pub fn base_measure(&self) -> BaseMeasure {
        self.base_measure
    }

    pub fn to_distribution(&self) -> DistributionSpec {
        DistributionSpec::Dirichlet { alpha: self.concentration.clone() }
    }

    /// Log density at an interior `θ`.
    pub fn log_density(&self, theta: &SimplexPoint, mode: DensityMode) -> Result<f64> {
        if theta.coords().len() != self.concentration.len() {
            return Err(Error::domain("conditional evaluated at a point of the wrong dimension"));
        }
        let rho: f64 = self.concentration.iter().zip(theta.coords()).map(|(a, t)| (a - 1.0) * t.ln()).sum::<f64>()
            - ln_multivariate_beta_unchecked(&self.concentration);
        Ok(match (self.base_measure, mode) {
            (BaseMeasure::Fisher, DensityMode::Intrinsic) => rho - fisher_log_sqrt_det(theta),
            _ => rho,
        })
    }

    /// Intrinsic density extended continuously to the closed simplex.
    pub(crate) fn intrinsic_with_boundary(&self, theta: &[f64]) -> f64 {
        let shift = match self.base_measure {
            BaseMeasure::Fisher => 0.5,
            BaseMeasure::Lebesgue => 1.0,
        };
        let mut log_kernel = 0.0;
        for (a, t) in self.concentration.iter().zip(theta) {
            let power = a - shift;
            if *t == 0.0 {
                if power > 0.0 {
                    return 0.0;
                }
            } else {
                log_kernel += power * t.ln();
            }
        }
        (log_kernel - ln_multivariate_beta_unchecked(&self.concentration)).exp()
    }
}

pub fn conditional_theta_given_mu(spec: &RemotenessSpec, mu: &SimplexPoint) -> Result<ClosenessConditional> {
    spec.check(mu)?;
    let offset = spec.base_measure.offset();
    Ok(ClosenessConditional {
        concentration: mu.coords().iter().map(|m| spec.gamma * m + offset).collect(),
        base_measure: spec.base_measure,
    })
}

/// Reverse conditional `μ | θ`, normalized by quadrature over `M_n`
/// (`n ∈ {1, 2}`).
#[derive(Debug, Clone)]
pub struct ReverseConditional {
    spec: RemotenessSpec,
    theta: SimplexPoint,
    log_norm: f64,
}

impl ReverseConditional {
    pub fn new(spec: &RemotenessSpec, theta: &SimplexPoint, quad: &QuadratureConfig) -> Result<Self> {
        spec.check(theta)?;
        if spec.n > 2 {
            return Err(Error::UnsupportedDimension { n: spec.n, supported: "1 or 2" });
        }
        let grid = FisherGrid::new(spec.n, quad)?;
        let lebesgue = spec.base_measure == BaseMeasure::Lebesgue;
        let z = grid.integrate(|mu| {
            let k = (-spec.gamma * kl_unchecked(mu.coords(), theta.coords())).exp();
            if lebesgue {
                k * (-fisher_log_sqrt_det(mu)).exp()
            } else {
                k
            }
        })?;
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::Numeric(format!(
                "reverse conditional normalizer is {z} (gamma = {}, theta = {:?}, {} nodes)",
                spec.gamma,
                theta.coords(),
                grid.len()
            )));
        }
        Ok(Self { spec: *spec, theta: theta.clone(), log_norm: z.ln() })
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    pub fn log_density(&self, mu: &SimplexPoint, mode: DensityMode) -> Result<f64> {
        self.spec.check(mu)?;
        let p = -self.spec.gamma * kl_unchecked(mu.coords(), self.theta.coords()) - self.log_norm;
        Ok(match (self.spec.base_measure, mode) {
            (BaseMeasure::Fisher, DensityMode::Integration) => p + fisher_log_sqrt_det(mu),
            _ => p,
        })
    }

    /// Intrinsic density on the closed simplex; boundary values are the
    /// limits `exp(−γ D(μ‖θ)) / Z` with `0·ln 0 = 0`.
    pub(crate) fn intrinsic_with_boundary(&self, mu: &[f64]) -> f64 {
        (-self.spec.gamma * kl_boundary_limit(mu, self.theta.coords()) - self.log_norm).exp()
    }
}

/// `ln p(μ_eval | θ)` for the reverse conditional, intrinsic density.
pub fn log_conditional_mu_given_theta(
    spec: &RemotenessSpec,
    theta: &SimplexPoint,
    mu_eval: &SimplexPoint,
    quad: &QuadratureConfig,
) -> Result<f64> {
    ReverseConditional::new(spec, theta, quad)?.log_density(mu_eval, DensityMode::Intrinsic)
}

/// One abscissa of [`conditional_curves`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    /// Intrinsic `p(θ = x | μ = anchor)`.
    pub theta_given_mu: f64,
    /// Intrinsic `p(μ = x | θ = anchor)`.
    pub mu_given_theta: f64,
}

/// Both conditionals on `M_1` over `points` equally spaced abscissae in
/// `[0, 1]`, endpoints included as limits.
pub fn conditional_curves(
    spec: &RemotenessSpec,
    anchor: f64,
    points: usize,
    quad: &QuadratureConfig,
) -> Result<Vec<CurvePoint>> {
    if spec.n != 1 {
        return Err(Error::UnsupportedDimension { n: spec.n, supported: "1" });
    }
    if points < 3 {
        return Err(Error::domain("conditional curves need at least 3 points"));
    }
    let anchor_point = SimplexPoint::binary(anchor)?;
    let forward = conditional_theta_given_mu(spec, &anchor_point)?;
    let reverse = ReverseConditional::new(spec, &anchor_point, quad)?;
    Ok((0..points)
        .map(|i| {
            let x = i as f64 / (points - 1) as f64;
            let coords = [x, 1.0 - x];
            CurvePoint {
                x,
                theta_given_mu: forward.intrinsic_with_boundary(&coords),
                mu_given_theta: reverse.intrinsic_with_boundary(&coords),
            }
        })
        .collect())
}

/// Reading of a Dirichlet as a closeness conditional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interpretation {
    /// `θ` is pulled toward `mu` with strength `gamma`.
    Centered { mu: SimplexPoint, gamma: f64 },
    /// Every concentration equals the offset: `γ = 0`, no center.
    NoPreferredCenter,
}

/// Inverts `α = γμ + offset`: `γ = Σα − (n+1)·offset`, `μ_i = (α_i − offset)/γ`.
pub fn interpret_dirichlet(alpha: &[f64], base: BaseMeasure) -> Result<Interpretation> {
    if alpha.len() < 2 {
        return Err(Error::Interpretation("need at least 2 concentration parameters".into()));
    }
    let offset = base.offset();
    if let Some((i, a)) = alpha.iter().enumerate().find(|(_, a)| !a.is_finite()) {
        return Err(Error::Interpretation(format!("alpha[{i}] = {a} is not finite")));
    }
    if alpha.iter().all(|a| *a == offset) {
        return Ok(Interpretation::NoPreferredCenter);
    }
    if let Some((i, a)) = alpha.iter().enumerate().find(|(_, a)| **a <= offset) {
        return Err(Error::Interpretation(format!(
            "alpha[{i}] = {a} is not above the offset {offset}; all entries must exceed it or all equal it"
        )));
    }
    let excess: Vec<f64> = alpha.iter().map(|a| a - offset).collect();
    let gamma: f64 = excess.iter().sum();
    let mu = SimplexPoint::from_normalized(excess.iter().map(|e| e / gamma).collect());
    Ok(Interpretation::Centered { mu, gamma })
}

/// Agreement tally from [`order_report`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderReport {
    pub agreements: usize,
    pub ties: usize,
    pub violations: usize,
}

/// Differences with magnitude below this count as ties.
pub const ORDER_TIE_TOL: f64 = 1e-12;

fn tri_sign(delta: f64) -> i8 {
    if delta.abs() < ORDER_TIE_TOL {
        0
    } else if delta > 0.0 {
        1
    } else {
        -1
    }
}

type PointPair = (SimplexPoint, SimplexPoint);

/// Compares the order of joint log densities against the reversed order of
/// remoteness for each pair of pairs.
pub fn order_report(spec: &RemotenessSpec, pairs: &[(PointPair, PointPair)]) -> Result<OrderReport> {
    let mut report = OrderReport::default();
    for ((mu_a, theta_a), (mu_b, theta_b)) in pairs {
        let dj = log_joint_unnormalized(spec, mu_a, theta_a)? - log_joint_unnormalized(spec, mu_b, theta_b)?;
        let dr = remoteness(spec, mu_a, theta_a)? - remoteness(spec, mu_b, theta_b)?;
        let (sj, sr) = (tri_sign(dj), tri_sign(dr));
        if sj != -sr {
            report.violations += 1;
        } else if sj == 0 {
            report.ties += 1;
        } else {
            report.agreements += 1;
        }
    }
    Ok(report)
}

/// True iff the joint density implements the remoteness on every pair.
pub fn order_agreement(spec: &RemotenessSpec, pairs: &[(PointPair, PointPair)]) -> Result<bool> {
    Ok(order_report(spec, pairs)?.violations == 0)
}
