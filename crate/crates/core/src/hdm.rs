//! Hierarchical Dirichlet-Multinomial estimation of a conditional
//! probability table `p(X | Y)`.
//!
//! Every column `θ_{X|y} ~ Dirichlet(γμ + ½)` shrinks toward a shared center
//! `μ ~ Dirichlet(½, …, ½)` with strength `γ`, either `Gamma`-distributed or
//! fixed. Hyperparameters are sampled on the Dirichlet-multinomial marginal
//! in the chart `(alr μ, ln γ)`; columns are drawn by Gibbs for output.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::closeness::BaseMeasure;
use crate::inference::{run_chains, ChainSet, GammaPrior, ModelTag, MwgTarget, SamplerConfig};
use crate::manifold::SimplexPoint;
use crate::numerics::{ln_multivariate_beta_unchecked, StreamRng};
use crate::{Error, Result};

/// Count matrix with `k_X ≥ 2` child states and `k_Y ≥ 1` parent states,
/// stored by column: `columns[y][x]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyCounts {
    columns: Vec<Vec<u64>>,
}

impl ContingencyCounts {
    pub fn from_columns(columns: Vec<Vec<u64>>) -> Result<Self> {
        let k = columns.first().map(Vec::len).unwrap_or(0);
        if columns.is_empty() {
            return Err(Error::domain("a contingency table needs at least one column"));
        }
        if k < 2 {
            return Err(Error::domain(format!("the child variable needs >= 2 states, got {k}")));
        }
        if let Some(index) = columns.iter().position(|c| c.len() != k) {
            return Err(Error::Validation {
                index,
                reason: format!("column has {} states, expected {k}", columns[index].len()),
            });
        }
        if columns.iter().flatten().all(|&c| c == 0) {
            return Err(Error::domain("contingency table has no observations"));
        }
        Ok(Self { columns })
    }

    /// `rows[x][y]`, the layout of a printed table.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k_y = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(index) = rows.iter().position(|r| r.len() != k_y) {
            return Err(Error::Validation { index, reason: "ragged row".into() });
        }
        Self::from_columns((0..k_y).map(|y| rows.iter().map(|r| r[y]).collect()).collect())
    }

    /// Long-form `(x, y, count)` records with 0-based states. Repeated cells add up.
    pub fn from_long(records: &[(usize, usize, u64)]) -> Result<Self> {
        let k_x = records.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let k_y = records.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let mut columns = vec![vec![0u64; k_x]; k_y];
        for &(x, y, c) in records {
            columns[y][x] += c;
        }
        Self::from_columns(columns)
    }

    pub fn columns(&self) -> &[Vec<u64>] {
        &self.columns
    }

    pub fn k_x(&self) -> usize {
        self.columns[0].len()
    }

    pub fn k_y(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaMode {
    Prior(GammaPrior),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HdmConfig {
    /// Symmetric Dirichlet concentration of the prior on `μ`.
    pub mu_prior: f64,
    pub gamma: GammaMode,
    pub base_measure: BaseMeasure,
}

impl Default for HdmConfig {
    fn default() -> Self {
        Self {
            mu_prior: 0.5,
            gamma: GammaMode::Prior(GammaPrior { shape: 1.0, rate: 0.1 }),
            base_measure: BaseMeasure::Fisher,
        }
    }
}

impl HdmConfig {
    pub fn fixed(gamma: f64) -> Self {
        Self { gamma: GammaMode::Fixed(gamma), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_prior.is_finite() && self.mu_prior > 0.0) {
            return Err(Error::Config(format!("mu_prior must be > 0, got {}", self.mu_prior)));
        }
        match self.gamma {
            GammaMode::Prior(p) => p.validate().map_err(|e| Error::Config(format!("gamma_prior: {e}"))),
            GammaMode::Fixed(g) if g.is_finite() && g > 0.0 => Ok(()),
            GammaMode::Fixed(g) => Err(Error::Config(format!("fixed gamma must be > 0, got {g}"))),
        }
    }
}

fn collapsed(mu: &[f64], gamma: f64, counts: &ContingencyCounts, cfg: &HdmConfig, buf: &mut Vec<f64>) -> f64 {
    let o = cfg.base_measure.offset();
    let prior_mu: f64 = (cfg.mu_prior - 1.0) * mu.iter().map(|m| m.ln()).sum::<f64>()
        - ln_multivariate_beta_unchecked(&vec![cfg.mu_prior; mu.len()]);
    let prior_gamma = match cfg.gamma {
        GammaMode::Prior(p) => p.ln_pdf(gamma),
        GammaMode::Fixed(_) => 0.0,
    };
    let base: Vec<f64> = mu.iter().map(|m| gamma * m + o).collect();
    let ln_b0 = ln_multivariate_beta_unchecked(&base);
    let mut lik = 0.0;
    for col in &counts.columns {
        if col.iter().all(|&c| c == 0) {
            continue;
        }
        buf.clear();
        buf.extend(base.iter().zip(col).map(|(a, &c)| a + c as f64));
        lik += ln_multivariate_beta_unchecked(buf) - ln_b0;
    }
    prior_mu + prior_gamma + lik
}

/// Collapsed log posterior of `(μ, γ)` up to a constant:
/// `ln p(μ) + ln p(γ) + Σ_y [ln B(γμ + ½ + c_y) − ln B(γμ + ½)]`.
/// In fixed-γ mode the `γ` prior term is dropped.
pub fn hdm_log_posterior(mu: &SimplexPoint, gamma: f64, counts: &ContingencyCounts, cfg: &HdmConfig) -> Result<f64> {
    cfg.validate()?;
    if mu.coords().len() != counts.k_x() {
        return Err(Error::domain(format!("mu has {} states, counts have {}", mu.coords().len(), counts.k_x())));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::domain(format!("gamma must be finite and > 0, got {gamma}")));
    }
    Ok(collapsed(mu.coords(), gamma, counts, cfg, &mut Vec::new()))
}

/// `μ = softmax(z, 0)`.
fn from_alr(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(0.0, f64::max);
    let mut out: Vec<f64> = z.iter().map(|v| (v - max).exp()).chain(std::iter::once((-max).exp())).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= s);
    out
}

struct HdmTarget<'a> {
    counts: &'a ContingencyCounts,
    cfg: HdmConfig,
}

impl HdmTarget<'_> {
    fn split(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let k = self.counts.k_x();
        let gamma = match self.cfg.gamma {
            GammaMode::Fixed(g) => g,
            GammaMode::Prior(_) => x[k - 1].exp(),
        };
        (from_alr(&x[..k - 1]), gamma)
    }
}

impl MwgTarget for HdmTarget<'_> {
    type Aux = Vec<Vec<f64>>;

    fn init(&self, chain: usize, rng: &mut StreamRng) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = self.counts.k_x();
        let mut totals = vec![0.5; k];
        for col in &self.counts.columns {
            for (t, &c) in totals.iter_mut().zip(col) {
                *t += c as f64;
            }
        }
        let spread = [-1.0, 1.0, -0.5, 0.5][chain % 4];
        let mut x: Vec<f64> =
            (0..k - 1).map(|i| (totals[i] / totals[k - 1]).ln() + 0.3 * spread + rng.random_range(-0.1..0.1)).collect();
        if let GammaMode::Prior(_) = self.cfg.gamma {
            x.push(10f64.ln() + spread + rng.random_range(-0.1..0.1));
        }
        let theta = self
            .counts
            .columns
            .iter()
            .map(|col| {
                let s: f64 = col.iter().map(|&c| c as f64 + 0.5).sum();
                col.iter().map(|&c| (c as f64 + 0.5) / s).collect()
            })
            .collect();
        (x, theta)
    }

    fn log_density(&self, x: &[f64], _: &Vec<Vec<f64>>) -> f64 {
        let (mu, gamma) = self.split(x);
        if mu.iter().any(|m| m.is_nan() || *m <= 0.0) || !(gamma > 0.0 && gamma.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let jac_mu: f64 = mu.iter().map(|m| m.ln()).sum();
        let jac_gamma = match self.cfg.gamma {
            GammaMode::Prior(_) => x[x.len() - 1],
            GammaMode::Fixed(_) => 0.0,
        };
        collapsed(&mu, gamma, self.counts, &self.cfg, &mut Vec::new()) + jac_mu + jac_gamma
    }

    fn gibbs(&self, x: &[f64], aux: &mut Vec<Vec<f64>>, rng: &mut StreamRng) -> Result<()> {
        let (mu, gamma) = self.split(x);
        let o = self.cfg.base_measure.offset();
        for (col, theta) in self.counts.columns.iter().zip(aux.iter_mut()) {
            for ((t, m), &c) in theta.iter_mut().zip(&mu).zip(col) {
                let shape = gamma * m + o + c as f64;
                let g = Gamma::new(shape, 1.0)
                    .map_err(|e| Error::Sampler(format!("column update with shape {shape}: {e}")))?;
                *t = g.sample(rng).max(f64::MIN_POSITIVE);
            }
            let s: f64 = theta.iter().sum();
            theta.iter_mut().for_each(|t| *t /= s);
        }
        Ok(())
    }

    fn row(&self, x: &[f64], aux: &Vec<Vec<f64>>) -> Vec<f64> {
        let (mut row, gamma) = self.split(x);
        row.push(gamma);
        for theta in aux {
            row.extend_from_slice(theta);
        }
        row
    }
}

/// Samples `(μ, γ)` and every column `θ_{X|y}`.
///
/// Output columns are `mu_1..mu_k`, `gamma`, then `theta_x_y` for each
/// parent state `y` and child state `x`, both 1-based.
pub fn run_hdm(counts: &ContingencyCounts, cfg: &HdmConfig, sampler: &SamplerConfig) -> Result<ChainSet> {
    cfg.validate()?;
    sampler.validate()?;
    let k = counts.k_x();
    let mut scales = vec![sampler.proposal_scales[0]; k - 1];
    if let GammaMode::Prior(_) = cfg.gamma {
        scales.push(sampler.proposal_scales[1]);
    }
    let target = HdmTarget { counts, cfg: *cfg };
    let chains = run_chains(&target, sampler, &scales)?;
    let mut names: Vec<String> = (1..=k).map(|i| format!("mu_{i}")).collect();
    names.push("gamma".into());
    for y in 1..=counts.k_y() {
        names.extend((1..=k).map(|x| format!("theta_{x}_{y}")));
    }
    let mut set = ChainSet::new(ModelTag::Hdm, names, chains)?;
    set.config = Some(sampler.clone());
    Ok(set)
}

fn parse_theta(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("theta_")?;
    let (x, y) = rest.split_once('_')?;
    Some((x.parse().ok()?, y.parse().ok()?))
}

/// Posterior-mean table from HDM draws, indexed `[y][x]`.
pub fn cpt_estimate(chains: &ChainSet) -> Result<Vec<Vec<f64>>> {
    if chains.model != ModelTag::Hdm {
        return Err(Error::domain(format!("cpt_estimate needs HDM draws, got {}", chains.model.as_str())));
    }
    let cells: Vec<(usize, (usize, usize))> =
        chains.param_names.iter().enumerate().filter_map(|(j, n)| parse_theta(n).map(|c| (j, c))).collect();
    let k_x = cells.iter().map(|c| c.1 .0).max().unwrap_or(0);
    let k_y = cells.iter().map(|c| c.1 .1).max().unwrap_or(0);
    if k_x < 2 || k_y < 1 {
        return Err(Error::domain("chain set has no theta_x_y columns"));
    }
    let draws: Vec<&Vec<f64>> = chains.chains.iter().flat_map(|c| &c.draws).collect();
    if draws.is_empty() {
        return Err(Error::domain("chain set has no draws"));
    }
    let n = draws.len() as f64;
    let mut out = vec![vec![0.0; k_x]; k_y];
    for (j, (x, y)) in cells {
        out[y - 1][x - 1] = draws.iter().map(|r| r[j]).sum::<f64>() / n;
    }
    Ok(out)
}

/// Column-wise posterior means under independent `Dirichlet(½)` priors:
/// `(c_{x,y} + ½) / (n_y + k_X / 2)`, indexed `[y][x]`.
pub fn jeffreys_baseline(counts: &ContingencyCounts) -> Vec<Vec<f64>> {
    let k = counts.k_x() as f64;
    counts
        .columns
        .iter()
        .map(|col| {
            let n: f64 = col.iter().map(|&c| c as f64).sum();
            col.iter().map(|&c| (c as f64 + 0.5) / (n + k / 2.0)).collect()
        })
        .collect()
}

/// Draws a table of `per_column` observations in each column from `columns[y]`.
pub fn simulate_counts<R: Rng + ?Sized>(
    columns: &[Vec<f64>],
    per_column: u64,
    rng: &mut R,
) -> Result<ContingencyCounts> {
    let out = columns
        .iter()
        .map(|p| {
            let mut c = vec![0u64; p.len()];
            for _ in 0..per_column {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut idx = p.len() - 1;
                for (i, pi) in p.iter().enumerate() {
                    acc += pi;
                    if u < acc {
                        idx = i;
                        break;
                    }
                }
                c[idx] += 1;
            }
            c
        })
        .collect();
    ContingencyCounts::from_columns(out)
}
