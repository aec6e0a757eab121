use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::ObservedGroups;
use super::models::{
    closeness_in_chart, gelman_from_chart, gelman_in_chart, ln_sigmoid_jacobian, ClosenessModelConfig,
    CollapsedLikelihood, GelmanModelConfig, Model,
};
use crate::numerics::{ln_beta_unchecked, logit, rng_stream, sigmoid, StreamRng};
use crate::{Error, Result};

const TARGET_ACCEPTANCE: f64 = 0.35;

/// How hyperparameters see the group-level `θ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateScheme {
    /// Metropolis on the Beta-Binomial marginal; `θ_i` drawn only for output.
    #[default]
    Collapsed,
    /// Metropolis conditional on the current `θ_i`, alternating with Gibbs.
    Uncollapsed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub chains: usize,
    /// Total iterations per chain, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub proposal_scales: [f64; 2],
    pub adapt: bool,
    pub scheme: UpdateScheme,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            iterations: 10_000,
            burn_in: 2_000,
            seed: 20240101,
            proposal_scales: [0.3, 0.3],
            adapt: true,
            scheme: UpdateScheme::Collapsed,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::Config(format!("chains must be >= 2, got {}", self.chains)));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.proposal_scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config(format!("proposal scales must be positive, got {:?}", self.proposal_scales)));
        }
        Ok(())
    }

    pub fn kept(&self) -> usize {
        self.iterations - self.burn_in
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Closeness,
    Gelman,
    Hdm,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Closeness => "closeness",
            ModelTag::Gelman => "gelman",
            ModelTag::Hdm => "hdm",
        }
    }
}

/// Post-burn-in draws of one chain, one row per kept iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub draws: Vec<Vec<f64>>,
    /// Acceptance rate of each Metropolis coordinate after burn-in.
    pub acceptance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSet {
    pub model: ModelTag,
    pub param_names: Vec<String>,
    pub chains: Vec<Chain>,
    pub config: Option<SamplerConfig>,
}

impl ChainSet {
    pub fn new(model: ModelTag, param_names: Vec<String>, chains: Vec<Chain>) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::domain("a chain set needs at least one chain"));
        }
        for (index, c) in chains.iter().enumerate() {
            if let Some(row) = c.draws.iter().find(|r| r.len() != param_names.len()) {
                return Err(Error::Validation {
                    index,
                    reason: format!("row of length {} for {} parameters", row.len(), param_names.len()),
                });
            }
        }
        Ok(Self { model, param_names, chains, config: None })
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|p| p == name)
    }

    /// Per-chain draws of one parameter.
    pub fn column(&self, name: &str) -> Option<Vec<Vec<f64>>> {
        let j = self.param_index(name)?;
        Some(self.chains.iter().map(|c| c.draws.iter().map(|r| r[j]).collect()).collect())
    }

    /// Draws of one parameter with all chains concatenated in chain order.
    pub fn pooled(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name).map(|c| c.concat())
    }

    /// Per-chain values of `f` applied to each draw row.
    pub fn map_rows<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<Vec<f64>> {
        self.chains.iter().map(|c| c.draws.iter().map(|r| f(r)).collect()).collect()
    }

    pub fn draws_per_chain(&self) -> usize {
        self.chains.iter().map(|c| c.draws.len()).min().unwrap_or(0)
    }

    /// Long-form CSV: `chain,iter,<param_names>` with `iter` counted from 0
    /// after burn-in. Floats use the shortest representation that round-trips.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "chain,iter")?;
        for p in &self.param_names {
            write!(w, ",{p}")?;
        }
        writeln!(w)?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (i, row) in chain.draws.iter().enumerate() {
                write!(w, "{c},{i}")?;
                for v in row {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`ChainSet::write_csv`]. Acceptance rates and the config
    /// echo are not stored in the CSV and come back empty.
    pub fn read_csv<R: BufRead>(model: ModelTag, r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(Error::Parse { line: 1, reason: "empty input".into() })??;
        let cols: Vec<&str> = header.trim_end().split(',').collect();
        if cols.len() < 3 || cols[0] != "chain" || cols[1] != "iter" {
            return Err(Error::Parse { line: 1, reason: format!("unexpected header {header:?}") });
        }
        let names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
        let mut chains: Vec<Chain> = Vec::new();
        for (k, line) in lines.enumerate() {
            let line_no = k + 2;
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != names.len() + 2 {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected {} fields, found {}", names.len() + 2, fields.len()),
                });
            }
            let c: usize =
                fields[0].parse().map_err(|e| Error::Parse { line: line_no, reason: format!("chain: {e}") })?;
            if c > chains.len() {
                return Err(Error::Parse { line: line_no, reason: format!("chain {c} out of order") });
            }
            if c == chains.len() {
                chains.push(Chain { draws: Vec::new(), acceptance: Vec::new() });
            }
            let row = fields[2..]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: line_no, reason: e.to_string() })?;
            chains[c].draws.push(row);
        }
        Self::new(model, names, chains)
    }
}

/// A Metropolis-within-Gibbs target: random-walk updates on an
/// unconstrained vector `x`, interleaved with an auxiliary Gibbs block.
pub(crate) trait MwgTarget: Sync {
    type Aux;

    fn init(&self, chain: usize, rng: &mut StreamRng) -> (Vec<f64>, Self::Aux);
    fn log_density(&self, x: &[f64], aux: &Self::Aux) -> f64;
    fn gibbs(&self, x: &[f64], aux: &mut Self::Aux, rng: &mut StreamRng) -> Result<()>;
    fn row(&self, x: &[f64], aux: &Self::Aux) -> Vec<f64>;
}

pub(crate) struct EngineConfig<'a> {
    pub iterations: usize,
    pub burn_in: usize,
    pub scales: &'a [f64],
    pub adapt: bool,
}

pub(crate) fn run_chain<T: MwgTarget>(
    target: &T,
    cfg: &EngineConfig<'_>,
    chain: usize,
    rng: &mut StreamRng,
) -> Result<Chain> {
    let (mut x, mut aux) = target.init(chain, rng);
    let dim = x.len();
    let mut log_scale: Vec<f64> = cfg.scales.iter().map(|s| s.ln()).collect();
    let mut lp = target.log_density(&x, &aux);
    if !lp.is_finite() {
        return Err(Error::Sampler(format!("chain {chain}: initial state has log density {lp}")));
    }
    let mut accepted = vec![0usize; dim];
    let mut draws = Vec::with_capacity(cfg.iterations - cfg.burn_in);
    for t in 0..cfg.iterations {
        for k in 0..dim {
            let old = x[k];
            let z: f64 = rng.sample(StandardNormal);
            x[k] = old + log_scale[k].exp() * z;
            let lp_new = target.log_density(&x, &aux);
            let log_ratio = lp_new - lp;
            let accept_prob = if log_ratio >= 0.0 {
                1.0
            } else if log_ratio.is_nan() {
                0.0
            } else {
                log_ratio.exp()
            };
            let u: f64 = rng.random();
            if u < accept_prob {
                lp = lp_new;
                if t >= cfg.burn_in {
                    accepted[k] += 1;
                }
            } else {
                x[k] = old;
            }
            if cfg.adapt && t < cfg.burn_in {
                log_scale[k] += (accept_prob - TARGET_ACCEPTANCE) / ((t + 1) as f64).powf(0.6);
            }
        }
        target.gibbs(&x, &mut aux, rng)?;
        lp = target.log_density(&x, &aux);
        if t >= cfg.burn_in {
            draws.push(target.row(&x, &aux));
        }
    }
    let kept = (cfg.iterations - cfg.burn_in) as f64;
    let acceptance: Vec<f64> = accepted.iter().map(|&a| a as f64 / kept).collect();
    if let Some(k) = accepted.iter().position(|&a| a == 0) {
        return Err(Error::Sampler(format!(
            "chain {chain}: coordinate {k} accepted no proposals after burn-in (final scale {:.3e}, acceptance {acceptance:?})",
            log_scale[k].exp()
        )));
    }
    Ok(Chain { draws, acceptance })
}

/// Runs all chains in parallel, chain `c` on `rng_stream(seed, c)`.
pub(crate) fn run_chains<T: MwgTarget>(target: &T, cfg: &SamplerConfig, scales: &[f64]) -> Result<Vec<Chain>> {
    let engine = EngineConfig { iterations: cfg.iterations, burn_in: cfg.burn_in, scales, adapt: cfg.adapt };
    (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(target, &engine, c, &mut rng_stream(cfg.seed, c as u64)))
        .collect()
}

/// Keeps a draw strictly inside `(0, 1)`.
pub(crate) fn clamp_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Sufficient statistics of the current `θ` for the uncollapsed update.
pub(crate) struct ThetaState {
    theta: Vec<f64>,
    sum_ln: f64,
    sum_ln1m: f64,
}

impl ThetaState {
    fn new(theta: Vec<f64>) -> Self {
        let sum_ln = theta.iter().map(|t| t.ln()).sum();
        let sum_ln1m = theta.iter().map(|t| (-t).ln_1p()).sum();
        Self { theta, sum_ln, sum_ln1m }
    }

    fn ln_beta_sum(&self, a: f64, b: f64) -> f64 {
        (a - 1.0) * self.sum_ln + (b - 1.0) * self.sum_ln1m - self.theta.len() as f64 * ln_beta_unchecked(a, b)
    }
}

enum Family {
    Closeness(ClosenessModelConfig),
    Gelman(GelmanModelConfig),
}

struct BetaBinomialTarget<'a> {
    family: Family,
    data: &'a ObservedGroups,
    lik: CollapsedLikelihood,
    scheme: UpdateScheme,
}

impl BetaBinomialTarget<'_> {
    /// Beta parameters of the group-level prior at chart point `x`.
    fn beta_params(&self, x: &[f64]) -> (f64, f64) {
        match &self.family {
            Family::Closeness(c) => {
                let (mu, gamma) = (sigmoid(x[0]), x[1].exp());
                let o = c.base_measure.offset();
                (gamma * mu + o, gamma * (1.0 - mu) + o)
            }
            Family::Gelman(_) => gelman_from_chart(x[0], x[1]),
        }
    }

    fn hyper_row(&self, x: &[f64]) -> [f64; 2] {
        match &self.family {
            Family::Closeness(_) => [sigmoid(x[0]), x[1].exp()],
            Family::Gelman(_) => {
                let (a, b) = gelman_from_chart(x[0], x[1]);
                [a, b]
            }
        }
    }
}

impl MwgTarget for BetaBinomialTarget<'_> {
    type Aux = ThetaState;

    fn init(&self, chain: usize, rng: &mut StreamRng) -> (Vec<f64>, ThetaState) {
        let pooled = self.data.pooled_rate().clamp(0.02, 0.98);
        let spread = [-1.0, 1.0, -0.5, 0.5];
        let s = spread[chain % spread.len()];
        let u = logit(pooled) + 0.5 * s + rng.random_range(-0.1..0.1);
        let v = 10f64.ln() + s + rng.random_range(-0.1..0.1);
        let theta = self.data.groups().iter().map(|g| clamp_unit((g.y as f64 + 0.5) / (g.n as f64 + 1.0))).collect();
        (vec![u, v], ThetaState::new(theta))
    }

    fn log_density(&self, x: &[f64], aux: &ThetaState) -> f64 {
        match self.scheme {
            UpdateScheme::Collapsed => match &self.family {
                Family::Closeness(c) => closeness_in_chart(x[0], x[1], &self.lik, c),
                Family::Gelman(g) => gelman_in_chart(x[0], x[1], &self.lik, g),
            },
            UpdateScheme::Uncollapsed => {
                let (a, b) = self.beta_params(x);
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return f64::NEG_INFINITY;
                }
                let prior = match &self.family {
                    Family::Closeness(c) => {
                        let (mu, gamma) = (sigmoid(x[0]), x[1].exp());
                        if !(mu > 0.0 && mu < 1.0 && gamma > 0.0) {
                            return f64::NEG_INFINITY;
                        }
                        c.mu_prior.ln_pdf(mu) + c.gamma_prior.ln_pdf(gamma) + ln_sigmoid_jacobian(x[0]) + x[1]
                    }
                    Family::Gelman(g) => g.prior_exponent * (a + b).ln() + a.ln() + b.ln(),
                };
                prior + aux.ln_beta_sum(a, b)
            }
        }
    }

    fn gibbs(&self, x: &[f64], aux: &mut ThetaState, rng: &mut StreamRng) -> Result<()> {
        let (a, b) = self.beta_params(x);
        let theta = self
            .data
            .groups()
            .iter()
            .map(|g| {
                Beta::new(a + g.y as f64, b + (g.n - g.y) as f64)
                    .map(|d| clamp_unit(d.sample(rng)))
                    .map_err(|e| Error::Sampler(format!("theta update at a = {a}, b = {b}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        *aux = ThetaState::new(theta);
        Ok(())
    }

    fn row(&self, x: &[f64], aux: &ThetaState) -> Vec<f64> {
        let mut row = Vec::with_capacity(2 + aux.theta.len());
        row.extend_from_slice(&self.hyper_row(x));
        row.extend_from_slice(&aux.theta);
        row
    }
}

/// Metropolis-within-Gibbs for the closeness or Gelman model.
///
/// Output columns are `mu, gamma` (closeness) or `alpha, beta` (Gelman),
/// followed by `theta_1..theta_m`.
pub fn run_sampler(model: &Model, data: &ObservedGroups, cfg: &SamplerConfig) -> Result<ChainSet> {
    model.validate()?;
    cfg.validate()?;
    let (family, tag, names) = match model {
        Model::Closeness(c) => (Family::Closeness(*c), ModelTag::Closeness, ["mu", "gamma"]),
        Model::Gelman(g) => (Family::Gelman(*g), ModelTag::Gelman, ["alpha", "beta"]),
    };
    let target = BetaBinomialTarget { family, data, lik: CollapsedLikelihood::new(data), scheme: cfg.scheme };
    let chains = run_chains(&target, cfg, &cfg.proposal_scales)?;
    let mut param_names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    param_names.extend((1..=data.len()).map(|i| format!("theta_{i}")));
    let mut set = ChainSet::new(tag, param_names, chains)?;
    set.config = Some(cfg.clone());
    Ok(set)
}
