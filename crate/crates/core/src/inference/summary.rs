use serde::{Deserialize, Serialize};

use super::data::ObservedGroups;
use super::diagnostics::split_rhat;
use super::models::{ClosenessModelConfig, Model};
use super::sampler::{run_sampler, ChainSet, SamplerConfig};
use crate::{Error, Result};

pub const SUMMARY_PROBS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub sd: f64,
    /// Quantiles at [`SUMMARY_PROBS`].
    pub quantiles: [f64; 5],
}

impl ParamSummary {
    pub fn median(&self) -> f64 {
        self.quantiles[2]
    }

    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("cannot summarize an empty sample"));
        }
        let n = values.len() as f64;
        let first = values[0];
        let mean = first + values.iter().map(|v| v - first).sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantiles = SUMMARY_PROBS.map(|p| quantile_sorted(&sorted, p));
        Ok(Self { mean, sd, quantiles })
    }
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Linearly interpolated sample quantile (Hyndman–Fan type 7).
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, p))
}

/// Summaries over pooled post-burn-in draws, in parameter order.
pub fn posterior_summary(chains: &ChainSet) -> Result<Vec<(String, ParamSummary)>> {
    if chains.chains.iter().all(|c| c.draws.is_empty()) {
        return Err(Error::domain("chain set has no draws"));
    }
    chains
        .param_names
        .iter()
        .map(|name| {
            let pooled = chains.pooled(name).unwrap_or_default();
            ParamSummary::of(&pooled).map(|s| (name.clone(), s))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub rate: f64,
    pub mu: ParamSummary,
    pub gamma: ParamSummary,
    pub rhat_mu: Option<f64>,
    pub rhat_gamma: Option<f64>,
}

/// Refits the closeness model under `Gamma(shape, rate)` for every rate,
/// reusing the sampler seed so rows differ only through the prior.
pub fn sensitivity_sweep(
    data: &ObservedGroups,
    rates: &[f64],
    base: &ClosenessModelConfig,
    sampler: &SamplerConfig,
) -> Result<Vec<SensitivityRow>> {
    if rates.is_empty() {
        return Err(Error::Config("no gamma prior rates given".into()));
    }
    rates
        .iter()
        .map(|&rate| {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::Config(format!("gamma prior rate must be > 0, got {rate}")));
            }
            let model = Model::Closeness(base.with_gamma_rate(rate));
            let annotate = |e: Error| match e {
                Error::Sampler(m) => Error::Sampler(format!("rate {rate}: {m}")),
                Error::Numeric(m) => Error::Numeric(format!("rate {rate}: {m}")),
                Error::Config(m) => Error::Config(format!("rate {rate}: {m}")),
                other => other,
            };
            let set = run_sampler(&model, data, sampler).map_err(annotate)?;
            let mu = set.column("mu").expect("closeness chains carry mu");
            let gamma = set.column("gamma").expect("closeness chains carry gamma");
            Ok(SensitivityRow {
                rate,
                mu: ParamSummary::of(&mu.concat())?,
                gamma: ParamSummary::of(&gamma.concat())?,
                rhat_mu: split_rhat(&mu),
                rhat_gamma: split_rhat(&gamma),
            })
        })
        .collect()
}
