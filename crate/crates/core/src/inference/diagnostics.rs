use serde::{Deserialize, Serialize};

use super::sampler::ChainSet;
use crate::{Error, Result};

const MIN_CHAINS: usize = 2;
const MIN_DRAWS: usize = 100;

/// Convergence diagnostics of one scalar parameter. `None` marks a value
/// that is undefined for the input, e.g. perfectly constant chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub name: String,
    pub split_rhat: Option<f64>,
    pub ess: Option<f64>,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn is_constant(chains: &[&[f64]]) -> bool {
    let first = chains.iter().find_map(|c| c.first().copied());
    chains.iter().all(|c| c.iter().all(|v| Some(*v) == first))
}

fn split(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0) / 2;
    chains.iter().flat_map(|c| [&c[..n], &c[n..2 * n]]).collect()
}

/// Split-R̂: every chain is halved and the potential scale reduction is
/// computed over the halves. Returns `None` when within-chain variance is zero.
pub fn split_rhat(chains: &[Vec<f64>]) -> Option<f64> {
    let halves = split(chains);
    let n = halves.first()?.len();
    if halves.len() < 2 || n < 2 || is_constant(&halves) {
        return None;
    }
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = mean(&halves.iter().map(|h| variance(h)).collect::<Vec<_>>());
    if w.is_nan() || w <= 0.0 {
        return None;
    }
    let b = n as f64 * variance(&means);
    let var_plus = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    Some((var_plus / w).sqrt())
}

/// Multi-chain effective sample size using Geyer's initial positive
/// sequence on the combined autocorrelation estimate.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Option<f64> {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min()?;
    if m == 0 || n < 4 {
        return None;
    }
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    if is_constant(&chains) {
        return None;
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let w = mean(&chains.iter().map(|c| variance(c)).collect::<Vec<_>>());
    if w.is_nan() || w <= 0.0 {
        return None;
    }
    let b_over_n = if m > 1 { variance(&means) } else { 0.0 };
    let var_plus = (n as f64 - 1.0) / n as f64 * w + b_over_n;

    let autocov = |lag: usize| -> f64 {
        chains
            .iter()
            .zip(&means)
            .map(|(c, mu)| (0..n - lag).map(|i| (c[i] - mu) * (c[i + lag] - mu)).sum::<f64>() / n as f64)
            .sum::<f64>()
            / m as f64
    };
    let rho = |lag: usize| 1.0 - (w * (n as f64 - 1.0) / n as f64 - autocov(lag)) / var_plus;

    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let pair = rho(t) + rho(t + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        t += 2;
    }
    let tau = tau.max(1.0 / ((m * n) as f64).log10());
    Some(m as f64 * n as f64 / tau)
}

/// Split-R̂ and ESS for every parameter of a chain set.
pub fn diagnostics(chains: &ChainSet) -> Result<Vec<ParamDiagnostics>> {
    if chains.chains.len() < MIN_CHAINS {
        return Err(Error::domain(format!("diagnostics need >= {MIN_CHAINS} chains, got {}", chains.chains.len())));
    }
    let n = chains.draws_per_chain();
    if n < MIN_DRAWS {
        return Err(Error::domain(format!("diagnostics need >= {MIN_DRAWS} draws per chain, got {n}")));
    }
    Ok(chains
        .param_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let cols: Vec<Vec<f64>> = chains.chains.iter().map(|c| c.draws.iter().map(|r| r[j]).collect()).collect();
            ParamDiagnostics { name: name.clone(), split_rhat: split_rhat(&cols), ess: effective_sample_size(&cols) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::sampler::{Chain, ModelTag};
    use crate::numerics::rng_stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn noise(chains: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..chains)
            .map(|c| {
                let mut rng = rng_stream(seed, c as u64);
                (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
            })
            .collect()
    }

    #[test]
    fn iid_noise_is_converged() {
        let x = noise(4, 2000, 11);
        let r = split_rhat(&x).unwrap();
        assert!((0.99..=1.01).contains(&r), "{r}");
        let ess = effective_sample_size(&x).unwrap();
        assert!(ess > 5000.0 && ess < 12000.0, "{ess}");
    }

    #[test]
    fn offset_chain_is_flagged() {
        let mut x = noise(4, 1000, 12);
        x[2].iter_mut().for_each(|v| *v += 10.0);
        assert!(split_rhat(&x).unwrap() > 1.5);
    }

    #[test]
    fn autocorrelated_chain_has_lower_ess() {
        let e = noise(2, 4000, 13);
        let ar: Vec<Vec<f64>> = e
            .iter()
            .map(|c| {
                let mut prev = 0.0;
                c.iter()
                    .map(|v| {
                        prev = 0.9 * prev + v;
                        prev
                    })
                    .collect()
            })
            .collect();
        // AR(1) with φ = 0.9 has τ = (1 + φ)/(1 − φ) = 19
        let ess = effective_sample_size(&ar).unwrap();
        assert!(ess > 8000.0 / 19.0 * 0.6 && ess < 8000.0 / 19.0 * 1.6, "{ess}");
    }

    #[test]
    fn constant_chains_are_undefined() {
        let x = vec![vec![0.3; 200]; 3];
        assert_eq!(split_rhat(&x), None);
        assert_eq!(effective_sample_size(&x), None);
        let set = ChainSet::new(
            ModelTag::Closeness,
            vec!["mu".into()],
            (0..2).map(|_| Chain { draws: vec![vec![0.3]; 150], acceptance: vec![] }).collect(),
        )
        .unwrap();
        let d = diagnostics(&set).unwrap();
        assert_eq!(d[0].split_rhat, None);
        assert_eq!(d[0].ess, None);
    }

    #[test]
    fn insufficient_input() {
        let one = ChainSet::new(
            ModelTag::Closeness,
            vec!["mu".into()],
            vec![Chain { draws: vec![vec![0.3]; 500], acceptance: vec![] }],
        )
        .unwrap();
        assert!(diagnostics(&one).is_err());
        let short = ChainSet::new(
            ModelTag::Closeness,
            vec!["mu".into()],
            (0..2).map(|_| Chain { draws: vec![vec![0.3]; 50], acceptance: vec![] }).collect(),
        )
        .unwrap();
        assert!(diagnostics(&short).is_err());
    }
}
