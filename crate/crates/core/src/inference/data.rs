use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::closeness::BaseMeasure;
use crate::{Error, Result};

/// `y` successes out of `n` trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group {
    pub y: u64,
    pub n: u64,
}

/// Grouped binomial observations, at least one group, `0 ≤ y ≤ n`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedGroups {
    groups: Vec<Group>,
    labels: Option<Vec<String>>,
}

impl ObservedGroups {
    pub fn new(groups: Vec<Group>, labels: Option<Vec<String>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::domain("at least one group is required"));
        }
        for (index, g) in groups.iter().enumerate() {
            if g.n == 0 {
                return Err(Error::Validation { index, reason: "group has n = 0 trials".into() });
            }
            if g.y > g.n {
                return Err(Error::Validation { index, reason: format!("y = {} exceeds n = {}", g.y, g.n) });
            }
        }
        if let Some(l) = &labels {
            if l.len() != groups.len() {
                return Err(Error::domain(format!("{} labels for {} groups", l.len(), groups.len())));
            }
        }
        Ok(Self { groups, labels })
    }

    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(y, n)| Group { y, n }).collect(), None)
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Pooled success fraction `Σy / Σn`.
    pub fn pooled_rate(&self) -> f64 {
        let (y, n) = self.groups.iter().fold((0u64, 0u64), |(a, b), g| (a + g.y, b + g.n));
        y as f64 / n as f64
    }

    /// Swaps successes and failures in every group.
    pub fn mirrored(&self) -> Self {
        Self {
            groups: self.groups.iter().map(|g| Group { y: g.n - g.y, n: g.n }).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Draws `groups` groups of `trials` each from the closeness model at a
/// known `(μ, γ)`.
pub fn simulate_groups<R: Rng + ?Sized>(
    mu: f64,
    gamma: f64,
    base: BaseMeasure,
    groups: usize,
    trials: u64,
    rng: &mut R,
) -> Result<ObservedGroups> {
    let o = base.offset();
    let beta = Beta::new(gamma * mu + o, gamma * (1.0 - mu) + o)
        .map_err(|e| Error::domain(format!("invalid simulation parameters: {e}")))?;
    let out = (0..groups)
        .map(|_| {
            let theta: f64 = beta.sample(rng);
            let y = Binomial::new(trials, theta).expect("theta is a probability").sample(rng);
            Group { y, n: trials }
        })
        .collect();
    ObservedGroups::new(out, None)
}
