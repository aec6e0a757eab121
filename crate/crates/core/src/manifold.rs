//! The multinomial manifold `M_n`: discrete distributions over `n + 1` atoms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::ln_gamma_unchecked;
use crate::{Error, Result};

/// Default tolerance on `|Σ coords − 1|` accepted by [`SimplexPoint::new`].
pub const DEFAULT_SUM_TOL: f64 = 1e-9;

/// A point of the open simplex: `n + 1 ≥ 2` strictly positive coordinates
/// summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Validates positivity and the sum (within `tol`) and renormalizes.
    pub fn new(coords: Vec<f64>, tol: f64) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Validation {
                index: coords.len(),
                reason: "a simplex point needs at least 2 coordinates".into(),
            });
        }
        for (index, &c) in coords.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Validation { index, reason: format!("coordinate {c} is not strictly positive") });
            }
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::Validation {
                index: coords.len() - 1,
                reason: format!("coordinates sum to {sum}, outside 1 ± {tol}"),
            });
        }
        let coords = coords.into_iter().map(|c| c / sum).collect();
        Ok(Self { coords })
    }

    /// Binary point `(p, 1 − p)`.
    pub fn binary(p: f64) -> Result<Self> {
        Self::new(vec![p, 1.0 - p], DEFAULT_SUM_TOL)
    }

    /// The barycenter `(1/(n+1), …)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("manifold dimension must be at least 1"));
        }
        Ok(Self { coords: vec![1.0 / (n as f64 + 1.0); n + 1] })
    }

    pub(crate) fn from_normalized(coords: Vec<f64>) -> Self {
        debug_assert!(coords.len() >= 2 && coords.iter().all(|c| *c > 0.0));
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Manifold dimension `n` (number of atoms minus one).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords, DEFAULT_SUM_TOL)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.coords
    }
}

/// `D(μ‖θ) = Σ μ_i ln(μ_i / θ_i)`; the first argument carries the weights.
pub fn kl_divergence(mu: &SimplexPoint, theta: &SimplexPoint) -> Result<f64> {
    if mu.coords.len() != theta.coords.len() {
        return Err(Error::domain(format!("KL between points of dimension {} and {}", mu.dim(), theta.dim())));
    }
    Ok(kl_unchecked(&mu.coords, &theta.coords))
}

pub(crate) fn kl_unchecked(mu: &[f64], theta: &[f64]) -> f64 {
    let d: f64 = mu.iter().zip(theta).map(|(m, t)| m * (m / t).ln()).sum();
    d.max(0.0)
}

/// KL with the `0 · ln 0 = 0` convention, for limits at the boundary where
/// `μ` has zero coordinates. `θ` must stay interior.
pub(crate) fn kl_boundary_limit(mu: &[f64], theta: &[f64]) -> f64 {
    mu.iter().zip(theta).filter(|(m, _)| **m > 0.0).map(|(m, t)| m * (m / t).ln()).sum::<f64>().max(0.0)
}

/// `ln √|G(θ)| = −½ Σ ln θ_i` for the Fisher metric in expectation coordinates.
pub fn fisher_log_sqrt_det(theta: &SimplexPoint) -> f64 {
    -0.5 * theta.coords.iter().map(|t| t.ln()).sum::<f64>()
}

/// `Vol(M_n) = π^((n+1)/2) / Γ((n+1)/2)`, the area of the positive orthant
/// of the radius-2 sphere `S_n`.
pub fn manifold_volume(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("manifold dimension must be at least 1"));
    }
    let h = (n as f64 + 1.0) / 2.0;
    Ok((h * PI.ln() - ln_gamma_unchecked(h)).exp())
}

/// `(n, Vol(M_n))` for `n = 1..=max_n`.
pub fn volume_table(max_n: usize) -> Result<Vec<(usize, f64)>> {
    (1..=max_n).map(|n| manifold_volume(n).map(|v| (n, v))).collect()
}

/// Dimension `n` maximizing `Vol(M_n)` over `1..=max_n`.
///
/// The closed form peaks at `n = 6` (about 16.54). Indexed by the number
/// of atoms `n + 1`, the same peak sits at 7.
pub fn volume_argmax(max_n: usize) -> Result<usize> {
    let table = volume_table(max_n)?;
    table
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(n, _)| n)
        .ok_or_else(|| Error::domain("empty volume table"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(c: &[f64]) -> SimplexPoint {
        SimplexPoint::new(c.to_vec(), DEFAULT_SUM_TOL).unwrap()
    }

    #[test]
    fn construction() {
        let p = pt(&[0.5, 0.5]);
        assert_eq!(p.dim(), 1);
        let q = SimplexPoint::new(vec![0.2, 0.3, 0.500_000_000_1], 1e-9).unwrap();
        assert!((q.coords().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        match SimplexPoint::new(vec![0.0, 1.0], 1e-9) {
            Err(Error::Validation { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected validation error, got {other:?}"),
        }
        assert!(SimplexPoint::new(vec![0.3, 0.3], 1e-9).is_err());
        assert!(SimplexPoint::new(vec![1.0], 1e-9).is_err());
        assert!(SimplexPoint::new(vec![0.5, f64::NAN], 1e-9).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&pt(&[0.5, 0.5]), &pt(&[0.5, 0.5])).unwrap(), 0.0);
        // 0.25 ln 0.5 + 0.75 ln 1.5
        let a = 0.25 * 0.5_f64.ln() + 0.75 * 1.5_f64.ln();
        assert_relative_eq!(kl_divergence(&pt(&[0.25, 0.75]), &pt(&[0.5, 0.5])).unwrap(), a, max_relative = 1e-14);
        assert_relative_eq!(a, 0.130_812_0, epsilon = 1e-7);
        // 0.5 ln 2 + 0.5 ln(2/3)
        let b = 0.5 * 2.0_f64.ln() + 0.5 * (2.0_f64 / 3.0).ln();
        assert_relative_eq!(kl_divergence(&pt(&[0.5, 0.5]), &pt(&[0.25, 0.75])).unwrap(), b, max_relative = 1e-14);
        assert_relative_eq!(b, 0.143_841_0, epsilon = 1e-7);
        assert!(kl_divergence(&pt(&[0.5, 0.5]), &pt(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn fisher_factor_examples() {
        assert_relative_eq!(fisher_log_sqrt_det(&pt(&[0.5, 0.5])), 2.0_f64.ln(), max_relative = 1e-14);
        let third = 1.0 / 3.0;
        assert_relative_eq!(fisher_log_sqrt_det(&pt(&[third, third, third])), 1.5 * 3.0_f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(fisher_log_sqrt_det(&pt(&[0.25, 0.75])), 0.836_988_2, epsilon = 1e-7);
    }

    #[test]
    fn fisher_factor_minimized_at_uniform() {
        let at_uniform = fisher_log_sqrt_det(&SimplexPoint::uniform(1).unwrap());
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!(fisher_log_sqrt_det(&SimplexPoint::binary(p).unwrap()) >= at_uniform - 1e-15);
        }
        let at_uniform = fisher_log_sqrt_det(&SimplexPoint::uniform(2).unwrap());
        for i in 1..100 {
            for j in 1..(100 - i) {
                let (a, b) = (i as f64 / 100.0, j as f64 / 100.0);
                let p = SimplexPoint::new(vec![a, b, 1.0 - a - b], 1e-9).unwrap();
                assert!(fisher_log_sqrt_det(&p) >= at_uniform - 1e-15);
            }
        }
    }

    #[test]
    fn volume_examples() {
        use std::f64::consts::PI;
        assert_relative_eq!(manifold_volume(1).unwrap(), PI, max_relative = 1e-13);
        assert_relative_eq!(manifold_volume(2).unwrap(), 2.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(manifold_volume(7).unwrap(), PI.powi(4) / 6.0, max_relative = 1e-13);
        assert!(manifold_volume(0).is_err());
    }

    #[test]
    fn volume_peaks_at_six() {
        assert_eq!(volume_argmax(12).unwrap(), 6);
        let v6 = manifold_volume(6).unwrap();
        let v7 = manifold_volume(7).unwrap();
        assert!(v6 > v7);
        assert_relative_eq!(v6, 16.536_8, epsilon = 1e-3);
    }

    #[test]
    fn serde_validates() {
        let p: SimplexPoint = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(p.coords(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<SimplexPoint>("[0.0, 1.0]").is_err());
    }
}
