//! Deterministic quadrature over `M_1` and `M_2` under the Fisher measure.
//!
//! Grids live in the angular chart given by the isometry of `M_n` with the
//! positive orthant of the radius-2 sphere, where the Fisher measure has a
//! bounded density:
//!
//! * `n = 1`: `θ = (sin²φ, cos²φ)`, `dμ_g = 2 dφ`, `φ ∈ (0, π/2)`.
//! * `n = 2`: `θ = (sin²a cos²b, sin²a sin²b, cos²a)`, `dμ_g = 4 sin a da db`.
//!
//! The integrable `θ_i^{-1/2}` singularity of `√|G(θ)|` therefore never
//! reaches the grid. Both angle axes are inset by `boundary_inset` at each end.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closeness::{BaseMeasure, RemotenessSpec};
use crate::manifold::{fisher_log_sqrt_det, kl_unchecked, SimplexPoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Midpoint,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub points_per_axis: usize,
    pub boundary_inset: f64,
    pub scheme: Scheme,
}

impl QuadratureConfig {
    /// 2001 points per axis for `n = 1`, 401 otherwise; midpoint; inset 1e-8.
    pub fn default_for(n: usize) -> Self {
        Self { points_per_axis: if n == 1 { 2001 } else { 401 }, boundary_inset: 1e-8, scheme: Scheme::Midpoint }
    }

    pub fn with_points(mut self, points_per_axis: usize) -> Self {
        self.points_per_axis = points_per_axis;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis < 11 {
            return Err(Error::Config(format!("points_per_axis must be at least 11, got {}", self.points_per_axis)));
        }
        if !(self.boundary_inset > 0.0 && self.boundary_inset < 1e-3) {
            return Err(Error::Config(format!("boundary_inset must lie in (0, 1e-3), got {}", self.boundary_inset)));
        }
        Ok(())
    }

    fn axis(&self) -> Vec<(f64, f64)> {
        let lo = self.boundary_inset;
        let hi = FRAC_PI_2 - self.boundary_inset;
        let n = self.points_per_axis;
        match self.scheme {
            Scheme::Midpoint => {
                let h = (hi - lo) / n as f64;
                (0..n).map(|i| (lo + (i as f64 + 0.5) * h, h)).collect()
            }
            Scheme::Trapezoid => {
                let h = (hi - lo) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                        (lo + i as f64 * h, w)
                    })
                    .collect()
            }
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension { n, supported: "1 or 2" })
    }
}

/// Nodes of a Fisher-measure quadrature rule, grouped in rows so that
/// parallel evaluation can reduce in a fixed order.
#[derive(Debug, Clone)]
pub struct FisherGrid {
    rows: Vec<Vec<(SimplexPoint, f64)>>,
}

impl FisherGrid {
    pub fn new(n: usize, cfg: &QuadratureConfig) -> Result<Self> {
        check_dim(n)?;
        cfg.validate()?;
        let axis = cfg.axis();
        let rows = if n == 1 {
            // one row per block of nodes keeps the reduction tree shallow
            axis.chunks(64)
                .map(|chunk| {
                    chunk
                        .iter()
                        .map(|&(phi, w)| {
                            let (s, c) = phi.sin_cos();
                            (SimplexPoint::from_normalized(vec![s * s, c * c]), 2.0 * w)
                        })
                        .collect()
                })
                .collect()
        } else {
            axis.iter()
                .map(|&(a, wa)| {
                    let (sa, ca) = a.sin_cos();
                    axis.iter()
                        .map(|&(b, wb)| {
                            let (sb, cb) = b.sin_cos();
                            let coords = vec![sa * sa * cb * cb, sa * sa * sb * sb, ca * ca];
                            (SimplexPoint::from_normalized(coords), 4.0 * sa * wa * wb)
                        })
                        .collect()
                })
                .collect()
        };
        Ok(Self { rows })
    }

    pub fn nodes(&self) -> impl Iterator<Item = &(SimplexPoint, f64)> {
        self.rows.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Σ w_k f(θ_k)`; bit-identical regardless of thread count.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&SimplexPoint) -> f64 + Sync,
    {
        let row_sums: Vec<Result<f64>> = self
            .rows
            .par_iter()
            .map(|row| {
                let mut acc = 0.0;
                for (theta, w) in row {
                    let v = f(theta);
                    if !v.is_finite() {
                        return Err(Error::Numeric(format!("integrand is {v} at node {:?}", theta.coords())));
                    }
                    acc += w * v;
                }
                Ok(acc)
            })
            .collect();
        let row_sums = row_sums.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(pairwise_sum(&row_sums))
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// `∫ f(θ) dμ_g = ∫ f(θ) √|G(θ)| dθ` over the open simplex, `n ∈ {1, 2}`.
pub fn integrate_simplex_fisher<F>(f: F, n: usize, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(&SimplexPoint) -> f64 + Sync,
{
    FisherGrid::new(n, cfg)?.integrate(f)
}

/// `∫ f(θ) dθ` against the Lebesgue measure of the expectation chart,
/// evaluated on the same angular grid.
pub fn integrate_simplex_lebesgue<F>(f: F, n: usize, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(&SimplexPoint) -> f64 + Sync,
{
    FisherGrid::new(n, cfg)?.integrate(|t| f(t) * (-fisher_log_sqrt_det(t)).exp())
}

/// `Z = ∫∫ exp(−γ D(μ‖θ))` under the product of `spec.base_measure()`.
///
/// The cost is quadratic in the number of grid nodes; for `n = 2` keep
/// `points_per_axis` small (the default 401 means ~2.6e10 evaluations).
pub fn closeness_normalizer(spec: &RemotenessSpec, cfg: &QuadratureConfig) -> Result<f64> {
    let grid = FisherGrid::new(spec.n(), cfg)?;
    let gamma = spec.gamma();
    let lebesgue = spec.base_measure() == BaseMeasure::Lebesgue;
    let inv_sqrt_g = |t: &SimplexPoint| {
        if lebesgue {
            (-fisher_log_sqrt_det(t)).exp()
        } else {
            1.0
        }
    };
    grid.integrate(|mu| {
        let inner: f64 = grid
            .nodes()
            .map(|(theta, w)| w * inv_sqrt_g(theta) * (-gamma * kl_unchecked(mu.coords(), theta.coords())).exp())
            .sum();
        inner * inv_sqrt_g(mu)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ln_multivariate_beta_unchecked, DistributionSpec, Point};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn volumes() {
        let v1 = integrate_simplex_fisher(|_| 1.0, 1, &QuadratureConfig::default_for(1)).unwrap();
        assert_relative_eq!(v1, PI, max_relative = 1e-3);
        let v2 = integrate_simplex_fisher(|_| 1.0, 2, &QuadratureConfig::default_for(2)).unwrap();
        assert_relative_eq!(v2, 2.0 * PI, max_relative = 5e-3);
    }

    #[test]
    fn type_one_dirichlet_integral() {
        // ∫ θ^μ (1-θ)^(1-μ) dμ_g = B(μ + 1/2) = B(1, 1) = 1 at μ = 1/2
        let got = integrate_simplex_fisher(
            |t| t.coords().iter().map(|x| x.sqrt()).product(),
            1,
            &QuadratureConfig::default_for(1),
        )
        .unwrap();
        assert_relative_eq!(got, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn dirichlet_integration_densities_integrate_to_one() {
        for alpha in [vec![0.6, 0.6], vec![2.0, 3.0], vec![1.5, 1.5, 1.5]] {
            let n = alpha.len() - 1;
            let dist = DistributionSpec::dirichlet(alpha.clone()).unwrap();
            // intrinsic density p = ρ / √|G|
            let total = integrate_simplex_fisher(
                |t| (dist.log_density(Point::Vector(t.coords())).unwrap() - fisher_log_sqrt_det(t)).exp(),
                n,
                &QuadratureConfig::default_for(n),
            )
            .unwrap();
            assert_relative_eq!(total, 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn refinement_converges() {
        let f = |t: &SimplexPoint| t.coords()[0].powf(0.3) * t.coords()[1].powf(1.7);
        for n in [1, 2] {
            let base = QuadratureConfig::default_for(n).with_points(if n == 1 { 501 } else { 101 });
            let coarse = integrate_simplex_fisher(f, n, &base).unwrap();
            let fine = integrate_simplex_fisher(f, n, &base.with_points(base.points_per_axis * 2)).unwrap();
            assert!(((coarse - fine) / fine).abs() < 1e-3, "n={n}: {coarse} vs {fine}");
        }
    }

    #[test]
    fn schemes_agree() {
        let f = |t: &SimplexPoint| (-3.0 * kl_unchecked(&[0.3, 0.7], t.coords())).exp();
        let mid = QuadratureConfig::default_for(1);
        let trap = QuadratureConfig { scheme: Scheme::Trapezoid, ..mid };
        let a = integrate_simplex_fisher(f, 1, &mid).unwrap();
        let b = integrate_simplex_fisher(f, 1, &trap).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-6);
        // exp(-3 D) = ∏θ^(3μ) ∏μ^(-3μ), integral = ∏μ^(-3μ) B(3μ + 1/2)
        let mu = [0.3_f64, 0.7];
        let exact =
            (ln_multivariate_beta_unchecked(&[1.4, 2.6]) - 3.0 * mu.iter().map(|m| m * m.ln()).sum::<f64>()).exp();
        assert_relative_eq!(a, exact, max_relative = 1e-6);
    }

    #[test]
    fn lebesgue_integral_of_one_is_simplex_area() {
        let got = integrate_simplex_lebesgue(|_| 1.0, 1, &QuadratureConfig::default_for(1)).unwrap();
        assert_relative_eq!(got, 1.0, max_relative = 1e-6);
        let got = integrate_simplex_lebesgue(|_| 1.0, 2, &QuadratureConfig::default_for(2)).unwrap();
        assert_relative_eq!(got, 0.5, max_relative = 1e-4);
    }

    #[test]
    fn config_and_dimension_errors() {
        let mut cfg = QuadratureConfig::default_for(1);
        cfg.points_per_axis = 10;
        assert!(matches!(integrate_simplex_fisher(|_| 1.0, 1, &cfg), Err(Error::Config(_))));
        let cfg = QuadratureConfig { boundary_inset: 1e-2, ..QuadratureConfig::default_for(1) };
        assert!(cfg.validate().is_err());
        assert!(matches!(
            integrate_simplex_fisher(|_| 1.0, 3, &QuadratureConfig::default_for(3)),
            Err(Error::UnsupportedDimension { n: 3, .. })
        ));
        let err = integrate_simplex_fisher(|_| f64::NAN, 1, &QuadratureConfig::default_for(1)).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn deterministic_across_calls() {
        let f = |t: &SimplexPoint| t.coords()[0].ln().abs();
        let cfg = QuadratureConfig::default_for(2).with_points(151);
        let a = integrate_simplex_fisher(f, 2, &cfg).unwrap();
        let b = integrate_simplex_fisher(f, 2, &cfg).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
