//! Special functions, log densities and seeded random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the series argument away from zero.
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// `ln B(α) = Σ ln Γ(α_i) − ln Γ(Σ α_i)`.
pub fn log_multivariate_beta(alpha: &[f64]) -> Result<f64> {
    if alpha.len() < 2 {
        return Err(Error::domain(format!("multivariate Beta needs at least 2 entries, got {}", alpha.len())));
    }
    if let Some((i, a)) = alpha.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::domain(format!("alpha[{i}] = {a} is not a positive finite number")));
    }
    Ok(ln_multivariate_beta_unchecked(alpha))
}

pub(crate) fn ln_multivariate_beta_unchecked(alpha: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut acc = 0.0;
    for &a in alpha {
        acc += ln_gamma_unchecked(a);
        total += a;
    }
    acc - ln_gamma_unchecked(total)
}

pub(crate) fn ln_beta_unchecked(a: f64, b: f64) -> f64 {
    ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
}

pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma_unchecked(n as f64 + 1.0) - ln_gamma_unchecked(k as f64 + 1.0) - ln_gamma_unchecked((n - k) as f64 + 1.0)
}

/// `ln Σ exp(x_i)`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// A parametric family with validated parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Beta {
        a: f64,
        b: f64,
    },
    Dirichlet {
        alpha: Vec<f64>,
    },
    /// Shape/rate parameterization: mean is `shape / rate`.
    Gamma {
        shape: f64,
        rate: f64,
    },
    Binomial {
        trials: u64,
        p: f64,
    },
    BetaBinomial {
        trials: u64,
        a: f64,
        b: f64,
    },
}

/// Argument of [`DistributionSpec::log_density`].
#[derive(Debug, Clone, Copy)]
pub enum Point<'a> {
    Real(f64),
    Vector(&'a [f64]),
    Count(u64),
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl DistributionSpec {
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        check_positive("Beta a", a)?;
        check_positive("Beta b", b)?;
        Ok(Self::Beta { a, b })
    }

    pub fn dirichlet(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::domain("Dirichlet needs at least 2 concentration parameters"));
        }
        for (i, a) in alpha.iter().enumerate() {
            check_positive(&format!("Dirichlet alpha[{i}]"), *a)?;
        }
        Ok(Self::Dirichlet { alpha })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        check_positive("Gamma shape", shape)?;
        check_positive("Gamma rate", rate)?;
        Ok(Self::Gamma { shape, rate })
    }

    pub fn binomial(trials: u64, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("Binomial p must lie in (0, 1), got {p}")));
        }
        Ok(Self::Binomial { trials, p })
    }

    pub fn beta_binomial(trials: u64, a: f64, b: f64) -> Result<Self> {
        check_positive("BetaBinomial a", a)?;
        check_positive("BetaBinomial b", b)?;
        Ok(Self::BetaBinomial { trials, a, b })
    }

    /// Re-runs the constructor checks; variants are public so a value may
    /// have been built by hand.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Beta { a, b } => Self::beta(*a, *b).map(drop),
            Self::Dirichlet { alpha } => Self::dirichlet(alpha.clone()).map(drop),
            Self::Gamma { shape, rate } => Self::gamma(*shape, *rate).map(drop),
            Self::Binomial { trials, p } => Self::binomial(*trials, *p).map(drop),
            Self::BetaBinomial { trials, a, b } => Self::beta_binomial(*trials, *a, *b).map(drop),
        }
    }

    /// Log pdf (continuous kinds) or log pmf (count kinds).
    ///
    /// Points on the boundary or outside the support are a domain error,
    /// never `-inf`. Dirichlet is evaluated with respect to the Lebesgue
    /// measure of the first `k - 1` expectation coordinates.
    pub fn log_density(&self, point: Point<'_>) -> Result<f64> {
        self.validate()?;
        match (self, point) {
            (Self::Beta { a, b }, Point::Real(x)) => {
                if !(x > 0.0 && x < 1.0) {
                    return Err(Error::domain(format!("Beta support is (0, 1), got {x}")));
                }
                Ok((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta_unchecked(*a, *b))
            }
            (Self::Dirichlet { alpha }, Point::Vector(theta)) => {
                if theta.len() != alpha.len() {
                    return Err(Error::domain(format!(
                        "Dirichlet of dimension {} evaluated at a point of length {}",
                        alpha.len(),
                        theta.len()
                    )));
                }
                if let Some((i, t)) = theta.iter().enumerate().find(|(_, t)| !(**t > 0.0 && **t < 1.0)) {
                    return Err(Error::domain(format!("Dirichlet point coordinate {i} = {t} outside (0, 1)")));
                }
                let sum: f64 = theta.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::domain(format!("Dirichlet point sums to {sum}, not 1")));
                }
                let kernel: f64 = alpha.iter().zip(theta).map(|(a, t)| (a - 1.0) * t.ln()).sum();
                Ok(kernel - ln_multivariate_beta_unchecked(alpha))
            }
            (Self::Gamma { shape, rate }, Point::Real(x)) => {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::domain(format!("Gamma support is (0, inf), got {x}")));
                }
                Ok(shape * rate.ln() - ln_gamma_unchecked(*shape) + (shape - 1.0) * x.ln() - rate * x)
            }
            (Self::Binomial { trials, p }, Point::Count(y)) => {
                if y > *trials {
                    return Err(Error::domain(format!("Binomial count {y} exceeds trials {trials}")));
                }
                let failures = (trials - y) as f64;
                Ok(ln_choose(*trials, y) + y as f64 * p.ln() + failures * (-p).ln_1p())
            }
            (Self::BetaBinomial { trials, a, b }, Point::Count(y)) => {
                if y > *trials {
                    return Err(Error::domain(format!("BetaBinomial count {y} exceeds trials {trials}")));
                }
                Ok(beta_binomial_ln_pmf(y, *trials, *a, *b))
            }
            (spec, point) => Err(Error::domain(format!("point {point:?} is not in the sample space of {spec:?}"))),
        }
    }
}

/// Unchecked Beta-Binomial log pmf; callers guarantee `y <= n`, `a, b > 0`.
pub(crate) fn beta_binomial_ln_pmf(y: u64, n: u64, a: f64, b: f64) -> f64 {
    let (yf, nf) = (y as f64, n as f64);
    ln_choose(n, y) + ln_beta_unchecked(a + yf, b + nf - yf) - ln_beta_unchecked(a, b)
}

/// Seeded generator used for every stochastic computation.
pub type StreamRng = ChaCha20Rng;

/// Deterministic generator for `(seed, stream_id)`.
///
/// Streams share the key derived from `seed` and differ in the ChaCha stream
/// word, so they never overlap.
pub fn rng_stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn log_gamma_reference_values() {
        // mpmath.loggamma at 30 digits
        let cases = [
            (1e-6, 13.815_509_980_749_432),
            (0.5, 0.572_364_942_924_700_1),
            (2.5, 0.284_682_870_472_919_2),
            (4.0, 1.791_759_469_228_055),
            (10.5, 13.940_625_219_403_764),
            (123.456, 469.605_547_129_929_5),
            (1e6, 12_815_504.569_147_612),
        ];
        for (x, want) in cases {
            assert_relative_eq!(log_gamma(x).unwrap(), want, max_relative = 1e-12);
        }
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!((log_gamma(2.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn log_gamma_matches_factorials() {
        let mut fact = 1.0_f64;
        for k in 1..30u32 {
            fact *= k as f64;
            assert_relative_eq!(log_gamma(k as f64 + 1.0).unwrap(), fact.ln(), max_relative = 1e-13);
        }
    }

    #[test]
    fn log_gamma_rejects_bad_input() {
        for x in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(log_gamma(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn multivariate_beta_examples() {
        assert!(log_multivariate_beta(&[1.0, 1.0]).unwrap().abs() < 1e-14);
        assert_relative_eq!(
            log_multivariate_beta(&[0.5, 0.5]).unwrap(),
            std::f64::consts::PI.ln(),
            max_relative = 1e-13
        );
        assert_relative_eq!(log_multivariate_beta(&[2.0, 2.0]).unwrap(), -(6.0_f64.ln()), max_relative = 1e-13);
        assert!(log_multivariate_beta(&[1.0]).is_err());
        assert!(log_multivariate_beta(&[]).is_err());
        assert!(log_multivariate_beta(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn log_density_examples() {
        let beta = DistributionSpec::beta(2.0, 2.0).unwrap();
        assert_relative_eq!(beta.log_density(Point::Real(0.5)).unwrap(), 1.5_f64.ln(), max_relative = 1e-12);

        let bb = DistributionSpec::beta_binomial(20, 1.0, 1.0).unwrap();
        assert_relative_eq!(bb.log_density(Point::Count(0)).unwrap(), -(21.0_f64.ln()), max_relative = 1e-12);

        // 3432 = C(14, 7), 16384 = 2^14
        let bin = DistributionSpec::binomial(14, 0.5).unwrap();
        assert_relative_eq!(
            bin.log_density(Point::Count(7)).unwrap(),
            (3432.0_f64 / 16384.0).ln(),
            max_relative = 1e-12
        );

        let gamma = DistributionSpec::gamma(1.0, 0.1).unwrap();
        assert!(matches!(gamma.log_density(Point::Real(0.0)), Err(Error::Domain(_))));
        assert_relative_eq!(gamma.log_density(Point::Real(2.0)).unwrap(), 0.1_f64.ln() - 0.2, max_relative = 1e-12);
    }

    #[test]
    fn log_density_support_errors() {
        let beta = DistributionSpec::beta(2.0, 3.0).unwrap();
        assert!(beta.log_density(Point::Real(0.0)).is_err());
        assert!(beta.log_density(Point::Real(1.0)).is_err());
        assert!(beta.log_density(Point::Count(1)).is_err());
        let dir = DistributionSpec::dirichlet(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(dir.log_density(Point::Vector(&[0.5, 0.5])).is_err());
        assert!(dir.log_density(Point::Vector(&[0.5, 0.5, 0.0])).is_err());
        assert!(dir.log_density(Point::Vector(&[0.2, 0.2, 0.2])).is_err());
        let bin = DistributionSpec::binomial(5, 0.3).unwrap();
        assert!(bin.log_density(Point::Count(6)).is_err());
    }

    #[test]
    fn constructors_reject_invalid_parameters() {
        assert!(DistributionSpec::beta(0.0, 1.0).is_err());
        assert!(DistributionSpec::dirichlet(vec![1.0]).is_err());
        assert!(DistributionSpec::dirichlet(vec![1.0, -1.0]).is_err());
        assert!(DistributionSpec::gamma(1.0, 0.0).is_err());
        assert!(DistributionSpec::binomial(3, 1.0).is_err());
        assert!(DistributionSpec::beta_binomial(3, 1.0, f64::NAN).is_err());
        let hand_built = DistributionSpec::Beta { a: -1.0, b: 1.0 };
        assert!(hand_built.log_density(Point::Real(0.5)).is_err());
    }

    #[test]
    fn rng_streams_are_reproducible_and_separate() {
        let draw = |seed, stream| {
            let mut rng = rng_stream(seed, stream);
            (0..100).map(|_| rng.random::<f64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(42, 0), draw(42, 0));
        assert_ne!(draw(42, 0), draw(42, 1));
        assert_ne!(draw(42, 0), draw(43, 0));

        let mut rng = rng_stream(7, 3);
        let mean = (0..100_000).map(|_| rng.random::<f64>()).sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn log_sum_exp_handles_edge_cases() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_relative_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2.0_f64.ln());
    }
}
