//! KL closeness distributions on the multinomial manifold.
//!
//! A closeness distribution is a joint density over pairs of points of a
//! statistical manifold, proportional to `exp(-r(x, y))` for a remoteness
//! function `r`. On the manifold `M_n` of discrete distributions over `n + 1`
//! atoms, with `r = γ·KL`, the conditional of `θ` given a center `μ` is a
//! Dirichlet distribution with concentration `γμ + 1/2` (expressed with
//! respect to the Lebesgue measure of the expectation parameters). This crate
//! provides:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`numerics`] | log-gamma, multivariate Beta, log densities, seeded RNG streams |
//! | [`manifold`] | simplex points, KL divergence, Fisher volume factor, `Vol(M_n)` |
//! | [`quadrature`] | deterministic Fisher-measure quadrature for `n ∈ {1, 2}` |
//! | [`closeness`] | joint, marginal and conditional closeness densities, Dirichlet reinterpretation |
//! | [`inference`] | closeness and Gelman Beta-Binomial posteriors, MCMC, grids, diagnostics |
//! | [`hdm`] | hierarchical Dirichlet-Multinomial CPT estimation |
//! | [`cli`] | command-line front end, embedded rat-tumor data, CSV/JSON I/O |

pub mod cli;
pub mod closeness;
mod error;
pub mod hdm;
pub mod inference;
pub mod manifold;
pub mod numerics;
pub mod quadrature;

pub use error::{Error, Result};
