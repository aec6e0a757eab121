//! Posterior inference for grouped binomial data.
//!
//! Two hierarchical models share the sampler, grid and diagnostics code:
//!
//! * the closeness model, `μ ~ Beta(½, ½)`, `γ ~ Gamma(1, 0.1)`,
//!   `θ_i ~ Beta(γμ + ½, γ(1−μ) + ½)`, `y_i ~ Binomial(n_i, θ_i)`;
//! * Gelman's model, `p(α, β) ∝ (α + β)^(−5/2)`, `θ_i ~ Beta(α, β)`.
//!
//! Hyperparameters are updated on the θ-collapsed (Beta-Binomial)
//! posterior with component-wise random-walk Metropolis in an unconstrained
//! chart; the `θ_i` are then drawn from their conjugate full conditionals.

mod data;
mod diagnostics;
mod grid;
mod models;
mod sampler;
mod summary;

pub use data::{simulate_groups, Group, ObservedGroups};
pub use diagnostics::{diagnostics, effective_sample_size, split_rhat, ParamDiagnostics};
pub use grid::{coarsen, grid_posterior, histogram, total_variation, Axis, GridPosterior, GridSpec};
pub use models::{
    closeness_log_posterior, closeness_log_posterior_transformed, gelman_log_posterior,
    gelman_log_posterior_transformed, theta_full_conditional, BetaPrior, ClosenessModelConfig, GammaPrior,
    GelmanModelConfig, Model,
};
pub(crate) use sampler::{run_chains, MwgTarget};
pub use sampler::{run_sampler, Chain, ChainSet, ModelTag, SamplerConfig, UpdateScheme};
pub use summary::{posterior_summary, quantile, sensitivity_sweep, ParamSummary, SensitivityRow, SUMMARY_PROBS};
