//! Propagation schemes as unrolled GD / ProxGD networks.
//!
//! [`forward`] evaluates each scheme literally; [`to_unroll_plan`] expresses
//! it as a stack of generic layers run by [`run_unrolled`]; the equivalence
//! harness compares the two.

pub mod equivalence;
pub mod layer;
pub mod models;
pub mod reparam;

pub use equivalence::{equivalence_batch, equivalence_check, EquivalenceReport, ModelKind};
pub use layer::{run_unrolled, H0Policy, LayerParams, LayerProx, PostTransform, UnrollPlan};
pub use models::{forward, ModelSpec, Ugdgnn};
pub use reparam::{
    gprgnn_gammas_from_alphas, jknet_weights_from_layers, to_unroll_plan, ugdgnn_specialize,
};
