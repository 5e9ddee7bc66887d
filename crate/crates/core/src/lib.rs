//! Graph signal denoising (GSD) objectives, their gradient and proximal
//! gradient solvers, and the unrolled-network view of GNN propagation.
//!
//! The crate is organised bottom-up:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`], [`sparse`], [`operators`] | edge lists, self-loops, CSR storage, `Â`, `B̂`, `spmm` |
//! | [`gsd`] | the weighted GSD objective, its smooth gradient, the PPNP closed form |
//! | [`solvers`] | GD / ProxGD runs and the two proximal operators |
//! | [`unrolled`] | direct forward passes of eight propagation schemes and their unrolled GD/ProxGD plans |
//! | [`spectral`] | polynomial filters on `L̂` and coefficient mappings |
//! | [`trainer`] | bilevel training of the UGDGNN model on small datasets |
//!
//! Dense signals are `nalgebra::DMatrix<f64>` (rows = nodes).

pub mod error;
pub mod graph;
pub mod gsd;
pub mod linalg;
pub mod operators;
pub mod serde_matrix;
pub mod signal_io;
pub mod solvers;
pub mod sparse;
pub mod spectral;
pub mod trainer;
pub mod unrolled;

pub use error::{Error, Result};
pub use graph::{add_self_loops, load_edge_list, Graph};
pub use operators::{normalize, NormalizedOperators};

/// Dense real matrix used for signals, weights and small feature-space operators.
pub type Matrix = nalgebra::DMatrix<f64>;

/// A `|V| × d` graph signal. Rows are nodes.
pub type Signal = Matrix;
