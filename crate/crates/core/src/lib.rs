//! Generalized Euclidean node-vector distances on sparse graphs.
//!
//! The distance between two node vectors `a` and `b` on a graph with
//! Laplacian `L` is `sqrt((a - b)^T pinv(L) (a - b))`. This crate computes
//! it two ways:
//!
//! * exactly, through a dense eigendecomposition ([`oracle`]), and
//! * at scale, through sparse Laplacian solvers ([`solve`]): conjugate
//!   gradients, Jacobi-preconditioned CG, an augmented spanning-tree
//!   preconditioner, and a randomized approximate sparse Cholesky
//!   preconditioner.
//!
//! Around that core sit seeded graph generators ([`generate`]), distance /
//! effective-resistance / polarization front-ends ([`metrics`]), plain-text
//! graph and vector I/O ([`io`]), and a benchmark harness with scaling-law
//! fits ([`bench`]).
//!
//! Everything is generic over the floating-point type through
//! [`scalar::Scalar`]; `f64` aliases are re-exported at the crate root.

pub mod bench;
pub mod generate;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod scalar;
pub mod solve;

pub use graph::{ComponentLabeling, Graph, GraphError};
pub use scalar::Scalar;
pub use solve::{Method, SolveReport, SolverConfig};

/// Double-precision graph, the common case.
pub type Graph64 = Graph<f64>;
/// Single-precision graph.
pub type Graph32 = Graph<f32>;
/// Double-precision solver configuration.
pub type SolverConfig64 = SolverConfig<f64>;
/// Double-precision solve report.
pub type SolveReport64 = SolveReport<f64>;
