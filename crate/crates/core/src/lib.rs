//! Solvers for the multilinear PageRank problem
//!
//! ```text
//! x = α R (x ⊗ x ⊗ … ⊗ x) + (1 - α) v,    x ≥ 0,  Σ x = 1
//! ```
//!
//! where `R` is the column-stochastic `n x n^(m-1)` unfolding of an order-`m`
//! transition tensor. The crate provides the tensor kernels, a projected
//! Newton method, Jacobian-free Newton-GMRES (analytic and finite-difference
//! Jacobian actions), Newton-GMRES accelerated by MPE/RRE extrapolation or
//! depth-one Anderson mixing, problem generators, and a benchmark harness
//! with Dolan-Moré performance profiles.

pub mod bench;
pub mod datagen;
pub mod error;
pub mod extrapolation;
pub mod krylov;
pub mod linalg;
pub mod problem;
pub mod solvers;
pub mod tensor;

pub use error::{Error, Result};
pub use problem::PageRankProblem;
pub use solvers::{Method, SolveReport, SolveStatus, SolverOptions};
pub use tensor::FlattenedTensor;
