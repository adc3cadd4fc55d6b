//! Linear and mixed-binary programming with certified duals.
//!
//! The LP solver is a dense bounded-variable simplex with geometric-mean
//! scaling and periodic refactorization; it is meant for the few-hundred-row
//! programs produced by DC network models, where dense linear algebra is
//! faster than sparse bookkeeping. [`solve_mip`] runs branch-and-bound on
//! top of warm-started simplex instances.

mod mip;
pub mod mps;
mod problem;
mod scaling;
mod simplex;

pub use mip::{solve_mip, solve_mip_with, MipOptions, MipSolution, MixedProgram};
pub use problem::{Certificate, LinearProgram, LpSolution, LpStatus, Sense, SparseRow};
pub use simplex::{solve_lp, Basis, SimplexSolver};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid program: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("branch-and-bound node limit {nodes} exceeded (incumbent {incumbent:?})")]
    NodeLimitExceeded {
        nodes: usize,
        incumbent: Option<f64>,
    },
}
