//! Constrained optimization primitives used by the fitters.

mod bounded;
mod nnls;

pub use bounded::{
    check_gradient, minimize_bounded, BoundMinProblem, MinimizeConfig, MinimizeResult, SmoothObjective,
    Termination,
};
pub use nnls::{solve_nnls, NnlsProblem};
