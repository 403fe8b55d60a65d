//! Self-similar solutions of the Riemann problem for
//! `u_t = (a²(u) u_x)_x` with piecewise-constant, possibly degenerate, `a`.
//!
//! The free-boundary positions `ξ_k` (the solution changes phase along
//! `x = ξ_k √t`) minimize a strictly convex entropy; [`solve`] runs the whole
//! pipeline. The [`oracle`] module holds independent checks: brute-force
//! search, scalar bisection, and an explicit finite-difference integrator.

// `!(x > y)` is used on purpose so that NaN is rejected; index loops
// mirror the formulas they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod continuum;
pub mod entropy;
pub mod error;
pub mod optimizer;
pub mod oracle;
pub mod problem;
pub mod profile;
mod solve;
pub mod special;
pub mod tridiag;

pub use entropy::{Entropy, EntropyReport, SublevelBounds};
pub use error::{Error, Result, ValidationError};
pub use optimizer::{initial_guess, minimize, minimize_from, SolveOptions, SolveResult, TraceRow};
pub use problem::{build_layout, validate, BoundaryLayout, FreeBoundaries, PhasePartition, RiemannProblem};
pub use profile::{build_profile, jump_residuals, Discontinuity, JumpReport, Piece, SelfSimilarProfile, Sided};
pub use solve::{solve, solve_problem, Solution};
