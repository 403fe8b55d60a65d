//! End-to-end pipeline: states and partition in, profile and jump report out.

use crate::error::{Error, Result};
use crate::optimizer::{minimize, SolveOptions, SolveResult};
use crate::problem::{build_layout, BoundaryLayout, PhasePartition, RiemannProblem};
use crate::profile::{build_profile, jump_residuals, JumpReport, SelfSimilarProfile};

/// Everything produced by [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// `None` when both states coincide.
    pub problem: Option<RiemannProblem>,
    pub layout: Option<BoundaryLayout>,
    /// Optimizer output; `None` when there is nothing to minimize.
    pub result: Option<SolveResult>,
    pub profile: SelfSimilarProfile,
    pub jumps: Vec<JumpReport>,
}

/// Solves the Riemann problem. Equal states give the constant solution
/// without touching `partition`.
pub fn solve(u_minus: f64, u_plus: f64, partition: PhasePartition, options: &SolveOptions) -> Result<Solution> {
    if u_minus == u_plus {
        if !u_minus.is_finite() {
            return Err(Error::EqualStates(u_minus));
        }
        return Ok(Solution {
            problem: None,
            layout: None,
            result: None,
            profile: SelfSimilarProfile::constant(u_minus),
            jumps: Vec::new(),
        });
    }
    solve_problem(RiemannProblem::new(u_minus, u_plus, partition)?, options)
}

/// Solves a validated problem.
pub fn solve_problem(problem: RiemannProblem, options: &SolveOptions) -> Result<Solution> {
    let layout = build_layout(problem.partition());
    let (slots, result) = if layout.m() == 0 {
        (Vec::new(), None)
    } else {
        let r = minimize(&problem, &layout, options);
        (r.minimizer.values().to_vec(), Some(r))
    };
    let profile = build_profile(&problem, &layout, &slots);
    let jumps = jump_residuals(&problem, &profile);
    Ok(Solution {
        problem: Some(problem),
        layout: Some(layout),
        result,
        profile,
        jumps,
    })
}

impl Solution {
    /// `true` unless the optimizer ran and stopped short of `grad_tol`.
    pub fn converged(&self) -> bool {
        self.result.as_ref().is_none_or(|r| r.converged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::cdf;

    #[test]
    fn equal_states_are_constant() {
        let part = PhasePartition::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        let s = solve(3.0, 3.0, part, &SolveOptions::default()).unwrap();
        assert!(s.result.is_none() && s.jumps.is_empty());
        assert_eq!(s.profile.eval_selfsimilar(-2.0).left, 3.0);
    }

    #[test]
    fn heat_needs_no_optimizer() {
        let part = PhasePartition::new(vec![0.0, 2.0], vec![1.0]).unwrap();
        let s = solve(0.0, 2.0, part, &SolveOptions::default()).unwrap();
        assert!(s.result.is_none());
        assert_eq!(s.profile.eval_selfsimilar(0.7).left, 2.0 * cdf(0.7));
    }

    #[test]
    fn decreasing_states() {
        let part = PhasePartition::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0]).unwrap();
        let s = solve(2.0, 0.0, part, &SolveOptions::default()).unwrap();
        assert!(s.converged());
        assert_eq!(s.profile.eval_selfsimilar(-40.0).left, 2.0);
        assert_eq!(s.profile.eval_selfsimilar(40.0).left, 0.0);
        for j in &s.jumps {
            assert!(j.rh_residual.abs() < 1e-9, "{j:?}");
        }
    }
}
