//! Damped Newton minimization of the entropy.
//!
//! The Hessian is tridiagonal and positive definite on the whole domain, so
//! each Newton direction costs `O(m)` and is a descent direction. Backtracking
//! keeps iterates strictly ordered and enforces Armijo decrease.

use crate::entropy::Entropy;
use crate::error::Result;
use crate::problem::{check_feasible, BoundaryLayout, FreeBoundaries, RiemannProblem};
use crate::special::cdf_inverse;
use crate::tridiag::SymTridiagonal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stopping threshold on the gradient max-norm, relative to
    /// `max(1, ‖g₀‖∞)`.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Armijo sufficient-decrease constant, in `(0, 1/2)`.
    pub armijo_c: f64,
    /// Step shrink factor, in `(0, 1)`.
    pub backtrack_factor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-12,
            max_iters: 200,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub value: f64,
    pub grad_norm: f64,
    /// Accepted step length; zero for the starting point.
    pub step_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub minimizer: FreeBoundaries,
    pub entropy: f64,
    pub grad_norm: f64,
    /// Effective (absolute) stopping threshold.
    pub grad_tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// A smooth convex objective with a tridiagonal Hessian.
pub trait TridiagonalObjective {
    fn dim(&self) -> usize;
    /// `None` outside the domain.
    fn value(&self, x: &[f64]) -> Option<f64>;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> SymTridiagonal;
}

impl TridiagonalObjective for Entropy {
    fn dim(&self) -> usize {
        Entropy::dim(self)
    }

    fn value(&self, x: &[f64]) -> Option<f64> {
        check_feasible(x).ok()?;
        let v = self.value_unchecked(x);
        v.is_finite().then_some(v)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.gradient_unchecked(x)
    }

    fn hessian(&self, x: &[f64]) -> SymTridiagonal {
        self.hessian_unchecked(x)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Outcome of [`damped_newton`] on a generic objective.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub grad_tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Damped Newton from a point inside the domain.
///
/// Near the minimizer the decrease predicted by Armijo drops below the
/// resolution of the objective; a step is then also accepted if it leaves
/// the value unchanged to round-off and strictly reduces the gradient norm.
pub fn damped_newton<O: TridiagonalObjective + ?Sized>(
    objective: &O,
    start: &[f64],
    options: &SolveOptions,
) -> NewtonOutcome {
    let mut x = start.to_vec();
    let mut value = objective.value(&x).expect("starting point inside the domain");
    let mut grad = objective.gradient(&x);
    let mut grad_norm = max_norm(&grad);
    let tol = options.grad_tol * grad_norm.max(1.0);
    let mut trace = vec![TraceRow {
        iteration: 0,
        value,
        grad_norm,
        step_length: 0.0,
    }];
    let mut iterations = 0;
    while grad_norm > tol && iterations < options.max_iters {
        let hessian = objective.hessian(&x);
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let direction = hessian.solve_spd(&neg_grad).unwrap_or(neg_grad);
        let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(&direction).map(|(xi, di)| xi + step * di).collect();
            if let Some(trial_value) = objective.value(&trial) {
                if trial_value <= value + options.armijo_c * step * slope {
                    accepted = Some((trial, trial_value, None));
                    break;
                }
                if trial_value <= value + 4.0 * f64::EPSILON * value.abs() {
                    let trial_grad = objective.gradient(&trial);
                    if max_norm(&trial_grad) < grad_norm {
                        accepted = Some((trial, trial_value, Some(trial_grad)));
                        break;
                    }
                }
            }
            step *= options.backtrack_factor;
        }
        let Some((trial, trial_value, trial_grad)) = accepted else {
            break;
        };
        iterations += 1;
        x = trial;
        value = trial_value;
        grad = trial_grad.unwrap_or_else(|| objective.gradient(&x));
        grad_norm = max_norm(&grad);
        trace.push(TraceRow {
            iteration: iterations,
            value,
            grad_norm,
            step_length: step,
        });
    }
    NewtonOutcome {
        point: x,
        value,
        grad_norm,
        grad_tol: tol,
        iterations,
        converged: grad_norm <= tol,
        trace,
    }
}

/// Heat-equation quantiles: slot `j` sits at `ā F⁻¹(c_j)`, `c_j` the state
/// fraction reached at that boundary (midpoint fraction for merged slots)
/// and `ā` the largest nondegenerate coefficient. Exact when `a` is constant.
pub fn initial_guess(problem: &RiemannProblem, layout: &BoundaryLayout) -> FreeBoundaries {
    let partition = problem.partition();
    let u = partition.breakpoints();
    let (lo, span) = (partition.lower(), partition.upper() - partition.lower());
    let a_bar = partition.coefficients().iter().copied().fold(0.0, f64::max);
    let min_gap = 1e-6 * a_bar;
    let mut values: Vec<f64> = Vec::with_capacity(layout.m());
    for j in 0..layout.m() {
        let (first, last) = layout.boundaries_of_slot(j);
        let state = 0.5 * (u[first] + u[last]);
        let fraction = (state - lo) / span;
        let mut xi = a_bar * cdf_inverse(fraction).expect("interior state fraction");
        if let Some(&prev) = values.last() {
            if xi < prev + min_gap {
                xi = prev + min_gap;
            }
        }
        values.push(xi);
    }
    FreeBoundaries::new(values).expect("clamped guess is strictly increasing")
}

/// Minimizes the entropy from [`initial_guess`].
pub fn minimize(problem: &RiemannProblem, layout: &BoundaryLayout, options: &SolveOptions) -> SolveResult {
    let start = initial_guess(problem, layout);
    minimize_from(problem, layout, start.values(), options).expect("initial guess is feasible")
}

/// Minimizes the entropy from a caller-supplied feasible point.
pub fn minimize_from(
    problem: &RiemannProblem,
    layout: &BoundaryLayout,
    start: &[f64],
    options: &SolveOptions,
) -> Result<SolveResult> {
    let entropy = Entropy::new(problem, layout);
    entropy.value(start)?;
    let out = damped_newton(&entropy, start, options);
    Ok(SolveResult {
        minimizer: FreeBoundaries::new(out.point)?,
        entropy: out.value,
        grad_norm: out.grad_norm,
        grad_tol: out.grad_tol,
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::build_layout;

    fn solve(u: &[f64], a: &[f64]) -> (RiemannProblem, BoundaryLayout, SolveResult) {
        let p = RiemannProblem::from_interior(u[0], u[u.len() - 1], &u[1..u.len() - 1], a).unwrap();
        let l = build_layout(p.partition());
        let r = minimize(&p, &l, &SolveOptions::default());
        (p, l, r)
    }

    #[test]
    fn guess_two_phase_is_origin() {
        let p = RiemannProblem::from_interior(0.0, 2.0, &[1.0], &[1.0, 2.0]).unwrap();
        let l = build_layout(p.partition());
        assert_eq!(initial_guess(&p, &l).values(), &[0.0]);
    }

    #[test]
    fn converges_and_descends() {
        let (_, _, r) = solve(&[0.0, 0.5, 1.0, 3.0, 4.0], &[1.0, 3.0, 0.2, 1.5]);
        assert!(r.converged, "{r:?}");
        assert!(r.grad_norm <= r.grad_tol);
        for w in r.trace.windows(2) {
            assert!(w[1].value <= w[0].value + 4.0 * f64::EPSILON * w[0].value);
            assert!(w[1].grad_norm < w[0].grad_norm || w[1].value < w[0].value);
        }
    }

    #[test]
    fn degenerate_layouts_converge() {
        for (u, a) in [
            (vec![0.0, 1.0, 2.0], vec![0.0, 1.0]),
            (vec![0.0, 1.0, 2.0], vec![1.0, 0.0]),
            (vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 2.0]),
            (vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 1.0, 0.0, 2.0]),
            (vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 3.0, 0.0]),
        ] {
            let (_, _, r) = solve(&u, &a);
            assert!(r.converged, "u={u:?} a={a:?}: {r:?}");
        }
    }

    #[test]
    fn quadratic_tail() {
        let (_, _, r) = solve(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 0.5]);
        let last = &r.trace[r.trace.len() - 2..];
        if last[0].grad_norm > 1e-9 {
            assert!(last[1].grad_norm <= 1e-3 * last[0].grad_norm, "{:?}", r.trace);
        }
    }

    #[test]
    fn rejects_infeasible_start() {
        let p = RiemannProblem::from_interior(0.0, 3.0, &[1.0, 2.0], &[1.0, 2.0, 1.0]).unwrap();
        let l = build_layout(p.partition());
        assert!(minimize_from(&p, &l, &[0.5, 0.5], &SolveOptions::default()).is_err());
    }
}
