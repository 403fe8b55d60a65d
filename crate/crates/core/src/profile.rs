//! Reconstruction of the self-similar solution `v(ξ)`, `ξ = x/√t`, from the
//! boundary positions, and the weak-solution jump conditions it satisfies.
//!
//! On a nondegenerate interval the solution is an error-function arc
//!
//! ```text
//! v(ξ) = u_k + Δu_k (F(ξ/a_k) - F(ξ_k/a_k)) / (F(ξ_{k+1}/a_k) - F(ξ_k/a_k)).
//! ```
//!
//! A degenerate edge interval turns into a constant tail behind a strong
//! discontinuity; a degenerate inner interval collapses into a single jump
//! from `u_k` to `u_{k+1}`.
//!
//! A discontinuity line `x = ξ√t` moves with speed `ξ/(2√t)`. Multiplying
//! `[u] x'(t) + [A(u)_x] = 0` by `√t` gives the residual used here:
//! `[u] ξ/2 + [A(u)_ξ] = 0`.

use crate::error::{Error, Result};
use crate::problem::{BoundaryLayout, RiemannProblem};
use crate::special::{cdf, cdf_inverse, ln_cdf_prime, log_cdf_diff_ordered};

/// A value with separate one-sided limits; both agree away from jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sided {
    pub left: f64,
    pub right: f64,
}

impl Sided {
    pub fn both(v: f64) -> Self {
        Self { left: v, right: v }
    }

    pub fn is_jump(&self) -> bool {
        self.left != self.right
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.left + self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// `v ≡ state` on `(lo, hi)`.
    Constant { lo: f64, hi: f64, state: f64 },
    /// Error-function arc from `left_state` at `lo` to `right_state` at `hi`.
    Arc {
        lo: f64,
        hi: f64,
        left_state: f64,
        right_state: f64,
        coefficient: f64,
    },
    /// Strong discontinuity.
    Jump { at: f64, left_state: f64, right_state: f64 },
}

impl Piece {
    fn span(&self) -> (f64, f64) {
        match *self {
            Piece::Constant { lo, hi, .. } | Piece::Arc { lo, hi, .. } => (lo, hi),
            Piece::Jump { at, .. } => (at, at),
        }
    }

    fn mirrored(&self) -> Self {
        match *self {
            Piece::Constant { lo, hi, state } => Piece::Constant {
                lo: -hi,
                hi: -lo,
                state,
            },
            Piece::Arc {
                lo,
                hi,
                left_state,
                right_state,
                coefficient,
            } => Piece::Arc {
                lo: -hi,
                hi: -lo,
                left_state: right_state,
                right_state: left_state,
                coefficient,
            },
            Piece::Jump {
                at,
                left_state,
                right_state,
            } => Piece::Jump {
                at: -at,
                left_state: right_state,
                right_state: left_state,
            },
        }
    }

    /// Value strictly inside, or the one-sided limit at an end.
    fn value(&self, xi: f64) -> f64 {
        match *self {
            Piece::Constant { state, .. } => state,
            Piece::Jump { left_state, .. } => left_state,
            Piece::Arc {
                lo,
                hi,
                left_state,
                right_state,
                coefficient: a,
            } => {
                if xi <= lo {
                    return left_state;
                }
                if xi >= hi {
                    return right_state;
                }
                let ratio = (log_cdf_diff_ordered(xi / a, lo / a) - log_cdf_diff_ordered(hi / a, lo / a)).exp();
                left_state + (right_state - left_state) * ratio
            }
        }
    }

    /// `A(v)_ξ = a² v'(ξ)`; zero off arcs.
    fn flux(&self, xi: f64) -> f64 {
        match *self {
            Piece::Arc {
                lo,
                hi,
                left_state,
                right_state,
                coefficient: a,
            } => {
                let z = xi / a;
                if !z.is_finite() {
                    return 0.0;
                }
                let ln_ratio = ln_cdf_prime(z) - log_cdf_diff_ordered(hi / a, lo / a);
                a * (right_state - left_state) * ln_ratio.exp()
            }
            _ => 0.0,
        }
    }
}

/// Piecewise representation of `v(ξ)` in the caller's orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarProfile {
    pieces: Vec<Piece>,
    boundaries: Vec<f64>,
}

/// Classification of a discontinuity line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discontinuity {
    /// Continuous solution with a kink.
    Weak,
    /// Jump in the solution itself.
    Strong,
}

impl Discontinuity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Discontinuity::Weak => "weak",
            Discontinuity::Strong => "strong",
        }
    }
}

/// Jump conditions at one discontinuity line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpReport {
    /// One-based position along the ξ axis.
    pub slot: usize,
    pub location: f64,
    pub left_state: f64,
    pub right_state: f64,
    /// `[A(u)]`.
    pub a_jump: f64,
    /// `[u] ξ/2 + [A(u)_ξ]`.
    pub rh_residual: f64,
    pub classification: Discontinuity,
}

impl SelfSimilarProfile {
    /// `v ≡ state`; the solution when both Riemann states coincide.
    pub fn constant(state: f64) -> Self {
        Self {
            pieces: vec![Piece::Constant {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                state,
            }],
            boundaries: Vec::new(),
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Nominal `ξ_1..ξ_n` in the caller's orientation, merged values repeated.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn jumps(&self) -> impl Iterator<Item = &Piece> {
        self.pieces.iter().filter(|p| matches!(p, Piece::Jump { .. }))
    }

    fn left_limit(&self, xi: f64) -> f64 {
        if xi == f64::NEG_INFINITY {
            return self.pieces[0].value(xi);
        }
        let piece = self
            .pieces
            .iter()
            .filter(|p| !matches!(p, Piece::Jump { .. }))
            .rev()
            .find(|p| p.span().0 < xi)
            .expect("pieces tile the line");
        piece.value(xi)
    }

    fn right_limit(&self, xi: f64) -> f64 {
        if xi == f64::INFINITY {
            return self.pieces[self.pieces.len() - 1].value(xi);
        }
        let piece = self
            .pieces
            .iter()
            .filter(|p| !matches!(p, Piece::Jump { .. }))
            .find(|p| p.span().1 > xi)
            .expect("pieces tile the line");
        piece.value(xi)
    }

    /// `v(ξ)` with both one-sided limits.
    pub fn eval_selfsimilar(&self, xi: f64) -> Sided {
        Sided {
            left: self.left_limit(xi),
            right: self.right_limit(xi),
        }
    }

    /// `u(t, x) = v(x/√t)`.
    pub fn eval_solution(&self, t: f64, x: f64) -> Result<Sided> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        Ok(self.eval_selfsimilar(x / t.sqrt()))
    }

    /// One-sided self-similar fluxes `A(v)_ξ`.
    pub fn flux(&self, xi: f64) -> Sided {
        let non_jump = || self.pieces.iter().filter(|p| !matches!(p, Piece::Jump { .. }));
        let left = non_jump().rev().find(|p| p.span().0 < xi).map_or(0.0, |p| p.flux(xi));
        let right = non_jump().find(|p| p.span().1 > xi).map_or(0.0, |p| p.flux(xi));
        Sided { left, right }
    }

    /// Locations where two pieces meet, in increasing order.
    pub fn junctions(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for piece in &self.pieces {
            let lo = piece.span().0;
            if lo.is_finite() && out.last() != Some(&lo) {
                out.push(lo);
            }
        }
        out
    }

    /// `ξ` with `v(ξ) = u` for a state strictly between the Riemann states.
    /// States swept by a jump map to the jump location.
    pub fn inverse(&self, u: f64) -> Option<f64> {
        for piece in &self.pieces {
            match *piece {
                Piece::Jump {
                    at,
                    left_state,
                    right_state,
                } if (u - left_state) * (u - right_state) <= 0.0 => return Some(at),
                Piece::Arc {
                    lo,
                    hi,
                    left_state,
                    right_state,
                    coefficient: a,
                } if (u - left_state) * (u - right_state) <= 0.0 => {
                    let q = (u - left_state) / (right_state - left_state);
                    let diff = log_cdf_diff_ordered(hi / a, lo / a).exp();
                    let lower = cdf(lo / a) + q * diff;
                    let z = if lower <= 0.5 {
                        cdf_inverse(lower).ok()?
                    } else {
                        -cdf_inverse(cdf(-hi / a) + (1.0 - q) * diff).ok()?
                    };
                    return Some((a * z).clamp(lo, hi));
                }
                _ => {}
            }
        }
        None
    }
}

/// Builds `v(ξ)` from free variables in the internal (increasing) frame and
/// returns it in the caller's orientation.
pub fn build_profile(problem: &RiemannProblem, layout: &BoundaryLayout, slots: &[f64]) -> SelfSimilarProfile {
    let partition = problem.partition();
    let u = partition.breakpoints();
    let a = partition.coefficients();
    let n = layout.n();
    let nominal = layout.expand(slots);
    let at = |k: usize| match k {
        0 => f64::NEG_INFINITY,
        k if k == n + 1 => f64::INFINITY,
        k => nominal[k - 1],
    };
    let mut pieces = Vec::with_capacity(2 * n + 3);
    for k in 0..=n {
        if a[k] > 0.0 {
            pieces.push(Piece::Arc {
                lo: at(k),
                hi: at(k + 1),
                left_state: u[k],
                right_state: u[k + 1],
                coefficient: a[k],
            });
            continue;
        }
        // A frozen step (n = 0, a_0 = 0) jumps at the origin.
        let jump_at = if n == 0 {
            0.0
        } else if k == 0 {
            at(1)
        } else {
            at(k)
        };
        if k == 0 {
            pieces.push(Piece::Constant {
                lo: f64::NEG_INFINITY,
                hi: jump_at,
                state: u[0],
            });
        }
        pieces.push(Piece::Jump {
            at: jump_at,
            left_state: u[k],
            right_state: u[k + 1],
        });
        if k == n {
            pieces.push(Piece::Constant {
                lo: jump_at,
                hi: f64::INFINITY,
                state: u[n + 1],
            });
        }
    }
    let mut profile = SelfSimilarProfile {
        pieces,
        boundaries: nominal,
    };
    if problem.orientation_flipped() {
        profile.pieces = profile.pieces.iter().rev().map(Piece::mirrored).collect();
        profile.boundaries = profile.boundaries.iter().rev().map(|x| -x).collect();
    }
    profile
}

/// Jump conditions at every discontinuity line of `profile`.
pub fn jump_residuals(problem: &RiemannProblem, profile: &SelfSimilarProfile) -> Vec<JumpReport> {
    let partition = problem.partition();
    profile
        .junctions()
        .into_iter()
        .enumerate()
        .map(|(i, xi)| {
            let state = profile.eval_selfsimilar(xi);
            let flux = profile.flux(xi);
            JumpReport {
                slot: i + 1,
                location: xi,
                left_state: state.left,
                right_state: state.right,
                a_jump: partition.antiderivative(state.right) - partition.antiderivative(state.left),
                rh_residual: (state.right - state.left) * xi / 2.0 + (flux.right - flux.left),
                classification: if state.is_jump() {
                    Discontinuity::Strong
                } else {
                    Discontinuity::Weak
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::build_layout;

    fn profile(u: &[f64], a: &[f64], slots: &[f64]) -> (RiemannProblem, SelfSimilarProfile) {
        let p = RiemannProblem::from_interior(u[0], u[u.len() - 1], &u[1..u.len() - 1], a).unwrap();
        let l = build_layout(p.partition());
        let prof = build_profile(&p, &l, slots);
        (p, prof)
    }

    #[test]
    fn heat_single_arc() {
        let (_, prof) = profile(&[0.0, 2.0], &[1.5], &[]);
        assert_eq!(prof.pieces().len(), 1);
        assert_eq!(prof.eval_selfsimilar(0.0), Sided::both(1.0));
        for xi in [-7.0, -1.0, 0.3, 4.0] {
            let v = prof.eval_selfsimilar(xi).left;
            assert!((v - 2.0 * cdf(xi / 1.5)).abs() < 1e-15);
        }
        assert_eq!(prof.eval_selfsimilar(f64::NEG_INFINITY).left, 0.0);
        assert_eq!(prof.eval_selfsimilar(f64::INFINITY).right, 2.0);
        let f0 = prof.flux(0.0);
        assert!((f0.left - 1.5 * 2.0 * crate::special::cdf_prime(0.0)).abs() < 1e-15);
        assert!(prof.flux(60.0).left < 1e-100);
    }

    #[test]
    fn frozen_step() {
        let (p, prof) = profile(&[0.0, 2.0], &[0.0], &[]);
        let s = prof.eval_selfsimilar(0.0);
        assert_eq!((s.left, s.right), (0.0, 2.0));
        let jumps = jump_residuals(&p, &prof);
        assert_eq!(jumps.len(), 1);
        assert_eq!(jumps[0].rh_residual, 0.0);
    }

    #[test]
    fn left_degenerate_structure() {
        let (_, prof) = profile(&[0.0, 1.0, 2.0], &[0.0, 1.0], &[-0.7]);
        match prof.pieces() {
            [Piece::Constant { state, hi, .. }, Piece::Jump {
                at,
                left_state,
                right_state,
            }, Piece::Arc { lo, .. }] => {
                assert_eq!((*state, *hi), (0.0, -0.7));
                assert_eq!((*at, *left_state, *right_state), (-0.7, 0.0, 1.0));
                assert_eq!(*lo, -0.7);
            }
            other => panic!("unexpected pieces {other:?}"),
        }
    }

    #[test]
    fn inner_degenerate_structure() {
        let (_, prof) = profile(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, 2.0], &[0.2]);
        let jumps: Vec<_> = prof.jumps().collect();
        assert_eq!(jumps.len(), 1);
        assert_eq!(
            *jumps[0],
            Piece::Jump {
                at: 0.2,
                left_state: 1.0,
                right_state: 2.0
            }
        );
        assert_eq!(prof.boundaries(), &[0.2, 0.2]);
    }

    #[test]
    fn boundary_states_exact() {
        let (_, prof) = profile(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 1.0], &[-0.5, 0.8]);
        assert_eq!(prof.eval_selfsimilar(-0.5), Sided::both(1.0));
        assert_eq!(prof.eval_selfsimilar(0.8), Sided::both(2.0));
    }

    #[test]
    fn solution_scaling() {
        let (_, prof) = profile(&[0.0, 1.0, 2.0], &[1.0, 2.0], &[-0.3]);
        assert!(prof.eval_solution(0.0, 1.0).is_err());
        assert_eq!(prof.eval_solution(4.0, 2.0).unwrap(), prof.eval_selfsimilar(1.0));
        for x in [-2.0, -0.1, 0.0, 0.5, 3.0] {
            let a = prof.eval_solution(1.3, x).unwrap();
            let b = prof.eval_solution(9.0 * 1.3, 3.0 * x).unwrap();
            assert!((a.left - b.left).abs() < 1e-14);
        }
    }

    #[test]
    fn mirrored_profile() {
        let p_up = RiemannProblem::from_interior(0.0, 2.0, &[1.0], &[1.0, 2.0]).unwrap();
        let p_down = RiemannProblem::from_interior(2.0, 0.0, &[1.0], &[1.0, 2.0]).unwrap();
        let l = build_layout(p_up.partition());
        let up = build_profile(&p_up, &l, &[-0.4]);
        let down = build_profile(&p_down, &l, &[-0.4]);
        assert_eq!(down.boundaries(), &[0.4]);
        for xi in [-3.0, -0.4, 0.0, 1.1] {
            let (a, b) = (up.eval_selfsimilar(xi).left, down.eval_selfsimilar(-xi).right);
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let (_, prof) = profile(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, 2.0], &[0.2]);
        for xi in [-3.0, -0.5, 0.1, 0.7, 2.5] {
            let v = prof.eval_selfsimilar(xi).left;
            assert!((prof.inverse(v).unwrap() - xi).abs() < 1e-9, "xi={xi}");
        }
        assert_eq!(prof.inverse(1.5), Some(0.2));
    }
}
