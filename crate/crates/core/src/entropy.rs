//! The entropy of a boundary configuration.
//!
//! ```text
//! E(ξ) = -Σ_{a_k>0} a_k² Δu_k ln(F(ξ_{k+1}/a_k) - F(ξ_k/a_k)) + Σ_{a_k=0} Δu_k ξ_k²/4
//! ```
//!
//! with `ξ_0 = -∞`, `ξ_{n+1} = +∞` and merged boundaries sharing a slot. Its
//! gradient components are exactly the self-similar jump conditions at each
//! discontinuity, and it is strictly convex on the ordered domain, so its
//! unique minimizer is the solution.
//!
//! Per-interval stencil, with `x = ξ_right/a`, `y = ξ_left/a`,
//! `ΔF = F(x) - F(y)`, `ρ_x = F'(x)/ΔF`, `ρ_y = F'(y)/ΔF`:
//!
//! ```text
//! ∂/∂ξ_right = -a Δu ρ_x          ∂²/∂ξ_right² = Δu (ρ_x² + x ρ_x / 2)
//! ∂/∂ξ_left  = +a Δu ρ_y          ∂²/∂ξ_left²  = Δu (ρ_y² - y ρ_y / 2)
//!                                 ∂²/∂ξ_left ∂ξ_right = -Δu ρ_x ρ_y
//! ```
//!
//! The `a²` weight cancels the two `1/a` chain-rule factors in the second
//! derivatives. Degenerate intervals contribute `Δu ξ/2` and `Δu/2`.

use crate::error::{Error, Result};
use crate::problem::{check_feasible, BoundaryLayout, RiemannProblem};
use crate::special::{cdf_inverse, cdf_inverse_ln, ln_cdf_prime, log_cdf_diff_ordered};
use crate::tridiag::SymTridiagonal;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Term {
    /// `-a² Δu ln(F(ξ_right/a) - F(ξ_left/a))`; `None` is the infinite end.
    Log {
        a: f64,
        du: f64,
        left: Option<usize>,
        right: Option<usize>,
    },
    /// `Δu ξ²/4` at a slot adjacent to (or made of) a degenerate interval.
    Quadratic { du: f64, slot: usize },
}

/// Ratios and log-difference of one nondegenerate interval at a point.
struct LogTermEval {
    x: f64,
    y: f64,
    ln_diff: f64,
    rho_x: f64,
    rho_y: f64,
}

fn eval_log_term(a: f64, left: Option<usize>, right: Option<usize>, xi: &[f64]) -> LogTermEval {
    let x = right.map_or(f64::INFINITY, |j| xi[j] / a);
    let y = left.map_or(f64::NEG_INFINITY, |j| xi[j] / a);
    let ln_diff = log_cdf_diff_ordered(x, y);
    let ratio = |z: f64| {
        if z.is_finite() {
            (ln_cdf_prime(z) - ln_diff).exp()
        } else {
            0.0
        }
    };
    LogTermEval {
        x,
        y,
        ln_diff,
        rho_x: ratio(x),
        rho_y: ratio(y),
    }
}

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SymTridiagonal,
}

/// Box and gap enclosing a sublevel set `{E <= c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublevelBounds {
    /// `ln δ = -c / min a_k² Δu_k`; kept in log form because `δ` underflows
    /// for large `c`.
    pub ln_delta: f64,
    /// Every point of the sublevel set satisfies `‖ξ‖∞ <= radius`.
    pub radius: f64,
    /// Consecutive slots of the sublevel set are at least `gap` apart.
    pub gap: f64,
}

/// The entropy of one problem, ready to be evaluated on free variables.
#[derive(Debug, Clone)]
pub struct Entropy {
    terms: Vec<Term>,
    m: usize,
    shift: f64,
    min_weight: f64,
    min_positive_a: f64,
    edges: [EdgeKind; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EdgeKind {
    Arc { a: f64 },
    Degenerate { du: f64 },
}

impl Entropy {
    pub fn new(problem: &RiemannProblem, layout: &BoundaryLayout) -> Self {
        let partition = problem.partition();
        let a = partition.coefficients();
        let n = layout.n();
        let slot_of = |k: usize| (1..=n).contains(&k).then(|| layout.slot(k));
        let mut terms = Vec::with_capacity(n + 1);
        let mut shift = 0.0;
        let mut min_weight = f64::INFINITY;
        for k in 0..=n {
            let du = partition.width(k);
            if a[k] > 0.0 {
                let weight = a[k] * a[k] * du;
                shift += weight * (du / a[k]).ln();
                min_weight = min_weight.min(weight);
                terms.push(Term::Log {
                    a: a[k],
                    du,
                    left: slot_of(k),
                    right: slot_of(k + 1),
                });
            } else if n > 0 {
                // Left edge uses ξ_1, right edge ξ_n, inner the merged slot.
                let slot = if k == 0 { layout.slot(1) } else { layout.slot(k) };
                terms.push(Term::Quadratic { du, slot });
            }
        }
        let edge = |k: usize| {
            if a[k] > 0.0 {
                EdgeKind::Arc { a: a[k] }
            } else {
                EdgeKind::Degenerate { du: partition.width(k) }
            }
        };
        Self {
            terms,
            m: layout.m(),
            shift,
            min_weight,
            min_positive_a: a.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min),
            edges: [edge(0), edge(n)],
        }
    }

    /// Number of free variables.
    pub fn dim(&self) -> usize {
        self.m
    }

    fn check(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.m {
            return Err(Error::Dimension {
                expected: self.m,
                got: xi.len(),
            });
        }
        check_feasible(xi)
    }

    pub fn value(&self, xi: &[f64]) -> Result<f64> {
        self.check(xi)?;
        Ok(self.value_unchecked(xi))
    }

    pub(crate) fn value_unchecked(&self, xi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|term| match *term {
                Term::Log { a, du, left, right } => {
                    let x = right.map_or(f64::INFINITY, |j| xi[j] / a);
                    let y = left.map_or(f64::NEG_INFINITY, |j| xi[j] / a);
                    -a * a * du * log_cdf_diff_ordered(x, y)
                }
                Term::Quadratic { du, slot } => 0.25 * du * xi[slot] * xi[slot],
            })
            .sum()
    }

    pub fn gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check(xi)?;
        Ok(self.gradient_unchecked(xi))
    }

    pub(crate) fn gradient_unchecked(&self, xi: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.m];
        for term in &self.terms {
            match *term {
                Term::Log { a, du, left, right } => {
                    let t = eval_log_term(a, left, right, xi);
                    if let Some(r) = right {
                        g[r] -= a * du * t.rho_x;
                    }
                    if let Some(l) = left {
                        g[l] += a * du * t.rho_y;
                    }
                }
                Term::Quadratic { du, slot } => g[slot] += 0.5 * du * xi[slot],
            }
        }
        g
    }

    pub fn hessian(&self, xi: &[f64]) -> Result<SymTridiagonal> {
        self.check(xi)?;
        Ok(self.hessian_unchecked(xi))
    }

    pub(crate) fn hessian_unchecked(&self, xi: &[f64]) -> SymTridiagonal {
        let mut h = SymTridiagonal::zeros(self.m);
        for term in &self.terms {
            match *term {
                Term::Log { a, du, left, right } => {
                    let t = eval_log_term(a, left, right, xi);
                    if let Some(r) = right {
                        h.add(r, r, du * t.rho_x * (t.rho_x + 0.5 * t.x));
                    }
                    if let Some(l) = left {
                        h.add(l, l, du * t.rho_y * (t.rho_y - 0.5 * t.y));
                    }
                    if let (Some(l), Some(r)) = (left, right) {
                        h.add(l, r, -du * t.rho_x * t.rho_y);
                    }
                }
                Term::Quadratic { du, slot } => h.add(slot, slot, 0.5 * du),
            }
        }
        h
    }

    pub fn report(&self, xi: &[f64]) -> Result<EntropyReport> {
        self.check(xi)?;
        Ok(EntropyReport {
            value: self.value_unchecked(xi),
            gradient: self.gradient_unchecked(xi),
            hessian: self.hessian_unchecked(xi),
        })
    }

    /// `Σ_{a_k>0} a_k² Δu_k ln(Δu_k / a_k)`, the offset between `E₁` and `E`.
    pub fn shift_constant(&self) -> f64 {
        self.shift
    }

    /// The shifted entropy `E₁ = E + shift_constant()`, which stays bounded
    /// under refinement of the partition.
    pub fn shifted(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.value(xi)? + self.shift)
    }

    /// `ln(F(ξ_right/a) - F(ξ_left/a))` of each nondegenerate interval,
    /// `None` for degenerate ones, in interval order.
    pub fn log_differences(&self, xi: &[f64]) -> Result<Vec<Option<f64>>> {
        self.check(xi)?;
        Ok(self
            .terms
            .iter()
            .map(|term| match *term {
                Term::Log { a, left, right, .. } => Some(eval_log_term(a, left, right, xi).ln_diff),
                Term::Quadratic { .. } => None,
            })
            .collect())
    }

    /// Bounds on the sublevel set `{E <= c}`.
    ///
    /// Each nondegenerate term is positive and at most `c`, which forces
    /// `ΔF_k >= δ`. A nondegenerate edge then bounds the outer slot through
    /// `F(-r/a) <= δ`; a degenerate edge bounds it through its own quadratic
    /// term, `Δu ξ²/4 <= c`. Inner slots lie between the outer ones, and `F`
    /// being 1-Lipschitz turns `ΔF_k >= δ` into a gap of `δ a_k`.
    pub fn sublevel_bounds(&self, c: f64) -> SublevelBounds {
        if !(c > 0.0) {
            // E > 0 everywhere, so the set is empty.
            return SublevelBounds {
                ln_delta: f64::NEG_INFINITY,
                radius: 0.0,
                gap: 0.0,
            };
        }
        let ln_delta = -c / self.min_weight;
        // F⁻¹(δ), computed from ln δ.
        let quantile = if ln_delta <= -std::f64::consts::LN_2 {
            cdf_inverse_ln(ln_delta)
        } else {
            cdf_inverse(ln_delta.exp()).unwrap_or(0.0)
        };
        let outer = |edge: EdgeKind| match edge {
            EdgeKind::Arc { a } => -a * quantile,
            EdgeKind::Degenerate { du } => 2.0 * (c / du).sqrt(),
        };
        let radius = outer(self.edges[0]).max(outer(self.edges[1])).max(0.0);
        SublevelBounds {
            ln_delta,
            radius,
            gap: ln_delta.exp() * self.min_positive_a,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_layout, RiemannProblem};
    use std::f64::consts::LN_2;

    fn setup(u: &[f64], a: &[f64]) -> (RiemannProblem, BoundaryLayout, Entropy) {
        let p = RiemannProblem::from_interior(u[0], u[u.len() - 1], &u[1..u.len() - 1], a).unwrap();
        let l = build_layout(p.partition());
        let e = Entropy::new(&p, &l);
        (p, l, e)
    }

    #[test]
    fn two_phase_at_origin_is_five_ln_two() {
        let (_, _, e) = setup(&[0.0, 1.0, 2.0], &[1.0, 2.0]);
        let v = e.value(&[0.0]).unwrap();
        assert!((v - 5.0 * LN_2).abs() < 1e-14, "{v}");
    }

    #[test]
    fn left_degenerate_value() {
        let (_, _, e) = setup(&[0.0, 1.0, 2.0], &[0.0, 1.0]);
        let v = e.value(&[1.0]).unwrap();
        let expected = 0.25 - (1.0 - crate::special::cdf(1.0)).ln();
        assert!((v - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_infeasible_and_wrong_dimension() {
        let (_, _, e) = setup(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 1.0]);
        assert_eq!(e.value(&[1.0, 1.0]), Err(Error::Infeasible(1)));
        assert_eq!(e.gradient(&[1.0, 0.0]), Err(Error::Infeasible(1)));
        assert!(matches!(e.hessian(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn scalar_hessian_matches_symbolic() {
        // E(ξ) = ξ²/4 - ln(1 - F(ξ)); E'' = 1/2 + ρ² - ξρ/2 with ρ = F'(ξ)/(1 - F(ξ)).
        let (_, _, e) = setup(&[0.0, 1.0, 2.0], &[0.0, 1.0]);
        for xi in [-2.0, -0.7, 0.0, 1.3] {
            let q = 1.0 - crate::special::cdf(xi);
            let rho = crate::special::cdf_prime(xi) / q;
            let expected = 0.5 + rho * rho - 0.5 * xi * rho;
            let h = e.hessian(&[xi]).unwrap();
            assert!((h.diag[0] - expected).abs() < 1e-12 * expected);
            assert!(h.diag[0] > 0.0);
        }
    }

    #[test]
    fn shift_constant_formula() {
        let (_, _, e) = setup(&[0.0, 1.0, 3.0, 4.0], &[2.0, 0.0, 0.5]);
        let expected = 4.0 * 1.0 * (1.0f64 / 2.0).ln() + 0.25 * 1.0 * (1.0f64 / 0.5).ln();
        assert!((e.shift_constant() - expected).abs() < 1e-15);
    }

    #[test]
    fn translation_changes_value() {
        let (_, _, e) = setup(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 1.0]);
        let xi = [-0.4, 0.6];
        let moved = [-0.3, 0.7];
        assert!((e.value(&xi).unwrap() - e.value(&moved).unwrap()).abs() > 1e-3);
    }

    #[test]
    fn sublevel_radius_shrinks_with_level() {
        let (_, _, e) = setup(&[0.0, 1.0, 2.0], &[1.0, 2.0]);
        let mut last = f64::INFINITY;
        for c in [50.0, 20.0, 10.0, 5.0, 4.0] {
            let b = e.sublevel_bounds(c);
            assert!(b.radius <= last);
            last = b.radius;
        }
        assert_eq!(e.sublevel_bounds(0.0).radius, 0.0);
    }
}
