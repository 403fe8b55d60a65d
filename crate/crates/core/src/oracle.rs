//! Independent checks on the optimizer and the self-similar profile.
//!
//! None of these reuse the Newton machinery: [`grid_search_min`] only
//! evaluates the entropy, [`stefan_bisection`] evaluates `erfc` directly, and
//! [`fd_solve`] integrates the PDE itself.

use rayon::prelude::*;

use crate::entropy::Entropy;
use crate::error::{Error, Result};
use crate::problem::{check_feasible, BoundaryLayout, FreeBoundaries, RiemannProblem};
use crate::profile::{Piece, SelfSimilarProfile};

/// Outcome of [`grid_search_min`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub minimizer: FreeBoundaries,
    pub value: f64,
    /// Lattice spacing of the last round.
    pub step: f64,
    /// Best value after the coarse scan and after each refinement round.
    pub round_minima: Vec<f64>,
}

const REFINEMENT_ROUNDS: usize = 3;

/// Scans every feasible point of the lattice `coarse_step · ℤ^m` inside
/// `[-box_radius, box_radius]^m`, then refines three times around the best
/// point with a 10× finer lattice spanning one old step on each side.
pub fn grid_search_min(
    problem: &RiemannProblem,
    layout: &BoundaryLayout,
    box_radius: f64,
    coarse_step: f64,
) -> Result<GridSearch> {
    let m = layout.m();
    if m == 0 || m > 3 {
        return Err(Error::Unsupported(format!("grid search needs 1 <= m <= 3, got m={m}")));
    }
    if !(coarse_step > 0.0) || !(box_radius > 0.0) {
        return Err(Error::Grid("box radius and step must be positive".into()));
    }
    let entropy = Entropy::new(problem, layout);
    let half = (box_radius / coarse_step).ceil() as i64;
    let mut best = scan(&entropy, &vec![0.0; m], coarse_step, half)
        .ok_or_else(|| Error::Grid("no feasible lattice point in the box".into()))?;
    let mut step = coarse_step;
    let mut round_minima = vec![best.1];
    for _ in 0..REFINEMENT_ROUNDS {
        step /= 10.0;
        if let Some(found) = scan(&entropy, &best.0, step, 10) {
            if found.1 <= best.1 {
                best = found;
            }
        }
        round_minima.push(best.1);
    }
    Ok(GridSearch {
        minimizer: FreeBoundaries::new(best.0)?,
        value: best.1,
        step,
        round_minima,
    })
}

/// Best feasible point of `center + step · {-half..=half}^m`.
fn scan(entropy: &Entropy, center: &[f64], step: f64, half: i64) -> Option<(Vec<f64>, f64)> {
    let m = center.len();
    let side = (2 * half + 1) as usize;
    let total = side.pow(m as u32);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut point = vec![0.0; m];
    for index in 0..total {
        let mut rest = index;
        for (j, x) in point.iter_mut().enumerate() {
            let offset = (rest % side) as i64 - half;
            rest /= side;
            *x = center[j] + offset as f64 * step;
        }
        if check_feasible(&point).is_err() {
            continue;
        }
        let Ok(value) = entropy.value(&point) else { continue };
        if value.is_finite() && best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((point.clone(), value));
        }
    }
    best
}

fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / 2.0)
}

fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / 2.0)
}

fn density(x: f64) -> f64 {
    (-x * x / 4.0).exp() / (2.0 * std::f64::consts::PI.sqrt())
}

enum StefanShape {
    /// `a_0 = 0`, `a_1 > 0`.
    Left { du0: f64, du1: f64, a1: f64 },
    /// `a_0 > 0`, `a_1 = 0`.
    Right { du0: f64, du1: f64, a0: f64 },
}

fn stefan_shape(problem: &RiemannProblem) -> Result<StefanShape> {
    let p = problem.partition();
    let a = p.coefficients();
    if a.len() != 2 {
        return Err(Error::Unsupported(format!(
            "Stefan bisection needs exactly one boundary, got {}",
            a.len() - 1
        )));
    }
    let (du0, du1) = (p.width(0), p.width(1));
    match (a[0] == 0.0, a[1] == 0.0) {
        (true, false) => Ok(StefanShape::Left { du0, du1, a1: a[1] }),
        (false, true) => Ok(StefanShape::Right { du0, du1, a0: a[0] }),
        _ => Err(Error::Unsupported("Stefan bisection needs one degenerate edge".into())),
    }
}

/// Residual of the scalar edge relation at `xi`, increasing in `xi`:
/// `Δu_0 ξ/2 + a_1 Δu_1 F'(ξ/a_1) / (1 - F(ξ/a_1))` for a degenerate left
/// edge, `Δu_1 ξ/2 - a_0 Δu_0 F'(ξ/a_0) / F(ξ/a_0)` for a degenerate right
/// edge. Works in the increasing-state frame.
pub fn stefan_residual(problem: &RiemannProblem, xi: f64) -> Result<f64> {
    Ok(match stefan_shape(problem)? {
        StefanShape::Left { du0, du1, a1 } => du0 * xi / 2.0 + a1 * du1 * density(xi / a1) / upper_tail(xi / a1),
        StefanShape::Right { du0, du1, a0 } => du1 * xi / 2.0 - a0 * du0 * density(xi / a0) / cdf(xi / a0),
    })
}

/// Root of [`stefan_residual`] by bisection down to adjacent doubles.
/// Returned in the increasing-state frame, like the optimizer's slots.
pub fn stefan_bisection(problem: &RiemannProblem) -> Result<f64> {
    stefan_shape(problem)?;
    let residual = |x: f64| stefan_residual(problem, x).expect("shape checked");
    let r0 = residual(0.0);
    // The flux term has a fixed sign, so the root lies on the opposite side.
    let direction = if r0 > 0.0 { -1.0 } else { 1.0 };
    let mut far = direction;
    while residual(far).signum() == r0.signum() {
        far *= 2.0;
        if far.abs() > 1e6 {
            return Err(Error::Unsupported("Stefan residual has no sign change".into()));
        }
    }
    let (mut lo, mut hi) = if direction < 0.0 { (far, 0.0) } else { (0.0, far) };
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if residual(lo).abs() <= residual(hi).abs() {
        lo
    } else {
        hi
    })
}

/// Explicit finite-difference state on `x_i = -L + i dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub half_width: f64,
    pub dx: f64,
    pub dt: f64,
    pub final_time: f64,
    pub steps: usize,
    pub values: Vec<f64>,
}

impl FdGrid {
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    /// Linear interpolation between nodes, clamped at the ends.
    pub fn interpolate(&self, x: f64) -> f64 {
        let last = self.values.len() - 1;
        let s = (x + self.half_width) / self.dx;
        if s <= 0.0 {
            return self.values[0];
        }
        if s >= last as f64 {
            return self.values[last];
        }
        let i = s.floor() as usize;
        let w = s - i as f64;
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// `profile` sampled at time `t` on the node layout of [`fd_solve`]:
    /// `2 cells_per_side + 2` nodes, half a cell off the origin.
    pub fn sampled(profile: &SelfSimilarProfile, cells_per_side: usize, dx: f64, t: f64) -> Self {
        let half_width = (cells_per_side as f64 + 0.5) * dx;
        let mut grid = Self {
            half_width,
            dx,
            dt: 0.0,
            final_time: t,
            steps: 0,
            values: Vec::new(),
        };
        grid.values = (0..2 * cells_per_side + 2)
            .map(|i| profile.eval_selfsimilar(grid.x(i) / t.sqrt()).mean())
            .collect();
        grid
    }
}

/// `A(u)` with precomputed values at the breakpoints.
struct Antiderivative {
    breakpoints: Vec<f64>,
    a2: Vec<f64>,
    base: Vec<f64>,
}

impl Antiderivative {
    fn new(problem: &RiemannProblem) -> Self {
        let p = problem.partition();
        let a2: Vec<f64> = p.coefficients().iter().map(|a| a * a).collect();
        let base = p.breakpoints()[..a2.len()]
            .iter()
            .map(|&u| p.antiderivative(u))
            .collect();
        Self {
            breakpoints: p.breakpoints().to_vec(),
            a2,
            base,
        }
    }

    fn eval(&self, u: f64) -> f64 {
        let k = self.breakpoints[1..self.a2.len()].partition_point(|&b| b < u);
        self.base[k] + self.a2[k] * (u - self.breakpoints[k])
    }
}

/// Largest number of nodes [`fd_solve`] will allocate.
const MAX_NODES: usize = 50_000_000;

fn fd_setup(problem: &RiemannProblem, t: f64, dx: f64) -> Result<(usize, f64, usize)> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveTime(t));
    }
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::Grid(format!("dx must be positive, got {dx}")));
    }
    let a_max = problem.partition().coefficients().iter().copied().fold(0.0, f64::max);
    let half_cells = ((10.0 * a_max * t.sqrt() / dx).ceil() as usize).max(1);
    if 2 * half_cells + 2 > MAX_NODES {
        return Err(Error::Grid(format!("{} nodes exceed the limit", 2 * half_cells + 2)));
    }
    if a_max == 0.0 {
        return Ok((half_cells, t, 0));
    }
    let bound = dx * dx / (2.0 * a_max * a_max);
    let steps = (t / (0.9 * bound)).ceil() as usize;
    Ok((half_cells, t / steps as f64, steps))
}

/// Integrates `u_t = A(u)_xx` from the step data to time `t` with
/// `dt <= 0.9 dx²/(2 max a²)` and `L >= 10 max a √t`. The two end nodes stay
/// at the Riemann states.
pub fn fd_solve(problem: &RiemannProblem, t: f64, dx: f64) -> Result<FdGrid> {
    fd_solve_threaded(problem, t, dx, 1)
}

/// [`fd_solve`] with the per-step update spread over `threads` workers.
/// Every node is computed by the same expression, so the result is
/// bit-identical to the sequential run.
pub fn fd_solve_threaded(problem: &RiemannProblem, t: f64, dx: f64, threads: usize) -> Result<FdGrid> {
    let (half_cells, dt, steps) = fd_setup(problem, t, dx)?;
    let nodes = 2 * half_cells + 2;
    let mut u: Vec<f64> = (0..nodes)
        .map(|i| {
            if i <= half_cells {
                problem.u_minus()
            } else {
                problem.u_plus()
            }
        })
        .collect();
    let a = Antiderivative::new(problem);
    let r = dt / (dx * dx);
    let mut flux = vec![0.0; nodes];
    let mut next = u.clone();
    if threads <= 1 {
        for _ in 0..steps {
            for (f, &v) in flux.iter_mut().zip(&u) {
                *f = a.eval(v);
            }
            for i in 1..nodes - 1 {
                next[i] = u[i] + r * (flux[i + 1] - 2.0 * flux[i] + flux[i - 1]);
            }
            std::mem::swap(&mut u, &mut next);
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Grid(e.to_string()))?;
        let chunk = nodes.div_ceil(threads).max(1024);
        pool.install(|| {
            for _ in 0..steps {
                flux.par_chunks_mut(chunk).zip(u.par_chunks(chunk)).for_each(|(f, v)| {
                    for (fi, &vi) in f.iter_mut().zip(v) {
                        *fi = a.eval(vi);
                    }
                });
                next[1..nodes - 1]
                    .par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(c, out)| {
                        for (j, o) in out.iter_mut().enumerate() {
                            let i = 1 + c * chunk + j;
                            *o = u[i] + r * (flux[i + 1] - 2.0 * flux[i] + flux[i - 1]);
                        }
                    });
                std::mem::swap(&mut u, &mut next);
            }
        });
    }
    Ok(FdGrid {
        half_width: (half_cells as f64 + 0.5) * dx,
        dx,
        dt,
        final_time: t,
        steps,
        values: u,
    })
}

/// Errors of an FD state against a self-similar profile at the same time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// Trapezoid-rule `∫ |u_fd - v(x/√T)| dx` over the grid.
    pub l1: f64,
    /// Max node error, skipping nodes within `dx` of a strong discontinuity.
    pub linf_away_from_jumps: f64,
    /// Trapezoid-rule `∫ |v(x/√T) - u(0,x)| dx`, the mass the solution moves.
    pub reference_mass: f64,
    /// `l1 / reference_mass`.
    pub relative_l1: f64,
}

/// Compares `fd` with `profile` at `fd.final_time`. At a jump the profile
/// value is the mean of its one-sided limits.
pub fn compare_profiles(fd: &FdGrid, profile: &SelfSimilarProfile) -> Comparison {
    let t = fd.final_time;
    let root_t = t.sqrt();
    let jumps: Vec<f64> = profile
        .pieces()
        .iter()
        .filter_map(|p| match *p {
            Piece::Jump { at, .. } => Some(at * root_t),
            _ => None,
        })
        .collect();
    let left_state = profile.eval_selfsimilar(f64::NEG_INFINITY).left;
    let right_state = profile.eval_selfsimilar(f64::INFINITY).right;
    let mut l1 = 0.0;
    let mut mass = 0.0;
    let mut linf: f64 = 0.0;
    let last = fd.values.len() - 1;
    for (i, &u) in fd.values.iter().enumerate() {
        let x = fd.x(i);
        let v = profile.eval_selfsimilar(x / root_t).mean();
        let step = if x < 0.0 { left_state } else { right_state };
        let weight = if i == 0 || i == last { 0.5 } else { 1.0 };
        l1 += weight * (u - v).abs();
        mass += weight * (v - step).abs();
        if jumps.iter().all(|&j| (x - j).abs() > fd.dx) {
            linf = linf.max((u - v).abs());
        }
    }
    l1 *= fd.dx;
    mass *= fd.dx;
    Comparison {
        l1,
        linf_away_from_jumps: linf,
        reference_mass: mass,
        relative_l1: if mass > 0.0 { l1 / mass } else { l1 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{minimize, SolveOptions};
    use crate::problem::build_layout;
    use crate::profile::build_profile;

    fn problem(u: &[f64], a: &[f64]) -> RiemannProblem {
        RiemannProblem::from_interior(u[0], u[u.len() - 1], &u[1..u.len() - 1], a).unwrap()
    }

    #[test]
    fn grid_search_rejects_large_m() {
        let p = problem(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 1.0, 2.0, 1.0]);
        let l = build_layout(p.partition());
        assert!(matches!(grid_search_min(&p, &l, 3.0, 0.1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn grid_search_rounds_are_monotone() {
        let p = problem(&[0.0, 1.0, 2.0], &[1.0, 2.0]);
        let l = build_layout(p.partition());
        let g = grid_search_min(&p, &l, 4.0, 0.1).unwrap();
        assert_eq!(g.round_minima.len(), 4);
        for w in g.round_minima.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!((g.step - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn stefan_shapes() {
        assert!(stefan_bisection(&problem(&[0.0, 1.0, 2.0], &[1.0, 2.0])).is_err());
        assert!(stefan_bisection(&problem(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0])).is_err());
        let left = stefan_bisection(&problem(&[0.0, 1.0, 2.0], &[0.0, 1.0])).unwrap();
        let right = stefan_bisection(&problem(&[0.0, 1.0, 2.0], &[1.0, 0.0])).unwrap();
        assert!(left < 0.0 && right > 0.0);
        assert!((left + right).abs() < 1e-14);
    }

    #[test]
    fn fd_rejects_bad_parameters() {
        let p = problem(&[0.0, 1.0, 2.0], &[1.0, 2.0]);
        assert!(matches!(fd_solve(&p, 0.0, 0.1), Err(Error::NonPositiveTime(_))));
        assert!(matches!(fd_solve(&p, 1.0, -0.1), Err(Error::Grid(_))));
        assert!(matches!(fd_solve(&p, 1.0, 1e-9), Err(Error::Grid(_))));
    }

    #[test]
    fn fd_layout() {
        let p = problem(&[0.0, 1.0, 2.0], &[1.0, 2.0]);
        let g = fd_solve(&p, 0.25, 0.1).unwrap();
        assert!(g.half_width >= 10.0 * 2.0 * 0.5);
        assert!(g.dt <= 0.01 / 8.0);
        assert!((g.dt * g.steps as f64 - 0.25).abs() < 1e-14);
        assert_eq!(g.values[0], 0.0);
        assert_eq!(*g.values.last().unwrap(), 2.0);
        let mid = g.values.len() / 2;
        assert!((g.x(mid) - 0.05).abs() < 1e-12 && (g.x(mid - 1) + 0.05).abs() < 1e-12);
    }

    #[test]
    fn threaded_is_bit_identical() {
        let p = problem(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]);
        let a = fd_solve(&p, 0.5, 0.02).unwrap();
        let b = fd_solve_threaded(&p, 0.5, 0.02, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn self_comparison_is_zero() {
        let p = problem(&[0.0, 1.0, 2.0], &[0.0, 1.0]);
        let l = build_layout(p.partition());
        let r = minimize(&p, &l, &SolveOptions::default());
        let prof = build_profile(&p, &l, r.minimizer.values());
        let g = FdGrid::sampled(&prof, 200, 0.01, 2.0);
        let c = compare_profiles(&g, &prof);
        assert_eq!(c.l1, 0.0);
        assert_eq!(c.linf_away_from_jumps, 0.0);
        assert!(c.reference_mass > 0.0);
    }

    #[test]
    fn interpolation_hits_nodes() {
        let p = problem(&[0.0, 1.0, 2.0], &[1.0, 2.0]);
        let g = fd_solve(&p, 0.1, 0.05).unwrap();
        for i in [0, 3, g.values.len() / 2, g.values.len() - 1] {
            assert!((g.interpolate(g.x(i)) - g.values[i]).abs() < 1e-14);
        }
    }
}
