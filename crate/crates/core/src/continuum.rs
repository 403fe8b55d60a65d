//! Continuum limit: an arbitrary diffusion function `a(u) >= 0`, its
//! piecewise-constant approximations, and the variational functional
//!
//! ```text
//! J(ξ) = -∫ a(u)² ln ξ'(u) du + 1/4 ∫ ξ(u)² du
//! ```
//!
//! over increasing inverse profiles `ξ(u)`, whose Euler–Lagrange equation
//! `ξ/2 + (a²/ξ')' = 0` is the self-similar form of the PDE.
//!
//! Discretization: composite midpoint rule on the profile grid, forward
//! differences for `ξ'` on each cell, `a` sampled at cell midpoints. On cells
//! where `a = 0` the term `a² ln ξ'` is taken as zero.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimizer::{damped_newton, SolveOptions, TridiagonalObjective};
use crate::problem::{build_layout, PhasePartition, RiemannProblem};
use crate::profile::build_profile;
use crate::special::{cdf_inverse, LN_TWO_SQRT_PI};
use crate::tridiag::SymTridiagonal;
use crate::{entropy::Entropy, optimizer::minimize};

/// Tabulated `a(u) >= 0`, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionFunction {
    samples: Vec<(f64, f64)>,
}

impl DiffusionFunction {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::DiffusionTable("need at least two samples".into()));
        }
        for (i, &(u, a)) in samples.iter().enumerate() {
            if !u.is_finite() || !a.is_finite() {
                return Err(Error::DiffusionTable(format!("non-finite sample at row {i}")));
            }
            if a < 0.0 {
                return Err(Error::DiffusionTable(format!("negative coefficient at row {i}")));
            }
            if i > 0 && u <= samples[i - 1].0 {
                return Err(Error::DiffusionTable(format!("u not increasing at row {i}")));
            }
        }
        Ok(Self { samples })
    }

    /// Tabulates `f` at `count >= 2` equally spaced points of `[lower, upper]`.
    pub fn from_fn(lower: f64, upper: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let count = count.max(2);
        let samples = (0..count)
            .map(|i| {
                let u = if i + 1 == count {
                    upper
                } else {
                    lower + (upper - lower) * i as f64 / (count - 1) as f64
                };
                (u, f(u))
            })
            .collect();
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn lower(&self) -> f64 {
        self.samples[0].0
    }

    pub fn upper(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    /// `a(u)`, clamped to the end samples outside the table.
    pub fn eval(&self, u: f64) -> f64 {
        let s = &self.samples;
        if u <= s[0].0 {
            return s[0].1;
        }
        let i = s.partition_point(|&(x, _)| x < u);
        if i >= s.len() {
            return s[s.len() - 1].1;
        }
        let (u0, a0) = s[i - 1];
        let (u1, a1) = s[i];
        if u == u1 {
            return a1;
        }
        a0 + (a1 - a0) * (u - u0) / (u1 - u0)
    }
}

/// Piecewise-constant approximation of a [`DiffusionFunction`].
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub partition: PhasePartition,
    /// Cells (after merging) whose coefficient was nudged by a relative
    /// `1e-12` to differ from the previous one.
    pub jittered: Vec<usize>,
    /// Number of zero cells absorbed into a preceding zero cell.
    pub merged_zero_cells: usize,
}

const JITTER: f64 = 1e-12;

/// `N` uniform cells with `a` taken at cell midpoints. Runs of zero cells are
/// merged into one degenerate cell; a nonzero coefficient equal to its
/// predecessor is scaled by `1 + 1e-12`.
pub fn discretize(f: &DiffusionFunction, cells: usize) -> Result<Discretization> {
    let cells = cells.max(1);
    let (lo, hi) = (f.lower(), f.upper());
    let node = |i: usize| {
        if i == cells {
            hi
        } else {
            lo + (hi - lo) * i as f64 / cells as f64
        }
    };
    let mut breakpoints = vec![lo];
    let mut coefficients: Vec<f64> = Vec::with_capacity(cells);
    let mut jittered = Vec::new();
    let mut merged_zero_cells = 0;
    for i in 0..cells {
        let mut a = f.eval(0.5 * (node(i) + node(i + 1)));
        match coefficients.last() {
            Some(&prev) if prev == 0.0 && a == 0.0 => {
                // Extend the previous degenerate cell.
                *breakpoints.last_mut().expect("nonempty") = node(i + 1);
                merged_zero_cells += 1;
                continue;
            }
            Some(&prev) if prev == a => {
                a *= 1.0 + JITTER;
                jittered.push(coefficients.len());
            }
            _ => {}
        }
        coefficients.push(a);
        breakpoints.push(node(i + 1));
    }
    Ok(Discretization {
        partition: PhasePartition::new(breakpoints, coefficients)?,
        jittered,
        merged_zero_cells,
    })
}

/// Values `ξ(w_i)` of an increasing inverse profile on a `u`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseProfile {
    grid: Vec<f64>,
    xi: Vec<f64>,
}

impl InverseProfile {
    /// `grid` and `xi` strictly increasing, same length `>= 2`. The two end
    /// values of `xi` may be infinite.
    pub fn new(grid: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != xi.len() {
            return Err(Error::NonIncreasingProfile(0));
        }
        if let Some(i) = (1..grid.len()).find(|&i| !(grid[i] > grid[i - 1])) {
            return Err(Error::NonIncreasingProfile(i));
        }
        let last = xi.len() - 1;
        if let Some(i) = (1..last).find(|&i| !xi[i].is_finite()) {
            return Err(Error::NonIncreasingProfile(i));
        }
        if let Some(i) = (1..xi.len()).find(|&i| !(xi[i] > xi[i - 1])) {
            return Err(Error::NonIncreasingProfile(i));
        }
        Ok(Self { grid, xi })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }
}

/// Uniform grid of `cells + 1` nodes on `[lower, upper]`.
pub fn uniform_grid(lower: f64, upper: f64, cells: usize) -> Vec<f64> {
    (0..=cells)
        .map(|i| {
            if i == cells {
                upper
            } else {
                lower + (upper - lower) * i as f64 / cells as f64
            }
        })
        .collect()
}

/// Exact inverse of the heat profile `u_- + (u_+ - u_-) F(ξ/a)` on `grid`,
/// infinite at the two ends.
pub fn heat_inverse(a: f64, grid: &[f64]) -> Vec<f64> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    grid.iter()
        .map(|&w| {
            if w <= lo {
                f64::NEG_INFINITY
            } else if w >= hi {
                f64::INFINITY
            } else {
                a * cdf_inverse((w - lo) / (hi - lo)).expect("interior fraction")
            }
        })
        .collect()
}

struct Cell {
    width: f64,
    a2: f64,
}

fn cells(f: &DiffusionFunction, grid: &[f64]) -> Vec<Cell> {
    grid.windows(2)
        .map(|w| {
            let a = f.eval(0.5 * (w[0] + w[1]));
            Cell {
                width: w[1] - w[0],
                a2: a * a,
            }
        })
        .collect()
}

fn require_finite(profile: &InverseProfile) -> Result<()> {
    match profile.xi.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonIncreasingProfile(i)),
        None => Ok(()),
    }
}

/// Discrete `J` (midpoint rule, forward-difference slopes).
pub fn functional_j(f: &DiffusionFunction, profile: &InverseProfile) -> Result<f64> {
    require_finite(profile)?;
    Ok(cells(f, &profile.grid)
        .iter()
        .zip(profile.xi.windows(2))
        .map(|(c, x)| {
            let slope = (x[1] - x[0]) / c.width;
            let mid = 0.5 * (x[0] + x[1]);
            let log_term = if c.a2 > 0.0 { -c.a2 * slope.ln() } else { 0.0 };
            c.width * (log_term + 0.25 * mid * mid)
        })
        .sum())
}

/// `J` before simplification:
/// `-∫_{a>0} a² ln(F'(ξ/a) ξ') du + ∫_{a=0} ξ²/4 du`, same quadrature.
/// Differs from [`functional_j`] by `ln(2√π) ∫ a² du` because `F'` carries
/// the `1/(2√π)` normalization.
pub fn functional_j_unsimplified(f: &DiffusionFunction, profile: &InverseProfile) -> Result<f64> {
    require_finite(profile)?;
    Ok(cells(f, &profile.grid)
        .iter()
        .zip(profile.xi.windows(2))
        .map(|(c, x)| {
            let slope = (x[1] - x[0]) / c.width;
            let mid = 0.5 * (x[0] + x[1]);
            let integrand = if c.a2 > 0.0 {
                let a = c.a2.sqrt();
                -c.a2 * (crate::special::ln_cdf_prime(mid / a) + slope.ln())
            } else {
                0.25 * mid * mid
            };
            c.width * integrand
        })
        .sum())
}

/// `ln(2√π) ∫ a² du` under the same midpoint rule.
pub fn normalization_offset(f: &DiffusionFunction, grid: &[f64]) -> f64 {
    LN_TWO_SQRT_PI * cells(f, grid).iter().map(|c| c.width * c.a2).sum::<f64>()
}

/// `ξ(w_i)/2 + ((a²/ξ')_{i} - (a²/ξ')_{i-1}) / ((w_{i+1} - w_{i-1})/2)` at
/// interior nodes; `None` next to a degenerate cell. Infinite end values
/// give a zero end-cell flux.
pub fn euler_lagrange_residual(f: &DiffusionFunction, profile: &InverseProfile) -> Vec<Option<f64>> {
    let cs = cells(f, &profile.grid);
    let flux: Vec<f64> = cs
        .iter()
        .zip(profile.xi.windows(2))
        .map(|(c, x)| {
            let slope = (x[1] - x[0]) / c.width;
            if slope.is_infinite() {
                0.0
            } else {
                c.a2 / slope
            }
        })
        .collect();
    let w = &profile.grid;
    (1..w.len() - 1)
        .map(|i| {
            if cs[i - 1].a2 == 0.0 || cs[i].a2 == 0.0 {
                return None;
            }
            let spacing = 0.5 * (w[i + 1] - w[i - 1]);
            Some(0.5 * profile.xi[i] + (flux[i] - flux[i - 1]) / spacing)
        })
        .collect()
}

struct DiscreteJ {
    cells: Vec<Cell>,
}

impl TridiagonalObjective for DiscreteJ {
    fn dim(&self) -> usize {
        self.cells.len() + 1
    }

    fn value(&self, x: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for (c, w) in self.cells.iter().zip(x.windows(2)) {
            let d = w[1] - w[0];
            if !(d > 0.0) || !w[0].is_finite() || !w[1].is_finite() {
                return None;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let log_term = if c.a2 > 0.0 { -c.a2 * (d / c.width).ln() } else { 0.0 };
            total += c.width * (log_term + 0.25 * mid * mid);
        }
        Some(total)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for (i, c) in self.cells.iter().enumerate() {
            let d = x[i + 1] - x[i];
            let mid = 0.5 * (x[i] + x[i + 1]);
            let barrier = c.width * c.a2 / d;
            let quad = 0.25 * c.width * mid;
            g[i] += barrier + quad;
            g[i + 1] += -barrier + quad;
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> SymTridiagonal {
        let mut h = SymTridiagonal::zeros(x.len());
        for (i, c) in self.cells.iter().enumerate() {
            let d = x[i + 1] - x[i];
            let curv = c.width * c.a2 / (d * d);
            let quad = 0.125 * c.width;
            h.add(i, i, curv + quad);
            h.add(i + 1, i + 1, curv + quad);
            h.add(i, i + 1, -curv + quad);
        }
        h
    }
}

/// Minimizer of the discrete `J` over all node values of `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct JMinimum {
    pub profile: InverseProfile,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes the discrete `J` by damped Newton, starting from heat-equation
/// quantiles with the largest sampled coefficient.
pub fn minimize_functional_j(f: &DiffusionFunction, grid: &[f64], options: &SolveOptions) -> Result<JMinimum> {
    let objective = DiscreteJ { cells: cells(f, grid) };
    let nodes = grid.len();
    let a_bar = f.samples().iter().map(|s| s.1).fold(0.0, f64::max).max(1e-3);
    let start: Vec<f64> = (0..nodes)
        .map(|i| {
            let frac = (i as f64 + 0.5) / nodes as f64;
            a_bar * cdf_inverse(frac).expect("interior fraction")
        })
        .collect();
    let out = damped_newton(&objective, &start, options);
    Ok(JMinimum {
        profile: InverseProfile::new(grid.to_vec(), out.point)?,
        value: out.value,
        converged: out.converged,
        iterations: out.iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    /// Phases after merging zero cells.
    pub phases: usize,
    pub converged: bool,
    pub iterations: usize,
    pub entropy_shifted: f64,
    /// Inverse of the discrete profile on the study's common `u`-grid.
    pub inverse: Vec<f64>,
    pub sup_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    /// Common `u`-grid (interior points of `[u_-, u_+]`).
    pub grid: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Sup-distance between the inverses of consecutive rows.
    pub fn successive_distances(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| {
                w[0].inverse
                    .iter()
                    .zip(&w[1].inverse)
                    .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
            })
            .collect()
    }
}

/// Discretizes with each `N` in `cell_counts`, minimizes the entropy, and
/// inverts the resulting profile onto `samples` interior points of
/// `[u_-, u_+]`. Distances are measured against `reference` when given,
/// otherwise against the finest row.
pub fn convergence_study(
    f: &DiffusionFunction,
    cell_counts: &[usize],
    samples: usize,
    reference: Option<&(dyn Fn(f64) -> f64 + Sync)>,
    options: &SolveOptions,
) -> Result<ConvergenceStudy> {
    let (lo, hi) = (f.lower(), f.upper());
    let grid: Vec<f64> = (1..=samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples + 1) as f64)
        .collect();
    let mut rows: Vec<ConvergenceRow> = cell_counts
        .par_iter()
        .map(|&n| -> Result<ConvergenceRow> {
            let disc = discretize(f, n)?;
            let phases = disc.partition.coefficients().len();
            let problem = RiemannProblem::new(lo, hi, disc.partition)?;
            let layout = build_layout(problem.partition());
            let (slots, converged, iterations) = if layout.m() == 0 {
                (Vec::new(), true, 0)
            } else {
                let r = minimize(&problem, &layout, options);
                (r.minimizer.into_values(), r.converged, r.iterations)
            };
            let entropy_shifted = if layout.m() == 0 {
                f64::NAN
            } else {
                Entropy::new(&problem, &layout).shifted(&slots)?
            };
            let profile = build_profile(&problem, &layout, &slots);
            let inverse = grid.iter().map(|&u| profile.inverse(u).unwrap_or(f64::NAN)).collect();
            Ok(ConvergenceRow {
                cells: n,
                phases,
                converged,
                iterations,
                entropy_shifted,
                inverse,
                sup_distance: f64::NAN,
            })
        })
        .collect::<Result<_>>()?;
    let target: Vec<f64> = match reference {
        Some(r) => grid.iter().map(|&u| r(u)).collect(),
        None => rows.last().map(|r| r.inverse.clone()).unwrap_or_default(),
    };
    for row in &mut rows {
        row.sup_distance = row
            .inverse
            .iter()
            .zip(&target)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()));
    }
    Ok(ConvergenceStudy { grid, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation() {
        let f = DiffusionFunction::new(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 0.0)]).unwrap();
        assert_eq!(f.eval(-1.0), 1.0);
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(f.eval(1.0), 3.0);
        assert_eq!(f.eval(1.5), 1.5);
        assert_eq!(f.eval(5.0), 0.0);
        assert!(DiffusionFunction::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(DiffusionFunction::new(vec![(0.0, -1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn midpoint_coefficients() {
        let f = DiffusionFunction::from_fn(0.0, 1.0, 11, |u| 1.0 + u).unwrap();
        let d = discretize(&f, 2).unwrap();
        assert_eq!(d.partition.breakpoints(), &[0.0, 0.5, 1.0]);
        let a = d.partition.coefficients();
        assert!((a[0] - 1.25).abs() < 1e-15 && (a[1] - 1.75).abs() < 1e-15);
        assert!(d.jittered.is_empty());
    }

    #[test]
    fn constant_coefficient_is_jittered() {
        let f = DiffusionFunction::from_fn(0.0, 1.0, 2, |_| 1.0).unwrap();
        let d = discretize(&f, 4).unwrap();
        assert_eq!(d.jittered, vec![1, 3]);
        for &a in d.partition.coefficients() {
            assert!((a - 1.0).abs() <= 2e-12);
        }
    }

    #[test]
    fn zero_cells_merge() {
        let f = DiffusionFunction::from_fn(0.0, 1.0, 3, |u| (u - 0.5).max(0.0)).unwrap();
        let d = discretize(&f, 4).unwrap();
        assert_eq!(d.partition.breakpoints(), &[0.0, 0.5, 0.75, 1.0]);
        assert_eq!(d.partition.coefficients(), &[0.0, 0.125, 0.375]);
        assert_eq!(d.merged_zero_cells, 1);
    }

    #[test]
    fn affine_profile_value() {
        let f = DiffusionFunction::from_fn(0.0, 1.0, 2, |_| 1.0).unwrap();
        let grid = uniform_grid(0.0, 1.0, 100);
        let p = InverseProfile::new(grid.clone(), grid.clone()).unwrap();
        let j = functional_j(&f, &p).unwrap();
        // The midpoint rule undershoots ∫u²/4 by exactly h²/48.
        let h = 0.01;
        assert!((j - (1.0 / 12.0 - h * h / 48.0)).abs() < 1e-15, "{j}");
    }

    #[test]
    fn rejects_decreasing_profile() {
        assert!(InverseProfile::new(vec![0.0, 0.5, 1.0], vec![0.0, -1.0, 2.0]).is_err());
        assert!(InverseProfile::new(vec![0.0, 0.5, 1.0], vec![0.0, f64::INFINITY, 2.0]).is_err());
        let p = InverseProfile::new(vec![0.0, 0.5, 1.0], vec![f64::NEG_INFINITY, 0.0, 2.0]).unwrap();
        let f = DiffusionFunction::from_fn(0.0, 1.0, 2, |_| 1.0).unwrap();
        assert!(functional_j(&f, &p).is_err());
    }

    #[test]
    fn affine_residual_is_half_xi() {
        let f = DiffusionFunction::from_fn(0.0, 1.0, 2, |_| 1.0).unwrap();
        let grid = uniform_grid(0.0, 1.0, 10);
        let p = InverseProfile::new(grid.clone(), grid.clone()).unwrap();
        for (i, r) in euler_lagrange_residual(&f, &p).into_iter().enumerate() {
            assert!((r.unwrap() - 0.5 * grid[i + 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_cells_have_no_residual() {
        let f = DiffusionFunction::new(vec![(0.0, 0.0), (0.5, 0.0), (1.0, 1.0)]).unwrap();
        let grid = uniform_grid(0.0, 1.0, 4);
        let p = InverseProfile::new(grid.clone(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap();
        let r = euler_lagrange_residual(&f, &p);
        assert!(r[0].is_none() && r[1].is_none());
        assert!(r[2].is_some());
    }
}
