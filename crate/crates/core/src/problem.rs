//! Riemann data, the piecewise-constant diffusion coefficient and the layout
//! of free variables left after degenerate inner intervals are merged.

use crate::error::{Error, Result, ValidationError};

/// Checks the invariants of a phase partition and reports the first
/// violation.
pub fn validate(breakpoints: &[f64], coefficients: &[f64]) -> std::result::Result<(), ValidationError> {
    if breakpoints.len() < 2 {
        return Err(ValidationError::TooFewBreakpoints(breakpoints.len()));
    }
    if coefficients.len() + 1 != breakpoints.len() {
        return Err(ValidationError::Arity {
            breakpoints: breakpoints.len(),
            expected: breakpoints.len() - 1,
            coefficients: coefficients.len(),
        });
    }
    if let Some(i) = breakpoints.iter().position(|u| !u.is_finite()) {
        return Err(ValidationError::NonFiniteBreakpoint(i));
    }
    if let Some(k) = coefficients.iter().position(|a| !a.is_finite()) {
        return Err(ValidationError::NonFiniteCoefficient(k));
    }
    if let Some(i) = (1..breakpoints.len()).find(|&i| breakpoints[i] <= breakpoints[i - 1]) {
        return Err(ValidationError::NotIncreasing(i));
    }
    if let Some(k) = coefficients.iter().position(|&a| a < 0.0) {
        return Err(ValidationError::NegativeCoefficient(k));
    }
    if let Some(k) = (0..coefficients.len() - 1).find(|&k| coefficients[k] == coefficients[k + 1]) {
        return Err(ValidationError::AdjacentEqual(k));
    }
    Ok(())
}

/// Breakpoints `u_0 < … < u_{n+1}` and coefficients `a_0, …, a_n`, with
/// `a(u) = a_k` on `(u_k, u_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePartition {
    breakpoints: Vec<f64>,
    coefficients: Vec<f64>,
}

impl PhasePartition {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<f64>) -> std::result::Result<Self, ValidationError> {
        validate(&breakpoints, &coefficients)?;
        Ok(Self {
            breakpoints,
            coefficients,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Number of nominal boundaries, `n`.
    pub fn boundary_count(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn upper(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    /// `u_{k+1} - u_k`.
    pub fn width(&self, k: usize) -> f64 {
        self.breakpoints[k + 1] - self.breakpoints[k]
    }

    /// `A(u) = ∫_{u_0}^{u} a²`, extended linearly outside the partition.
    pub fn antiderivative(&self, u: f64) -> f64 {
        let n = self.coefficients.len();
        let mut acc = 0.0;
        for k in 0..n {
            let (lo, hi) = (self.breakpoints[k], self.breakpoints[k + 1]);
            let a2 = self.coefficients[k] * self.coefficients[k];
            let top = if k + 1 == n { u } else { u.min(hi) };
            acc += a2 * (top - lo);
            if u <= hi {
                break;
            }
        }
        acc
    }

    /// The partition seen through `u ↦ u_0 + u_{n+1} - u`: breakpoints
    /// mirrored, coefficients reversed.
    pub fn reflected(&self) -> Self {
        let (lo, hi) = (self.lower(), self.upper());
        let mut breakpoints: Vec<f64> = self.breakpoints.iter().rev().map(|u| lo + hi - u).collect();
        // Keep the span exact; `lo + hi - hi` need not round to `lo`.
        let last = breakpoints.len() - 1;
        breakpoints[0] = lo;
        breakpoints[last] = hi;
        Self {
            breakpoints,
            coefficients: self.coefficients.iter().rev().copied().collect(),
        }
    }
}

/// Riemann data `u(0,x) = u_-` for `x < 0`, `u_+` for `x > 0`.
///
/// Internally every solve sees increasing states; when `u_+ < u_-` the
/// problem is stored as its `x → -x` mirror image and `orientation_flipped`
/// tells the output stages to undo it.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannProblem {
    u_minus: f64,
    u_plus: f64,
    partition: PhasePartition,
    orientation_flipped: bool,
}

impl RiemannProblem {
    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }

    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }

    pub fn partition(&self) -> &PhasePartition {
        &self.partition
    }

    pub fn orientation_flipped(&self) -> bool {
        self.orientation_flipped
    }
}

/// Wraps states and partition into a [`RiemannProblem`], flipping the
/// orientation when the states decrease. The partition is always listed in
/// increasing `u` and must span exactly `[min, max]` of the two states.
pub fn normalize_orientation(u_minus: f64, u_plus: f64, partition: PhasePartition) -> Result<RiemannProblem> {
    if u_minus == u_plus {
        return Err(Error::EqualStates(u_minus));
    }
    let (min, max) = (u_minus.min(u_plus), u_minus.max(u_plus));
    if partition.lower() != min || partition.upper() != max {
        return Err(Error::StatesMismatch {
            lower: partition.lower(),
            upper: partition.upper(),
            min,
            max,
        });
    }
    Ok(RiemannProblem {
        u_minus,
        u_plus,
        partition,
        orientation_flipped: u_plus < u_minus,
    })
}

impl RiemannProblem {
    pub fn new(u_minus: f64, u_plus: f64, partition: PhasePartition) -> Result<Self> {
        normalize_orientation(u_minus, u_plus, partition)
    }

    /// Builds the partition from the interior breakpoints `u_1 < … < u_n`.
    pub fn from_interior(u_minus: f64, u_plus: f64, interior: &[f64], coefficients: &[f64]) -> Result<Self> {
        if u_minus == u_plus {
            return Err(Error::EqualStates(u_minus));
        }
        let mut breakpoints = Vec::with_capacity(interior.len() + 2);
        breakpoints.push(u_minus.min(u_plus));
        breakpoints.extend_from_slice(interior);
        breakpoints.push(u_minus.max(u_plus));
        let partition = PhasePartition::new(breakpoints, coefficients.to_vec())?;
        normalize_orientation(u_minus, u_plus, partition)
    }
}

/// Maps the `n` nominal boundaries onto the `m` free variables ("slots").
///
/// Boundaries `k` and `k+1` share a slot exactly when `a_k = 0` for an inner
/// interval `0 < k < n`: the two weak discontinuities collapse into one
/// strong one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryLayout {
    n: usize,
    free_index: Vec<usize>,
    m: usize,
    edge_left_degenerate: bool,
    edge_right_degenerate: bool,
    inner_degenerate: Vec<usize>,
}

pub fn build_layout(partition: &PhasePartition) -> BoundaryLayout {
    let a = partition.coefficients();
    let n = partition.boundary_count();
    let inner_degenerate: Vec<usize> = (1..n).filter(|&k| a[k] == 0.0).collect();
    let mut free_index = Vec::with_capacity(n);
    let mut slot = 0;
    for k in 1..=n {
        // Boundary k opens a new slot unless interval k-1 is a merged inner one.
        if k > 1 && a[k - 1] != 0.0 {
            slot += 1;
        }
        free_index.push(slot);
    }
    BoundaryLayout {
        n,
        m: n - inner_degenerate.len(),
        free_index,
        edge_left_degenerate: a[0] == 0.0,
        edge_right_degenerate: a[n] == 0.0,
        inner_degenerate,
    }
}

impl BoundaryLayout {
    /// Nominal boundary count `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Free-variable count `m = n - l`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Zero-based slot of nominal boundary `k ∈ 1..=n`.
    pub fn slot(&self, k: usize) -> usize {
        self.free_index[k - 1]
    }

    pub fn free_index(&self) -> &[usize] {
        &self.free_index
    }

    pub fn edge_left_degenerate(&self) -> bool {
        self.edge_left_degenerate
    }

    pub fn edge_right_degenerate(&self) -> bool {
        self.edge_right_degenerate
    }

    pub fn inner_degenerate(&self) -> &[usize] {
        &self.inner_degenerate
    }

    /// Nominal boundaries `(first, last)` sharing slot `j`.
    pub fn boundaries_of_slot(&self, j: usize) -> (usize, usize) {
        let first = self.free_index.iter().position(|&s| s == j).expect("slot in range") + 1;
        let last = self.free_index.iter().rposition(|&s| s == j).expect("slot in range") + 1;
        (first, last)
    }

    /// Free variables → nominal `ξ_1..ξ_n` (merged values repeated).
    pub fn expand(&self, slots: &[f64]) -> Vec<f64> {
        self.free_index.iter().map(|&j| slots[j]).collect()
    }

    /// Nominal `ξ_1..ξ_n` → free variables (first boundary of each slot).
    pub fn compress(&self, nominal: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m);
        for (k, &j) in self.free_index.iter().enumerate() {
            if j == out.len() {
                out.push(nominal[k]);
            }
        }
        out
    }

    /// The layout of the reflected partition.
    pub fn reversed(&self) -> Self {
        let last = self.m.saturating_sub(1);
        BoundaryLayout {
            n: self.n,
            m: self.m,
            free_index: self.free_index.iter().rev().map(|&j| last - j).collect(),
            edge_left_degenerate: self.edge_right_degenerate,
            edge_right_degenerate: self.edge_left_degenerate,
            inner_degenerate: self.inner_degenerate.iter().rev().map(|&k| self.n - k).collect(),
        }
    }
}

/// A point of the domain `ξ_1 < … < ξ_m` of free variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundaries {
    values: Vec<f64>,
}

impl FreeBoundaries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_feasible(&values)?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Ok when `values` are finite and strictly increasing.
pub fn check_feasible(values: &[f64]) -> Result<()> {
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Infeasible(j));
    }
    match (1..values.len()).find(|&j| values[j] <= values[j - 1]) {
        Some(j) => Err(Error::Infeasible(j)),
        None => Ok(()),
    }
}
