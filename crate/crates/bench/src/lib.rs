//! Benchmark fixtures.

use selfsim_core::RiemannProblem;

/// `n` interior breakpoints at `1, 2, ..., n` on `[0, n+1]`, coefficients
/// cycling through `1, 2, 0.5` with every fourth interval degenerate
/// (never the edges next to one another).
pub fn staircase(n: usize) -> RiemannProblem {
    let interior: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let coefficients: Vec<f64> = (0..=n)
        .map(|k| if k % 4 == 3 { 0.0 } else { [1.0, 2.0, 0.5][k % 3] })
        .collect();
    RiemannProblem::from_interior(0.0, (n + 1) as f64, &interior, &coefficients).expect("valid staircase")
}

/// The two-phase problem `u = (0, 1, 2)`, `a = (1, 2)`.
pub fn two_phase() -> RiemannProblem {
    RiemannProblem::from_interior(0.0, 2.0, &[1.0], &[1.0, 2.0]).expect("valid two-phase problem")
}
