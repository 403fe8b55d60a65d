#![allow(dead_code)]

use rand::Rng;
use selfsim_core::{build_layout, BoundaryLayout, Entropy, RiemannProblem};

pub fn problem(u: &[f64], a: &[f64]) -> RiemannProblem {
    RiemannProblem::from_interior(u[0], u[u.len() - 1], &u[1..u.len() - 1], a).unwrap()
}

pub fn setup(u: &[f64], a: &[f64]) -> (RiemannProblem, BoundaryLayout, Entropy) {
    let p = problem(u, a);
    let l = build_layout(p.partition());
    let e = Entropy::new(&p, &l);
    (p, l, e)
}

/// Valid problem with `1 <= n <= max_n`; about a fifth of the coefficients
/// are zero, never two in a row.
pub fn random_problem<R: Rng>(rng: &mut R, max_n: usize) -> RiemannProblem {
    let n = rng.gen_range(1..=max_n);
    let mut u = vec![rng.gen_range(-2.0..2.0)];
    for _ in 0..=n {
        let last = *u.last().unwrap();
        u.push(last + rng.gen_range(0.2..2.0));
    }
    let mut a: Vec<f64> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let prev_zero = k > 0 && a[k - 1] == 0.0;
        let zero = !prev_zero && rng.gen_bool(0.2);
        a.push(if zero { 0.0 } else { rng.gen_range(0.3..3.0) });
    }
    problem(&u, &a)
}

/// Strictly increasing point with slots in `[-3, 3]` spaced at least `0.05`.
pub fn random_feasible<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        x.sort_by(f64::total_cmp);
        if x.windows(2).all(|w| w[1] - w[0] >= 0.05) {
            return x;
        }
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Central-difference gradient with step `h (1 + |x_j|)`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let step = h * (1.0 + x[j].abs());
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[j] += step;
            minus[j] -= step;
            (f(&plus) - f(&minus)) / (2.0 * step)
        })
        .collect()
}

/// Composite Simpson rule with `intervals` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals.is_multiple_of(2));
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}
