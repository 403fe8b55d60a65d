//! Symmetric tridiagonal matrices: the shape of every Hessian in this crate.

/// Symmetric tridiagonal matrix stored by diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn zeros(order: usize) -> Self {
        Self {
            diag: vec![0.0; order],
            off: vec![0.0; order.saturating_sub(1)],
        }
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    /// Adds `value` to `(i, j)` and, off the diagonal, to `(j, i)`.
    ///
    /// Panics if `|i - j| > 1`.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        match i.abs_diff(j) {
            0 => self.diag[i] += value,
            1 => self.off[i.min(j)] += value,
            _ => panic!("entry ({i}, {j}) outside the tridiagonal band"),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.order();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solves `A x = b` through `A = L D Lᵀ`. Returns `None` unless every
    /// pivot is positive, i.e. unless `A` is positive definite.
    pub fn solve_spd(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.order();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut z = vec![0.0; n];
        for i in 0..n {
            d[i] = self.diag[i];
            z[i] = b[i];
            if i > 0 {
                d[i] -= l[i - 1] * l[i - 1] * d[i - 1];
                z[i] -= l[i - 1] * z[i - 1];
            }
            if !(d[i] > 0.0) || !d[i].is_finite() {
                return None;
            }
            if i + 1 < n {
                l[i] = self.off[i] / d[i];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            x[i] = z[i] / d[i];
            if i + 1 < n {
                x[i] -= l[i] * x[i + 1];
            }
        }
        Some(x)
    }

    /// Number of eigenvalues strictly below `shift` (Sturm count).
    pub fn count_below(&self, shift: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.order() {
            let coupling = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            q = self.diag[i] - shift - if i > 0 { coupling / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + shift.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenvalue by Sturm bisection inside the Gershgorin interval.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.order();
        if n == 0 {
            return f64::NAN;
        }
        let radius = |i: usize| {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            r
        };
        let mut lo = (0..n).map(|i| self.diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
        let mut hi = (0..n)
            .map(|i| self.diag[i] + radius(i))
            .fold(f64::NEG_INFINITY, f64::max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
