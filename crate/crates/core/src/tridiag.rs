//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! eigenvalues and shifted inverse iteration for the eigenvectors.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`
/// (`e.len() == d.len() − 1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        assert_eq!(e.len() + 1, d.len(), "off-diagonal must be one shorter");
        Self { d, e }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let off = if i > 0 { self.e[i - 1] * self.e[i - 1] } else { 0.0 };
            q = self.d[i] - lambda - if i > 0 { off / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (self.d[i].abs() + lambda.abs() + f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T − σ)y = b` by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        // Row i of U holds (u0, u1, u2) at columns i, i+1, i+2; u2 is pivoting fill-in.
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let tiny = f64::EPSILON * (self.bounds().1 - self.bounds().0).abs().max(1.0);
        let mut diag = self.d[0] - sigma;
        let mut sup = if n > 1 { self.e[0] } else { 0.0 };
        for i in 0..n - 1 {
            let sub = self.e[i];
            let next_diag = self.d[i + 1] - sigma;
            let next_sup = if i + 2 < n { self.e[i + 1] } else { 0.0 };
            if diag.abs() >= sub.abs() {
                let m = if diag == 0.0 { 0.0 } else { sub / diag };
                u0[i] = if diag == 0.0 { tiny } else { diag };
                u1[i] = sup;
                rhs[i + 1] -= m * rhs[i];
                diag = next_diag - m * sup;
                sup = next_sup;
            } else {
                // Swap rows i and i+1.
                let m = diag / sub;
                u0[i] = sub;
                u1[i] = next_diag;
                u2[i] = next_sup;
                rhs.swap(i, i + 1);
                rhs[i + 1] -= m * rhs[i];
                diag = sup - m * next_diag;
                sup = -m * next_sup;
            }
        }
        u0[n - 1] = if diag == 0.0 { tiny } else { diag };
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            if i + 1 < n {
                acc -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                acc -= u2[i] * y[i + 2];
            }
            y[i] = acc / u0[i];
        }
        y
    }

    /// Unit-norm eigenvector for an eigenvalue estimate, orthogonalized
    /// against `previous` (already unit-norm) vectors.
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
        let n = self.len();
        let scale = (self.bounds().1 - self.bounds().0).abs().max(1.0);
        let sigma = lambda + 1e-13 * scale;
        // Deterministic, non-symmetric seed so neither parity is missed.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin()).collect();
        for _ in 0..4 {
            for p in previous {
                let c: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
                for (a, b) in v.iter_mut().zip(p) {
                    *a -= c * b;
                }
            }
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            for a in &mut v {
                *a /= norm;
            }
            v = self.solve_shifted(sigma, &v);
        }
        for p in previous {
            let c: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(p) {
                *a -= c * b;
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for a in &mut v {
            *a /= norm;
        }
        v
    }

    /// `‖(T − λ)v‖∞`.
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut r = (self.d[i] - lambda) * v[i];
                if i > 0 {
                    r += self.e[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    r += self.e[i] * v[i + 1];
                }
                r.abs()
            })
            .fold(0.0, f64::max)
    }
}
