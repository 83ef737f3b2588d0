use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::chebyshev::ChebyshevPlan;
use crate::hamiltonian::Tridiagonal;

/// Entries of `exp(-iHτ)` smaller than this are dropped from the band.
pub const BAND_DROP: f64 = 1e-17;

/// Short-time propagator `U = exp(-iHτ)` of a tridiagonal `H`, stored as a
/// band. `U` is complex symmetric because `H` is real symmetric.
#[derive(Debug, Clone)]
pub struct BandedUnitary {
    n: usize,
    half_width: usize,
    tau: f64,
    // row i holds columns i - half_width ..= i + half_width
    rows: Vec<Complex64>,
}

impl BandedUnitary {
    pub fn new(h: &Tridiagonal, tau: f64) -> Self {
        let n = h.dim();
        let bounds = h.spectral_bounds();
        let plan = ChebyshevPlan::new(bounds, tau);
        let reach = plan.order() + 1;
        let mut columns: Vec<(usize, Vec<Complex64>)> = Vec::with_capacity(n);
        let mut half_width = 0;
        for j in 0..n {
            let lo = j.saturating_sub(reach);
            let hi = (j + reach).min(n - 1);
            let sub = Tridiagonal::new(h.diag()[lo..=hi].to_vec(), h.off()[lo..hi].to_vec());
            let mut e = vec![Complex64::new(0.0, 0.0); hi - lo + 1];
            e[j - lo] = Complex64::new(1.0, 0.0);
            let col = plan.apply(|x, y| sub.apply_into(x, y), &e);
            for (k, z) in col.iter().enumerate() {
                if z.norm() > BAND_DROP {
                    half_width = half_width.max((lo + k).abs_diff(j));
                }
            }
            columns.push((lo, col));
        }
        let width = 2 * half_width + 1;
        let mut rows = vec![Complex64::new(0.0, 0.0); n * width];
        for (j, (lo, col)) in columns.iter().enumerate() {
            for (k, z) in col.iter().enumerate() {
                let i = lo + k;
                if i >= j && i - j <= half_width {
                    rows[j * width + (i + half_width - j)] = *z;
                    rows[i * width + (j + half_width - i)] = *z;
                }
            }
        }
        Self { n, half_width, tau, rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i.abs_diff(j) > self.half_width {
            return Complex64::new(0.0, 0.0);
        }
        let w = 2 * self.half_width + 1;
        self.rows[i * w + (j + self.half_width - i)]
    }

    /// Band of row `i` as `(first column, entries)`, clipped to the matrix.
    #[inline]
    pub fn row(&self, i: usize) -> (usize, &[Complex64]) {
        let w = 2 * self.half_width + 1;
        let first = i.saturating_sub(self.half_width);
        let last = (i + self.half_width).min(self.n - 1);
        let base = i * w + (first + self.half_width - i);
        (first, &self.rows[base..base + (last - first + 1)])
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let (first, r) = self.row(i);
                r.iter().zip(&psi[first..]).map(|(u, x)| u * x).sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::chebyshev_propagate;

    #[test]
    fn matches_direct_propagation_and_is_unitary() {
        let mut diag = vec![0.0; 40];
        diag[10] = -0.3;
        let h = Tridiagonal::new(diag, vec![-1.0; 39]);
        let u = BandedUnitary::new(&h, 0.2);
        assert!(u.half_width() < 20);
        let psi: Vec<Complex64> = (0..40).map(|i| Complex64::new((i as f64 * 0.3).sin(), 0.1 * i as f64)).collect();
        let want = chebyshev_propagate(|x, y| h.apply_into(x, y), h.spectral_bounds(), 0.2, &psi);
        let got = u.apply(&psi);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-14);
        }
        for i in 0..40 {
            for j in 0..40 {
                let dot: Complex64 = (0..40).map(|k| u.get(i, k) * u.get(j, k).conj()).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).norm() < 1e-14);
                assert_eq!(u.get(i, j), u.get(j, i));
            }
        }
    }
}
