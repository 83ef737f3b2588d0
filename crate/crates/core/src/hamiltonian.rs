//! One-kink Hamiltonian: nearest-neighbour hopping `-g` between links and
//! an on-site energy `-2w` on every weak link. The constant energy of the
//! uniform Ising bonds is dropped.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::lattice::LatticeSpec;

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    /// `off[i]` couples `i` and `i + 1`; `off.len()` must be `diag.len() - 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "empty tridiagonal matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Matrix element (zero outside the band).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.off[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.off[i];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `<ψ|H|ψ>` (real for a symmetric matrix).
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let hpsi = self.apply(psi);
        psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}

pub fn build_hamiltonian(spec: &LatticeSpec) -> Tridiagonal {
    let n = spec.n_links();
    let mut diag = vec![0.0; n];
    for (&link, &w) in spec.wells() {
        diag[link] = -2.0 * w;
    }
    let off = vec![-spec.g(); n - 1];
    Tridiagonal::new(diag, off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    #[test]
    fn free_hopping_matrix() {
        let spec = LatticeSpec::new(4, 0.7, Boundary::HardWall).unwrap();
        let h = build_hamiltonian(&spec);
        assert_eq!(h.dim(), 3);
        assert_eq!(h.diag(), &[0.0, 0.0, 0.0]);
        assert_eq!(h.off(), &[-0.7, -0.7]);
    }

    #[test]
    fn single_and_double_well_diagonals() {
        let spec = LatticeSpec::new(41, 1.0, Boundary::HardWall)
            .unwrap()
            .with_well(12, 0.15)
            .unwrap();
        let h = build_hamiltonian(&spec);
        for (i, &d) in h.diag().iter().enumerate() {
            if i == 12 {
                assert!((d + 0.3).abs() < 1e-15);
            } else {
                assert_eq!(d, 0.0);
            }
        }
        let spec = spec.with_well(22, 0.15).unwrap();
        let h = build_hamiltonian(&spec);
        let wells: Vec<usize> = (0..h.dim()).filter(|&i| h.diag()[i] != 0.0).collect();
        assert_eq!(wells, vec![12, 22]);
        assert!((h.diag()[22] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn symmetric_and_tridiagonal() {
        let spec = LatticeSpec::new(6, 0.3, Boundary::HardWall).unwrap().with_well(2, 0.4).unwrap();
        let h = build_hamiltonian(&spec);
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                assert_eq!(h.get(i, j), h.get(j, i));
                if i.abs_diff(j) > 1 {
                    assert_eq!(h.get(i, j), 0.0);
                }
            }
        }
    }
}
