//! Reduction of a mirror-symmetric tridiagonal matrix into its even and odd
//! parity blocks. Near-degenerate parity doublets (double-well states whose
//! splitting sits near machine precision) become well separated ground
//! states of the two blocks.

use alloc::vec;
use alloc::vec::Vec;

use crate::hamiltonian::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorSector {
    Even,
    Odd,
}

#[derive(Debug, Clone)]
pub struct MirrorSplit {
    n: usize,
    even: Tridiagonal,
    odd: Option<Tridiagonal>,
}

impl MirrorSplit {
    /// `None` unless `h` is exactly symmetric under `i → n - 1 - i`.
    pub fn new(h: &Tridiagonal) -> Option<Self> {
        let n = h.dim();
        let d = h.diag();
        let e = h.off();
        if n < 2 {
            return None;
        }
        if (0..n).any(|i| d[i] != d[n - 1 - i]) || (0..n - 1).any(|i| e[i] != e[n - 2 - i]) {
            return None;
        }
        let s2 = core::f64::consts::SQRT_2;
        if n % 2 == 1 {
            let c = n / 2;
            let mut de = vec![d[c]];
            let mut ee = vec![s2 * e[c]];
            for k in 1..=c {
                de.push(d[c + k]);
                if k < c {
                    ee.push(e[c + k]);
                }
            }
            let even = Tridiagonal::new(de, ee);
            let odd = Tridiagonal::new(d[c + 1..].to_vec(), e[c + 1..].to_vec());
            Some(Self { n, even, odd: Some(odd) })
        } else {
            let c = n / 2 - 1;
            let half = n / 2;
            let mut de: Vec<f64> = d[c + 1..].to_vec();
            let mut dodd = de.clone();
            de[0] += e[c];
            dodd[0] -= e[c];
            let off: Vec<f64> = e[c + 1..].to_vec();
            debug_assert_eq!(de.len(), half);
            let even = Tridiagonal::new(de, off.clone());
            let odd = Tridiagonal::new(dodd, off);
            Some(Self { n, even, odd: Some(odd) })
        }
    }

    pub fn block(&self, sector: MirrorSector) -> Option<&Tridiagonal> {
        match sector {
            MirrorSector::Even => Some(&self.even),
            MirrorSector::Odd => self.odd.as_ref(),
        }
    }

    /// Maps a block vector back onto the full lattice. The result has the
    /// same 2-norm as `v`.
    pub fn expand(&self, sector: MirrorSector, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let mut out = vec![0.0; n];
        let sign = match sector {
            MirrorSector::Even => 1.0,
            MirrorSector::Odd => -1.0,
        };
        if n % 2 == 1 {
            let c = n / 2;
            match sector {
                MirrorSector::Even => {
                    out[c] = v[0];
                    for k in 1..v.len() {
                        out[c + k] = r * v[k];
                        out[c - k] = r * v[k];
                    }
                }
                MirrorSector::Odd => {
                    for k in 0..v.len() {
                        out[c + 1 + k] = r * v[k];
                        out[c - 1 - k] = -r * v[k];
                    }
                }
            }
        } else {
            let c = n / 2 - 1;
            for k in 0..v.len() {
                out[c + 1 + k] = r * v[k];
                out[c - k] = sign * r * v[k];
            }
        }
        out
    }
}
