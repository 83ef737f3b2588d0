//! `exp(-iHt) ψ` by Chebyshev expansion,
//! `e^{-ixz} = J_0(z) + 2 Σ_k (-i)^k J_k(z) T_k(x)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::bessel::{bessel_j_sequence, significant_orders};

/// Truncation level for the expansion coefficients.
pub const CHEBYSHEV_CUTOFF: f64 = 1e-18;

/// Precomputed expansion for a fixed spectral window and time step.
#[derive(Debug, Clone)]
pub struct ChebyshevPlan {
    center: f64,
    radius: f64,
    phase: Complex64,
    coeffs: Vec<Complex64>,
}

impl ChebyshevPlan {
    /// `bounds` must enclose the spectrum of the operator.
    pub fn new(bounds: (f64, f64), t: f64) -> Self {
        let center = 0.5 * (bounds.0 + bounds.1);
        let radius = (0.5 * (bounds.1 - bounds.0)).max(1e-12);
        let z = radius * t;
        let k_max = significant_orders(z, CHEBYSHEV_CUTOFF).max(1);
        let j = bessel_j_sequence(z.abs(), k_max);
        let mut coeffs = Vec::with_capacity(k_max + 1);
        let mut minus_i_pow = Complex64::new(1.0, 0.0);
        for (k, &jk) in j.iter().enumerate() {
            // J_k(-z) = (-1)^k J_k(z)
            let jk = if z < 0.0 && k % 2 == 1 { -jk } else { jk };
            let weight = if k == 0 { 1.0 } else { 2.0 };
            coeffs.push(minus_i_pow * (weight * jk));
            minus_i_pow *= Complex64::new(0.0, -1.0);
        }
        let phase = Complex64::from_polar(1.0, -center * t);
        Self { center, radius, phase, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn apply<F>(&self, mut apply_h: F, psi: &[Complex64]) -> Vec<Complex64>
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let n = psi.len();
        let scale = 1.0 / self.radius;
        let shift = self.center;
        let mut scaled = |x: &[Complex64], y: &mut [Complex64]| {
            apply_h(x, y);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = (*yi - xi * shift) * scale;
            }
        };
        let mut out: Vec<Complex64> = psi.iter().map(|z| z * self.coeffs[0]).collect();
        if self.coeffs.len() == 1 {
            return out.iter().map(|z| z * self.phase).collect();
        }
        let mut prev = psi.to_vec();
        let mut cur = vec![Complex64::new(0.0, 0.0); n];
        scaled(&prev, &mut cur);
        for (o, c) in out.iter_mut().zip(&cur) {
            *o += c * self.coeffs[1];
        }
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for coeff in &self.coeffs[2..] {
            scaled(&cur, &mut next);
            for i in 0..n {
                next[i] = next[i] * 2.0 - prev[i];
                out[i] += next[i] * coeff;
            }
            core::mem::swap(&mut prev, &mut cur);
            core::mem::swap(&mut cur, &mut next);
        }
        for o in out.iter_mut() {
            *o *= self.phase;
        }
        out
    }
}

/// One-shot convenience wrapper around [`ChebyshevPlan`].
pub fn chebyshev_propagate<F>(apply_h: F, bounds: (f64, f64), t: f64, psi: &[Complex64]) -> Vec<Complex64>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    ChebyshevPlan::new(bounds, t).apply(apply_h, psi)
}
