//! Helpers on amplitude vectors and probability distributions over links.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Σₙ |pₙ − qₙ|.
pub fn l1_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { left: p.len(), right: q.len() });
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Scales `v` to unit 2-norm. The global phase is left untouched.
pub fn normalize(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let n2 = norm_sqr(v);
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::ZeroVector);
    }
    let inv = 1.0 / n2.sqrt();
    Ok(v.iter().map(|z| z * inv).collect())
}

pub fn normalize_real(v: &[f64]) -> Result<Vec<f64>> {
    let n2: f64 = v.iter().map(|x| x * x).sum();
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::ZeroVector);
    }
    let inv = 1.0 / n2.sqrt();
    Ok(v.iter().map(|x| x * inv).collect())
}

/// Rescales a non-negative weight vector to unit sum.
pub fn normalize_probability(p: &[f64]) -> Result<Vec<f64>> {
    let s: f64 = p.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(p.iter().map(|x| x / s).collect())
}

pub fn probabilities(amplitudes: &[Complex64]) -> Vec<f64> {
    amplitudes.iter().map(|z| z.norm_sqr()).collect()
}

/// Mean link index (weights need not be normalized).
pub fn mean(p: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    p.iter().enumerate().map(|(n, &w)| n as f64 * w).sum::<f64>() / total
}

pub fn variance(p: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    let mu = mean(p);
    p.iter()
        .enumerate()
        .map(|(n, &w)| {
            let d = n as f64 - mu;
            d * d * w
        })
        .sum::<f64>()
        / total
}

/// Largest |p(c + k) − p(c − k)| over all offsets that stay on the lattice.
pub fn mirror_residual(p: &[f64], center: usize) -> f64 {
    let reach = center.min(p.len() - 1 - center);
    (1..=reach).map(|k| (p[center + k] - p[center - k]).abs()).fold(0.0, f64::max)
}

/// Mean cell-to-cell variation relative to the peak,
/// `mean |pₙ₊₁ − pₙ| / max p`.
pub fn jaggedness(p: &[f64]) -> f64 {
    if p.len() < 2 {
        return 0.0;
    }
    let peak = p.iter().copied().fold(0.0, f64::max);
    let total: f64 = p.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    total / (p.len() - 1) as f64 / peak
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}
