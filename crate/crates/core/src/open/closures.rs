//! Reduced descriptions of the dephasing dynamics: the strong-decoherence
//! hydrodynamic pair, its diffusion limit, and the weak-decoherence
//! Lorentzian blur of the coherent pattern.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::state::{KinkDensityMatrix, ProbabilityTrace, TraceMetadata};

/// Below this ratio `Γ/g` the strong-decoherence closure is outside its
/// regime and a warning is logged.
pub const STRONG_REGIME_RATIO: f64 = 5.0;

/// Nearest-neighbour current field `s_n = -2 Im ρ_{n,n+1}` on the
/// `n_links - 1` bonds.
pub fn slave_field(rho: &KinkDensityMatrix) -> Vec<f64> {
    let n = rho.dim();
    (0..n.saturating_sub(1)).map(|i| -2.0 * rho.get(i, i + 1).im).collect()
}

fn reduced_rhs(p: &[f64], s: &[f64], g: f64, gamma: f64, dp: &mut [f64], ds: &mut [f64]) {
    let n = p.len();
    for i in 0..n {
        let left = if i > 0 { s[i - 1] } else { 0.0 };
        let right = if i + 1 < n { s[i] } else { 0.0 };
        dp[i] = g * (left - right);
    }
    for i in 0..n - 1 {
        ds[i] = -gamma * s[i] - 2.0 * g * (p[i + 1] - p[i]);
    }
}

/// Strong-decoherence hydrodynamics
/// `ṗ_n = g(s_{n-1} - s_n)`, `ṡ_n = -Γ s_n - 2g(p_{n+1} - p_n)`
/// integrated by RK4 with hard-wall bond conditions. `s0` defaults to zero.
pub fn strong_decoherence_reduced(
    p0: &[f64],
    s0: Option<&[f64]>,
    g: f64,
    gamma: f64,
    times: &[f64],
) -> Result<ProbabilityTrace> {
    if p0.len() < 2 {
        return Err(Error::param("p0", "needs at least two links"));
    }
    if !(gamma > 0.0) || !(g > 0.0) {
        return Err(Error::param("gamma", "g and Γ must be positive"));
    }
    if gamma < STRONG_REGIME_RATIO * g {
        log::warn!("strong-decoherence closure used at Γ/g = {} < {STRONG_REGIME_RATIO}", gamma / g);
    }
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut s = match s0 {
        Some(s0) if s0.len() == n - 1 => s0.to_vec(),
        Some(s0) => return Err(Error::LengthMismatch { left: s0.len(), right: n - 1 }),
        None => vec![0.0; n - 1],
    };
    let dt_max = (0.1 / gamma).min(0.05 / g);
    let meta = TraceMetadata::default().with("gamma", gamma).with("closure", "strong").with("dt_max", dt_max);
    let mut trace = ProbabilityTrace::new(meta);
    let (mut k1p, mut k2p, mut k3p, mut k4p) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut k1s, mut k2s, mut k3s, mut k4s) = (vec![0.0; n - 1], vec![0.0; n - 1], vec![0.0; n - 1], vec![0.0; n - 1]);
    let mut tp = vec![0.0; n];
    let mut ts = vec![0.0; n - 1];
    let mut t_now = 0.0;
    for &t_out in times {
        if !(t_out > t_now) && !(t_out == 0.0 && t_now == 0.0) {
            return Err(Error::param("times", "must increase strictly from a non-negative start"));
        }
        let span = t_out - t_now;
        let steps = (span / dt_max).ceil() as usize;
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        for _ in 0..steps {
            reduced_rhs(&p, &s, g, gamma, &mut k1p, &mut k1s);
            for i in 0..n {
                tp[i] = p[i] + 0.5 * h * k1p[i];
            }
            for i in 0..n - 1 {
                ts[i] = s[i] + 0.5 * h * k1s[i];
            }
            reduced_rhs(&tp, &ts, g, gamma, &mut k2p, &mut k2s);
            for i in 0..n {
                tp[i] = p[i] + 0.5 * h * k2p[i];
            }
            for i in 0..n - 1 {
                ts[i] = s[i] + 0.5 * h * k2s[i];
            }
            reduced_rhs(&tp, &ts, g, gamma, &mut k3p, &mut k3s);
            for i in 0..n {
                tp[i] = p[i] + h * k3p[i];
            }
            for i in 0..n - 1 {
                ts[i] = s[i] + h * k3s[i];
            }
            reduced_rhs(&tp, &ts, g, gamma, &mut k4p, &mut k4s);
            for i in 0..n {
                p[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
            }
            for i in 0..n - 1 {
                s[i] += h / 6.0 * (k1s[i] + 2.0 * k2s[i] + 2.0 * k3s[i] + k4s[i]);
            }
        }
        t_now = t_out;
        trace.push(t_out, p.clone())?;
    }
    Ok(trace)
}

/// Diffusion constant of the strong-decoherence limit, `2g²/Γ`.
pub fn diffusion_constant(g: f64, gamma: f64) -> f64 {
    2.0 * g * g / gamma
}

/// `p0` convolved with the Gaussian heat kernel of variance `2Dt`, sampled on
/// the lattice and renormalized per source so probability is conserved.
pub fn diffusion_oracle(p0: &[f64], d: f64, t: f64) -> Result<Vec<f64>> {
    if !(d >= 0.0) || !(t >= 0.0) {
        return Err(Error::param("diffusion", format!("D = {d} and t = {t} must be >= 0")));
    }
    let var = 2.0 * d * t;
    if var == 0.0 {
        return Ok(p0.to_vec());
    }
    if var < 5.0 {
        log::warn!("diffusion oracle sampled with variance {var} below 5 link²");
    }
    let n = p0.len();
    let kernel: Vec<f64> = (0..n).map(|k| (-(k as f64).powi(2) / (2.0 * var)).exp()).collect();
    Ok(column_normalized_blur(p0, &kernel))
}

/// Blurs `p` with the symmetric kernel `kernel[|d|]` (defined for
/// `|d| < p.len()`), normalizing each source column over the lattice.
fn column_normalized_blur(p: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + kernel[k];
    }
    let mut out = vec![0.0; n];
    for (m, &pm) in p.iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        let column = prefix[m + 1] + prefix[n - m] - kernel[0];
        let weight = pm / column;
        for (i, o) in out.iter_mut().enumerate() {
            *o += weight * kernel[i.abs_diff(m)];
        }
    }
    out
}

/// Lorentzian width `l = gΓt²` of the weak-decoherence blur.
pub fn lorentzian_width(g: f64, gamma: f64, t: f64) -> f64 {
    g * gamma * t * t
}

/// Weak-decoherence closure: the coherent distribution `p_pure` at time `t`
/// blurred by a Lorentzian of half-width `gΓt²`.
pub fn lorentzian_oracle(p_pure: &[f64], g: f64, gamma: f64, t: f64) -> Result<Vec<f64>> {
    if !(gamma >= 0.0) || !(t >= 0.0) || !(g > 0.0) {
        return Err(Error::param("lorentzian", "g must be positive, Γ and t non-negative"));
    }
    let l = lorentzian_width(g, gamma, t);
    if l == 0.0 {
        return Ok(p_pure.to_vec());
    }
    let n = p_pure.len();
    let kernel: Vec<f64> = (0..n).map(|k| l / (PI * (l * l + (k as f64).powi(2)))).collect();
    Ok(column_normalized_blur(p_pure, &kernel))
}

/// Time at which the accumulated relative dephasing `ΓLt` of the two
/// interfering paths reaches `4π`.
pub fn decoherence_time(gamma: f64, separation: usize) -> f64 {
    4.0 * PI / (gamma * separation as f64)
}

/// Finds `t` in `[lo, hi]` with `f(t) = target` by bisection, assuming
/// `f(lo) > target > f(hi)` (a decaying quantity such as visibility).
pub fn decay_crossing<F>(mut f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if !(f_lo > target && f_hi < target) {
        return Err(Error::BracketFailure { lo, hi });
    }
    while hi - lo > tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
