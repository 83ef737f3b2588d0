//! Interference fringes: the far-field oracle of a released two-lobe kink
//! and measurements of spacing, peak heights and visibility.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};

/// Far-field pattern of two exponential lobes released from links `n₀`
/// and `n₀ + L`:
/// `p(x) ∝ [1 + cos(xL/2gt)] / [1 + x²/(2γ₀gt)²]²`, `x = n - n₀ - L/2`,
/// normalized over `n_links` links.
pub fn analytic_fringes(n0: usize, separation: usize, gamma0: f64, g: f64, t: f64, n_links: usize) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::param("t", "the far-field pattern needs t > 0"));
    }
    let validity = 2.0 * g * gamma0 * gamma0 * t;
    if validity < 5.0 {
        log::warn!("2gγ₀²t = {validity:.3} is small; the far-field pattern is not yet reached");
    }
    let mid = n0 as f64 + 0.5 * separation as f64;
    let l = separation as f64;
    let width = 2.0 * gamma0 * g * t;
    let raw: Vec<f64> = (0..n_links)
        .map(|n| {
            let x = n as f64 - mid;
            let env = 1.0 + (x / width).powi(2);
            (1.0 + (x * l / (2.0 * g * t)).cos()) / (env * env)
        })
        .collect();
    crate::distribution::normalize_probability(&raw)
}

/// Fringe period `4πgt/L`.
pub fn fringe_spacing_closed_form(g: f64, t: f64, separation: usize) -> f64 {
    4.0 * core::f64::consts::PI * g * t / separation as f64
}

/// Height of the second maximum relative to the first,
/// `1/[1 + 4π²/(Lγ₀)²]²`.
pub fn peak_ratio_closed_form(separation: usize, gamma0: f64) -> f64 {
    let lg = separation as f64 * gamma0;
    let d = 1.0 + 4.0 * core::f64::consts::PI * core::f64::consts::PI / (lg * lg);
    1.0 / (d * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    /// Three-tap `[1/4, 1/2, 1/4]` filter.
    Binomial,
    /// Binomial filter only when the raw data carries a period-2 ripple
    /// (the lattice Bessel oscillation).
    Auto,
}

/// Analysis window `|n - center| ≤ half_width`, optionally with the known
/// fringe period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeWindow {
    pub center: f64,
    pub half_width: f64,
    pub period: Option<f64>,
}

impl FringeWindow {
    pub fn new(center: f64, half_width: f64) -> Self {
        Self { center, half_width, period: None }
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    /// Central envelope `|x| ≤ 2γ₀gt` of a double-slit release.
    pub fn central_envelope(n0: usize, separation: usize, gamma0: f64, g: f64, t: f64) -> Self {
        Self::new(n0 as f64 + 0.5 * separation as f64, 2.0 * gamma0 * g * t)
    }

    fn range(&self, len: usize) -> (usize, usize) {
        let lo = (self.center - self.half_width).ceil().max(0.0) as usize;
        let hi = ((self.center + self.half_width).floor().max(0.0) as usize).min(len.saturating_sub(1));
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    /// Sub-link position from a parabola through the three samples.
    pub position: f64,
    pub value: f64,
}

pub fn binomial_smooth(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    if n < 3 {
        return p.to_vec();
    }
    let mut out = vec![0.0; n];
    out[0] = p[0];
    out[n - 1] = p[n - 1];
    for i in 1..n - 1 {
        out[i] = 0.25 * p[i - 1] + 0.5 * p[i] + 0.25 * p[i + 1];
    }
    out
}

/// Whether alternate samples zig-zag more often than not, measured as the
/// fraction of interior points that are discrete extrema.
pub fn has_period_two_ripple(p: &[f64]) -> bool {
    if p.len() < 8 {
        return false;
    }
    let flips = p.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
    flips as f64 > 0.25 * (p.len() - 2) as f64
}

fn apply_smoothing(p: &[f64], smoothing: Smoothing) -> Vec<f64> {
    match smoothing {
        Smoothing::None => p.to_vec(),
        Smoothing::Binomial => binomial_smooth(p),
        Smoothing::Auto => {
            if has_period_two_ripple(p) {
                binomial_smooth(p)
            } else {
                p.to_vec()
            }
        }
    }
}

fn parabola(y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return (0.0, y1);
    }
    let dx = (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5);
    (dx, y1 - 0.25 * (y0 - y2) * dx)
}

/// Strict discrete extrema of `p` inside the window, refined by parabolic
/// interpolation. Plateaus count once at their first sample.
pub fn find_extrema(p: &[f64], window: &FringeWindow) -> Vec<Extremum> {
    let (lo, hi) = window.range(p.len());
    let mut out = Vec::new();
    let first = lo.max(1);
    let last = hi.min(p.len().saturating_sub(2));
    let mut i = first;
    while i <= last {
        let mut j = i;
        while j + 1 < p.len() && p[j + 1] == p[i] {
            j += 1;
        }
        if j + 1 >= p.len() {
            break;
        }
        let (left, right) = (p[i - 1], p[j + 1]);
        let kind = if p[i] > left && p[i] > right {
            Some(ExtremumKind::Maximum)
        } else if p[i] < left && p[i] < right {
            Some(ExtremumKind::Minimum)
        } else {
            None
        };
        if let Some(kind) = kind {
            let (position, value) = if i == j {
                let (dx, v) = parabola(left, p[i], right);
                (i as f64 + dx, v)
            } else {
                (0.5 * (i + j) as f64, p[i])
            };
            out.push(Extremum { kind, position, value: value.max(0.0) });
        }
        i = j + 1;
    }
    out
}

fn minima(ext: &[Extremum]) -> Vec<Extremum> {
    ext.iter().copied().filter(|e| e.kind == ExtremumKind::Minimum).collect()
}

fn maxima(ext: &[Extremum]) -> Vec<Extremum> {
    ext.iter().copied().filter(|e| e.kind == ExtremumKind::Maximum).collect()
}

fn mean_gap(ext: &[Extremum]) -> Option<f64> {
    if ext.len() < 2 {
        return None;
    }
    Some((ext[ext.len() - 1].position - ext[0].position) / (ext.len() - 1) as f64)
}

/// Mean gap between adjacent interpolated minima in the window.
pub fn fringe_spacing(p: &[f64], window: &FringeWindow, smoothing: Smoothing) -> Result<f64> {
    let q = apply_smoothing(p, smoothing);
    let mins = minima(&find_extrema(&q, window));
    mean_gap(&mins).ok_or(Error::InsufficientExtrema { found: mins.len(), needed: 2 })
}

/// Period from the window's extrema (minima first, maxima as fallback).
pub fn estimate_period(p: &[f64], window: &FringeWindow, smoothing: Smoothing) -> Option<f64> {
    let q = apply_smoothing(p, smoothing);
    let ext = find_extrema(&q, window);
    mean_gap(&minima(&ext)).or_else(|| mean_gap(&maxima(&ext)))
}

/// Running mean over a window of `period` links (fractional edge weights),
/// truncated at the lattice ends.
pub fn running_mean(p: &[f64], period: f64) -> Vec<f64> {
    let n = p.len();
    let half = 0.5 * period.max(1.0);
    let whole = half.floor() as usize;
    let frac = half - whole as f64;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + p[i];
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(whole);
            let hi = (i + whole).min(n - 1);
            let mut s = prefix[hi + 1] - prefix[lo];
            let mut w = (hi + 1 - lo) as f64;
            if frac > 0.0 {
                if i > whole {
                    s += frac * p[i - whole - 1];
                    w += frac;
                }
                if i + whole + 1 < n {
                    s += frac * p[i + whole + 1];
                    w += frac;
                }
            }
            s / w
        })
        .collect()
}

/// `(p_max - p_min)/(p_max + p_min)` of the central fringe.
///
/// When a fringe period is known (given in the window or estimated from the
/// extrema) the pattern is first divided by its running mean over one
/// period, which removes the envelope so that the ratio measures the local
/// fringe contrast. The maximum is the one nearest the window center; the
/// minimum is the mean of the nearest minimum on each side. A pattern with
/// a maximum but no flanking minimum has visibility 0.
pub fn fringe_visibility(p: &[f64], window: &FringeWindow, smoothing: Smoothing) -> Result<f64> {
    let q = apply_smoothing(p, smoothing);
    let period = window.period.or_else(|| estimate_period(&q, window, Smoothing::None));
    let r = match period {
        Some(period) => {
            let avg = running_mean(&q, period);
            q.iter().zip(&avg).map(|(a, b)| if *b > 0.0 { a / b } else { 0.0 }).collect()
        }
        None => q,
    };
    let ext = find_extrema(&r, window);
    let maxs = maxima(&ext);
    let peak = maxs
        .iter()
        .min_by(|a, b| (a.position - window.center).abs().total_cmp(&(b.position - window.center).abs()))
        .copied()
        .ok_or(Error::InsufficientExtrema { found: ext.len(), needed: 1 })?;
    let mins = minima(&ext);
    let left = mins.iter().rfind(|e| e.position < peak.position);
    let right = mins.iter().find(|e| e.position > peak.position);
    let trough = match (left, right) {
        (Some(a), Some(b)) => 0.5 * (a.value + b.value),
        (Some(a), None) => a.value,
        (None, Some(b)) => b.value,
        (None, None) => return Ok(0.0),
    };
    if peak.value + trough <= 0.0 {
        return Ok(0.0);
    }
    Ok(((peak.value - trough) / (peak.value + trough)).clamp(0.0, 1.0))
}

/// Heights `(first, second)` of the central maximum and the mean of the
/// two adjacent maxima.
pub fn peak_heights(p: &[f64], window: &FringeWindow, smoothing: Smoothing) -> Result<(f64, f64)> {
    let q = apply_smoothing(p, smoothing);
    let maxs = maxima(&find_extrema(&q, window));
    let (k, first) = maxs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.position - window.center).abs().total_cmp(&(b.1.position - window.center).abs()))
        .map(|(k, e)| (k, *e))
        .ok_or(Error::InsufficientExtrema { found: 0, needed: 3 })?;
    let mut side = Vec::new();
    if k > 0 {
        side.push(maxs[k - 1].value);
    }
    if k + 1 < maxs.len() {
        side.push(maxs[k + 1].value);
    }
    if side.is_empty() {
        return Err(Error::InsufficientExtrema { found: maxs.len(), needed: 2 });
    }
    Ok((first.value, side.iter().sum::<f64>() / side.len() as f64))
}

pub fn peak_ratio(p: &[f64], window: &FringeWindow, smoothing: Smoothing) -> Result<f64> {
    let (a, b) = peak_heights(p, window, smoothing)?;
    Ok(b / a)
}

/// Probability outside the first minimum on each side of the central
/// maximum.
pub fn outer_fringe_mass(p: &[f64], window: &FringeWindow, smoothing: Smoothing) -> Result<f64> {
    let q = apply_smoothing(p, smoothing);
    let ext = find_extrema(&q, window);
    let mins = minima(&ext);
    let left = mins.iter().rfind(|e| e.position < window.center);
    let right = mins.iter().find(|e| e.position > window.center);
    let (Some(left), Some(right)) = (left, right) else {
        return Err(Error::InsufficientExtrema { found: mins.len(), needed: 2 });
    };
    let total: f64 = p.iter().sum();
    let inner: f64 = p
        .iter()
        .enumerate()
        .filter(|(n, _)| (*n as f64) > left.position && (*n as f64) < right.position)
        .map(|(_, v)| v)
        .sum();
    Ok((total - inner) / total)
}

/// Amplitude `2|Σ pₙ e^{2πin/P}| / Σ pₙ` of the fringe harmonic. For
/// `E(x)(1 + V cos(2πx/P))` under an envelope wide against `P` this is `V`.
pub fn fringe_contrast(p: &[f64], period: f64) -> Result<f64> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParameter { name: "period", reason: alloc::format!("{period} is not positive") });
    }
    let k = 2.0 * core::f64::consts::PI / period;
    let (mut re, mut im, mut total) = (0.0, 0.0, 0.0);
    for (n, &x) in p.iter().enumerate() {
        let phase = k * n as f64;
        re += x * phase.cos();
        im += x * phase.sin();
        total += x;
    }
    if total <= 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(2.0 * (re * re + im * im).sqrt() / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(t: f64) -> (Vec<f64>, FringeWindow) {
        let g0 = 0.15f64.asinh();
        let p = analytic_fringes(1000, 100, g0, 1.0, t, 2101).unwrap();
        (p, FringeWindow::central_envelope(1000, 100, g0, 1.0, t))
    }

    #[test]
    fn analytic_pattern_shape() {
        let (p, _) = pattern(1000.0);
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let argmax = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert_eq!(argmax, 1050);
        // zero of 1 + cos at x = 2πgt/L
        let zero = 1050.0 + 2.0 * core::f64::consts::PI * 1000.0 / 100.0;
        let g0 = 0.15f64.asinh();
        let q = analytic_fringes(1000, 100, g0, 1.0, 1000.0, 2101).unwrap();
        let i = zero.floor() as usize;
        assert!(q[i] < 1e-3 * q[1050] && q[i + 1] < 1e-3 * q[1050]);
    }

    #[test]
    fn closed_forms() {
        assert!((fringe_spacing_closed_form(1.0, 1000.0, 100) - 125.663_706_143_591_72).abs() < 1e-9);
        let r = peak_ratio_closed_form(100, 0.15f64.asinh());
        assert!((r - 0.722_1).abs() < 1e-3);
    }

    #[test]
    fn measured_on_the_oracle() {
        let (p, w) = pattern(1000.0);
        let s = fringe_spacing(&p, &w, Smoothing::None).unwrap();
        assert!((s / fringe_spacing_closed_form(1.0, 1000.0, 100) - 1.0).abs() < 0.01, "{s}");
        let v = fringe_visibility(&p, &w, Smoothing::None).unwrap();
        assert!(v > 0.999, "{v}");
        let ratio = peak_ratio(&p, &w, Smoothing::None).unwrap();
        assert!(ratio < 1.0 && ratio > 0.5);
    }

    #[test]
    fn smooth_bump_has_no_visibility() {
        let p: Vec<f64> = (0..201).map(|n| (-((n as f64 - 100.0) / 28.0).powi(2) / 2.0).exp()).collect();
        let w = FringeWindow::new(100.0, 80.0);
        assert_eq!(fringe_visibility(&p, &w, Smoothing::Auto).unwrap(), 0.0);
        assert!(matches!(fringe_spacing(&p, &w, Smoothing::Auto), Err(Error::InsufficientExtrema { .. })));
    }

    #[test]
    fn flat_data_errors() {
        let p = vec![1.0; 50];
        let w = FringeWindow::new(25.0, 20.0);
        assert!(fringe_visibility(&p, &w, Smoothing::None).is_err());
    }

    #[test]
    fn partial_contrast_is_recovered() {
        // [1 + c cos(kx)] under a broad envelope: visibility c
        let c = 0.3;
        let p: Vec<f64> = (0..2001)
            .map(|n| {
                let x = n as f64 - 1000.0;
                (1.0 + c * (x * 0.05).cos()) / (1.0 + (x / 400.0).powi(2)).powi(2)
            })
            .collect();
        let w = FringeWindow::new(1000.0, 300.0);
        let v = fringe_visibility(&p, &w, Smoothing::None).unwrap();
        assert!((v - c).abs() < 0.01, "{v}");
    }

    #[test]
    fn harmonic_contrast_of_a_broad_pattern() {
        let c = 0.3;
        let p: Vec<f64> = (0..4001)
            .map(|n| {
                let x = n as f64 - 2000.0;
                (1.0 + c * (x * 0.05 + 0.4).cos()) * (-(x / 300.0).powi(2)).exp()
            })
            .collect();
        let v = fringe_contrast(&p, 2.0 * core::f64::consts::PI / 0.05).unwrap();
        assert!((v - c).abs() < 1e-9, "{v}");
        assert!(fringe_contrast(&p, 0.0).is_err());
        assert!(fringe_contrast(&[0.0; 5], 3.0).is_err());
    }

    #[test]
    fn ripple_detection() {
        let rough: Vec<f64> = (0..40).map(|n| 1.0 + if n % 2 == 0 { 0.01 } else { 0.0 }).collect();
        assert!(has_period_two_ripple(&rough));
        let smooth: Vec<f64> = (0..40).map(|n| (n as f64 * 0.1).sin()).collect();
        assert!(!has_period_two_ripple(&smooth));
    }
}
