//! Dephasing master equation
//! `dρ_mn/dt = -i[H, ρ]_mn - Γ|m - n| ρ_mn`
//! integrated by Strang splitting into exact sub-flows: conjugation by the
//! banded short-time propagator and elementwise decay.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, Tridiagonal};
use crate::lattice::{Boundary, LatticeSpec, GUARD_WEIGHT_LIMIT};
use crate::linalg::BandedUnitary;
use crate::state::{KinkDensityMatrix, ProbabilityTrace, TraceMetadata};

/// Trace drift tolerated at an output time.
pub const TRACE_TOLERANCE: f64 = 1e-10;
/// Most negative diagonal entry tolerated at an output time.
pub const DIAGONAL_FLOOR: f64 = -1e-8;
/// Entries below this magnitude at the edge of the active band or support
/// are dropped.
pub const TRIM_LEVEL: f64 = 1e-16;
/// Target accuracy used to pick the default step.
pub const STEP_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DephasingConfig {
    pub gamma: f64,
    /// `None` picks [`DephasingConfig::auto_step`].
    pub dt: Option<f64>,
    /// Output times; the final time is always recorded.
    pub output_times: Vec<f64>,
    /// Guard band checked at every output time (unbounded lattices).
    pub guard_links: Option<usize>,
}

impl DephasingConfig {
    pub fn new(gamma: f64) -> Self {
        Self { gamma, dt: None, output_times: Vec::new(), guard_links: None }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = times;
        self
    }

    pub fn with_guard(mut self, guard: usize) -> Self {
        self.guard_links = Some(guard);
        self
    }

    /// Default step. The leading splitting error over a run of length
    /// `t_end` scales as `t_end · dt² · gΓ(g + Γ) / 12` (the commutator of
    /// hopping with the dephasing generator is bounded by `2gΓ` because
    /// `|m ± 1 - n|` differs from `|m - n|` by one); the step is also capped
    /// at `1/(4g)` and `0.1/Γ`.
    pub fn auto_step(g: f64, gamma: f64, t_end: f64) -> f64 {
        let mut dt = 0.25 / g;
        if gamma > 0.0 {
            dt = dt.min(0.1 / gamma);
            let c = t_end * g * gamma * (g + gamma);
            if c > 0.0 {
                dt = dt.min((12.0 * STEP_TOLERANCE / c).sqrt());
            }
        }
        dt
    }

    pub fn validate(&self, g: f64, t_end: f64) -> Result<f64> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::param("t_end", format!("must be finite and >= 0, got {t_end}")));
        }
        let dt = self.dt.unwrap_or_else(|| Self::auto_step(g, self.gamma, t_end));
        if !(dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if dt * 4.0 * g > 1.0 {
            return Err(Error::param("dt", format!("δt·4g = {} exceeds 1", dt * 4.0 * g)));
        }
        if dt * self.gamma > 0.1 {
            return Err(Error::param("dt", format!("δt·Γ = {} exceeds 0.1", dt * self.gamma)));
        }
        for (i, &t) in self.output_times.iter().enumerate() {
            if !(t > 0.0 && t <= t_end) {
                return Err(Error::param("output_times", format!("{t} is outside (0, {t_end}]")));
            }
            if i > 0 && !(t > self.output_times[i - 1]) {
                return Err(Error::param("output_times", "must increase strictly"));
            }
        }
        Ok(dt)
    }
}

#[derive(Debug, Clone)]
pub struct MasterRun {
    pub trace: ProbabilityTrace,
    pub final_state: KinkDensityMatrix,
    pub dt: f64,
    pub steps: usize,
    /// Largest coherence distance kept during the run.
    pub max_band: usize,
}

/// Dense ρ with an active rectangle `[lo, hi]` and coherence band `|m - n| ≤ band`.
struct Workspace {
    n: usize,
    rho: Vec<Complex64>,
    scratch: Vec<Complex64>,
    next: Vec<Complex64>,
    lo: usize,
    hi: usize,
    band: usize,
}

impl Workspace {
    fn from_density(rho: &KinkDensityMatrix) -> Self {
        let n = rho.dim();
        let entries = rho.entries().to_vec();
        let mut lo = n;
        let mut hi = 0;
        let mut band = 0;
        for m in 0..n {
            for k in 0..n {
                if entries[m * n + k].norm() > 0.0 {
                    lo = lo.min(m);
                    hi = hi.max(m);
                    band = band.max(m.abs_diff(k));
                }
            }
        }
        if lo > hi {
            lo = 0;
            hi = 0;
        }
        Self { n, rho: entries, scratch: vec![Complex64::new(0.0, 0.0); n * n], next: vec![Complex64::new(0.0, 0.0); n * n], lo, hi, band }
    }

    /// ρ ← U ρ U†, filling only the upper triangle and mirroring it.
    fn conjugate(&mut self, u: &BandedUnitary) {
        let n = self.n;
        let b = u.half_width();
        let (lo, hi, r) = (self.lo, self.hi, self.band);
        let new_lo = lo.saturating_sub(b);
        let new_hi = (hi + b).min(n - 1);
        let rb = r + b;
        // X = U ρ on rows new_lo..=new_hi, columns lo..=hi within rb
        for i in new_lo..=new_hi {
            let (first, urow) = u.row(i);
            let c_lo = i.saturating_sub(rb).max(lo);
            let c_hi = (i + rb).min(hi);
            if c_lo > c_hi {
                continue;
            }
            let xrow = &mut self.scratch[i * n..(i + 1) * n];
            for x in &mut xrow[c_lo..=c_hi] {
                *x = Complex64::new(0.0, 0.0);
            }
            let k_lo = first.max(lo);
            let k_hi = (first + urow.len() - 1).min(hi);
            for k in k_lo..=k_hi {
                let u_ik = urow[k - first];
                let c0 = c_lo.max(k.saturating_sub(r));
                let c1 = c_hi.min(k + r);
                if c0 > c1 {
                    continue;
                }
                let src = &self.rho[k * n + c0..=k * n + c1];
                for (x, y) in xrow[c0..=c1].iter_mut().zip(src) {
                    *x += u_ik * y;
                }
            }
        }
        // Y = X U†, upper triangle m <= col, col - m <= r + 2b
        let r2 = r + 2 * b;
        for m in new_lo..=new_hi {
            let x_lo = m.saturating_sub(rb).max(lo);
            let x_hi = (m + rb).min(hi);
            let col_hi = (m + r2).min(new_hi);
            for col in m..=col_hi {
                let (first, urow) = u.row(col);
                let k_lo = first.max(x_lo);
                let k_hi = (first + urow.len() - 1).min(x_hi);
                let mut acc = Complex64::new(0.0, 0.0);
                if k_lo <= k_hi {
                    let xrow = &self.scratch[m * n..(m + 1) * n];
                    for k in k_lo..=k_hi {
                        acc += xrow[k] * urow[k - first].conj();
                    }
                }
                if col == m {
                    acc.im = 0.0;
                }
                self.next[m * n + col] = acc;
                self.next[col * n + m] = acc.conj();
            }
        }
        core::mem::swap(&mut self.rho, &mut self.next);
        self.lo = new_lo;
        self.hi = new_hi;
        self.band = r2.min(new_hi - new_lo);
    }

    fn dephase(&mut self, factors: &[f64]) {
        let n = self.n;
        for m in self.lo..=self.hi {
            let c_lo = m.saturating_sub(self.band).max(self.lo);
            let c_hi = (m + self.band).min(self.hi);
            for col in c_lo..=c_hi {
                let d = m.abs_diff(col);
                if d > 0 {
                    self.rho[m * n + col] *= factors[d.min(factors.len() - 1)];
                }
            }
        }
    }

    fn row_max(&self, m: usize) -> f64 {
        let n = self.n;
        let c_lo = m.saturating_sub(self.band).max(self.lo);
        let c_hi = (m + self.band).min(self.hi);
        (c_lo..=c_hi).map(|c| self.rho[m * n + c].norm()).fold(0.0, f64::max)
    }

    fn trim(&mut self) {
        while self.lo < self.hi && self.row_max(self.lo) < TRIM_LEVEL {
            self.lo += 1;
        }
        while self.hi > self.lo && self.row_max(self.hi) < TRIM_LEVEL {
            self.hi -= 1;
        }
        self.band = self.band.min(self.hi - self.lo);
        let n = self.n;
        while self.band > 0 {
            let d = self.band;
            let worst = (self.lo..=self.hi - d).map(|m| self.rho[m * n + m + d].norm()).fold(0.0, f64::max);
            if worst >= TRIM_LEVEL {
                break;
            }
            self.band -= 1;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| if i >= self.lo && i <= self.hi { self.rho[i * n + i].re } else { 0.0 }).collect()
    }

    fn to_density(&self, time: f64) -> KinkDensityMatrix {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for m in self.lo..=self.hi {
            let c_lo = m.saturating_sub(self.band).max(self.lo);
            let c_hi = (m + self.band).min(self.hi);
            for c in c_lo..=c_hi {
                out[m * n + c] = self.rho[m * n + c];
            }
        }
        KinkDensityMatrix::from_raw(n, out, time)
    }
}

fn check_output(p: &[f64], time: f64, guard: Option<usize>) -> Result<()> {
    let trace: f64 = p.iter().sum();
    if (trace - 1.0).abs() > TRACE_TOLERANCE {
        return Err(Error::InvariantViolation { what: "trace", time, value: trace - 1.0 });
    }
    let lowest = p.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest < DIAGONAL_FLOOR {
        return Err(Error::InvariantViolation { what: "diagonal positivity", time, value: lowest });
    }
    if let Some(g) = guard {
        let weight = crate::unitary::guard_weight(p, g);
        if weight > GUARD_WEIGHT_LIMIT {
            return Err(Error::EdgeContact { time, weight });
        }
    }
    Ok(())
}

/// Evolves `rho` under `h` with per-link dephasing `Γ|m - n|` until `t_end`,
/// recording the diagonal at the configured output times.
pub fn evolve_master(rho: &KinkDensityMatrix, h: &Tridiagonal, cfg: &DephasingConfig, t_end: f64) -> Result<MasterRun> {
    if rho.dim() != h.dim() {
        return Err(Error::LengthMismatch { left: rho.dim(), right: h.dim() });
    }
    rho.check(crate::state::DENSITY_TOLERANCE)?;
    let g = h.off().iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    let dt_max = cfg.validate(g, t_end)?;
    let mut times = cfg.output_times.clone();
    if times.last().is_none_or(|&t| t < t_end) && t_end > 0.0 {
        times.push(t_end);
    }

    let mut meta = TraceMetadata::default()
        .with("gamma", cfg.gamma)
        .with("dt_max", dt_max)
        .with("integrator", "strang")
        .with("trim_level", TRIM_LEVEL);
    if let Some(guard) = cfg.guard_links {
        meta.set("guard_links", guard);
    }
    let mut trace = ProbabilityTrace::new(meta);
    let mut ws = Workspace::from_density(rho);
    let mut cache: BTreeMap<u64, BandedUnitary> = BTreeMap::new();
    let mut unitary = |tau: f64| -> BandedUnitary {
        cache.entry(tau.to_bits()).or_insert_with(|| BandedUnitary::new(h, tau)).clone()
    };
    let mut t_now = rho.time();
    let mut steps_total = 0;
    let mut max_band = ws.band;
    let start = rho.time();
    for &t_out in &times {
        let target = start + t_out;
        let span = target - t_now;
        let steps = (span / dt_max - 1e-9).ceil().max(1.0) as usize;
        let step = span / steps as f64;
        let factors: Vec<f64> = (0..=ws.n).map(|d| (-cfg.gamma * d as f64 * step).exp()).collect();
        let half = unitary(0.5 * step);
        let full = unitary(step);
        ws.conjugate(&half);
        for s in 0..steps {
            ws.dephase(&factors);
            ws.conjugate(if s + 1 == steps { &half } else { &full });
            ws.trim();
            max_band = max_band.max(ws.band);
        }
        steps_total += steps;
        t_now = target;
        let p = ws.diagonal();
        check_output(&p, t_out, cfg.guard_links)?;
        trace.push(t_out, p)?;
    }
    let final_state = ws.to_density(t_now);
    let defect = final_state.hermiticity_defect();
    if defect > TRACE_TOLERANCE {
        return Err(Error::InvariantViolation { what: "hermiticity", time: t_now - start, value: defect });
    }
    trace.metadata_mut().set("steps", steps_total);
    Ok(MasterRun { trace, final_state, dt: dt_max, steps: steps_total, max_band })
}

/// Convenience wrapper that builds the Hamiltonian from `spec` and enables
/// the guard band on unbounded lattices.
pub fn evolve_master_on(spec: &LatticeSpec, rho: &KinkDensityMatrix, cfg: &DephasingConfig, t_end: f64) -> Result<MasterRun> {
    let mut cfg = cfg.clone();
    if spec.boundary() == Boundary::EffectivelyInfinite && cfg.guard_links.is_none() {
        cfg.guard_links = Some(spec.guard_links());
    }
    let mut run = evolve_master(rho, &build_hamiltonian(spec), &cfg, t_end)?;
    run.trace.metadata_mut().lattice = Some(spec.clone());
    Ok(run)
}

/// Lattice for a dephasing run: two wells `L` apart with room for the bound
/// state tails, the ballistic spread up to `t_end` and a guard band of
/// `guard` links on each side. Returns the lattice and the left well.
pub fn decoherence_lattice(g: f64, w: f64, separation: usize, t_end: f64, guard: usize) -> Result<(LatticeSpec, usize)> {
    let gamma0 = crate::bound_states::inverse_decay_length(w, g)?;
    if gamma0 == 0.0 {
        return Err(Error::param("w", "wells of zero strength bind nothing"));
    }
    let tail = (40.0 / gamma0).ceil() as usize;
    let spread = (2.0 * g * t_end).ceil() as usize + crate::unitary::ballistic_margin(g, t_end);
    let half = tail + spread + guard;
    let n_links = 2 * half + separation + 1;
    let spec = LatticeSpec::with_links(n_links, g, Boundary::EffectivelyInfinite)?
        .with_guard_links(guard)
        .with_well(half, w)?
        .with_well(half + separation, w)?;
    Ok((spec, half))
}
