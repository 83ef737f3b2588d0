//! Closed-system propagation of a kink state.
//!
//! Three engines are provided: exact propagation through the eigenbasis of
//! the Hamiltonian, the Bessel-function kernel of free hopping on an
//! unbounded lattice, and a second-order split-step integrator for
//! time-dependent well depths.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::bessel::{bessel_j_sequence, significant_orders};
use crate::bound_states::{double_well_geometry, exact_double_well_pair, single_well_profile};
use crate::distribution::norm_sqr;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, Tridiagonal};
use crate::lattice::{Boundary, LatticeSpec, GUARD_WEIGHT_LIMIT};
use crate::linalg::{symmetric_eigen, BandedUnitary, SymmetricEigen};
use crate::state::{KinkState, ProbabilityTrace, TraceMetadata};

/// Allowed norm drift over a whole run.
pub const RUN_NORM_TOLERANCE: f64 = 1e-8;

/// Default split-step size in units of `1/g`.
pub const DEFAULT_SPLIT_STEP: f64 = 0.01;

/// Kernel entries below this magnitude are dropped.
const KERNEL_CUTOFF: f64 = 1e-17;

/// Exact propagation `U e^{-iΛt} Uᵀ` with a cached eigenbasis.
#[derive(Debug, Clone)]
pub struct EigenPropagator {
    h: Tridiagonal,
    eig: SymmetricEigen,
}

impl EigenPropagator {
    pub fn new(h: &Tridiagonal) -> Result<Self> {
        Ok(Self { h: h.clone(), eig: symmetric_eigen(h)? })
    }

    pub fn for_lattice(spec: &LatticeSpec) -> Result<Self> {
        Self::new(&build_hamiltonian(spec))
    }

    pub fn hamiltonian(&self) -> &Tridiagonal {
        &self.h
    }

    pub fn eigen(&self) -> &SymmetricEigen {
        &self.eig
    }

    pub fn propagate_amplitudes(&self, psi: &[Complex64], dt: f64) -> Vec<Complex64> {
        let n = self.eig.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        if dt == 0.0 {
            out.copy_from_slice(psi);
            return out;
        }
        for k in 0..n {
            let v = self.eig.vector(k);
            let c: Complex64 = v.iter().zip(psi).map(|(a, b)| b * a).sum();
            let c = c * Complex64::from_polar(1.0, -self.eig.values()[k] * dt);
            for (o, a) in out.iter_mut().zip(v) {
                *o += c * a;
            }
        }
        out
    }

    pub fn propagate(&self, state: &KinkState, dt: f64) -> Result<KinkState> {
        if state.len() != self.eig.dim() {
            return Err(Error::LengthMismatch { left: state.len(), right: self.eig.dim() });
        }
        let out = self.propagate_amplitudes(state.amplitudes(), dt);
        Ok(KinkState::from_parts(out, state.time() + dt))
    }
}

/// `K_d(t) = i^{|d|} J_{|d|}(2gt)` for `|d| ≤ reach`, truncated where the
/// Bessel function is negligible.
pub fn bessel_kernel(g: f64, t: f64) -> Vec<Complex64> {
    let x = 2.0 * g * t;
    let reach = significant_orders(x, KERNEL_CUTOFF);
    let j = bessel_j_sequence(x.abs(), reach);
    let mut ipow = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(reach + 1);
    for (d, &jd) in j.iter().enumerate() {
        // time reversal flips the sign of odd orders
        let jd = if x < 0.0 && d % 2 == 1 { -jd } else { jd };
        out.push(ipow * jd);
        ipow *= Complex64::new(0.0, 1.0);
    }
    out
}

/// Probability in the first and last `guard` links.
pub fn guard_weight(p: &[f64], guard: usize) -> f64 {
    let n = p.len();
    let g = guard.min(n / 2);
    p[..g].iter().sum::<f64>() + p[n - g..].iter().sum::<f64>()
}

fn check_guard(spec: &LatticeSpec, psi: &[Complex64], time: f64) -> Result<()> {
    if spec.boundary() != Boundary::EffectivelyInfinite {
        return Ok(());
    }
    let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let weight = guard_weight(&p, spec.guard_links());
    if weight > GUARD_WEIGHT_LIMIT {
        return Err(Error::EdgeContact { time, weight });
    }
    Ok(())
}

/// Free evolution on an unbounded lattice by direct convolution with the
/// Bessel kernel. The lattice must be free of wells and marked
/// effectively infinite; the guard band is checked after propagation.
pub fn bessel_free_propagate(spec: &LatticeSpec, state: &KinkState, t: f64) -> Result<KinkState> {
    let count = spec.active_wells().count();
    if count > 0 {
        return Err(Error::WellsPresent { count });
    }
    if spec.boundary() != Boundary::EffectivelyInfinite {
        return Err(Error::RequiresOpenLattice);
    }
    if state.len() != spec.n_links() {
        return Err(Error::LengthMismatch { left: state.len(), right: spec.n_links() });
    }
    let psi = state.amplitudes();
    let n = psi.len();
    let out = if t == 0.0 {
        psi.to_vec()
    } else {
        let kernel = bessel_kernel(spec.g(), t);
        let reach = kernel.len() - 1;
        let first = psi.iter().position(|z| *z != Complex64::new(0.0, 0.0)).unwrap_or(0);
        let last = psi.iter().rposition(|z| *z != Complex64::new(0.0, 0.0)).unwrap_or(0);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(reach).max(first);
            let hi = (i + reach).min(last);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in lo..=hi {
                acc += kernel[i.abs_diff(m)] * psi[m];
            }
            *o = acc;
        }
        out
    };
    let time = state.time() + t;
    check_guard(spec, &out, time)?;
    Ok(KinkState::from_parts(out, time))
}

/// Free evolution on a hard-wall lattice by the method of images: the walls
/// at `-1` and `N` reflect the Bessel kernel antisymmetrically, so
/// `G(n, m) = Σ_j K(n - m + 2j(N+1)) - K(n + m + 2 + 2j(N+1))`.
pub fn image_propagate(spec: &LatticeSpec, state: &KinkState, t: f64) -> Result<KinkState> {
    let count = spec.active_wells().count();
    if count > 0 {
        return Err(Error::WellsPresent { count });
    }
    if spec.boundary() != Boundary::HardWall {
        return Err(Error::param("boundary", "image propagation needs hard walls"));
    }
    if state.len() != spec.n_links() {
        return Err(Error::LengthMismatch { left: state.len(), right: spec.n_links() });
    }
    let psi = state.amplitudes();
    let n = psi.len() as i64;
    let kernel = bessel_kernel(spec.g(), t);
    let reach = kernel.len() as i64 - 1;
    let period = 2 * (n + 1);
    let k = |d: i64| if d.abs() <= reach { kernel[d.unsigned_abs() as usize] } else { Complex64::new(0.0, 0.0) };
    let images = (reach + 2 * n) / period + 1;
    let mut green = vec![Complex64::new(0.0, 0.0); (2 * n - 1) as usize];
    let mut mirror = vec![Complex64::new(0.0, 0.0); (2 * n - 1) as usize];
    // the sums depend only on n - m and n + m
    for (idx, d) in (-(n - 1)..n).enumerate() {
        let mut a = Complex64::new(0.0, 0.0);
        for j in -images..=images {
            a += k(d + j * period);
        }
        green[idx] = a;
    }
    for (idx, s) in (0..2 * n - 1).enumerate() {
        let mut a = Complex64::new(0.0, 0.0);
        for j in -images..=images {
            a += k(s + 2 + j * period);
        }
        mirror[idx] = a;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n as usize];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &pm) in psi.iter().enumerate() {
            if pm == Complex64::new(0.0, 0.0) {
                continue;
            }
            let d = (i as i64 - m as i64 + n - 1) as usize;
            acc += (green[d] - mirror[i + m]) * pm;
        }
        *o = acc;
    }
    Ok(KinkState::from_parts(out, state.time() + t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampKind {
    SuddenOff,
    Linear,
    Smooth,
}

impl RampKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RampKind::SuddenOff => "sudden-off",
            RampKind::Linear => "linear",
            RampKind::Smooth => "smooth",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sudden-off" => Some(RampKind::SuddenOff),
            "linear" => Some(RampKind::Linear),
            "smooth" => Some(RampKind::Smooth),
            _ => None,
        }
    }
}

/// Well-depth multiplier `s(τ)` decreasing from 1 at τ = 0 to 0 at τ = T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    kind: RampKind,
    duration: f64,
}

impl RampSchedule {
    pub fn new(kind: RampKind, duration: f64) -> Result<Self> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::param("duration", alloc::format!("must be finite and >= 0, got {duration}")));
        }
        let duration = if kind == RampKind::SuddenOff { 0.0 } else { duration };
        Ok(Self { kind, duration })
    }

    pub fn sudden() -> Self {
        Self { kind: RampKind::SuddenOff, duration: 0.0 }
    }

    pub fn kind(&self) -> RampKind {
        self.kind
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn multiplier(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 1.0;
        }
        if tau >= self.duration {
            return 0.0;
        }
        let x = tau / self.duration;
        match self.kind {
            RampKind::SuddenOff => 0.0,
            RampKind::Linear => 1.0 - x,
            RampKind::Smooth => 0.5 * (1.0 + (core::f64::consts::PI * x).cos()),
        }
    }
}

/// Second-order split-step integrator for `H(τ) = H_hop + V(τ)` with a
/// diagonal, time-dependent `V`: half hop, potential phase at the step
/// midpoint, half hop. Consecutive half hops are merged.
#[derive(Debug, Clone)]
pub struct SplitStepper {
    hopping: Tridiagonal,
    dt: f64,
}

impl SplitStepper {
    /// `hopping` is the Hamiltonian without the time-dependent diagonal.
    pub fn new(hopping: &Tridiagonal, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", alloc::format!("must be positive, got {dt}")));
        }
        Ok(Self { hopping: hopping.clone(), dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Integrates from `t0` over `duration`, using the largest step not
    /// exceeding `dt` that divides the interval. `potential(τ, out)` fills
    /// the diagonal at time τ.
    pub fn evolve<F>(&self, psi: &[Complex64], t0: f64, duration: f64, mut potential: F) -> Vec<Complex64>
    where
        F: FnMut(f64, &mut [f64]),
    {
        if duration <= 0.0 {
            return psi.to_vec();
        }
        let steps = (duration / self.dt - 1e-9).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        let half = BandedUnitary::new(&self.hopping, 0.5 * h);
        let full = BandedUnitary::new(&self.hopping, h);
        let mut v = vec![0.0; psi.len()];
        let mut x = half.apply(psi);
        for s in 0..steps {
            let tau = t0 + (s as f64 + 0.5) * h;
            potential(tau, &mut v);
            for (xi, &vi) in x.iter_mut().zip(&v) {
                if vi != 0.0 {
                    *xi *= Complex64::from_polar(1.0, -vi * h);
                }
            }
            x = if s + 1 == steps { half.apply(&x) } else { full.apply(&x) };
        }
        x
    }
}

/// Links beyond the ballistic front `2gt` that the Bessel tail needs
/// before its weight is negligible (the front has Airy width `(gt)^{1/3}`).
pub fn ballistic_margin(g: f64, t: f64) -> usize {
    let x = (2.0 * g * t).abs();
    (40.0 + 10.0 * x.cbrt()).ceil() as usize
}

/// Effectively-infinite, well-free lattice that holds `extent` links of
/// initial support plus the ballistic spread up to `t_max` on both sides.
pub fn release_lattice(g: f64, extent: usize, t_max: f64) -> Result<LatticeSpec> {
    let spread = (2.0 * g * t_max).ceil() as usize + ballistic_margin(g, t_max);
    let spec = LatticeSpec::with_links(extent + 2 * (spread + crate::lattice::DEFAULT_GUARD_LINKS), g, Boundary::EffectivelyInfinite)?;
    Ok(spec)
}

/// Mirror-symmetric effectively-infinite lattice with wells at `n₀` and
/// `n₀ + L`, large enough for a free release up to `t_max`. Returns the
/// lattice and `n₀`.
pub fn double_slit_lattice(g: f64, w: f64, separation: usize, t_max: f64) -> Result<(LatticeSpec, usize)> {
    let gamma0 = crate::bound_states::inverse_decay_length(w, g)?;
    if gamma0 == 0.0 {
        return Err(Error::param("w", "wells of zero strength bind nothing"));
    }
    let tail = (40.0 / gamma0).ceil() as usize;
    let spread = (2.0 * g * t_max).ceil() as usize + ballistic_margin(g, t_max);
    let half = tail + spread + crate::lattice::DEFAULT_GUARD_LINKS;
    let n_links = 2 * half + separation + 1;
    let spec = LatticeSpec::with_links(n_links, g, Boundary::EffectivelyInfinite)?
        .with_well(half, w)?
        .with_well(half + separation, w)?;
    Ok((spec, half))
}

/// Exact ground state ψ⁺ of a double well, positive everywhere.
pub fn prepare_psi_plus(spec: &LatticeSpec) -> Result<KinkState> {
    double_well_geometry(spec)?;
    let h = build_hamiltonian(spec);
    let ((_, v), _) = exact_double_well_pair(&h);
    KinkState::from_real(&v)
}

#[derive(Debug, Clone)]
pub struct AdiabaticPreparation {
    pub state: KinkState,
    pub fidelity: f64,
    pub duration: f64,
}

/// Minimum fidelity with ψ⁺ for an adiabatic preparation to be accepted.
pub const ADIABATIC_FIDELITY: f64 = 0.99;

/// Default ramp duration `20 / 2ω` from the exact splitting.
pub fn adiabatic_duration(spec: &LatticeSpec) -> Result<f64> {
    let h = build_hamiltonian(spec);
    double_well_geometry(spec)?;
    let ((ep, _), (em, _)) = exact_double_well_pair(&h);
    Ok(20.0 / (em - ep))
}

/// Splits a single well of strength `w` on the midpoint link into the two
/// wells of `spec` with a smooth ramp, then reports the fidelity with the
/// exact ψ⁺. The separation must be even so the midpoint is a link.
pub fn prepare_psi_plus_adiabatic(spec: &LatticeSpec, duration: Option<f64>, dt: f64) -> Result<AdiabaticPreparation> {
    let (left, separation, w) = double_well_geometry(spec)?;
    if separation % 2 != 0 {
        return Err(Error::param("L", "adiabatic splitting needs an even separation"));
    }
    let center = left + separation / 2;
    let duration = match duration {
        Some(t) => t,
        None => adiabatic_duration(spec)?,
    };
    let ramp = RampSchedule::new(RampKind::Smooth, duration)?;
    let single = spec.without_wells().with_well(center, w)?;
    let h_single = build_hamiltonian(&single);
    let lambda = crate::linalg::kth_eigenvalue(&h_single, 0);
    let start = crate::linalg::inverse_iteration(&h_single, lambda, &[]);
    let psi0: Vec<Complex64> = start.iter().map(|&x| Complex64::new(x, 0.0)).collect();

    let stepper = SplitStepper::new(&build_hamiltonian(&spec.without_wells()), dt)?;
    let psi = stepper.evolve(&psi0, 0.0, duration, |tau, v| {
        let s = ramp.multiplier(tau);
        v[center] = -2.0 * w * s;
        v[left] = -2.0 * w * (1.0 - s);
        v[left + separation] = -2.0 * w * (1.0 - s);
    });
    let target = prepare_psi_plus(spec)?;
    let state = KinkState::from_parts(psi, duration);
    let fidelity = target.overlap(&state)?.norm_sqr();
    if fidelity < ADIABATIC_FIDELITY {
        return Err(Error::NonAdiabatic { fidelity });
    }
    Ok(AdiabaticPreparation { state, fidelity, duration })
}

/// Beat-evolved state `(ψ⁺ e^{iωt} + ψ⁻ e^{-iωt}) / √2` that starts in the
/// left well, using the exact double-well eigenpair.
pub fn prepare_bilocal_tunneling(spec: &LatticeSpec, t: f64) -> Result<KinkState> {
    let (left, _, _) = double_well_geometry(spec)?;
    let h = build_hamiltonian(spec);
    let ((ep, vp), (em, mut vm)) = exact_double_well_pair(&h);
    if vm[left] < 0.0 {
        for x in vm.iter_mut() {
            *x = -*x;
        }
    }
    let omega = 0.5 * (em - ep);
    let a = Complex64::from_polar(core::f64::consts::FRAC_1_SQRT_2, omega * t);
    let b = Complex64::from_polar(core::f64::consts::FRAC_1_SQRT_2, -omega * t);
    let amps: Vec<Complex64> = vp.iter().zip(&vm).map(|(p, m)| a * p + b * m).collect();
    Ok(KinkState::from_parts(amps, t))
}

/// Single-well ground-state profile centred on `link`, e.g. the trapped
/// kink that is released in the self-interference experiment.
pub fn trapped_kink(spec: &LatticeSpec, link: usize, w: f64) -> Result<KinkState> {
    let gamma = crate::bound_states::inverse_decay_length(w, spec.g())?;
    if link >= spec.n_links() {
        return Err(Error::LinkOutOfRange { link, n_links: spec.n_links() });
    }
    KinkState::from_real(&single_well_profile(spec.n_links(), link, gamma))
}

/// Engine used after the wells are gone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeEngine {
    Bessel,
    Eigen,
}

impl FreeEngine {
    pub fn as_str(self) -> &'static str {
        match self {
            FreeEngine::Bessel => "bessel",
            FreeEngine::Eigen => "eigen",
        }
    }

    /// Bessel kernel on unbounded lattices, eigenbasis on hard walls.
    pub fn for_lattice(spec: &LatticeSpec) -> Self {
        match spec.boundary() {
            Boundary::EffectivelyInfinite => FreeEngine::Bessel,
            Boundary::HardWall => FreeEngine::Eigen,
        }
    }
}

/// Releases `initial` from the wells of `spec` following `schedule` and
/// returns the states at `times` (measured from the start of the ramp).
pub fn release_states(
    spec: &LatticeSpec,
    initial: &KinkState,
    schedule: &RampSchedule,
    times: &[f64],
) -> Result<Vec<KinkState>> {
    if initial.len() != spec.n_links() {
        return Err(Error::LengthMismatch { left: initial.len(), right: spec.n_links() });
    }
    check_times(times)?;
    let free = spec.without_wells();
    let hop = build_hamiltonian(&free);
    let engine = FreeEngine::for_lattice(spec);
    let eigen = match engine {
        FreeEngine::Eigen => Some(EigenPropagator::new(&hop)?),
        FreeEngine::Bessel => None,
    };
    let ramp_end = schedule.duration();
    let wells: Vec<(usize, f64)> = spec.active_wells().collect();
    let stepper = SplitStepper::new(&hop, DEFAULT_SPLIT_STEP / spec.g())?;
    let mut psi = initial.amplitudes().to_vec();
    let mut t_prev = 0.0;
    let mut released: Option<Vec<Complex64>> = if ramp_end == 0.0 { Some(psi.clone()) } else { None };
    let mut out = Vec::with_capacity(times.len());
    let potential = |tau: f64, v: &mut [f64]| {
        let s = schedule.multiplier(tau);
        for &(n, w) in &wells {
            v[n] = -2.0 * w * s;
        }
    };
    for &t in times {
        let amps = if t <= ramp_end && ramp_end > 0.0 {
            psi = stepper.evolve(&psi, t_prev, t - t_prev, potential);
            t_prev = t;
            psi.clone()
        } else {
            let at_release = match &released {
                Some(r) => r.clone(),
                None => {
                    psi = stepper.evolve(&psi, t_prev, ramp_end - t_prev, potential);
                    t_prev = ramp_end;
                    released = Some(psi.clone());
                    psi.clone()
                }
            };
            let dt = t - ramp_end;
            match &eigen {
                Some(prop) => prop.propagate_amplitudes(&at_release, dt),
                None => {
                    let st = KinkState::from_parts(at_release, ramp_end);
                    bessel_free_propagate(&free, &st, dt)?.amplitudes().to_vec()
                }
            }
        };
        let drift = (norm_sqr(&amps).sqrt() - initial.norm_sqr().sqrt()).abs();
        if drift > RUN_NORM_TOLERANCE {
            return Err(Error::InvariantViolation { what: "norm", time: t, value: drift });
        }
        check_guard(spec, &amps, t)?;
        out.push(KinkState::from_parts(amps, t));
    }
    Ok(out)
}

fn check_times(times: &[f64]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::param("times", alloc::format!("output time {t} must be finite and >= 0")));
        }
        if i > 0 && !(t > times[i - 1]) {
            return Err(Error::param("times", "output times must increase strictly"));
        }
    }
    Ok(())
}

pub fn run_release(
    spec: &LatticeSpec,
    initial: &KinkState,
    schedule: &RampSchedule,
    times: &[f64],
) -> Result<ProbabilityTrace> {
    let states = release_states(spec, initial, schedule, times)?;
    let meta = TraceMetadata::for_lattice(spec)
        .with("engine", FreeEngine::for_lattice(spec).as_str())
        .with("ramp", schedule.kind().as_str())
        .with("ramp_duration", schedule.duration())
        .with("split_step", DEFAULT_SPLIT_STEP / spec.g());
    let mut trace = ProbabilityTrace::new(meta);
    for s in &states {
        trace.push(s.time(), s.probabilities())?;
    }
    Ok(trace)
}
