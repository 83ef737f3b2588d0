//! Brute-force simulation of the microscopic chain
//! `H = -g Σ σˣ_i - Σ J_n σᶻ_n σᶻ_{n+1} - h_L σᶻ_0 + h_R σᶻ_{N-1}`
//! in the full `2^N` space. Basis index bit `i` set means spin `i` is up.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec};
use crate::linalg::ChebyshevPlan;
use crate::state::{ProbabilityTrace, TraceMetadata};

pub const MAX_PURE_SPINS: usize = 14;
pub const MAX_DENSE_SPINS: usize = 7;
pub const DEFAULT_PINNING: f64 = 2.0;
/// Excess kink number above which the one-kink reduction is reported as
/// breaking down.
pub const KINK_NUMBER_EPSILON: f64 = 0.05;
pub const MIN_TRAJECTORIES: usize = 2000;
pub const PURE_NORM_TOLERANCE: f64 = 1e-9;
pub const ENERGY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinChainSpec {
    n_spins: usize,
    g: f64,
    couplings: Vec<f64>,
    pinning: (f64, f64),
}

impl SpinChainSpec {
    /// Uniform couplings `J = 1` and the default pinning on both ends.
    pub fn new(n_spins: usize, g: f64) -> Result<Self> {
        if !(2..=MAX_PURE_SPINS).contains(&n_spins) {
            return Err(Error::param("n_spins", format!("must be in 2..={MAX_PURE_SPINS}, got {n_spins}")));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::param("g", format!("must be finite and >= 0, got {g}")));
        }
        Ok(Self { n_spins, g, couplings: vec![1.0; n_spins - 1], pinning: (DEFAULT_PINNING, DEFAULT_PINNING) })
    }

    /// Microscopic chain matching a one-kink lattice: one spin per site and
    /// `J_n = 1 - w_n`.
    pub fn from_lattice(spec: &LatticeSpec) -> Result<Self> {
        let mut chain = Self::new(spec.n_sites(), spec.g())?;
        for (link, w) in spec.active_wells() {
            chain = chain.with_weak_link(link, w)?;
        }
        Ok(chain)
    }

    pub fn with_weak_link(mut self, bond: usize, w: f64) -> Result<Self> {
        if bond >= self.couplings.len() {
            return Err(Error::LinkOutOfRange { link: bond, n_links: self.couplings.len() });
        }
        self.couplings[bond] = 1.0 - w;
        Ok(self)
    }

    pub fn with_pinning(mut self, left: f64, right: f64) -> Result<Self> {
        if !(left >= 0.0 && right >= 0.0) {
            return Err(Error::param("pinning", "fields must be >= 0"));
        }
        self.pinning = (left, right);
        Ok(self)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn pinning(&self) -> (f64, f64) {
        self.pinning
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    /// One-kink lattice with the same hopping and `w_n = 1 - J_n`.
    pub fn effective_lattice(&self) -> Result<LatticeSpec> {
        let mut spec = LatticeSpec::new(self.n_spins, self.g, Boundary::HardWall)?;
        for (bond, &j) in self.couplings.iter().enumerate() {
            if j != 1.0 {
                spec.set_well(bond, 1.0 - j)?;
            }
        }
        Ok(spec)
    }

    /// Diagonal (Ising plus pinning) energy of a basis configuration.
    pub fn configuration_energy(&self, config: usize) -> f64 {
        let s = |i: usize| if config >> i & 1 == 1 { 1.0 } else { -1.0 };
        let mut e = 0.0;
        for (n, &j) in self.couplings.iter().enumerate() {
            e -= j * s(n) * s(n + 1);
        }
        e - self.pinning.0 * s(0) + self.pinning.1 * s(self.n_spins - 1)
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|c| self.configuration_energy(c)).collect()
    }
}

/// Configuration with spins `0..=link` up and the rest down: one kink on `link`.
pub fn kink_configuration(n_spins: usize, link: usize) -> Result<usize> {
    if link + 1 >= n_spins {
        return Err(Error::LinkOutOfRange { link, n_links: n_spins.saturating_sub(1) });
    }
    Ok((1usize << (link + 1)) - 1)
}

pub fn basis_state(spec: &SpinChainSpec, config: usize) -> Result<Vec<Complex64>> {
    if config >= spec.dim() {
        return Err(Error::param("config", format!("{config} is outside the {}-spin basis", spec.n_spins)));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); spec.dim()];
    psi[config] = Complex64::new(1.0, 0.0);
    Ok(psi)
}

/// `(|↑…↑⟩ + |↓…↓⟩)/√2`.
pub fn ghz_state(spec: &SpinChainSpec) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); spec.dim()];
    let a = core::f64::consts::FRAC_1_SQRT_2;
    psi[0] = Complex64::new(a, 0.0);
    psi[spec.dim() - 1] = Complex64::new(a, 0.0);
    psi
}

struct Operator {
    n: usize,
    g: f64,
    diag: Vec<f64>,
}

impl Operator {
    fn new(spec: &SpinChainSpec) -> Self {
        Self { n: spec.n_spins, g: spec.g, diag: spec.diagonal() }
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (a, ya) in y.iter_mut().enumerate() {
            let mut acc = x[a] * self.diag[a];
            if self.g != 0.0 {
                let mut flips = Complex64::new(0.0, 0.0);
                for i in 0..self.n {
                    flips += x[a ^ (1 << i)];
                }
                acc -= flips * self.g;
            }
            *ya = acc;
        }
    }

    fn bounds(&self) -> (f64, f64) {
        let r = self.g * self.n as f64;
        let lo = self.diag.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo - r, hi + r)
    }

    fn propagate(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        if t == 0.0 {
            return psi.to_vec();
        }
        ChebyshevPlan::new(self.bounds(), t).apply(|x, y| self.apply(x, y), psi)
    }

    fn energy(&self, psi: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, &mut y);
        psi.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Unnormalized kink densities `(1 - ⟨σᶻ_n σᶻ_{n+1}⟩)/2` from basis weights.
pub fn kink_densities(n_spins: usize, weights: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; n_spins - 1];
    for (a, &wa) in weights.iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        let walls = a ^ (a >> 1);
        for (n, pn) in p.iter_mut().enumerate() {
            if walls >> n & 1 == 1 {
                *pn += wa;
            }
        }
    }
    p
}

fn normalized(p: &[f64]) -> (Vec<f64>, f64) {
    let k: f64 = p.iter().sum();
    if k > 0.0 {
        (p.iter().map(|x| x / k).collect(), k)
    } else {
        (p.to_vec(), k)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        if !(t >= 0.0 && t.is_finite()) || (i > 0 && !(t > times[i - 1])) {
            return Err(Error::param("times", "must be finite, non-negative and strictly increasing"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SpinTrace {
    /// Kink distribution renormalized by the total kink number.
    pub trace: ProbabilityTrace,
    /// Total expected kink number at each output time.
    pub kink_number: Vec<f64>,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
}

impl SpinTrace {
    /// True when the kink number stayed within `[1 - ε, 1 + ε]`.
    pub fn one_kink_sector(&self, eps: f64) -> bool {
        self.kink_number.iter().all(|&k| (k - 1.0).abs() <= eps)
    }
}

fn metadata(spec: &SpinChainSpec, method: &str) -> TraceMetadata {
    TraceMetadata::default()
        .with("method", method)
        .with("n_spins", spec.n_spins)
        .with("g", spec.g)
        .with("pinning_left", spec.pinning.0)
        .with("pinning_right", spec.pinning.1)
}

fn warn_kink_number(k: f64, t: f64) {
    if k > 1.0 + KINK_NUMBER_EPSILON {
        log::warn!("kink number {k} at t = {t} leaves the one-kink sector");
    }
}

/// Schrödinger evolution of `initial` in the full space, sampled at `times`.
pub fn full_evolve_pure(spec: &SpinChainSpec, initial: &[Complex64], times: &[f64]) -> Result<SpinTrace> {
    if initial.len() != spec.dim() {
        return Err(Error::LengthMismatch { left: initial.len(), right: spec.dim() });
    }
    check_times(times)?;
    let op = Operator::new(spec);
    let norm0: f64 = initial.iter().map(|z| z.norm_sqr()).sum();
    if (norm0 - 1.0).abs() > PURE_NORM_TOLERANCE {
        return Err(Error::param("initial", format!("norm {norm0} is not 1")));
    }
    let e0 = op.energy(initial);
    let mut psi = initial.to_vec();
    let mut t_now = 0.0;
    let mut out = SpinTrace {
        trace: ProbabilityTrace::new(metadata(spec, "pure")),
        kink_number: Vec::new(),
        max_norm_drift: 0.0,
        max_energy_drift: 0.0,
    };
    for &t in times {
        psi = op.propagate(&psi, t - t_now);
        t_now = t;
        let weights: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        let drift = (weights.iter().sum::<f64>() - 1.0).abs();
        let de = (op.energy(&psi) - e0).abs() / e0.abs().max(1.0);
        if drift > PURE_NORM_TOLERANCE {
            return Err(Error::InvariantViolation { what: "norm", time: t, value: drift });
        }
        if de > ENERGY_TOLERANCE {
            return Err(Error::InvariantViolation { what: "energy", time: t, value: de });
        }
        out.max_norm_drift = out.max_norm_drift.max(drift);
        out.max_energy_drift = out.max_energy_drift.max(de);
        let (p, k) = normalized(&kink_densities(spec.n_spins, &weights));
        warn_kink_number(k, t);
        out.kink_number.push(k);
        out.trace.push(t, p)?;
    }
    Ok(out)
}

/// `ρ ← U ρ U†` for a Hermitian row-major `ρ`: propagate columns, take the
/// adjoint, repeat.
fn conjugate_dense(op: &Operator, plan: &ChebyshevPlan, rho: &mut [Complex64], dim: usize) {
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..2 {
        for j in 0..dim {
            for i in 0..dim {
                col[i] = rho[i * dim + j];
            }
            let out = plan.apply(|x, y| op.apply(x, y), &col);
            for i in 0..dim {
                rho[i * dim + j] = out[i];
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let a = rho[i * dim + j];
                let b = rho[j * dim + i];
                rho[i * dim + j] = b.conj();
                rho[j * dim + i] = a.conj();
            }
        }
    }
}

/// Dense density-matrix evolution with per-spin dephasing
/// `-(Γ/4) Σ [σᶻ_n, [σᶻ_n, ρ]]`, which damps `ρ_ab` at rate `Γ·hamming(a, b)`.
/// Strang splitting with step at most `dt`.
pub fn dense_dephasing(spec: &SpinChainSpec, initial: &[Complex64], gamma: f64, times: &[f64], dt: f64) -> Result<SpinTrace> {
    if spec.n_spins > MAX_DENSE_SPINS {
        return Err(Error::TooManySpins { n: spec.n_spins, max: MAX_DENSE_SPINS });
    }
    if initial.len() != spec.dim() {
        return Err(Error::LengthMismatch { left: initial.len(), right: spec.dim() });
    }
    if !(gamma >= 0.0) || !(dt > 0.0) {
        return Err(Error::param("gamma", "Γ must be >= 0 and dt > 0"));
    }
    check_times(times)?;
    let dim = spec.dim();
    let op = Operator::new(spec);
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            rho[i * dim + j] = initial[i] * initial[j].conj();
        }
    }
    let mut out = SpinTrace {
        trace: ProbabilityTrace::new(metadata(spec, "dense").with("gamma", gamma).with("dt_max", dt)),
        kink_number: Vec::new(),
        max_norm_drift: 0.0,
        max_energy_drift: 0.0,
    };
    let mut t_now = 0.0;
    for &t in times {
        let span = t - t_now;
        if span > 0.0 {
            let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let bounds = op.bounds();
            let half = ChebyshevPlan::new(bounds, 0.5 * h);
            let full = ChebyshevPlan::new(bounds, h);
            let factors: Vec<f64> = (0..=spec.n_spins).map(|d| (-gamma * d as f64 * h).exp()).collect();
            conjugate_dense(&op, &half, &mut rho, dim);
            for s in 0..steps {
                for a in 0..dim {
                    for b in 0..dim {
                        rho[a * dim + b] *= factors[(a ^ b).count_ones() as usize];
                    }
                }
                conjugate_dense(&op, if s + 1 == steps { &half } else { &full }, &mut rho, dim);
            }
        }
        t_now = t;
        let weights: Vec<f64> = (0..dim).map(|a| rho[a * dim + a].re).collect();
        let drift = (weights.iter().sum::<f64>() - 1.0).abs();
        if drift > PURE_NORM_TOLERANCE {
            return Err(Error::InvariantViolation { what: "trace", time: t, value: drift });
        }
        out.max_norm_drift = out.max_norm_drift.max(drift);
        let (p, k) = normalized(&kink_densities(spec.n_spins, &weights));
        warn_kink_number(k, t);
        out.kink_number.push(k);
        out.trace.push(t, p)?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrajectoryEstimate {
    /// Mean kink distribution renormalized by the mean kink number.
    pub trace: ProbabilityTrace,
    pub kink_number: Vec<f64>,
    /// Standard error of the mean of each unnormalized kink density.
    pub standard_error: Vec<Vec<f64>>,
    pub trajectories: usize,
    pub jumps: u64,
}

impl TrajectoryEstimate {
    /// `Σ_n SE_n` at output `index`, the scale for L1 comparisons.
    pub fn l1_standard_error(&self, index: usize) -> f64 {
        self.standard_error[index].iter().sum()
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Quantum-trajectory unraveling of the same dephasing channel. Each `σᶻ_n`
/// jump has rate `Γ/2` and the no-jump evolution is unitary up to a constant
/// decay, so jump times are drawn exactly from an exponential clock of total
/// rate `NΓ/2`. Trajectory `i` uses `ChaCha8` seeded with `seed + i`.
pub fn trajectory_dephasing(
    spec: &SpinChainSpec,
    initial: &[Complex64],
    gamma: f64,
    times: &[f64],
    trajectories: usize,
    seed: u64,
) -> Result<TrajectoryEstimate> {
    if initial.len() != spec.dim() {
        return Err(Error::LengthMismatch { left: initial.len(), right: spec.dim() });
    }
    if !(gamma >= 0.0) {
        return Err(Error::param("gamma", "must be >= 0"));
    }
    if trajectories < 2 {
        return Err(Error::param("trajectories", "need at least two"));
    }
    if trajectories < MIN_TRAJECTORIES {
        log::warn!("{trajectories} trajectories is below the recommended {MIN_TRAJECTORIES}");
    }
    check_times(times)?;
    let n = spec.n_spins;
    let op = Operator::new(spec);
    let rate = 0.5 * gamma * n as f64;
    let bonds = n - 1;
    let mut sum = vec![vec![0.0; bonds]; times.len()];
    let mut sum_sq = vec![vec![0.0; bonds]; times.len()];
    let mut jumps = 0u64;
    for k in 0..trajectories {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let clock = |rng: &mut ChaCha8Rng| if rate > 0.0 { -(1.0 - uniform(rng)).ln() / rate } else { f64::INFINITY };
        let mut psi = initial.to_vec();
        let mut t_now = 0.0;
        let mut next_jump = clock(&mut rng);
        for (i, &t) in times.iter().enumerate() {
            while next_jump < t {
                psi = op.propagate(&psi, next_jump - t_now);
                t_now = next_jump;
                let spin = ((uniform(&mut rng) * n as f64) as usize).min(n - 1);
                for (a, z) in psi.iter_mut().enumerate() {
                    if a >> spin & 1 == 0 {
                        *z = -*z;
                    }
                }
                jumps += 1;
                next_jump = t_now + clock(&mut rng);
            }
            psi = op.propagate(&psi, t - t_now);
            t_now = t;
            let weights: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let p = kink_densities(n, &weights);
            for b in 0..bonds {
                sum[i][b] += p[b];
                sum_sq[i][b] += p[b] * p[b];
            }
        }
    }
    let m = trajectories as f64;
    let meta = metadata(spec, "trajectories")
        .with("gamma", gamma)
        .with("trajectories", trajectories)
        .with("seed", seed);
    let mut estimate = TrajectoryEstimate {
        trace: ProbabilityTrace::new(meta),
        kink_number: Vec::new(),
        standard_error: Vec::new(),
        trajectories,
        jumps,
    };
    estimate.trace.metadata_mut().seed = Some(seed);
    for (i, &t) in times.iter().enumerate() {
        let mean: Vec<f64> = sum[i].iter().map(|s| s / m).collect();
        let se: Vec<f64> = (0..bonds)
            .map(|b| {
                let var = ((sum_sq[i][b] - m * mean[b] * mean[b]) / (m - 1.0)).max(0.0);
                (var / m).sqrt()
            })
            .collect();
        let (p, k) = normalized(&mean);
        warn_kink_number(k, t);
        estimate.kink_number.push(k);
        estimate.standard_error.push(se);
        estimate.trace.push(t, p)?;
    }
    Ok(estimate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DephasingMethod {
    Dense { dt: f64 },
    Trajectories { count: usize, seed: u64 },
}

/// Dense evolution up to [`MAX_DENSE_SPINS`], trajectories beyond.
pub fn full_evolve_dephasing(
    spec: &SpinChainSpec,
    initial: &[Complex64],
    gamma: f64,
    times: &[f64],
    method: DephasingMethod,
) -> Result<ProbabilityTrace> {
    match method {
        DephasingMethod::Dense { dt } => Ok(dense_dephasing(spec, initial, gamma, times, dt)?.trace),
        DephasingMethod::Trajectories { count, seed } => {
            Ok(trajectory_dephasing(spec, initial, gamma, times, count, seed)?.trace)
        }
    }
}

#[derive(Debug, Clone)]
pub struct GhzDecay {
    pub n_spins: usize,
    pub gamma: f64,
    pub times: Vec<f64>,
    /// `2|⟨↑…↑|ρ|↓…↓⟩|`.
    pub coherence: Vec<f64>,
    /// Least-squares slope of `-ln C(t)`.
    pub fitted_rate: f64,
}

impl GhzDecay {
    pub fn one_over_e_time(&self) -> f64 {
        1.0 / self.fitted_rate
    }
}

/// Coherence decay of the GHZ superposition at `g = 0`. The two components
/// differ on every spin, so the channel damps their coherence at
/// `Γ·hamming = ΓN`; the Ising and pinning energies only add a phase.
pub fn ghz_decoherence_demo(n_spins: usize, gamma: f64, times: &[f64]) -> Result<GhzDecay> {
    if !(2..=63).contains(&n_spins) {
        return Err(Error::param("n_spins", format!("must be in 2..=63, got {n_spins}")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::param("gamma", "must be >= 0"));
    }
    check_times(times)?;
    let up = (1u64 << n_spins) - 1;
    let hamming = up.count_ones() as f64;
    let energy = |config: u64| {
        let s = |i: usize| if config >> i & 1 == 1 { 1.0 } else { -1.0 };
        -(0..n_spins - 1).map(|i| s(i) * s(i + 1)).sum::<f64>()
    };
    let omega = energy(up) - energy(0);
    let coherence: Vec<f64> = times
        .iter()
        .map(|&t| {
            let rho = Complex64::from_polar(0.5, -omega * t) * (-gamma * hamming * t).exp();
            2.0 * rho.norm()
        })
        .collect();
    let fitted_rate = if gamma == 0.0 || times.len() < 2 {
        0.0
    } else {
        let m = times.len() as f64;
        let ys: Vec<f64> = coherence.iter().map(|c| -c.ln()).collect();
        let tm = times.iter().sum::<f64>() / m;
        let ym = ys.iter().sum::<f64>() / m;
        let num: f64 = times.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
        let den: f64 = times.iter().map(|t| (t - tm) * (t - tm)).sum();
        num / den
    };
    Ok(GhzDecay { n_spins, gamma, times: times.to_vec(), coherence, fitted_rate })
}

/// One-kink Hamiltonian of the chain including second-order virtual
/// processes through states outside the single-kink sector:
/// `H_ab = ⟨a|H|b⟩ + Σ_c V_ac V_cb · ½[1/(E_a - E_c) + 1/(E_b - E_c)]`
/// over configurations `c` with more than one domain wall. Entries are
/// indexed by link and shifted so the uniform-bond kink energy is zero.
pub fn second_order_kink_hamiltonian(spec: &SpinChainSpec) -> Result<Vec<Vec<f64>>> {
    let n = spec.n_spins;
    let links = n - 1;
    let configs: Vec<usize> = (0..links).map(|l| kink_configuration(n, l)).collect::<Result<_>>()?;
    let index_of = |c: usize| configs.iter().position(|&x| x == c);
    let energy = |c: usize| spec.configuration_energy(c);
    let offset = 2.0 - spec.couplings.iter().sum::<f64>() - spec.pinning.0 - spec.pinning.1;
    let g = spec.g;
    let mut h = vec![vec![0.0; links]; links];
    for (a, &ca) in configs.iter().enumerate() {
        h[a][a] += energy(ca) - offset;
        for i in 0..n {
            let c = ca ^ (1 << i);
            match index_of(c) {
                Some(b) => h[a][b] -= g,
                None => {
                    for j in 0..n {
                        let cb = c ^ (1 << j);
                        if let Some(b) = index_of(cb) {
                            let ec = energy(c);
                            h[a][b] += g * g * 0.5 * (1.0 / (energy(ca) - ec) + 1.0 / (energy(cb) - ec));
                        }
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Propagates a kink amplitude vector under a dense real symmetric
/// Hamiltonian, sampled at `times`.
pub fn evolve_kink_matrix(h: &[Vec<f64>], psi: &[Complex64], times: &[f64]) -> Result<ProbabilityTrace> {
    let n = h.len();
    if psi.len() != n {
        return Err(Error::LengthMismatch { left: psi.len(), right: n });
    }
    check_times(times)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, row) in h.iter().enumerate() {
        let r: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.abs()).sum();
        lo = lo.min(row[i] - r);
        hi = hi.max(row[i] + r);
    }
    let apply = |x: &[Complex64], y: &mut [Complex64]| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = h[i].iter().zip(x).map(|(a, b)| b * *a).sum();
        }
    };
    let mut trace = ProbabilityTrace::new(TraceMetadata::default().with("method", "dense-kink"));
    let mut state = psi.to_vec();
    let mut t_now = 0.0;
    for &t in times {
        if t > t_now {
            state = ChebyshevPlan::new((lo, hi), t - t_now).apply(apply, &state);
        }
        t_now = t;
        trace.push(t, state.iter().map(|z| z.norm_sqr()).collect())?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_configuration_energy() {
        let spec = SpinChainSpec::new(6, 0.1).unwrap().with_weak_link(2, 0.05).unwrap();
        let base = spec.configuration_energy(kink_configuration(6, 0).unwrap());
        let weak = spec.configuration_energy(kink_configuration(6, 2).unwrap());
        assert!((weak - base + 0.1).abs() < 1e-14);
        let p = kink_densities(6, &[0.0; 64].iter().enumerate().map(|(a, _)| if a == 7 { 1.0 } else { 0.0 }).collect::<Vec<_>>());
        assert_eq!(p, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn frozen_without_field() {
        let spec = SpinChainSpec::new(8, 0.0).unwrap();
        let psi = basis_state(&spec, kink_configuration(8, 3).unwrap()).unwrap();
        let run = full_evolve_pure(&spec, &psi, &[1.0, 50.0]).unwrap();
        assert_eq!(run.trace.distribution(1)[3], 1.0);
        assert!(run.one_kink_sector(1e-12));
    }

    #[test]
    fn ghz_rate() {
        let times: Vec<f64> = (0..20).map(|k| 0.1 * k as f64).collect();
        let demo = ghz_decoherence_demo(5, 0.3, &times).unwrap();
        assert!((demo.fitted_rate - 1.5).abs() < 1e-6 * 1.5);
        let still = ghz_decoherence_demo(5, 0.0, &times).unwrap();
        assert!(still.coherence.iter().all(|&c| (c - 1.0).abs() < 1e-15));
    }

    #[test]
    fn dense_ghz_matches_closed_form() {
        let spec = SpinChainSpec::new(4, 0.0).unwrap().with_pinning(0.0, 0.0).unwrap();
        let psi = ghz_state(&spec);
        let gamma = 0.2;
        // the kink observable is blind to the GHZ coherence; evolve directly
        let op = Operator::new(&spec);
        let dim = spec.dim();
        let mut rho: Vec<Complex64> = (0..dim * dim).map(|k| psi[k / dim] * psi[k % dim].conj()).collect();
        let plan = ChebyshevPlan::new(op.bounds(), 0.5);
        for a in 0..dim {
            for b in 0..dim {
                rho[a * dim + b] *= (-gamma * (a ^ b).count_ones() as f64 * 0.5).exp();
            }
        }
        conjugate_dense(&op, &plan, &mut rho, dim);
        let c = 2.0 * rho[dim - 1].norm();
        assert!((c - (-gamma * 4.0 * 0.5).exp()).abs() < 1e-12);
    }
}
