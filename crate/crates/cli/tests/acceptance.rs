//! Acceptance criteria 1-10, one PASS/FAIL line each. Criteria listed in
//! `KNOWN_RED` are reported but do not fail the run.

use std::time::Instant;

use kink_core::bessel::bessel_j;
use kink_core::bound_states::{
    exact_tunneling_gap, inverse_decay_length, double_exponent_tunneling_gap, single_well_bound_state,
    single_well_validation_lattice, tunneling_gap,
};
use kink_core::distribution::{l1_distance, linear_slope, mirror_residual};
use kink_core::fringes::{
    analytic_fringes, fringe_contrast, fringe_spacing, fringe_spacing_closed_form, fringe_visibility, outer_fringe_mass, peak_ratio,
    peak_ratio_closed_form, FringeWindow, Smoothing,
};
use kink_core::lattice::DEFAULT_GUARD_LINKS;
use kink_core::linalg::kth_eigenvalue;
use kink_core::open::{
    decay_crossing, decoherence_lattice, decoherence_time, diffusion_constant, diffusion_oracle, evolve_master_on,
    lorentzian_oracle, slave_field, strong_decoherence_reduced, DephasingConfig,
};
use kink_core::spin_chain::{
    basis_state, evolve_kink_matrix, full_evolve_pure, ghz_decoherence_demo, kink_configuration,
    second_order_kink_hamiltonian, SpinChainSpec,
};
use kink_core::unitary::{
    bessel_free_propagate, double_slit_lattice, prepare_psi_plus, release_lattice, run_release, trapped_kink,
    EigenPropagator, RampSchedule,
};
use kink_core::{build_hamiltonian, Boundary, Complex64, KinkDensityMatrix, KinkState, LatticeSpec};
use kink_sim::config::{Scenario, ScenarioConfig};
use kink_sim::csvio::{read_trace, write_trace, TraceFile};
use kink_sim::scenarios;

const KNOWN_RED: [u32; 3] = [1, 5, 9];

type Check = Result<(bool, String), String>;

fn window(n0: usize, l: usize, gamma0: f64, g: f64, t: f64) -> FringeWindow {
    let period = fringe_spacing_closed_form(g, t, l);
    let half = (2.0 * gamma0 * g * t).max(2.0 * period);
    FringeWindow::new(n0 as f64 + 0.5 * l as f64, half).with_period(period)
}

fn visibility(p: &[f64], w: &FringeWindow) -> f64 {
    fringe_visibility(p, w, Smoothing::Auto).unwrap_or(0.0)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Released ψ⁺ at `t` together with its lattice and left well.
fn release(l: usize, t: f64) -> Result<(Vec<f64>, LatticeSpec, usize), String> {
    let (spec, n0) = double_slit_lattice(1.0, 0.15, l, t).map_err(err)?;
    let psi = prepare_psi_plus(&spec).map_err(err)?;
    let trace = run_release(&spec, &psi, &RampSchedule::sudden(), &[t]).map_err(err)?;
    Ok((trace.distribution(0).to_vec(), spec, n0))
}

fn criterion_1() -> Check {
    let (g, w, l, t) = (1.0, 0.15, 100, 1000.0);
    let start = Instant::now();
    let (p, spec, n0) = release(l, t)?;
    let elapsed = start.elapsed().as_secs_f64();
    let gamma0 = inverse_decay_length(w, g).map_err(err)?;
    let oracle = analytic_fringes(n0, l, gamma0, g, t, spec.n_links()).map_err(err)?;
    let l1 = l1_distance(&p, &oracle).map_err(err)?;
    let expected = fringe_spacing_closed_form(g, t, l);
    let spacing = fringe_spacing(&p, &window(n0, l, gamma0, g, t), Smoothing::Auto).map_err(err)?;
    let rel = (spacing - expected).abs() / expected;
    let ok = l1 <= 0.05 && rel <= 0.03 && elapsed < 60.0;
    Ok((
        ok,
        format!(
            "L1 to far-field oracle {l1:.4} (limit 0.05); spacing {spacing:.3} vs {expected:.3} ({:.2}%, limit 3%); {elapsed:.1}s",
            100.0 * rel
        ),
    ))
}

fn criterion_2() -> Check {
    let (g, w, l, t) = (1.0, 0.15, 100, 1000.0);
    let (p, _, n0) = release(l, t)?;
    let gamma0 = inverse_decay_length(w, g).map_err(err)?;
    let measured = peak_ratio(&p, &window(n0, l, gamma0, g, t), Smoothing::Auto).map_err(err)?;
    let expected = peak_ratio_closed_form(l, gamma0);
    let rel = (measured - expected).abs() / expected;
    Ok((rel <= 0.05, format!("second/first peak {measured:.4} vs {expected:.4} ({:.2}%, limit 5%)", 100.0 * rel)))
}

fn criterion_3() -> Check {
    let (g, w, t) = (1.0, 0.15, 1000.0);
    let gamma0 = inverse_decay_length(w, g).map_err(err)?;
    let mut mass = Vec::new();
    for l in [50, 100] {
        let (p, _, n0) = release(l, t)?;
        mass.push(outer_fringe_mass(&p, &window(n0, l, gamma0, g, t), Smoothing::Auto).map_err(err)?);
    }
    Ok((mass[0] < mass[1], format!("mass beyond first minimum: L=50 {:.4}, L=100 {:.4}", mass[0], mass[1])))
}

fn criterion_4() -> Check {
    let (g, w, l, gamma, t) = (1.0, 0.15, 50, 0.5, 100.0);
    let start = Instant::now();
    let (spec, n0) = decoherence_lattice(g, w, l, t, DEFAULT_GUARD_LINKS).map_err(err)?;
    let psi = prepare_psi_plus(&spec).map_err(err)?;
    let run = evolve_master_on(
        &spec.without_wells(),
        &KinkDensityMatrix::pure(&psi),
        &DephasingConfig::new(gamma).with_output_times(vec![t]),
        t,
    )
    .map_err(err)?;
    let p = run.trace.distribution(0);
    let oracle = diffusion_oracle(&psi.probabilities(), diffusion_constant(g, gamma), t).map_err(err)?;
    let l1 = l1_distance(p, &oracle).map_err(err)?;
    let gamma0 = inverse_decay_length(w, g).map_err(err)?;
    let v = visibility(p, &window(n0, l, gamma0, g, t));
    Ok((
        l1 <= 0.08 && v <= 0.05,
        format!(
            "L1 to diffusion oracle {l1:.4} (limit 0.08); visibility {v:.4} (limit 0.05); {} links, dt {:.4}, {:.1}s",
            spec.n_links(),
            run.dt,
            start.elapsed().as_secs_f64()
        ),
    ))
}

/// Coherent release at `t` and its weak-decoherence Lorentzian blur.
fn weak_patterns(l: usize, gamma: f64, t: f64) -> Result<(Vec<f64>, Vec<f64>, FringeWindow), String> {
    let (g, w) = (1.0, 0.15);
    let (spec, n0) = double_slit_lattice(g, w, l, t).map_err(err)?;
    let psi = prepare_psi_plus(&spec).map_err(err)?;
    let pure = bessel_free_propagate(&spec.without_wells(), &psi, t).map_err(err)?.probabilities();
    let blurred = lorentzian_oracle(&pure, g, gamma, t).map_err(err)?;
    let gamma0 = inverse_decay_length(w, g).map_err(err)?;
    Ok((pure, blurred, window(n0, l, gamma0, g, t)))
}

fn weak_visibility(l: usize, gamma: f64, t: f64) -> Result<f64, String> {
    let (_, p, w) = weak_patterns(l, gamma, t)?;
    Ok(visibility(&p, &w))
}

/// Harmonic contrast of the blurred pattern relative to the coherent one.
fn relative_contrast(l: usize, gamma: f64, t: f64) -> Result<f64, String> {
    let (pure, p, _) = weak_patterns(l, gamma, t)?;
    let period = fringe_spacing_closed_form(1.0, t, l);
    Ok(fringe_contrast(&p, period).map_err(err)? / fringe_contrast(&pure, period).map_err(err)?)
}

fn criterion_5() -> Check {
    let (g, w, l) = (1.0, 0.15, 50);
    let gamma = 1e-3 / 8.0;
    let t_dec = decoherence_time(gamma, l);
    let early = weak_visibility(l, gamma, 0.25 * t_dec)?;
    let late = weak_visibility(l, gamma, 2.0 * t_dec)?;
    let contrast = (-std::f64::consts::FRAC_PI_2).exp();

    let (gamma_b, t) = (1e-3, 300.0);
    let start = Instant::now();
    let (spec, _) = decoherence_lattice(g, w, l, t, DEFAULT_GUARD_LINKS).map_err(err)?;
    let psi = prepare_psi_plus(&spec).map_err(err)?;
    let free = spec.without_wells();
    let run = evolve_master_on(
        &free,
        &KinkDensityMatrix::pure(&psi),
        &DephasingConfig::new(gamma_b).with_output_times(vec![t]),
        t,
    )
    .map_err(err)?;
    let pure = bessel_free_propagate(&free, &psi, t).map_err(err)?.probabilities();
    let closure = lorentzian_oracle(&pure, g, gamma_b, t).map_err(err)?;
    let l1 = l1_distance(run.trace.distribution(0), &closure).map_err(err)?;
    Ok((
        early > 0.5 && late < 0.2 && l1 <= 0.05,
        format!(
            "visibility {early:.4} at 0.25 t_dec (need > 0.5; blur predicts e^(-pi/2) = {contrast:.4}), {late:.2e} at 2 t_dec (need < 0.2); \
             Lorentzian vs master L1 {l1:.4} at gt = 300 (limit 0.05, {} links, dt {:.3}, {:.1}s)",
            spec.n_links(),
            run.dt,
            start.elapsed().as_secs_f64()
        ),
    ))
}

fn half_life_exponent(ls: &[usize], t_half: &[f64]) -> f64 {
    let x: Vec<f64> = ls.iter().map(|&l| (l as f64).ln()).collect();
    let y: Vec<f64> = t_half.iter().map(|t| t.ln()).collect();
    linear_slope(&x, &y)
}

fn criterion_6() -> Check {
    let gamma = 5e-5;
    let ls = [25usize, 50, 100];
    let mut contrast = Vec::new();
    let mut extrema = Vec::new();
    for &l in &ls {
        let t_dec = decoherence_time(gamma, l);
        let crossing = |f: fn(usize, f64, f64) -> Result<f64, String>| {
            decay_crossing(|t| Ok(f(l, gamma, t).unwrap_or(0.0)), 0.5, 0.05 * t_dec, t_dec, 1e-4).map_err(err)
        };
        contrast.push(crossing(relative_contrast)?);
        extrema.push(crossing(weak_visibility)?);
    }
    let exponent = half_life_exponent(&ls, &contrast);
    let diagnostic = half_life_exponent(&ls, &extrema);
    Ok((
        (exponent + 1.0).abs() <= 0.2,
        format!(
            "contrast half-life {:.1}, {:.1}, {:.1} for L = 25, 50, 100 at gamma = {gamma}; exponent {exponent:.4} (need -1 +- 0.2); \
             extremum visibility half-life {:.1}, {:.1}, {:.1}, exponent {diagnostic:.4}",
            contrast[0], contrast[1], contrast[2], extrema[0], extrema[1], extrema[2]
        ),
    ))
}

fn criterion_7() -> Check {
    let spec = release_lattice(1.0, 1, 20.0).map_err(err)?;
    let c = spec.n_links() / 2;
    let p = bessel_free_propagate(&spec, &KinkState::localized(spec.n_links(), c).map_err(err)?, 20.0)
        .map_err(err)?
        .probabilities();
    let bessel = (0..p.len()).map(|n| (p[n] - bessel_j(n as i64 - c as i64, 40.0).powi(2)).abs()).fold(0.0, f64::max);

    let walled = LatticeSpec::with_links(201, 1.0, Boundary::HardWall).map_err(err)?.with_well(100, 0.25).map_err(err)?;
    let times: Vec<f64> = (1..=60).map(|k| 5.0 * k as f64).collect();
    let mut mirror: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for initial in [trapped_kink(&walled, 100, 0.25).map_err(err)?, KinkState::localized(201, 100).map_err(err)?] {
        let trace = run_release(&walled, &initial, &RampSchedule::sudden(), &times).map_err(err)?;
        for d in trace.distributions() {
            mirror = mirror.max(mirror_residual(d, 100));
            norm = norm.max((d.iter().sum::<f64>() - 1.0).abs());
        }
    }
    Ok((
        bessel <= 1e-6 && mirror <= 1e-8 && norm <= 1e-8,
        format!("max |p - J^2| {bessel:.2e} at gt = 20; self-interference to gt = 300: mirror {mirror:.2e}, norm {norm:.2e}"),
    ))
}

fn criterion_8() -> Check {
    let mut energy: f64 = 0.0;
    for r in [0.05, 0.15, 0.25, 0.5, 1.0] {
        let spec = single_well_validation_lattice(r, 1.0).map_err(err)?;
        let s = single_well_bound_state(&spec).map_err(err)?;
        energy = energy.max((kth_eigenvalue(&build_hamiltonian(&spec), 0) - s.energy).abs());
    }
    let mut gap: f64 = 0.0;
    let mut doubled: f64 = 0.0;
    for r in [0.15, 0.25, 0.5, 1.0] {
        let gamma0 = inverse_decay_length(r, 1.0).map_err(err)?;
        let l6 = (6.0 / gamma0).ceil() as usize;
        for l in l6..=(14.0 / gamma0).floor() as usize {
            let exact = exact_tunneling_gap(r, 1.0, l).map_err(err)?.ok_or("antisymmetric state unbound")?;
            gap = gap.max((tunneling_gap(r, 1.0, l) / exact - 1.0).abs());
            doubled = doubled.max((double_exponent_tunneling_gap(r, 1.0, l) / exact - 1.0).abs());
        }
    }
    Ok((
        energy <= 1e-8 && gap <= 0.01,
        format!(
            "single-well energy error {energy:.2e}; gap relative error {:.3}% for gamma0 L >= 6 (e^(-2 gamma0 L) form: {:.1}%)",
            100.0 * gap,
            100.0 * doubled
        ),
    ))
}

fn criterion_9() -> Check {
    let (n, g, link, w) = (10, 0.1, 4, 0.05);
    let chain = SpinChainSpec::new(n, g).and_then(|c| c.with_weak_link(link, w)).map_err(err)?;
    let times: Vec<f64> = (1..=40).map(|k| 5.0 * k as f64).collect();
    let lattice = chain.effective_lattice().map_err(err)?;
    let prop = EigenPropagator::for_lattice(&lattice).map_err(err)?;
    let h2 = second_order_kink_hamiltonian(&chain).map_err(err)?;
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    let mut kinks: f64 = 0.0;
    for start in 0..n - 1 {
        let initial = basis_state(&chain, kink_configuration(n, start).map_err(err)?).map_err(err)?;
        let full = full_evolve_pure(&chain, &initial, &times).map_err(err)?;
        let delta = KinkState::localized(lattice.n_links(), start).map_err(err)?;
        let refined = evolve_kink_matrix(&h2, delta.amplitudes(), &times).map_err(err)?;
        for (i, &t) in times.iter().enumerate() {
            let p = full.trace.distribution(i);
            let one = prop.propagate(&delta, t).map_err(err)?.probabilities();
            first = first.max(l1_distance(p, &one).map_err(err)?);
            second = second.max(l1_distance(p, refined.distribution(i)).map_err(err)?);
            kinks = kinks.max((full.kink_number[i] - 1.0).abs());
        }
    }
    let ghz_times: Vec<f64> = (1..=50).map(|k| 0.2 * k as f64).collect();
    let mut ghz: f64 = 0.0;
    for spins in [4, 10, 20] {
        let gamma = 0.01;
        let d = ghz_decoherence_demo(spins, gamma, &ghz_times).map_err(err)?;
        let want = gamma * spins as f64;
        ghz = ghz.max((d.fitted_rate - want).abs() / want);
    }
    Ok((
        first <= 0.05 && ghz <= 1e-6,
        format!(
            "chain vs one-kink model L1 {first:.4} up to gt = 20 over all starts (limit 0.05; second-order kink model {second:.4}; \
             kink number within {kinks:.4} of 1); GHZ rate relative error {ghz:.1e}"
        ),
    ))
}

fn wavepacket(n: usize, center: f64, width: f64, k: f64) -> Result<KinkState, String> {
    let amps: Vec<Complex64> = (0..n)
        .map(|i| {
            let x = i as f64 - center;
            Complex64::from_polar((-x * x / (4.0 * width * width)).exp(), k * x)
        })
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    KinkState::new(&amps.iter().map(|z| z / norm).collect::<Vec<_>>()).map_err(err)
}

fn criterion_10() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;

    let free = LatticeSpec::with_links(1001, 1.0, Boundary::EffectivelyInfinite).map_err(err)?;
    let delta = KinkState::localized(1001, 500).map_err(err)?;
    let b = bessel_free_propagate(&free, &delta, 50.0).map_err(err)?;
    let e = EigenPropagator::for_lattice(&free).map_err(err)?.propagate(&delta, 50.0).map_err(err)?;
    let cross = l1_distance(&b.probabilities(), &e.probabilities()).map_err(err)?;
    ok &= cross <= 1e-6 && (b.norm_sqr() - 1.0).abs() <= 1e-12 && (e.norm_sqr() - 1.0).abs() <= 1e-12;
    notes.push(format!("eigen vs Bessel {cross:.1e}"));

    let walled = LatticeSpec::with_links(101, 1.0, Boundary::HardWall).map_err(err)?;
    let rho = KinkDensityMatrix::pure(&wavepacket(101, 50.0, 3.0, 0.7)?);
    let mut worst: f64 = 0.0;
    for gamma in [0.0, 1e-4, 1e-2, 0.5, 5.0] {
        let cfg = DephasingConfig::new(gamma).with_output_times((1..=6).map(|k| 5.0 * k as f64).collect());
        let run = evolve_master_on(&walled, &rho, &cfg, 30.0).map_err(err)?;
        let r = &run.final_state;
        worst = worst.max((r.trace() - 1.0).abs()).max(r.hermiticity_defect()).max(-r.min_diagonal());
    }
    ok &= worst <= 1e-10;
    notes.push(format!("density-matrix invariants {worst:.1e}"));

    let (g, gamma) = (1.0, 10.0);
    let lattice = LatticeSpec::with_links(201, g, Boundary::HardWall).map_err(err)?;
    let rho = KinkDensityMatrix::pure(&wavepacket(201, 100.0, 2.0, 0.0)?);
    let t = 50.0 / gamma;
    let run = evolve_master_on(&lattice, &rho, &DephasingConfig::new(gamma).with_output_times(vec![t]), t).map_err(err)?;
    let reduced = strong_decoherence_reduced(&rho.diagonal(), Some(&slave_field(&rho)), g, gamma, &[t]).map_err(err)?;
    let strong = l1_distance(run.trace.distribution(0), reduced.distribution(0)).map_err(err)?;
    ok &= strong <= 0.02;
    notes.push(format!("strong closure vs master {strong:.4}"));

    let dir = tempfile::tempdir().map_err(err)?;
    let mut cfg = ScenarioConfig::defaults(Scenario::OracleValidation);
    cfg.n_spins = 8;
    cfg.g = 0.2;
    cfg.link = 3;
    cfg.start_link = 3;
    cfg.t_end = 4.0;
    cfg.outputs = 2;
    cfg.gamma = 0.5;
    cfg.trajectories = 50;
    cfg.seed = 11;
    let a = scenarios::run(&cfg, &dir.path().join("a")).map_err(err)?;
    let b = scenarios::run(&cfg, &dir.path().join("b")).map_err(err)?;
    let same = [(&a.trace, &b.trace), (&a.oracle, &b.oracle), (&a.metrics, &b.metrics)]
        .iter()
        .all(|(x, y)| std::fs::read(x).ok() == std::fs::read(y).ok());
    ok &= same;
    notes.push(format!("determinism {}", if same { "byte-identical" } else { "DIFFERS" }));

    let TraceFile::Kink(trace) = read_trace(&a.trace).map_err(err)? else { return Err("expected kink trace".into()) };
    let copy = dir.path().join("copy.csv");
    write_trace(&copy, &trace).map_err(err)?;
    let round = read_trace(&copy).map_err(err)? == TraceFile::Kink(trace)
        && std::fs::read(&copy).map_err(err)? == std::fs::read(&a.trace).map_err(err)?;
    ok &= round;
    notes.push(format!("CSV round-trip {}", if round { "exact" } else { "LOSSY" }));
    Ok((ok, notes.join("; ")))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let criteria: [(u32, fn() -> Check); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && KNOWN_RED.contains(&id) { " [known red]" } else { "" };
        println!("{tag} criterion {id}: {detail}{note}");
        if !pass && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
