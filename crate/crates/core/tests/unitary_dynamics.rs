use kink_core::bessel::bessel_j;
use kink_core::bound_states::{double_well_validation_lattice, exact_double_well_pair, inverse_decay_length, single_well_profile};
use kink_core::distribution::{jaggedness, l1_distance, mirror_residual};
use kink_core::unitary::{
    bessel_free_propagate, double_slit_lattice, image_propagate, prepare_bilocal_tunneling, prepare_psi_plus,
    prepare_psi_plus_adiabatic, release_lattice, run_release, trapped_kink, EigenPropagator, RampKind, RampSchedule,
};
use kink_core::{build_hamiltonian, Boundary, Complex64, KinkState, LatticeSpec};

fn halves(p: &[f64], mid: usize) -> (f64, f64) {
    let left: f64 = p[..mid].iter().sum::<f64>() + 0.5 * p[mid];
    let right: f64 = p[mid + 1..].iter().sum::<f64>() + 0.5 * p[mid];
    (left, right)
}

fn packet(n: usize, center: usize, width: f64, k: f64) -> KinkState {
    let amps: Vec<Complex64> = (0..n)
        .map(|i| {
            let x = i as f64 - center as f64;
            Complex64::from_polar((-(x * x) / (4.0 * width * width)).exp(), k * x)
        })
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    KinkState::new(&amps.iter().map(|z| z / norm).collect::<Vec<_>>()).unwrap()
}

#[test]
fn eigen_propagation_identity_and_stationarity() {
    let spec = double_well_validation_lattice(0.15, 1.0, 10).unwrap();
    let prop = EigenPropagator::for_lattice(&spec).unwrap();
    let s = packet(spec.n_links(), 300, 6.0, 0.4);
    let same = prop.propagate(&s, 0.0).unwrap();
    for (a, b) in same.amplitudes().iter().zip(s.amplitudes()) {
        assert!((a - b).norm() < 1e-12);
    }
    let ground = prepare_psi_plus(&spec).unwrap();
    for t in [1.0, 37.5, 1e4] {
        let out = prop.propagate(&ground, t).unwrap();
        assert!(l1_distance(&out.probabilities(), &ground.probabilities()).unwrap() < 1e-10);
    }
}

#[test]
fn unitarity_and_energy_conservation() {
    let spec = double_well_validation_lattice(0.15, 1.0, 10).unwrap();
    let h = build_hamiltonian(&spec);
    let prop = EigenPropagator::new(&h).unwrap();
    let s = packet(spec.n_links(), 280, 4.0, 1.1);
    let e0 = h.expectation(s.amplitudes());
    for t in [0.3, 12.0, 150.0] {
        let out = prop.propagate(&s, t).unwrap();
        assert!((out.norm_sqr().sqrt() - 1.0).abs() < 1e-8);
        assert!((h.expectation(out.amplitudes()) - e0).abs() <= 1e-8 * 4.0);
    }
}

#[test]
fn beat_reaches_equal_populations_at_quarter_period() {
    let spec = double_well_validation_lattice(0.15, 1.0, 10).unwrap();
    let h = build_hamiltonian(&spec);
    let ((ep, vp), (em, vm)) = exact_double_well_pair(&h);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps: Vec<Complex64> = vp.iter().zip(&vm).map(|(a, b)| Complex64::new(s * (a + b), 0.0)).collect();
    let psi = KinkState::new(&amps).unwrap();
    let omega = 0.5 * (em - ep);
    let out = EigenPropagator::new(&h).unwrap().propagate(&psi, 0.25 * std::f64::consts::PI / omega).unwrap();
    let mid = spec.n_links() / 2;
    let (l, r) = halves(&out.probabilities(), mid);
    assert!((l - r).abs() < 1e-6, "{l} {r}");
    let (l0, r0) = halves(&psi.probabilities(), mid);
    assert!(l0.max(r0) > 0.9);
}

#[test]
fn bilocal_state_tunnels_between_wells() {
    let (w, g, l) = (0.15, 1.0, 30);
    let spec = double_well_validation_lattice(w, g, l).unwrap();
    let gamma0 = inverse_decay_length(w, g).unwrap();
    let h = build_hamiltonian(&spec);
    let ((ep, _), (em, _)) = exact_double_well_pair(&h);
    let omega = 0.5 * (em - ep);
    let mid = spec.n_links() / 2;
    let bound = (-gamma0 * l as f64).exp();
    let (_, right) = halves(&prepare_bilocal_tunneling(&spec, 0.0).unwrap().probabilities(), mid);
    assert!(right <= bound, "{right} vs {bound}");
    let (left, _) =
        halves(&prepare_bilocal_tunneling(&spec, 0.5 * std::f64::consts::PI / omega).unwrap().probabilities(), mid);
    assert!(left <= bound);
    let (left, right) =
        halves(&prepare_bilocal_tunneling(&spec, 0.25 * std::f64::consts::PI / omega).unwrap().probabilities(), mid);
    assert!((left - 0.5).abs() < 1e-3 && (right - 0.5).abs() < 1e-3);
}

#[test]
fn exact_psi_plus_is_a_symmetric_eigenvector() {
    let spec = double_well_validation_lattice(0.15, 1.0, 50).unwrap();
    let psi = prepare_psi_plus(&spec).unwrap();
    let h = build_hamiltonian(&spec);
    let hv = h.apply(psi.amplitudes());
    let e = h.expectation(psi.amplitudes());
    let residual = hv.iter().zip(psi.amplitudes()).map(|(a, b)| (a - b * e).norm()).fold(0.0, f64::max);
    assert!(residual < 1e-9);
    let p = psi.probabilities();
    let mid = spec.n_links() / 2;
    assert!(mirror_residual(&p, mid) < 1e-10);
    let (l, r) = halves(&p, mid);
    assert!((l - 0.5).abs() < 1e-6 && (r - 0.5).abs() < 1e-6);
}

#[test]
fn adiabatic_split_reaches_the_ground_state() {
    let spec = double_well_validation_lattice(0.5, 1.0, 8).unwrap();
    let prep = prepare_psi_plus_adiabatic(&spec, None, 0.02).unwrap();
    assert!(prep.fidelity >= 0.99, "{}", prep.fidelity);
    assert!(prepare_psi_plus_adiabatic(&spec, Some(1.0), 0.02).is_err());
}

#[test]
fn bessel_engine_matches_eigenbasis_on_a_free_lattice() {
    let spec = LatticeSpec::with_links(1001, 1.0, Boundary::EffectivelyInfinite).unwrap();
    let s = KinkState::localized(1001, 500).unwrap();
    let b = bessel_free_propagate(&spec, &s, 50.0).unwrap();
    let e = EigenPropagator::for_lattice(&spec).unwrap().propagate(&s, 50.0).unwrap();
    assert!(l1_distance(&b.probabilities(), &e.probabilities()).unwrap() < 1e-6);
    let zero = bessel_free_propagate(&spec, &s, 0.0).unwrap();
    assert_eq!(zero.probabilities(), s.probabilities());
}

#[test]
fn delta_start_gives_squared_bessel_profile() {
    let spec = release_lattice(1.0, 1, 20.0).unwrap();
    let c = spec.n_links() / 2;
    let p = bessel_free_propagate(&spec, &KinkState::localized(spec.n_links(), c).unwrap(), 20.0).unwrap().probabilities();
    let worst = (0..spec.n_links())
        .map(|n| (p[n] - bessel_j(n as i64 - c as i64, 40.0).powi(2)).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6);
}

#[test]
fn wide_packet_smooths_the_bessel_oscillation() {
    let gamma0 = inverse_decay_length(0.15, 1.0).unwrap();
    let spec = release_lattice(1.0, 600, 100.0).unwrap();
    let c = spec.n_links() / 2;
    let wide = KinkState::from_real(&single_well_profile(spec.n_links(), c, gamma0)).unwrap();
    let delta = KinkState::localized(spec.n_links(), c).unwrap();
    let jw = jaggedness(&bessel_free_propagate(&spec, &wide, 100.0).unwrap().probabilities());
    let jd = jaggedness(&bessel_free_propagate(&spec, &delta, 100.0).unwrap().probabilities());
    assert!(jd >= 3.0 * jw, "{jd} vs {jw}");
}

#[test]
fn ramps_start_full_and_end_released() {
    for kind in [RampKind::Linear, RampKind::Smooth] {
        let r = RampSchedule::new(kind, 10.0).unwrap();
        assert_eq!(r.multiplier(0.0), 1.0);
        assert_eq!(r.multiplier(10.0), 0.0);
        let s: Vec<f64> = (0..=200).map(|k| r.multiplier(0.05 * k as f64)).collect();
        assert!(s.windows(2).all(|w| w[1] <= w[0]));
    }
    assert_eq!(RampSchedule::sudden().multiplier(0.0), 1.0);
}

#[test]
fn ramped_release_keeps_the_norm() {
    let (spec, _) = double_slit_lattice(1.0, 0.15, 20, 60.0).unwrap();
    let psi = prepare_psi_plus(&spec).unwrap();
    let ramp = RampSchedule::new(RampKind::Linear, 5.0).unwrap();
    let trace = run_release(&spec, &psi, &ramp, &[2.0, 5.0, 30.0, 60.0]).unwrap();
    for d in trace.distributions() {
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn self_interference_stays_mirror_symmetric() {
    let spec = LatticeSpec::with_links(201, 1.0, Boundary::HardWall).unwrap().with_well(100, 0.25).unwrap();
    let psi = trapped_kink(&spec, 100, 0.25).unwrap();
    let times: Vec<f64> = (1..=30).map(|k| 10.0 * k as f64).collect();
    let trace = run_release(&spec, &psi, &RampSchedule::sudden(), &times).unwrap();
    for (i, d) in trace.distributions().iter().enumerate() {
        assert!(mirror_residual(d, 100) <= 1e-8);
        assert!((d.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        let images = image_propagate(&spec.without_wells(), &psi, times[i]).unwrap().probabilities();
        assert!(l1_distance(d, &images).unwrap() < 1e-9);
    }
    let delta = KinkState::localized(201, 100).unwrap();
    let d = run_release(&spec, &delta, &RampSchedule::sudden(), &times).unwrap();
    assert!(d.distributions().iter().all(|p| mirror_residual(p, 100) <= 1e-8));
}
