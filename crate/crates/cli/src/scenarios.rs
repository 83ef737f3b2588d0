//! Scenario runners. Each one writes a trace, an oracle trace and the
//! metrics obtained by analysing those two files.

use std::path::{Path, PathBuf};

use kink_core::bound_states::inverse_decay_length;
use kink_core::fringes::analytic_fringes;
use kink_core::lattice::DEFAULT_GUARD_LINKS;
use kink_core::open::{
    decoherence_lattice, diffusion_constant, diffusion_oracle, evolve_master_on, lorentzian_oracle, DephasingConfig,
};
use kink_core::spin_chain::{
    basis_state, dense_dephasing, full_evolve_pure, ghz_decoherence_demo, kink_configuration, trajectory_dephasing,
    SpinChainSpec, MAX_DENSE_SPINS,
};
use kink_core::unitary::{
    bessel_free_propagate, double_slit_lattice, image_propagate, prepare_psi_plus, run_release, trapped_kink,
    EigenPropagator, RampSchedule,
};
use kink_core::{Boundary, KinkDensityMatrix, KinkState, LatticeSpec, ProbabilityTrace, TraceMetadata};

use crate::analysis::{analyze_files, Metrics};
use crate::config::{Closure, Scenario, ScenarioConfig};
use crate::csvio::{coherence_bytes, key_value_bytes, metadata_rows, sidecar_path, write_atomic, write_trace};
use crate::error::{CliError, CliResult, Context};

/// Step used by the dense spin-chain integrator when `dt = 0`.
const DENSE_SPIN_STEP: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: PathBuf,
    pub oracle: PathBuf,
    pub metrics: PathBuf,
    pub values: Metrics,
}

pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> CliResult<RunOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let trace = out_dir.join(&cfg.trace_file);
    let oracle = out_dir.join(&cfg.oracle_file);
    let metrics = out_dir.join(&cfg.metrics_file);
    if trace == oracle || trace == metrics || oracle == metrics {
        return Err(CliError::config("config: [output] file names must differ"));
    }
    log::info!("running {} into {}", cfg.scenario, out_dir.display());
    match cfg.scenario {
        Scenario::GhzDemo => {
            let (times, c, c_oracle, meta) = ghz(cfg)?;
            write_coherence(&trace, &times, &c, &meta)?;
            write_coherence(&oracle, &times, &c_oracle, &meta)?;
        }
        _ => {
            let (sim, reference) = match cfg.scenario {
                Scenario::DoubleSlit => double_slit(cfg)?,
                Scenario::Decoherence => decoherence(cfg)?,
                Scenario::SelfInterference => self_interference(cfg)?,
                Scenario::OracleValidation => oracle_validation(cfg)?,
                Scenario::GhzDemo => unreachable!(),
            };
            write_trace(&trace, &sim)?;
            write_trace(&oracle, &reference)?;
        }
    }
    let values = analyze_files(&trace, Some(&oracle))?;
    write_atomic(&metrics, &key_value_bytes(&values))?;
    Ok(RunOutput { trace, oracle, metrics, values })
}

fn write_coherence(path: &Path, times: &[f64], c: &[f64], meta: &TraceMetadata) -> CliResult<()> {
    write_atomic(path, &coherence_bytes(times, c))?;
    write_atomic(&sidecar_path(path), &key_value_bytes(&metadata_rows(meta)))
}

fn finish(mut trace: ProbabilityTrace, params: &[(&str, String)], seed: u64, source: &str) -> ProbabilityTrace {
    let meta = trace.metadata_mut();
    for (k, v) in params {
        meta.set(k, v);
    }
    meta.set("source", source);
    meta.seed = Some(seed);
    trace
}

fn oracle_trace(lattice: &LatticeSpec, rows: Vec<(f64, Vec<f64>)>) -> CliResult<ProbabilityTrace> {
    let mut trace = ProbabilityTrace::new(TraceMetadata::for_lattice(lattice));
    for (t, p) in rows {
        trace.push(t, p).context("oracle")?;
    }
    Ok(trace)
}

fn double_slit(cfg: &ScenarioConfig) -> CliResult<(ProbabilityTrace, ProbabilityTrace)> {
    let times = cfg.output_times();
    let t_max = cfg.t_end + cfg.ramp_duration;
    let (spec, n0) = double_slit_lattice(cfg.g, cfg.w, cfg.separation, t_max).context("double-slit lattice")?;
    let psi = prepare_psi_plus(&spec).context("double-slit preparation")?;
    let schedule = if cfg.ramp_duration > 0.0 {
        RampSchedule::new(cfg.ramp, cfg.ramp_duration).context("ramp")?
    } else {
        RampSchedule::sudden()
    };
    let sim_times: Vec<f64> = times.iter().map(|t| t + schedule.duration()).collect();
    let mut sim = run_release(&spec, &psi, &schedule, &sim_times).context("double-slit release")?;
    let gamma0 = inverse_decay_length(cfg.w, cfg.g).context("double-slit")?;
    let reference = oracle_trace(
        &spec,
        times
            .iter()
            .zip(&sim_times)
            .map(|(&t, &ts)| Ok((ts, analytic_fringes(n0, cfg.separation, gamma0, cfg.g, t, spec.n_links()).context("fringe oracle")?)))
            .collect::<CliResult<_>>()?,
    )?;
    let center = n0 as f64 + 0.5 * cfg.separation as f64;
    let mut params = vec![
        ("g", cfg.g.to_string()),
        ("w", cfg.w.to_string()),
        ("separation", cfg.separation.to_string()),
        ("fringe_center", center.to_string()),
        ("release_time", schedule.duration().to_string()),
    ];
    if cfg.separation.is_multiple_of(2) {
        params.push(("mirror_center", (n0 + cfg.separation / 2).to_string()));
    }
    sim.metadata_mut().lattice = Some(spec.clone());
    Ok((finish(sim, &params, cfg.seed, "simulation"), finish(reference, &params, cfg.seed, "analytic-fringes")))
}

fn decoherence(cfg: &ScenarioConfig) -> CliResult<(ProbabilityTrace, ProbabilityTrace)> {
    let times = cfg.output_times();
    let (spec, n0) =
        decoherence_lattice(cfg.g, cfg.w, cfg.separation, cfg.t_end, DEFAULT_GUARD_LINKS).context("decoherence lattice")?;
    let psi = prepare_psi_plus(&spec).context("decoherence preparation")?;
    let free = spec.without_wells();
    let mut dcfg = DephasingConfig::new(cfg.gamma).with_output_times(times.clone());
    if cfg.dt > 0.0 {
        dcfg = dcfg.with_dt(cfg.dt);
    }
    let run = evolve_master_on(&free, &KinkDensityMatrix::pure(&psi), &dcfg, cfg.t_end).context("master equation")?;
    let closure = cfg.closure.resolve(cfg.g, cfg.gamma);
    let p0 = psi.probabilities();
    let rows = times
        .iter()
        .map(|&t| {
            let p = match closure {
                Closure::Strong => diffusion_oracle(&p0, diffusion_constant(cfg.g, cfg.gamma), t).context("diffusion oracle")?,
                _ => {
                    let pure = bessel_free_propagate(&free, &psi, t).context("coherent oracle")?.probabilities();
                    lorentzian_oracle(&pure, cfg.g, cfg.gamma, t).context("lorentzian oracle")?
                }
            };
            Ok((t, p))
        })
        .collect::<CliResult<_>>()?;
    let reference = oracle_trace(&free, rows)?;
    let mut params = vec![
        ("g", cfg.g.to_string()),
        ("w", cfg.w.to_string()),
        ("separation", cfg.separation.to_string()),
        ("fringe_center", (n0 as f64 + 0.5 * cfg.separation as f64).to_string()),
        ("gamma", cfg.gamma.to_string()),
        ("closure", closure.as_str().to_string()),
        ("dt", run.dt.to_string()),
        ("steps", run.steps.to_string()),
    ];
    if cfg.separation.is_multiple_of(2) {
        params.push(("mirror_center", (n0 + cfg.separation / 2).to_string()));
    }
    let source = match closure {
        Closure::Strong => "diffusion",
        _ => "lorentzian",
    };
    Ok((finish(run.trace, &params, cfg.seed, "simulation"), finish(reference, &params, cfg.seed, source)))
}

fn self_interference(cfg: &ScenarioConfig) -> CliResult<(ProbabilityTrace, ProbabilityTrace)> {
    let times = cfg.output_times();
    let spec = LatticeSpec::with_links(cfg.n_links, cfg.g, Boundary::HardWall)
        .and_then(|s| s.with_well(cfg.link, cfg.w))
        .context("self-interference lattice")?;
    let psi = trapped_kink(&spec, cfg.link, cfg.w).context("trapped kink")?;
    let free = spec.without_wells();
    let sim = if cfg.gamma == 0.0 {
        run_release(&spec, &psi, &RampSchedule::sudden(), &times).context("self-interference release")?
    } else {
        let mut dcfg = DephasingConfig::new(cfg.gamma).with_output_times(times.clone());
        if cfg.dt > 0.0 {
            dcfg = dcfg.with_dt(cfg.dt);
        }
        evolve_master_on(&free, &KinkDensityMatrix::pure(&psi), &dcfg, cfg.t_end).context("master equation")?.trace
    };
    let rows = times
        .iter()
        .map(|&t| {
            let pure = image_propagate(&free, &psi, t).context("image oracle")?.probabilities();
            let p = if cfg.gamma > 0.0 {
                lorentzian_oracle(&pure, cfg.g, cfg.gamma, t).context("lorentzian oracle")?
            } else {
                pure
            };
            Ok((t, p))
        })
        .collect::<CliResult<_>>()?;
    let reference = oracle_trace(&free, rows)?;
    let params = vec![
        ("g", cfg.g.to_string()),
        ("w", cfg.w.to_string()),
        ("link", cfg.link.to_string()),
        ("gamma", cfg.gamma.to_string()),
        ("mirror_center", cfg.link.to_string()),
    ];
    Ok((finish(sim, &params, cfg.seed, "simulation"), finish(reference, &params, cfg.seed, "images")))
}

/// Times, simulated coherence, oracle coherence and metadata.
type CoherenceRun = (Vec<f64>, Vec<f64>, Vec<f64>, TraceMetadata);

fn ghz(cfg: &ScenarioConfig) -> CliResult<CoherenceRun> {
    let times = cfg.output_times();
    let decay = ghz_decoherence_demo(cfg.n_spins, cfg.gamma, &times).context("ghz demo")?;
    let rate = cfg.gamma * cfg.n_spins as f64;
    let oracle: Vec<f64> = times.iter().map(|t| (-rate * t).exp()).collect();
    let mut meta = TraceMetadata::default()
        .with("gamma", cfg.gamma)
        .with("n_spins", cfg.n_spins)
        .with("one_over_e_time", decay.one_over_e_time());
    meta.seed = Some(cfg.seed);
    Ok((decay.times, decay.coherence, oracle, meta))
}

fn oracle_validation(cfg: &ScenarioConfig) -> CliResult<(ProbabilityTrace, ProbabilityTrace)> {
    let times = cfg.output_times();
    let chain = SpinChainSpec::new(cfg.n_spins, cfg.g)
        .and_then(|c| c.with_weak_link(cfg.link, cfg.w))
        .context("spin chain")?;
    let initial = kink_configuration(cfg.n_spins, cfg.start_link)
        .and_then(|c| basis_state(&chain, c))
        .context("initial kink")?;
    let dt = if cfg.dt > 0.0 { cfg.dt } else { DENSE_SPIN_STEP };
    let (method, sim, kink_number) = if cfg.gamma == 0.0 {
        let r = full_evolve_pure(&chain, &initial, &times).context("spin chain")?;
        ("pure", r.trace, r.kink_number)
    } else if cfg.n_spins <= MAX_DENSE_SPINS {
        let r = dense_dephasing(&chain, &initial, cfg.gamma, &times, dt).context("spin chain")?;
        ("dense", r.trace, r.kink_number)
    } else {
        let r = trajectory_dephasing(&chain, &initial, cfg.gamma, &times, cfg.trajectories, cfg.seed)
            .context("spin chain")?;
        ("trajectories", r.trace, r.kink_number)
    };
    let lattice = chain.effective_lattice().context("effective lattice")?;
    let start = KinkState::localized(lattice.n_links(), cfg.start_link).context("effective lattice")?;
    let reference = if cfg.gamma == 0.0 {
        let prop = EigenPropagator::for_lattice(&lattice).context("effective model")?;
        let rows = times
            .iter()
            .map(|&t| Ok((t, prop.propagate(&start, t).context("effective model")?.probabilities())))
            .collect::<CliResult<_>>()?;
        oracle_trace(&lattice, rows)?
    } else {
        let dcfg = DephasingConfig::new(cfg.gamma).with_output_times(times.clone()).with_dt(dt);
        evolve_master_on(&lattice, &KinkDensityMatrix::pure(&start), &dcfg, cfg.t_end).context("effective model")?.trace
    };
    let worst = kink_number.iter().map(|k| (k - 1.0).abs()).fold(0.0, f64::max);
    let params = vec![
        ("g", cfg.g.to_string()),
        ("w", cfg.w.to_string()),
        ("link", cfg.link.to_string()),
        ("start_link", cfg.start_link.to_string()),
        ("gamma", cfg.gamma.to_string()),
        ("method", method.to_string()),
        ("kink_number_max_deviation", worst.to_string()),
    ];
    let mut sim = sim;
    sim.metadata_mut().lattice = Some(lattice.clone());
    Ok((finish(sim, &params, cfg.seed, "spin-chain"), finish(reference, &params, cfg.seed, "one-kink-model")))
}
