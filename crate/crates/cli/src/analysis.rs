//! Metrics recomputed from trace files. `simulate` writes its metrics by
//! running exactly this analysis on the files it has just written.

use std::path::Path;

use kink_core::bound_states::inverse_decay_length;
use kink_core::distribution::{l1_distance, linear_slope, mean, mirror_residual, variance};
use kink_core::fringes::{fringe_spacing, fringe_spacing_closed_form, fringe_visibility, FringeWindow, Smoothing};
use kink_core::{ProbabilityTrace, TraceMetadata};

use crate::csvio::{fmt_f64, read_trace, TraceFile};
use crate::error::{CliError, CliResult};

pub type Metrics = Vec<(String, String)>;

fn param(meta: &TraceMetadata, key: &str) -> Option<f64> {
    meta.parameters.get(key).and_then(|v| v.parse().ok())
}

fn push(m: &mut Metrics, key: &str, value: f64) {
    m.push((key.to_string(), fmt_f64(value)));
}

/// Analysis window and period for the final slice, from the trace
/// parameters when they describe a two-lobe release.
fn fringe_window(meta: &TraceMetadata, p: &[f64], t: f64) -> (FringeWindow, Option<f64>) {
    let center = param(meta, "fringe_center").unwrap_or_else(|| mean(p));
    let g = param(meta, "g");
    let separation = param(meta, "separation").filter(|&l| l > 0.0);
    let gamma0 = param(meta, "w").zip(g).and_then(|(w, g)| inverse_decay_length(w, g).ok()).filter(|&x| x > 0.0);
    match (g, separation) {
        (Some(g), Some(l)) => {
            let period = fringe_spacing_closed_form(g, t, l as usize);
            let half = match gamma0 {
                Some(gamma0) => 2.0 * gamma0 * g * t,
                None => 0.5 * p.len() as f64,
            };
            (FringeWindow::new(center, half.max(2.0 * period)).with_period(period), Some(period))
        }
        _ => (FringeWindow::new(center, 0.5 * p.len() as f64), None),
    }
}

pub fn analyze_kink_trace(trace: &ProbabilityTrace, oracle: Option<&ProbabilityTrace>) -> CliResult<Metrics> {
    let meta = trace.metadata();
    let (t, p) = trace.last().ok_or_else(|| CliError::config("analyze: empty trace"))?;
    let mut m: Metrics = vec![("kind".into(), "kink-trace".into())];
    m.push(("n_times".into(), trace.len().to_string()));
    m.push(("n_links".into(), trace.n_links().to_string()));
    push(&mut m, "t_final", t);
    let sum_dev = trace.distributions().iter().map(|d| (d.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    push(&mut m, "trace_sum_max_deviation", sum_dev);
    push(&mut m, "mean_final", mean(p));
    push(&mut m, "variance_final", variance(p));
    if trace.len() >= 2 {
        let v: Vec<f64> = trace.distributions().iter().map(|d| variance(d)).collect();
        push(&mut m, "variance_slope", linear_slope(trace.times(), &v));
    }
    if let Some(c) = param(meta, "mirror_center") {
        let c = c as usize;
        if c < p.len() {
            let worst = trace.distributions().iter().map(|d| mirror_residual(d, c)).fold(0.0, f64::max);
            push(&mut m, "mirror_residual_max", worst);
        }
    }
    let t_free = t - param(meta, "release_time").unwrap_or(0.0);
    let (window, period) = fringe_window(meta, p, t_free);
    if let Some(period) = period {
        push(&mut m, "fringe_spacing_expected", period);
    }
    if let Ok(s) = fringe_spacing(p, &window, Smoothing::Auto) {
        push(&mut m, "fringe_spacing", s);
    }
    if let Ok(v) = fringe_visibility(p, &window, Smoothing::Auto) {
        push(&mut m, "visibility_final", v);
    }
    if let Some(k) = param(meta, "kink_number_max_deviation") {
        push(&mut m, "kink_number_max_deviation", k);
    }
    if let Some(o) = oracle {
        if !trace.same_grid(o) {
            return Err(CliError::config("analyze: oracle does not share the trace's times and lattice"));
        }
        let errs: Vec<f64> = trace
            .distributions()
            .iter()
            .zip(o.distributions())
            .map(|(a, b)| l1_distance(a, b).expect("same length"))
            .collect();
        push(&mut m, "l1_to_oracle_final", *errs.last().expect("non-empty"));
        push(&mut m, "l1_to_oracle_max", errs.iter().copied().fold(0.0, f64::max));
    }
    Ok(m)
}

pub fn analyze_coherence(times: &[f64], coherence: &[f64], meta: &TraceMetadata, oracle: Option<&[f64]>) -> CliResult<Metrics> {
    let mut m: Metrics = vec![("kind".into(), "ghz-coherence".into())];
    m.push(("n_times".into(), times.len().to_string()));
    let t_final = *times.last().ok_or_else(|| CliError::config("analyze: empty coherence trace"))?;
    push(&mut m, "t_final", t_final);
    if times.len() >= 2 && coherence.iter().all(|&c| c > 0.0) {
        let y: Vec<f64> = coherence.iter().map(|c| -c.ln()).collect();
        let rate = linear_slope(times, &y);
        push(&mut m, "fitted_rate", rate);
        if let (Some(gamma), Some(n)) = (param(meta, "gamma"), param(meta, "n_spins")) {
            let expected = gamma * n;
            push(&mut m, "expected_rate", expected);
            if expected > 0.0 {
                push(&mut m, "rate_relative_error", (rate - expected).abs() / expected);
            }
        }
    }
    if let Some(o) = oracle {
        if o.len() != coherence.len() {
            return Err(CliError::config("analyze: oracle does not share the trace's times"));
        }
        let worst = coherence.iter().zip(o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        push(&mut m, "max_abs_to_oracle", worst);
    }
    Ok(m)
}

/// Reads `trace` (and `oracle`, if given) and computes the metrics.
pub fn analyze_files(trace: &Path, oracle: Option<&Path>) -> CliResult<Metrics> {
    let data = read_trace(trace)?;
    let oracle = oracle.map(read_trace).transpose()?;
    match (&data, &oracle) {
        (TraceFile::Kink(t), None) => analyze_kink_trace(t, None),
        (TraceFile::Kink(t), Some(TraceFile::Kink(o))) => analyze_kink_trace(t, Some(o)),
        (TraceFile::Coherence { times, coherence, metadata }, None) => analyze_coherence(times, coherence, metadata, None),
        (TraceFile::Coherence { times, coherence, metadata }, Some(TraceFile::Coherence { times: ot, coherence: oc, .. })) => {
            if ot != times {
                return Err(CliError::config("analyze: oracle does not share the trace's times"));
            }
            analyze_coherence(times, coherence, metadata, Some(oc))
        }
        _ => Err(CliError::config("analyze: trace and oracle have different layouts")),
    }
}
