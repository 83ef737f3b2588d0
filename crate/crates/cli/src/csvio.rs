//! Trace CSV (`t,n,p`), coherence CSV (`t,coherence`), `key,value` metrics
//! and the `<trace>.meta` sidecar that carries the trace metadata.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use kink_core::{Boundary, LatticeSpec, ProbabilityTrace, TraceMetadata};

use crate::error::{CliError, CliResult};

/// Formats a float with 17 significant digits, which round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory csv writer")
}

pub fn trace_bytes(trace: &ProbabilityTrace) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["t", "n", "p"]).expect("in-memory csv writer");
    for (t, dist) in trace.times().iter().zip(trace.distributions()) {
        let t = fmt_f64(*t);
        for (n, p) in dist.iter().enumerate() {
            w.write_record([t.as_str(), &n.to_string(), &fmt_f64(*p)]).expect("in-memory csv writer");
        }
    }
    finish(w)
}

pub fn coherence_bytes(times: &[f64], coherence: &[f64]) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["t", "coherence"]).expect("in-memory csv writer");
    for (t, c) in times.iter().zip(coherence) {
        w.write_record([fmt_f64(*t), fmt_f64(*c)]).expect("in-memory csv writer");
    }
    finish(w)
}

pub fn key_value_bytes(rows: &[(String, String)]) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["key", "value"]).expect("in-memory csv writer");
    for (k, v) in rows {
        w.write_record([k, v]).expect("in-memory csv writer");
    }
    finish(w)
}

pub fn sidecar_path(trace: &Path) -> PathBuf {
    let mut name = trace.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// `key,value` rows describing the metadata: `lattice.*`, `well.<link>`,
/// `param.<name>` and `seed`.
pub fn metadata_rows(meta: &TraceMetadata) -> Vec<(String, String)> {
    let mut rows = Vec::new();
    if let Some(l) = &meta.lattice {
        rows.push(("lattice.n_sites".into(), l.n_sites().to_string()));
        rows.push(("lattice.g".into(), l.g().to_string()));
        rows.push(("lattice.boundary".into(), l.boundary().as_str().into()));
        rows.push(("lattice.guard_links".into(), l.guard_links().to_string()));
        rows.push(("lattice.tight_binding_margin".into(), l.tight_binding_margin().to_string()));
        for (link, w) in l.wells() {
            rows.push((format!("well.{link}"), w.to_string()));
        }
    }
    for (k, v) in &meta.parameters {
        rows.push((format!("param.{k}"), v.clone()));
    }
    if let Some(seed) = meta.seed {
        rows.push(("seed".into(), seed.to_string()));
    }
    rows
}

fn format_error(path: &Path, line: u64, reason: impl Into<String>) -> CliError {
    CliError::Format { path: path.to_path_buf(), line, reason: reason.into() }
}

/// Reads a `key,value` CSV into ordered rows.
pub fn read_key_values(path: &Path) -> CliResult<Vec<(String, String)>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(bytes.as_slice());
    let header = r.headers().map_err(|e| format_error(path, 1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["key", "value"] {
        return Err(format_error(path, 1, "expected header `key,value`"));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| format_error(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(format_error(path, line, format!("expected 2 columns, found {}", rec.len())));
        }
        rows.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(rows)
}

fn metadata_from_rows(path: &Path, rows: &[(String, String)]) -> CliResult<TraceMetadata> {
    let bad = |what: &str| format_error(path, 0, format!("sidecar: {what}"));
    let map: BTreeMap<&str, &str> = rows.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    let mut meta = TraceMetadata::default();
    if let Some(n_sites) = map.get("lattice.n_sites") {
        let get = |k: &str| map.get(k).copied().ok_or_else(|| bad(&format!("missing {k}")));
        let n_sites: usize = n_sites.parse().map_err(|_| bad("lattice.n_sites"))?;
        let g: f64 = get("lattice.g")?.parse().map_err(|_| bad("lattice.g"))?;
        let boundary = Boundary::parse(get("lattice.boundary")?).ok_or_else(|| bad("lattice.boundary"))?;
        let guard: usize = get("lattice.guard_links")?.parse().map_err(|_| bad("lattice.guard_links"))?;
        let margin: f64 = get("lattice.tight_binding_margin")?.parse().map_err(|_| bad("lattice.tight_binding_margin"))?;
        let mut lattice = LatticeSpec::new(n_sites, g, boundary)
            .map_err(|e| bad(&e.to_string()))?
            .with_guard_links(guard)
            .with_tight_binding_margin(margin);
        for (k, v) in rows {
            if let Some(link) = k.strip_prefix("well.") {
                let link: usize = link.parse().map_err(|_| bad(k))?;
                let w: f64 = v.parse().map_err(|_| bad(k))?;
                lattice.set_well(link, w).map_err(|e| bad(&e.to_string()))?;
            }
        }
        meta.lattice = Some(lattice);
    }
    for (k, v) in rows {
        if let Some(name) = k.strip_prefix("param.") {
            meta.parameters.insert(name.to_string(), v.clone());
        }
    }
    if let Some(seed) = map.get("seed") {
        meta.seed = Some(seed.parse().map_err(|_| bad("seed"))?);
    }
    Ok(meta)
}

/// Writes the trace CSV and its metadata sidecar.
pub fn write_trace(path: &Path, trace: &ProbabilityTrace) -> CliResult<()> {
    write_atomic(path, &trace_bytes(trace))?;
    write_atomic(&sidecar_path(path), &key_value_bytes(&metadata_rows(trace.metadata())))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceFile {
    Kink(ProbabilityTrace),
    Coherence { times: Vec<f64>, coherence: Vec<f64>, metadata: TraceMetadata },
}

impl TraceFile {
    pub fn metadata(&self) -> &TraceMetadata {
        match self {
            TraceFile::Kink(t) => t.metadata(),
            TraceFile::Coherence { metadata, .. } => metadata,
        }
    }
}

fn parse_finite(path: &Path, line: u64, field: &str, what: &str) -> CliResult<f64> {
    let x: f64 = field.parse().map_err(|_| format_error(path, line, format!("{what} `{field}` is not a number")))?;
    if !x.is_finite() {
        return Err(format_error(path, line, format!("{what} `{field}` is not finite")));
    }
    Ok(x)
}

/// Reads a trace CSV (either layout) together with its sidecar, if present.
pub fn read_trace(path: &Path) -> CliResult<TraceFile> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let side = sidecar_path(path);
    let metadata = if side.exists() { metadata_from_rows(&side, &read_key_values(&side)?)? } else { TraceMetadata::default() };
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(bytes.as_slice());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| format_error(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["t", "n", "p"] => read_kink_rows(path, r, metadata).map(TraceFile::Kink),
        ["t", "coherence"] => {
            let mut times = Vec::new();
            let mut coherence = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(|e| format_error(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
                let line = rec.position().map_or(0, |p| p.line());
                if rec.len() != 2 {
                    return Err(format_error(path, line, format!("expected 2 columns, found {}", rec.len())));
                }
                times.push(parse_finite(path, line, &rec[0], "time")?);
                coherence.push(parse_finite(path, line, &rec[1], "coherence")?);
            }
            Ok(TraceFile::Coherence { times, coherence, metadata })
        }
        _ => Err(format_error(path, 1, "expected header `t,n,p` or `t,coherence`")),
    }
}

fn read_kink_rows(path: &Path, mut r: csv::Reader<&[u8]>, metadata: TraceMetadata) -> CliResult<ProbabilityTrace> {
    let mut trace = ProbabilityTrace::new(metadata);
    let mut current: Option<(f64, u64, Vec<f64>)> = None;
    let mut width: Option<usize> = None;
    let mut last_line = 1;
    let flush = |block: (f64, u64, Vec<f64>), width: &mut Option<usize>, trace: &mut ProbabilityTrace| -> CliResult<()> {
        let (t, line, dist) = block;
        if let Some(w) = *width {
            if dist.len() != w {
                return Err(format_error(path, line, format!("time {t} has {} rows, expected {w}", dist.len())));
            }
        }
        *width = Some(dist.len());
        trace.push(t, dist).map_err(|e| format_error(path, line, e.to_string()))
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| format_error(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        last_line = line;
        if rec.len() != 3 {
            return Err(format_error(path, line, format!("expected 3 columns, found {}", rec.len())));
        }
        let t = parse_finite(path, line, &rec[0], "time")?;
        let n: usize = rec[1].parse().map_err(|_| format_error(path, line, format!("link `{}` is not an index", &rec[1])))?;
        let p = parse_finite(path, line, &rec[2], "probability")?;
        if current.as_ref().is_some_and(|(t0, _, _)| *t0 != t) {
            flush(current.take().expect("current block"), &mut width, &mut trace)?;
        }
        let block = current.get_or_insert_with(|| (t, line, Vec::new()));
        if n != block.2.len() {
            return Err(format_error(path, line, format!("expected link {}, found {n}", block.2.len())));
        }
        block.2.push(p);
    }
    match current {
        Some(block) => flush(block, &mut width, &mut trace)?,
        None => return Err(format_error(path, last_line, "no data rows")),
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}
