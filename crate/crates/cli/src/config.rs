//! Scenario configuration: INI sections `[lattice] [wells] [evolution]
//! [decoherence] [output]`, `key = value` lines and `#` comments. Every
//! scenario accepts a fixed key set; anything else is rejected.

use std::fmt::Write as _;
use std::str::FromStr;

use kink_core::unitary::RampKind;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    DoubleSlit,
    Decoherence,
    SelfInterference,
    GhzDemo,
    OracleValidation,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::DoubleSlit,
        Scenario::Decoherence,
        Scenario::SelfInterference,
        Scenario::GhzDemo,
        Scenario::OracleValidation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::DoubleSlit => "double-slit",
            Scenario::Decoherence => "decoherence",
            Scenario::SelfInterference => "self-interference",
            Scenario::GhzDemo => "ghz-demo",
            Scenario::OracleValidation => "oracle-validation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// `(section, key)` pairs this scenario reads, in dump order.
    pub fn keys(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Scenario::DoubleSlit => &[
                ("lattice", "g"),
                ("wells", "separation"),
                ("wells", "w"),
                ("evolution", "t_end"),
                ("evolution", "outputs"),
                ("evolution", "ramp"),
                ("evolution", "ramp_duration"),
                ("evolution", "seed"),
                ("output", "trace"),
                ("output", "oracle"),
                ("output", "metrics"),
            ],
            Scenario::Decoherence => &[
                ("lattice", "g"),
                ("wells", "separation"),
                ("wells", "w"),
                ("evolution", "t_end"),
                ("evolution", "outputs"),
                ("evolution", "seed"),
                ("decoherence", "gamma"),
                ("decoherence", "dt"),
                ("decoherence", "closure"),
                ("output", "trace"),
                ("output", "oracle"),
                ("output", "metrics"),
            ],
            Scenario::SelfInterference => &[
                ("lattice", "g"),
                ("lattice", "n_links"),
                ("wells", "link"),
                ("wells", "w"),
                ("evolution", "t_end"),
                ("evolution", "outputs"),
                ("evolution", "seed"),
                ("decoherence", "gamma"),
                ("decoherence", "dt"),
                ("output", "trace"),
                ("output", "oracle"),
                ("output", "metrics"),
            ],
            Scenario::GhzDemo => &[
                ("lattice", "n_spins"),
                ("evolution", "t_end"),
                ("evolution", "outputs"),
                ("evolution", "seed"),
                ("decoherence", "gamma"),
                ("output", "trace"),
                ("output", "oracle"),
                ("output", "metrics"),
            ],
            Scenario::OracleValidation => &[
                ("lattice", "g"),
                ("lattice", "n_spins"),
                ("wells", "link"),
                ("wells", "w"),
                ("evolution", "t_end"),
                ("evolution", "outputs"),
                ("evolution", "start_link"),
                ("evolution", "seed"),
                ("decoherence", "gamma"),
                ("decoherence", "trajectories"),
                ("output", "trace"),
                ("output", "oracle"),
                ("output", "metrics"),
            ],
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which reduced description the decoherence scenario compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// Strong when `Γ ≥ g/10`, weak otherwise.
    Auto,
    Strong,
    Weak,
}

impl Closure {
    pub fn as_str(self) -> &'static str {
        match self {
            Closure::Auto => "auto",
            Closure::Strong => "strong",
            Closure::Weak => "weak",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(Closure::Auto),
            "strong" => Some(Closure::Strong),
            "weak" => Some(Closure::Weak),
            _ => None,
        }
    }

    pub fn resolve(self, g: f64, gamma: f64) -> Closure {
        match self {
            Closure::Auto if gamma >= 0.1 * g => Closure::Strong,
            Closure::Auto => Closure::Weak,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub g: f64,
    pub n_links: usize,
    pub n_spins: usize,
    pub separation: usize,
    pub w: f64,
    pub link: usize,
    pub t_end: f64,
    pub outputs: usize,
    pub ramp: RampKind,
    pub ramp_duration: f64,
    pub start_link: usize,
    pub seed: u64,
    pub gamma: f64,
    /// 0 selects the automatic step.
    pub dt: f64,
    pub closure: Closure,
    pub trajectories: usize,
    pub trace_file: String,
    pub oracle_file: String,
    pub metrics_file: String,
}

impl ScenarioConfig {
    /// Figure defaults for each scenario.
    pub fn defaults(scenario: Scenario) -> Self {
        let base = ScenarioConfig {
            scenario,
            g: 1.0,
            n_links: 0,
            n_spins: 0,
            separation: 0,
            w: 0.0,
            link: 0,
            t_end: 0.0,
            outputs: 1,
            ramp: RampKind::SuddenOff,
            ramp_duration: 0.0,
            start_link: 0,
            seed: 0,
            gamma: 0.0,
            dt: 0.0,
            closure: Closure::Auto,
            trajectories: 0,
            trace_file: "trace.csv".into(),
            oracle_file: "oracle.csv".into(),
            metrics_file: "metrics.csv".into(),
        };
        match scenario {
            Scenario::DoubleSlit => Self { separation: 100, w: 0.15, t_end: 1000.0, outputs: 4, ..base },
            Scenario::Decoherence => {
                Self { separation: 50, w: 0.15, t_end: 100.0, outputs: 4, gamma: 0.5, ..base }
            }
            Scenario::SelfInterference => {
                Self { n_links: 201, link: 100, w: 0.25, t_end: 300.0, outputs: 30, ..base }
            }
            Scenario::GhzDemo => Self {
                n_spins: 10,
                t_end: 10.0,
                outputs: 50,
                gamma: 0.01,
                trace_file: "coherence.csv".into(),
                oracle_file: "coherence_oracle.csv".into(),
                ..base
            },
            Scenario::OracleValidation => Self {
                g: 0.1,
                n_spins: 10,
                link: 4,
                w: 0.05,
                t_end: 200.0,
                outputs: 10,
                start_link: 4,
                trajectories: 2000,
                ..base
            },
        }
    }

    /// Defaults overridden by the INI text.
    pub fn from_ini(scenario: Scenario, text: &str) -> CliResult<Self> {
        let ini = ini::Ini::load_from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        let mut cfg = Self::defaults(scenario);
        let mut seen: Vec<(String, String)> = Vec::new();
        for (section, props) in ini.iter() {
            let section = match section {
                Some(s) => s,
                None if props.is_empty() => continue,
                None => {
                    let key = props.iter().next().map(|(k, _)| k).unwrap_or("");
                    return Err(CliError::config(format!("config: key `{key}` is outside any section")));
                }
            };
            for (key, value) in props.iter() {
                if seen.iter().any(|(s, k)| s == section && k == key) {
                    return Err(CliError::config(format!("config: [{section}] {key} is set twice")));
                }
                seen.push((section.to_string(), key.to_string()));
                cfg.set(section, key, value.trim())?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> CliResult<()> {
        if !self.scenario.keys().contains(&(section, key)) {
            return Err(CliError::config(format!(
                "config: unknown key [{section}] {key} for scenario {}",
                self.scenario
            )));
        }
        match (section, key) {
            ("lattice", "g") => self.g = number(section, key, value)?,
            ("lattice", "n_links") => self.n_links = number(section, key, value)?,
            ("lattice", "n_spins") => self.n_spins = number(section, key, value)?,
            ("wells", "separation") => self.separation = number(section, key, value)?,
            ("wells", "w") => self.w = number(section, key, value)?,
            ("wells", "link") => self.link = number(section, key, value)?,
            ("evolution", "t_end") => self.t_end = number(section, key, value)?,
            ("evolution", "outputs") => self.outputs = number(section, key, value)?,
            ("evolution", "ramp") => {
                self.ramp = RampKind::parse(value)
                    .ok_or_else(|| CliError::config(format!("config: [evolution] ramp `{value}` is not sudden-off, linear or smooth")))?
            }
            ("evolution", "ramp_duration") => self.ramp_duration = number(section, key, value)?,
            ("evolution", "start_link") => self.start_link = number(section, key, value)?,
            ("evolution", "seed") => self.seed = number(section, key, value)?,
            ("decoherence", "gamma") => self.gamma = number(section, key, value)?,
            ("decoherence", "dt") => self.dt = number(section, key, value)?,
            ("decoherence", "closure") => {
                self.closure = Closure::parse(value)
                    .ok_or_else(|| CliError::config(format!("config: [decoherence] closure `{value}` is not auto, strong or weak")))?
            }
            ("decoherence", "trajectories") => self.trajectories = number(section, key, value)?,
            ("output", "trace") => self.trace_file = file_name(key, value)?,
            ("output", "oracle") => self.oracle_file = file_name(key, value)?,
            ("output", "metrics") => self.metrics_file = file_name(key, value)?,
            _ => unreachable!("key table and setter disagree on [{section}] {key}"),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |what: &str| Err(CliError::config(format!("config: {what}")));
        if !(self.g.is_finite() && self.g > 0.0) {
            return bad("[lattice] g must be positive");
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad("[evolution] t_end must be positive");
        }
        if self.outputs == 0 {
            return bad("[evolution] outputs must be at least 1");
        }
        if !(self.w.is_finite() && self.w >= 0.0) {
            return bad("[wells] w must be >= 0");
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad("[decoherence] gamma must be >= 0");
        }
        if !(self.dt.is_finite() && self.dt >= 0.0) {
            return bad("[decoherence] dt must be >= 0 (0 = automatic)");
        }
        if !(self.ramp_duration.is_finite() && self.ramp_duration >= 0.0) {
            return bad("[evolution] ramp_duration must be >= 0");
        }
        match self.scenario {
            Scenario::DoubleSlit | Scenario::Decoherence if self.separation == 0 => bad("[wells] separation must be positive"),
            Scenario::SelfInterference if self.link >= self.n_links => bad("[wells] link must lie inside the lattice"),
            Scenario::OracleValidation if self.link + 1 >= self.n_spins || self.start_link + 1 >= self.n_spins => {
                bad("[wells] link and [evolution] start_link must be bonds of the chain")
            }
            Scenario::OracleValidation if self.gamma > 0.0 && self.n_spins > kink_core::spin_chain::MAX_DENSE_SPINS && self.trajectories < 2 => {
                bad("[decoherence] trajectories must be at least 2")
            }
            _ => Ok(()),
        }
    }

    /// Equally spaced output times `t_end·k/outputs`, `k = 1..=outputs`.
    pub fn output_times(&self) -> Vec<f64> {
        (1..=self.outputs).map(|k| self.t_end * k as f64 / self.outputs as f64).collect()
    }

    /// INI text that parses back to this configuration.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kink-sim scenario {}", self.scenario);
        let mut current = "";
        for &(section, key) in self.scenario.keys() {
            if section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{section}]");
                current = section;
            }
            let _ = writeln!(out, "{key} = {}", self.value(section, key));
        }
        out
    }

    fn value(&self, section: &str, key: &str) -> String {
        match (section, key) {
            ("lattice", "g") => self.g.to_string(),
            ("lattice", "n_links") => self.n_links.to_string(),
            ("lattice", "n_spins") => self.n_spins.to_string(),
            ("wells", "separation") => self.separation.to_string(),
            ("wells", "w") => self.w.to_string(),
            ("wells", "link") => self.link.to_string(),
            ("evolution", "t_end") => self.t_end.to_string(),
            ("evolution", "outputs") => self.outputs.to_string(),
            ("evolution", "ramp") => self.ramp.as_str().to_string(),
            ("evolution", "ramp_duration") => self.ramp_duration.to_string(),
            ("evolution", "start_link") => self.start_link.to_string(),
            ("evolution", "seed") => self.seed.to_string(),
            ("decoherence", "gamma") => self.gamma.to_string(),
            ("decoherence", "dt") => self.dt.to_string(),
            ("decoherence", "closure") => self.closure.as_str().to_string(),
            ("decoherence", "trajectories") => self.trajectories.to_string(),
            ("output", "trace") => self.trace_file.clone(),
            ("output", "oracle") => self.oracle_file.clone(),
            ("output", "metrics") => self.metrics_file.clone(),
            _ => unreachable!("no value for [{section}] {key}"),
        }
    }
}

fn number<T: FromStr>(section: &str, key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::config(format!("config: [{section}] {key} = `{value}` is not a valid number")))
}

fn file_name(key: &str, value: &str) -> CliResult<String> {
    if value.is_empty() || value.contains(['/', '\\']) || value == "." || value == ".." {
        return Err(CliError::config(format!("config: [output] {key} must be a plain file name, got `{value}`")));
    }
    Ok(value.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        for s in Scenario::ALL {
            let cfg = ScenarioConfig::defaults(s);
            assert_eq!(ScenarioConfig::from_ini(s, &cfg.to_ini()).unwrap(), cfg, "{s}");
        }
    }

    #[test]
    fn overrides_and_rejections() {
        let cfg = ScenarioConfig::from_ini(Scenario::Decoherence, "[decoherence]\ngamma = 0.000125\n# note\n").unwrap();
        assert_eq!(cfg.gamma, 1.25e-4);
        assert_eq!(cfg.separation, 50);
        let typo = ScenarioConfig::from_ini(Scenario::Decoherence, "[decoherence]\ngama = 0.1\n");
        assert!(matches!(typo, Err(CliError::Config(_))));
        let foreign = ScenarioConfig::from_ini(Scenario::DoubleSlit, "[decoherence]\ngamma = 0.1\n");
        assert!(foreign.is_err());
        let twice = ScenarioConfig::from_ini(Scenario::DoubleSlit, "[wells]\nw = 0.1\nw = 0.2\n");
        assert!(twice.is_err());
        let loose = ScenarioConfig::from_ini(Scenario::DoubleSlit, "w = 0.1\n");
        assert!(loose.is_err());
        let nan = ScenarioConfig::from_ini(Scenario::DoubleSlit, "[lattice]\ng = -1\n");
        assert!(nan.is_err());
    }

    #[test]
    fn auto_closure_threshold() {
        assert_eq!(Closure::Auto.resolve(1.0, 0.5), Closure::Strong);
        assert_eq!(Closure::Auto.resolve(1.0, 1.25e-4), Closure::Weak);
    }
}
