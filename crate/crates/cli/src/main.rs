use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kink_sim::analysis::analyze_files;
use kink_sim::config::{Scenario, ScenarioConfig};
use kink_sim::csvio::{key_value_bytes, write_atomic};
use kink_sim::error::{CliError, CliResult};
use kink_sim::scenarios;

#[derive(Parser)]
#[command(name = "kink-sim", version, about = "Kink interferometry simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace, oracle and metrics CSVs.
    Simulate {
        /// double-slit, decoherence, self-interference, ghz-demo or oracle-validation
        scenario: String,
        /// INI file overriding the scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute metrics from a trace file.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
    /// Print the default configuration of a scenario.
    Defaults { scenario: String },
}

fn scenario(name: &str) -> CliResult<Scenario> {
    Scenario::parse(name).ok_or_else(|| {
        let known: Vec<&str> = Scenario::ALL.iter().map(|s| s.as_str()).collect();
        CliError::config(format!("unknown scenario `{name}` (expected one of {})", known.join(", ")))
    })
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { scenario: name, config, out, seed } => {
            let s = scenario(&name)?;
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                    ScenarioConfig::from_ini(s, &text)?
                }
                None => ScenarioConfig::defaults(s),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let run = scenarios::run(&cfg, &out)?;
            for (k, v) in &run.values {
                log::info!("{k} = {v}");
            }
            println!("{}", run.trace.display());
            println!("{}", run.oracle.display());
            println!("{}", run.metrics.display());
        }
        Command::Analyze { input, out, oracle } => {
            let m = analyze_files(&input, oracle.as_deref())?;
            write_atomic(&out, &key_value_bytes(&m))?;
        }
        Command::Defaults { scenario: name } => {
            print!("{}", ScenarioConfig::defaults(scenario(&name)?).to_ini());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::config(e.to_string().lines().next().unwrap_or("invalid arguments").to_string());
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
