use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: kink_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Format { path: PathBuf, line: u64, reason: String },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical { .. } => "numerical",
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } | CliError::Format { .. } => 4,
        }
    }

    /// One-line `error,<kind>,<exit code>,<message>` record for stderr.
    pub fn record(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error,{},{},\"{}\"", self.kind(), self.exit_code(), msg.replace('"', "\"\""))
    }
}

/// Attaches a stage description to core errors. Parameter and shape errors
/// raised by the core are treated as configuration problems.
pub trait Context<T> {
    fn context(self, what: &str) -> CliResult<T>;
}

impl<T> Context<T> for kink_core::Result<T> {
    fn context(self, what: &str) -> CliResult<T> {
        use kink_core::Error as E;
        self.map_err(|e| match e {
            E::InvalidParameter { .. }
            | E::LinkOutOfRange { .. }
            | E::WellCount { .. }
            | E::UnequalWells { .. }
            | E::WellsPresent { .. }
            | E::RequiresOpenLattice
            | E::TooManySpins { .. } => CliError::Config(format!("{what}: {e}")),
            other => CliError::Numerical { context: what.to_string(), source: other },
        })
    }
}
