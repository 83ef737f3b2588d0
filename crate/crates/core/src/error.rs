use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("link {link} is outside the lattice (valid links 0..{n_links})")]
    LinkOutOfRange { link: usize, n_links: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("expected {expected} well(s), found {found}")]
    WellCount { expected: usize, found: usize },

    #[error("wells have unequal depths {left} and {right}")]
    UnequalWells { left: f64, right: f64 },

    #[error("root bracket [{lo}, {hi}] contains no sign change")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("eigensolver did not converge (index {index})")]
    EigenFailure { index: usize },

    #[error("free propagator requires a lattice without wells ({count} present)")]
    WellsPresent { count: usize },

    #[error("operation requires an effectively-infinite lattice")]
    RequiresOpenLattice,

    #[error("amplitude reached the lattice edge at t = {time}: guard-band weight {weight:e}")]
    EdgeContact { time: f64, weight: f64 },

    #[error("invariant `{what}` violated at t = {time}: {value:e}")]
    InvariantViolation { what: &'static str, time: f64, value: f64 },

    #[error("adiabatic preparation reached fidelity {fidelity} < 0.99")]
    NonAdiabatic { fidelity: f64 },

    #[error("found {found} extrema in the analysis window; need at least {needed}")]
    InsufficientExtrema { found: usize, needed: usize },

    #[error("{n} spins exceeds the limit {max} for this method")]
    TooManySpins { n: usize, max: usize },

    #[error("trajectory average did not converge: standard error {standard_error:e} > {target:e}")]
    NonConvergence { standard_error: f64, target: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
