use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice geometry {rows}x{cols}: both dimensions must be at least 2")]
    DegenerateLattice { rows: usize, cols: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}{hint}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis rank lookup failed for mask {mask:#b}")]
    RankLookup { mask: u64 },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error("dense eigendecomposition failed: {0}")]
    Dense(String),

    #[error("weights are not normalized: sum = {sum}")]
    NotNormalized { sum: f64 },

    #[error("no finite chemical potential: n_up = {n_up} with {n_sites} sites")]
    NoChemicalPotential { n_up: usize, n_sites: usize },

    #[error("too few levels ({got}) for spacing statistics, need at least {need}")]
    TooFewLevels { got: usize, need: usize },

    #[error("all levels in window are degenerate")]
    DegenerateSpacings,

    #[error("level index {index} out of range for {len} levels")]
    LevelOutOfRange { index: usize, len: usize },

    #[error("realization {index}: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("refusing to overwrite existing file {0} (use --force)")]
    OutputExists(std::path::PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
