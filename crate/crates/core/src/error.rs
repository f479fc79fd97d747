use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty subshift")]
    EmptySubshift,

    #[error("subshift is not topologically mixing")]
    NotMixing,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("label {label} is outside the domain of metric family `{family}`")]
    LabelOutsideFamily { family: String, label: String },

    #[error("unknown vertex label `{0}`")]
    UnknownLabel(String),

    #[error("word too short: need at least {needed} symbols, got {got}")]
    WordTooShort { needed: usize, got: usize },

    #[error(
        "power iteration did not converge after {iterations} iterations \
         (bracket [{lower}, {upper}], relative gap {gap:e})"
    )]
    NonConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
        gap: f64,
    },

    #[error("potential has no declared limit at boundary symbol `{0}`")]
    MissingBoundaryLimit(String),

    #[error("cutoff too small: truncated generating function never reaches 1")]
    CutoffTooSmall,

    #[error("no closed orbits through base vertex {0}")]
    NoClosedOrbits(u64),

    #[error("no connecting path: {0}")]
    NoConnectingPath(String),

    #[error("decomposition is not certified sectorial")]
    Unverified,

    #[error("finite-entropy probe failed: {0}")]
    InfiniteEntropy(String),

    #[error("unknown gallery entry `{name}`; catalogue: {catalogue}")]
    UnknownGalleryEntry { name: String, catalogue: String },

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of an iterative numeric method, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}
