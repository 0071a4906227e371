use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("valuation unresolved at this level")]
    UnresolvedValuation,

    #[error("shell index {index} lies below the base valuation {base}")]
    ShellBelowBase { base: u32, index: u32 },

    #[error("difference valuation {level} lies below the common valuation {valuation}")]
    LevelBelowValuation { valuation: u32, level: u32 },

    #[error("unsupported for extensions (f = {0}); needs the ring structure of Z_p")]
    UnsupportedForExtensions(u32),

    #[error("{0} is not a p-adic unit")]
    NotAUnit(u64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is singular")]
    Singular,

    #[error("level mismatch: expected a table over {expected} cosets, got {got}")]
    LevelMismatch { expected: usize, got: usize },

    #[error("anchor pair ({0}, {1}) out of range")]
    AnchorOutOfRange(usize, usize),

    #[error("value not stabilized by level {0}")]
    NotStabilized(u32),

    #[error("degenerate: the linear-system route needs m >= 2")]
    Degenerate,

    #[error("tolerance must be positive")]
    NonPositiveTolerance,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
