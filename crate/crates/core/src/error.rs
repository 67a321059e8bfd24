use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("non-integer exponent at position {pos}: {found}")]
    NonIntegerExponent { pos: usize, found: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero input: {0}")]
    ZeroInput(&'static str),

    #[error("germ has a nonzero constant term; the base point must be the origin")]
    ConstantTerm,

    #[error("singularity at the origin is not isolated")]
    NotIsolated,

    #[error("degree cap {cap} exceeded (intermediate degree {degree})")]
    DegreeCap { cap: u32, degree: u32 },

    #[error("eliminant does not match the local germ: {0}")]
    GlobalLocalMismatch(String),

    #[error("too few usable samples: {0}")]
    TooFewSamples(String),

    #[error("order fit unstable for a_{j}: slope {slope:.4}")]
    FitUnstable { j: usize, slope: f64 },

    #[error("annihilation identity failed: {0}")]
    IdentityFailed(String),

    #[error("multiplicity mismatch: expected {expected}, got {got}")]
    Mismatch { expected: usize, got: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal error: {0}")]
    Internal(String),
}

/// Coarse failure classes; the CLI maps them onto exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Mathematical,
    Resource,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::NonIntegerExponent { .. }
            | Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::ZeroInput(_)
            | Error::ConstantTerm => ErrorClass::Input,
            Error::DegreeCap { .. } => ErrorClass::Resource,
            _ => ErrorClass::Mathematical,
        }
    }
}
