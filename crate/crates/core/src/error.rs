use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("inlet and outlet regions violate the positive-distance hypothesis: distance {0}")]
    TerminalsTouch(String),
    #[error("empty region")]
    EmptyRegion,
    #[error("discretized domain is empty at n = {0}")]
    EmptyLattice(u64),
    #[error("empty terminal set: {0}")]
    EmptyTerminals(String),
    #[error("invalid capacity law: {0}")]
    InvalidLaw(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("stream is not conservative: residual {residual} at vertex {vertex}")]
    NotConservative { vertex: usize, residual: f64 },
    #[error("stream is not maximal: {0}")]
    NotMaximal(String),
    #[error("lattice too coarse: {0}")]
    TooCoarse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no direction coverage for normal {0}")]
    MissingDirection(String),
    #[error("operation unavailable: {0}")]
    Unavailable(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit status for the command-line front end.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const EMPTY_TERMINALS: i32 = 4;
    pub const IO: i32 = 5;
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyLattice(_) | Error::EmptyTerminals(_) => exit::EMPTY_TERMINALS,
            Error::NotConservative { .. }
            | Error::NotMaximal(_)
            | Error::Overflow(_)
            | Error::TooCoarse(_)
            | Error::Unavailable(_) => exit::NUMERICAL,
            Error::Io(_) | Error::Csv(_) => exit::IO,
            _ => exit::CONFIG,
        }
    }
}
