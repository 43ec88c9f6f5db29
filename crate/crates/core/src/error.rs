use thiserror::Error;

/// Errors produced by the simulation toolkit.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("spin configuration has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("instance has {n} spins, exceeding the enumeration cap of {cap}")]
    EnumerationCapExceeded { n: usize, cap: usize },

    #[error("invalid edge ({i}, {j}) for {n} vertices: {reason}")]
    InvalidEdge {
        i: usize,
        j: usize,
        n: usize,
        reason: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schedule table is not monotone: {0}")]
    NonMonotoneSchedule(String),

    #[error("schedule table spans [{lo}, {hi}] but evaluation needs [{need_lo}, {need_hi}]")]
    InsufficientHeadroom {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("offset {delta} for qubit {qubit} outside its bounds [{lo}, {hi}]")]
    OffsetOutOfBounds {
        qubit: usize,
        delta: f64,
        lo: f64,
        hi: f64,
    },

    #[error("all averaged effective fields are zero; ratios are undefined")]
    AllFieldsZero,

    #[error(
        "qubit {qubit} has degree {degree}, above the enumeration cap of {cap}; \
         use the neighbor-subset variant"
    )]
    DegreeTooLarge {
        qubit: usize,
        degree: usize,
        cap: usize,
    },

    #[error("empty sample list")]
    EmptySamples,

    #[error("instance has {n} spins, exceeding the exact-evolution cap of {cap}")]
    ExactCapExceeded { n: usize, cap: usize },

    #[error("integrator failed to reach tolerance {tol} (step size underflow at s = {s})")]
    IntegratorFailure { tol: f64, s: f64 },

    #[error("instance is not an open chain with zero fields: {0}")]
    NotAFreeFermionChain(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    MalformedFile(String),
}

impl From<serde_json::Error> for CoreError {
    fn from(e: serde_json::Error) -> Self {
        CoreError::MalformedFile(e.to_string())
    }
}

impl From<csv::Error> for CoreError {
    fn from(e: csv::Error) -> Self {
        CoreError::MalformedFile(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
