use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid length function: {0}")]
    InvalidLength(String),

    #[error("invalid argument: {0}")]
    Config(String),

    #[error("no unit-entropy completion: {0}")]
    NoCompletion(String),

    #[error("spectral iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("cycle complex exceeds the budget of {0} simplices")]
    Budget(usize),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidGraph(_) | Error::Parse { .. } | Error::InvalidLength(_) | Error::Config(_) => 2,
            Error::Budget(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
