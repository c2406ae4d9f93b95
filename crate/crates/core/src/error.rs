use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, VarestError>;

/// Which variate of the (y, x) pair an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variate {
    Y,
    X,
}

impl std::fmt::Display for Variate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variate::Y => f.write_str("y"),
            Variate::X => f.write_str("x"),
        }
    }
}

#[derive(Debug, Error)]
pub enum VarestError {
    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("variate {0} has zero variance")]
    DegenerateVariate(Variate),

    #[error("moment order ({p}, {q}) is not admissible: p + q must be even and at least 2")]
    InvalidOrder { p: u32, q: u32 },

    #[error("sample index {index} is out of range or repeated (population size {population_size})")]
    BadIndex { index: usize, population_size: usize },

    #[error("sample of size {0} is too small; at least 2 units are required")]
    TooSmall(usize),

    #[error("invalid sample size n = {n} for population size N = {population_size}")]
    InvalidSize { n: usize, population_size: usize },

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("regression coefficient is undefined for this sample")]
    DegenerateRegression,

    #[error("sample space of {size} subsets exceeds the enumeration limit {limit}")]
    TooLarge { size: u128, limit: u128 },

    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("missing key \"{0}\" in summary parameters")]
    MissingKey(String),

    #[error("{0}")]
    ModeError(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl VarestError {
    /// Process exit code for the CLI: 2 for input problems, 3 for numeric or
    /// domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            VarestError::DegenerateVariate(_)
            | VarestError::InvalidOrder { .. }
            | VarestError::ZeroDenominator(_)
            | VarestError::DomainError(_)
            | VarestError::DegenerateRegression => 3,
            _ => 2,
        }
    }
}
