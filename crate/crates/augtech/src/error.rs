use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by the stage that raises them; every variant carries
/// enough context (file, row, key, or parameter values) to locate the offending
/// input without a debugger.
#[derive(Debug, Error)]
pub enum Error {
    /// A production-function parameter violates its admissible range.
    #[error("invalid CES specification: {0}")]
    InvalidSpec(String),

    /// A substitution elasticity is too close to one for the residual
    /// exponent ε/(ε−1) to be evaluated.
    #[error("elasticity {value} is within {tol} of 1; the residual exponent is singular")]
    UnitElasticity { value: f64, tol: f64 },

    /// Input vectors have the wrong length for the chosen variant.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    /// A value required to be strictly positive (price, quantity, share) is not.
    #[error("domain error: {0}")]
    Domain(String),

    /// Row-level validation failure during CSV ingestion.
    #[error("{file}:{row}: {message}")]
    InvalidRow {
        file: String,
        row: usize,
        message: String,
    },

    /// A required column is missing from an input file.
    #[error("{file}: missing required column `{column}`")]
    MissingColumn { file: String, column: String },

    /// Two rows share a key that must be unique.
    #[error("{file}:{row}: duplicate key {key}")]
    DuplicateKey {
        file: String,
        row: usize,
        key: String,
    },

    /// A lookup failed (year, country, sector, component, ...).
    #[error("missing data: {0}")]
    MissingData(String),

    /// A matrix that must be invertible is singular or rank deficient.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Numerical optimization failed to converge; the payload lists the local
    /// optima found by each start for diagnosis.
    #[error("optimizer failed to converge; local optima (params, objective): {0:?}")]
    NonConvergence(Vec<(Vec<f64>, f64)>),

    /// Mis-matched specifications between pipeline stages.
    #[error("specification mismatch: {0}")]
    SpecMismatch(String),

    /// Configuration-file problem.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error in {file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(file: impl Into<String>, source: csv::Error) -> Self {
        Error::Csv {
            file: file.into(),
            source,
        }
    }
}
