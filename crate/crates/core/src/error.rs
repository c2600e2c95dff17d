use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric at ({row}, {col})")]
    NonSymmetric { row: usize, col: usize },

    #[error("matrix has a negative eigenvalue {min_eigenvalue:e}")]
    IndefiniteInput { min_eigenvalue: f64 },

    #[error("matrix is singular or not positive definite (min eigenvalue {min_eigenvalue:e})")]
    SingularInput { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("non-finite value in input")]
    NonFiniteInput,

    #[error("non-finite fitness value at row {index}")]
    NonFiniteFitness { index: usize },

    #[error("batch of size {size} is too small (need at least 2)")]
    BatchTooSmall { size: usize },

    #[error("cannot draw {requested} orthogonal directions in dimension {dim}")]
    TooManyDirections { requested: usize, dim: usize },

    #[error("antithetic batches need an even size, got {size}")]
    OddAntitheticBatch { size: usize },

    #[error("direction batch is not antithetic")]
    NotAntithetic,

    #[error("invalid eigenvalue bounds: lower {lower:e} exceeds upper {upper:e}")]
    BadBounds { lower: f64, upper: f64 },

    #[error("binary input contains value {value} at ({row}, {col})")]
    NonBinaryInput { row: usize, col: usize, value: u8 },

    #[error("category {value} at ({row}, {col}) is outside 1..={categories}")]
    OutOfRangeCategory { row: usize, col: usize, value: usize, categories: usize },

    #[error("invalid population: {0}")]
    BadPopulation(String),

    #[error("unknown benchmark function `{0}`")]
    UnknownFunction(String),

    #[error("function `{name}` needs dimension >= {min}, got {dim}")]
    DimTooSmall { name: &'static str, min: usize, dim: usize },

    #[error("reconstruction target has a zero entry at index {index}")]
    ZeroTargetEntry { index: usize },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("objective evaluation failed at row {row}: {message}")]
    EvaluationFailed { row: usize, message: String },

    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),

    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EvaluationFailed { .. } | Error::NonFiniteFitness { .. } => 3,
            Error::ConfigInvalid(_)
            | Error::UnknownFunction(_)
            | Error::DimTooSmall { .. }
            | Error::BadPopulation(_)
            | Error::TooManyDirections { .. }
            | Error::OddAntitheticBatch { .. }
            | Error::BadBounds { .. }
            | Error::Json(_) => 2,
            _ => 1,
        }
    }
}
