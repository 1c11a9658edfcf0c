use thiserror::Error;

/// Errors raised while building or evaluating measurement models.
#[derive(Debug, Error)]
pub enum QmuError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (max entry deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("operator is not unitary (Frobenius deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("invalid measurement scheme: {0}")]
    InvalidScheme(String),

    #[error("linear program too large for the oracle: support size {size} exceeds {limit}")]
    OracleScale { size: usize, limit: usize },

    #[error("state is not pure (purity {purity:.12})")]
    MixedState { purity: f64 },

    #[error("approximator is biased (max deviation of first moment {bias:.3e})")]
    Biased { bias: f64 },

    #[error("grid aliasing: {mass:.3e} probability mass near the grid boundary")]
    Aliasing { mass: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QmuError>;
