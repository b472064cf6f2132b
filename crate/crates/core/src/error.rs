use thiserror::Error;

/// Errors raised anywhere in the capacity pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("trace deviates from one (trace {trace})")]
    BadTrace { trace: f64 },

    #[error("eigendecomposition did not converge or failed to reconstruct the matrix")]
    Decomposition,

    #[error("dimension mismatch: {expected} vs {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid probability vector: {0}")]
    BadDistribution(String),

    #[error("invalid channel: {0}")]
    BadChannel(String),

    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("letter {letter} has positive mass but zero reference mass")]
    SupportViolation { letter: usize },

    #[error("numerical breakdown at letter {letter}: {detail}")]
    NumericalBreakdown { letter: usize, detail: String },

    #[error("trace is empty")]
    EmptyTrace,

    #[error("cost limit {limit} is below the cheapest letter cost {min_cost}")]
    InfeasibleCost { limit: f64, min_cost: f64 },

    #[error("expected cost stays above {limit} for multipliers up to {lambda_max:e}")]
    BracketFailure { limit: f64, lambda_max: f64 },

    #[error("alphabet of size {n} is too large for grid enumeration (max {max})")]
    AlphabetTooLarge { n: usize, max: usize },

    #[error("no grid point satisfies the cost limit")]
    NoFeasibleGridPoint,

    #[error("transition matrix row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("channel file: {0}")]
    Parse(String),
}

impl Error {
    /// Stable variant name for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::NotSquare { .. } => "NotSquare",
            Self::NonFinite { .. } => "NonFinite",
            Self::NotHermitian { .. } => "NotHermitian",
            Self::NotPsd { .. } => "NotPSD",
            Self::BadTrace { .. } => "BadTrace",
            Self::Decomposition => "Decomposition",
            Self::DimensionMismatch { .. } => "DimensionMismatch",
            Self::LengthMismatch { .. } => "LengthMismatch",
            Self::BadDistribution(_) => "BadDistribution",
            Self::BadChannel(_) => "BadChannel",
            Self::BadParams(_) => "BadParams",
            Self::SupportViolation { .. } => "SupportViolation",
            Self::NumericalBreakdown { .. } => "NumericalBreakdown",
            Self::EmptyTrace => "EmptyTrace",
            Self::InfeasibleCost { .. } => "InfeasibleCost",
            Self::BracketFailure { .. } => "BracketFailure",
            Self::AlphabetTooLarge { .. } => "AlphabetTooLarge",
            Self::NoFeasibleGridPoint => "NoFeasibleGridPoint",
            Self::NotStochastic { .. } => "NotStochastic",
            Self::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
