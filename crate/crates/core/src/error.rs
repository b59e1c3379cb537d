use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the library. Row and column positions are 1-indexed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("input contains no score rows")]
    EmptyInput,

    #[error("cell at row {row}, column {col} is not 0 or 1")]
    NonBinaryCell { row: usize, col: usize },

    #[error("ragged rows: expected {expected} cells, found {found}")]
    RaggedRows { expected: usize, found: usize },

    #[error("duplicate {kind} label `{label}`")]
    DuplicateLabel { kind: &'static str, label: String },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("at least one pattern is required")]
    NoPatterns,

    #[error("connection matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("connection matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },

    #[error("connection matrix has nonzero diagonal at ({i}, {i})")]
    NonzeroDiagonal { i: usize },

    #[error("state value {0} is not -1 or +1")]
    NotBipolar(i8),

    #[error("network size {n} exceeds the enumeration limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("requested {m} clusters but the chart has only {l} students")]
    MTooLarge { m: usize, l: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory from student {student} did not converge within {max_sweeps} sweeps")]
    ConvergenceFailure { student: usize, max_sweeps: usize },

    #[error("clustering has no clusters")]
    EmptyClustering,

    #[error("all {trials} trials failed")]
    AllTrialsFailed { trials: usize },
}
