use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid tangent vector: {0}")]
    InvalidMVec(String),

    #[error("invalid isotropy element: {0}")]
    InvalidHVec(String),

    #[error("invalid ambient matrix: {0}")]
    InvalidAmbient(String),

    #[error("the deformation parameter eps must be a nonzero finite number, got {0}")]
    InvalidEps(f64),

    #[error("n must be at least 1, got {0}")]
    InvalidN(usize),

    #[error("coefficient array has length {found}, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("ambiguous numerical rank: singular-value gap {gap:.3e} below required {required:.3e}")]
    RankAmbiguity { gap: f64, required: f64 },

    #[error("solution is not unique: {0}")]
    NotUnique(String),

    #[error("linear system is inconsistent (residual {0:.3e})")]
    Inconsistent(f64),

    #[error("{0}")]
    Unsupported(String),

    #[error("parameters are not skew-torsion eligible: {0}")]
    NotSkew(String),

    #[error("ricci convention calibration failed: {0}")]
    Calibration(String),

    #[error("no Einstein solution found after {seeds} seeds although the variety is {kind}")]
    SeedBudgetExhausted { seeds: usize, kind: String },

    #[error("basis alignment failed: {0}")]
    Alignment(String),
}
