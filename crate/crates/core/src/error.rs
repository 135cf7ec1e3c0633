use std::path::PathBuf;

/// Errors produced by the pose, depth and correction pipelines.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("row {row} outside [0, {n_rows})")]
    RowOutOfRange { row: f64, n_rows: usize },
    #[error("point is behind the camera (depth {depth})")]
    BehindCamera { depth: f64 },
    #[error("rolling-shutter projection did not converge after {iterations} iterations (residual {residual} rows)")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular intrinsics")]
    SingularIntrinsics,
    #[error("insufficient data: need >= {needed} per side, got {left} left and {right} right")]
    InsufficientData { needed: usize, left: usize, right: usize },
    #[error("degenerate configuration: singular value ratio {ratio:.3e} below {threshold}")]
    Degenerate { ratio: f64, threshold: f64 },
    #[error("translation direction undefined")]
    DirectionUndefined,
    #[error("no decomposition passes the cheirality test")]
    Cheirality,
    #[error("RANSAC found no model with enough inliers (best: {left} left, {right} right)")]
    RansacFailed { left: usize, right: usize },
    #[error("rotation matrix is not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io { path: path.into(), message: err.to_string() }
    }
}
