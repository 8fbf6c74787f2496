use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in input")]
    NonFiniteInput,

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("quadratic atom requires a PSD matrix (min eigenvalue {min_eigenvalue:e})")]
    NonPsdQuadratic { min_eigenvalue: f64 },

    #[error("matrix is not monotone (symmetric part min eigenvalue {min_eigenvalue:e})")]
    NotMonotone { min_eigenvalue: f64 },

    #[error("numerically singular system (condition number {condition:e})")]
    NumericalSingularity { condition: f64 },

    #[error("matrix is singular (min singular value {min_singular_value:e})")]
    SingularMatrix { min_singular_value: f64 },

    #[error("unsupported cone: {0}")]
    UnsupportedCone(String),

    #[error("cos(theta) = {cos_theta} outside the admissible window [{lower}, {upper}) for n = {n}")]
    ThetaOutsideWindow {
        n: usize,
        cos_theta: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid partition of the identity: {0}")]
    PartitionInvalid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("unknown gallery item `{0}`")]
    UnknownGalleryItem(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
