use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("matrix is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("value {value} outside the admissible range {range}")]
    OutOfRange { value: f64, range: &'static str },
    #[error("mass {mass:e} outside [0, {total:e}]")]
    MassOutOfRange { mass: f64, total: f64 },
    #[error("subgraph regions can only be sliced along their own axis")]
    UnsupportedSliceDirection,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("operation not supported for {0}")]
    UnsupportedVariant(&'static str),
    #[error("operation not supported in dimension {0}")]
    UnsupportedDimension(usize),
    #[error("quadrature did not converge (error estimate {error_estimate:e})")]
    QuadratureNotConverged { error_estimate: f64 },
    #[error("grid spacing {spacing:e} too coarse for base diameter {diameter:e}")]
    GridTooCoarse { spacing: f64, diameter: f64 },
    #[error("raster resolution {0} below the minimum of 64")]
    ResolutionTooLow(usize),
    #[error("set has empty interior")]
    EmptyInterior,
    #[error("too many constraints ({0})")]
    TooManyConstraints(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
