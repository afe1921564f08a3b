use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate lies outside the chart on which the model is defined.
    #[error("coordinate {index} is outside the model domain (value {value})")]
    Domain { index: usize, value: f64 },

    #[error("coordinate {index} is not finite (value {value})")]
    NonFiniteCoordinate { index: usize, value: f64 },

    #[error("potential evaluated to a non-finite value ({value})")]
    NonFinitePotential { value: f64 },

    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite integral on level set z = {z} over box {bounds:?}")]
    Quadrature { z: f64, bounds: Vec<(f64, f64)> },

    #[error("z = {z} is outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { z: f64, lo: f64, hi: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
