use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: String,
        got: usize,
    },

    #[error("variable x{index} used in a {dim}-dimensional symbol")]
    DimensionMismatch { index: usize, dim: usize },

    #[error("invalid parameter for `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    #[error("symbol is singular at {point:?}")]
    Singularity { point: Vec<f64> },

    #[error("symbol value {value} at {point:?} lies outside [0,1]")]
    OutOfRange { value: f64, point: Vec<f64> },

    #[error("quadrature did not converge (last delta {last_delta:e} at 2^{level} points per axis)")]
    NonConvergent { last_delta: f64, level: u32 },

    #[error("coefficient f^({k:?}) lies outside the table radius {kmax:?}")]
    OutOfTable { k: Vec<i64>, kmax: Vec<i64> },

    #[error("determinant {value:e} is negative beyond tolerance; coefficient table is not a valid symbol")]
    NegativeDeterminant { value: f64 },

    #[error("conditioning event has probability {value:e}, below the degeneracy threshold")]
    DegenerateConditioning { value: f64 },

    #[error("window of {size} sites exceeds the cap of {cap}")]
    WindowTooLarge { size: usize, cap: usize },

    #[error("geometric mean of the symbol is zero; log-coefficients do not exist")]
    DivergentGeometricMean,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("config error: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
