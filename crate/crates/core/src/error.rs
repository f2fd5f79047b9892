use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode {mode} out of range for a {ndims}-way tensor")]
    ModeOutOfRange { mode: usize, ndims: usize },

    #[error("mode {0} appears more than once")]
    DuplicateMode(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("rank {rank} out of range (max {max})")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("factor {mode} is not orthonormal (deviation {deviation:.3e})")]
    NonOrthonormal { mode: usize, deviation: f64 },

    #[error("iterate violates the observation constraint (deviation {0:.3e})")]
    Infeasible(f64),

    #[error("observation mask is empty")]
    EmptyMask,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the numbers rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::NonFinite | Error::Infeasible(_))
    }
}
