use thiserror::Error;

/// Errors produced by the rectification library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("projection is degenerate: point lies on the focal plane")]
    DegenerateProjection,
    #[error("homography is singular (|det| = {0:e})")]
    SingularHomography(f64),
    #[error("fundamental matrix is rank deficient")]
    RankDeficient,
    #[error("point maps to infinity")]
    PointAtInfinity,
    #[error("sampson denominator vanishes for pair {0}")]
    ZeroDenominator(usize),
    #[error("segment length vanishes in {0}")]
    ZeroLength(&'static str),
    #[error("mapped image corners form a degenerate quadrilateral")]
    DegenerateQuadrilateral,
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("insufficient inliers: need at least {needed}, got {got}")]
    InsufficientInliers { needed: usize, got: usize },
    #[error("residual vector contains non-finite values")]
    NonFiniteResidual,
    #[error("too few visible points: {0}")]
    TooFewVisiblePoints(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
