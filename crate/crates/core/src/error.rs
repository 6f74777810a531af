use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("channel pair {0} is outside 1..=14")]
    ChannelOutOfRange(u8),

    #[error("matrix is not a physical state: {0}")]
    NotPhysical(String),

    #[error("matrix square root failed: {0}")]
    MatrixSqrt(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent scenario: {0}")]
    InconsistentScenario(String),

    #[error("time tags for detector {0} are not sorted")]
    Unsorted(u32),

    #[error("no accidental coincidences recorded; CAR is only a lower bound")]
    ZeroAccidentals,

    #[error("missing measurement setting: {0}")]
    MissingSetting(String),

    #[error("design matrix is singular (condition number {0:.3e})")]
    SingularDesign(f64),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown reproduce target `{0}`")]
    UnknownTarget(String),

    #[error("time-tag file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
