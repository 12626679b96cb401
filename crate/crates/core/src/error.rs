use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed braid word: {0}")]
    MalformedWord(String),

    #[error("closure has {components} components; only knots are supported")]
    NotAKnot { components: usize },

    #[error("resolution does not cover crossing {crossing}")]
    IncompleteResolution { crossing: usize },

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error("Q(v) is only defined at four-valent vertices")]
    WrongValence,

    #[error("edge set is not a cycle of this resolution: {0}")]
    InvalidCycle(String),

    #[error("composition of differentials is nonzero")]
    NotAComplex,

    #[error("not a chain map: {0}")]
    NotAChainMap(String),

    #[error("window contains no generators")]
    EmptyWindow,

    #[error("grading convention error: {0}")]
    ConventionError(String),

    #[error("calibration ambiguous: {0}")]
    AmbiguousCalibration(String),

    #[error("window too small: {0}")]
    InsufficientWindow(String),

    #[error("internal error: {0}")]
    InternalError(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
