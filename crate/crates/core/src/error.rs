use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contour rejected {attempts} times at complexity {complexity}; rng parameters look degenerate")]
    ContourRejected { attempts: usize, complexity: usize },

    #[error("shape {index} does not fit inside the {width}x{height} canvas")]
    OutOfBounds { index: usize, width: u32, height: u32 },

    #[error("problem {problem}, label {label}: could not satisfy `{constraint}` after {attempts} attempts")]
    SamplingFailed {
        problem: u8,
        label: u8,
        constraint: String,
        attempts: usize,
    },

    #[error("{split} image {index} of problem {problem}, label {label}: {source}")]
    Generation {
        problem: u8,
        label: u8,
        split: String,
        index: usize,
        source: Box<Error>,
    },

    #[error("unknown problem id {0}")]
    UnknownProblem(u32),

    #[error("problem {0} has no identical-shape control variant")]
    NoControlVariant(u8),

    #[error("record `{file}`: {reason}")]
    Record { file: String, reason: String },

    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite gradient in parameter tensor {0}")]
    NonFiniteGradient(usize),

    #[error("training diverged at iteration {iteration} (last finite loss at iteration {last_good})")]
    Diverged { iteration: usize, last_good: usize },

    #[error("stale cache: {0}")]
    StaleCache(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("unknown session {0}")]
    UnknownSession(String),

    #[error("session {session}: {reason}")]
    SessionConflict { session: String, reason: String },

    #[error("cohort is empty (n = 0)")]
    EmptyCohort,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier, used for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ContourRejected { .. } => "contour_rejected",
            Error::OutOfBounds { .. } => "out_of_bounds",
            Error::SamplingFailed { .. } => "sampling_failed",
            Error::Generation { .. } => "generation",
            Error::UnknownProblem(_) => "unknown_problem",
            Error::NoControlVariant(_) => "no_control_variant",
            Error::Record { .. } => "record",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::NonFiniteGradient(_) => "non_finite_gradient",
            Error::Diverged { .. } => "diverged",
            Error::StaleCache(_) => "stale_cache",
            Error::Checkpoint(_) => "checkpoint",
            Error::UnknownSession(_) => "unknown_session",
            Error::SessionConflict { .. } => "session_conflict",
            Error::EmptyCohort => "empty_cohort",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
