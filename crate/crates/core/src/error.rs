use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants split into two families: configuration problems (bad inputs,
/// unreadable files) and numerical failures (non-finite states, broken
/// monotonicity). The CLI maps them to different exit codes through
/// [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("non-finite state at step {step} (t = {t}): x = {x}, s = {s}, x_bar = {x_bar}")]
    NonFiniteState {
        step: usize,
        t: f64,
        x: f64,
        s: f64,
        x_bar: f64,
    },

    #[error("threshold hazard undefined at x_bar = {x_bar} (F(x_bar) = 1)")]
    HazardUndefined { x_bar: f64 },

    #[error("trajectory has no samples")]
    EmptyTrajectory,

    #[error("negative trajectory sample at index {index}")]
    NegativeSample { index: usize },

    #[error("updater count {k} outside 0..={n}")]
    OutOfRange { k: usize, n: usize },

    #[error("uniqueness violated: pure equilibrium conditions hold at {candidates:?}")]
    UniquenessViolated { candidates: Vec<usize> },

    #[error("expected indifference gap is not monotone (sign rises near p = {p})")]
    NonMonotoneGap { p: f64 },

    #[error("experiment `{experiment}` failed at {param} = {value}: {source}")]
    Experiment {
        experiment: String,
        param: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFiniteState { .. }
            | Error::HazardUndefined { .. }
            | Error::EmptyTrajectory
            | Error::NegativeSample { .. }
            | Error::UniquenessViolated { .. }
            | Error::NonMonotoneGap { .. } => true,
            Error::Experiment { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
