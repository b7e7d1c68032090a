use thiserror::Error;

/// Errors raised by model construction, simulation, fitting and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid beam geometry: {0}")]
    Geometry(String),

    #[error("segment lengths {l2_mm} mm + {l3_mm} mm do not add up to the beam length {length_mm} mm")]
    SegmentMismatch {
        l2_mm: f64,
        l3_mm: f64,
        length_mm: f64,
    },

    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: f64 },

    #[error("invalid chain: {0}")]
    Chain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("state dimension {got} does not match the model's {expected} joints")]
    Dimension { expected: usize, got: usize },

    #[error("simulation produced a non-finite value at t = {time} s in joint {joint}")]
    NonFinite { time: f64, joint: usize },

    #[error("settling did not converge within {steps} steps (max joint rate {residual:.3e} rad/s)")]
    SettleFailed { steps: usize, residual: f64 },

    #[error("marker sets differ: {0}")]
    MarkerMismatch(String),

    #[error("invalid optimizer settings: {0}")]
    Optimizer(String),

    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error("empty contact record")]
    EmptyRecord,

    #[error("{context}: {source}")]
    Annotated {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Parse { what: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn annotate(self, context: impl Into<String>) -> Self {
        Error::Annotated {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_simulation_failure(&self) -> bool {
        match self {
            Error::NonFinite { .. } | Error::SettleFailed { .. } => true,
            Error::Annotated { source, .. } => source.is_simulation_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
