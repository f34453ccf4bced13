use thiserror::Error;

/// Every failure a construction or predicate in this crate can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("search exhausted below bound {bound}{}", context_suffix(.context))]
    SearchExhausted { bound: u64, context: String },
    #[error("window exhausted during {phase}")]
    WindowExhausted { phase: String },
    #[error("malformed code: {0}")]
    MalformedCode(String),
    #[error("{0} is not a fixed point")]
    NotAFixedPoint(u64),
    #[error("no fixed-point witness for {0}")]
    WitnessNotFound(u64),
    #[error("no fresh orbit left at stage {0}")]
    OrbitsExhausted(usize),
    #[error("crossing graph is not a tree: {0}")]
    NotATree(String),
    #[error("relation closure exceeded depth {0}")]
    ClosureBoundExceeded(usize),
    #[error("unsupported presentation: {0}")]
    UnsupportedPresentation(String),
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("word uses variable {needed} but only {given} components were supplied")]
    ArityMismatch { needed: usize, given: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

fn context_suffix(c: &str) -> String {
    if c.is_empty() {
        String::new()
    } else {
        format!(" ({c})")
    }
}

impl Error {
    pub fn exhausted(bound: u64) -> Self {
        Error::SearchExhausted { bound, context: String::new() }
    }

    pub fn window(phase: impl Into<String>) -> Self {
        Error::WindowExhausted { phase: phase.into() }
    }

    /// Attach stage/phase information to a search failure.
    pub fn in_context(self, ctx: impl Into<String>) -> Self {
        match self {
            Error::SearchExhausted { bound, .. } => Error::SearchExhausted { bound, context: ctx.into() },
            other => other,
        }
    }

    /// Short machine-readable name used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SearchExhausted { .. } => "SearchExhausted",
            Error::WindowExhausted { .. } => "WindowExhausted",
            Error::MalformedCode(_) => "MalformedCode",
            Error::NotAFixedPoint(_) => "NotAFixedPoint",
            Error::WitnessNotFound(_) => "WitnessNotFound",
            Error::OrbitsExhausted(_) => "OrbitsExhausted",
            Error::NotATree(_) => "NotATree",
            Error::ClosureBoundExceeded(_) => "ClosureBoundExceeded",
            Error::UnsupportedPresentation(_) => "UnsupportedPresentation",
            Error::CapacityExceeded(_) => "CapacityExceeded",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::Parse(_) => "Parse",
            Error::Invalid(_) => "Invalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
