use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller broke a documented precondition (dimension, horizon, shape).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two jumps share a time, so the trajectory has no CJ_m representative.
    #[error("degenerate correspondence: jumps {first} and {second} both at t = {time}")]
    DegenerateCorrespondence {
        first: usize,
        second: usize,
        time: f64,
    },

    /// A mollified field was evaluated outside the box it was built on.
    #[error("extrapolation: state {state:?} outside mollification box")]
    Extrapolation { state: Vec<f64> },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// Step size collapsed or the step budget ran out.
    #[error("integration failure at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// A surface that already fired was crossed a second time.
    #[error("surface {surface} revisited at t = {t}")]
    SurfaceRevisit { surface: usize, t: f64 },

    /// A selection produced a value outside the field (beyond its slack).
    #[error(
        "selection left the field at t = {t}: distance {distance:e} > tolerance {tolerance:e}"
    )]
    Selection {
        t: f64,
        distance: f64,
        tolerance: f64,
    },

    /// A problem violates one of its standing hypotheses at runtime.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// A member of a funnel sample failed to solve.
    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error (or the error it wraps) signals a broken hypothesis
    /// rather than a numerical or usage failure.
    pub fn is_hypothesis_violation(&self) -> bool {
        match self {
            Error::SurfaceRevisit { .. } | Error::Hypothesis(_) => true,
            Error::Sample { source, .. } => source.is_hypothesis_violation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
