use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The physical configuration has no well-defined response (e.g. zero port coupling).
    #[error("degenerate response: {0}")]
    Degenerate(String),

    /// A closed-form expression is evaluated past its validity range.
    #[error("out of validity range: {0}")]
    OutOfValidity(String),

    #[error("not converged: {0}")]
    Convergence(String),

    /// g2 normalisation vanished: no flux reaches one of the detectors.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    /// A state needed for a dispersive parameter could not be labelled reliably.
    #[error("dispersive parameters invalid: state {label:?} has overlap {overlap:.4}")]
    DispersiveInvalid { label: Vec<usize>, overlap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
