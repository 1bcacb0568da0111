use thiserror::Error;

/// Errors raised by the pricing, optimization and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inputs outside the domain of a formula (non-finite values, expired options, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The pricing model produced a quantity that violates one of its structural properties.
    #[error("model error: {0}")]
    Model(String),

    /// A position measure does not satisfy the total-variation or vega-neutrality constraint.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// The zero-order objective has no usable curvature at its maximizer.
    #[error("degenerate curvature at the zero-order optimum (largest Hessian eigenvalue {0:e})")]
    DegenerateCurvature(f64),

    /// A pricing failure inside the Monte-Carlo engine.
    #[error("path {path}, rebalance {date}: {source}")]
    Pricing {
        path: usize,
        date: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
