use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum QflatError {
    /// A caller-supplied value violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Operation defined only for specific dimensions.
    #[error("unsupported dimension {got} (need {need})")]
    UnsupportedDimension { need: &'static str, got: usize },

    /// Derivative order beyond what the field supports.
    #[error("derivative order {got} exceeds supported order {max}")]
    UnsupportedOrder { max: usize, got: usize },

    /// Metric (or first fundamental form) is singular or not positive definite.
    #[error("singular or non-positive-definite metric")]
    SingularMetric,

    /// Chart differential dropped rank at a probe point.
    #[error("degenerate immersion: dF rank-deficient at {point:?}")]
    DegenerateImmersion { point: Vec<f64> },

    /// Adaptive integration could not reach the requested tolerance.
    #[error("quadrature tolerance not met: value {value:.6e}, error estimate {error:.6e}")]
    ToleranceNotMet { value: f64, error: f64 },

    /// Integrand returned NaN or infinity.
    #[error("non-finite integrand sample at {location:?}")]
    IntegrandNotFinite { location: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, QflatError>;

impl QflatError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        QflatError::InvalidArgument(msg.into())
    }
}
