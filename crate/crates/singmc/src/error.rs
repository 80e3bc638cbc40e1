//! Crate-wide error type.

/// Errors reported by constructors, samplers, estimators and oracles.
///
/// The variants classify failures the way a caller has to react to them:
/// [`Error::Domain`] means the *input* is outside the documented contract,
/// [`Error::NonFinite`] means the user integrand produced a non-finite value
/// at an in-support point, and [`Error::Numerical`] means an internal
/// numerical procedure gave up (retry caps, factorization failures).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input violates a documented precondition or type invariant.
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrand returned NaN or ±∞ at a sampled in-support point.
    ///
    /// Carries the offending point so the failure is diagnosable; see
    /// [`crate::estimate::NonFinitePolicy`] for the opt-in skip behaviour.
    #[error("integrand returned a non-finite value at point {point:?}")]
    NonFinite {
        /// Coordinates of the point the integrand failed at.
        point: Vec<f64>,
    },

    /// A numerical procedure failed after exhausting its retries.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The request is outside the implemented range (e.g. oracle dimension caps).
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
