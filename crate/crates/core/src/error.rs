//! Error type shared by the distribution, analytics and simulation layers.

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument left the operation's domain (negative time, probability
    /// outside `[0,1)`, parameter outside its admissible range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The queue is unstable (`rho >= 1`); the caller asked for a quantity
    /// that only exists for stable queues.
    #[error("unstable queue (rho = {rho}): {hint}")]
    Unstable { rho: f64, hint: &'static str },

    /// The service-time distribution has an infinite mean and the requested
    /// quantity needs a finite one.
    #[error("service-time distribution has infinite mean")]
    InfiniteMean,

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// A simulation exceeded its event cap before terminating.
    #[error("event cap {cap} exceeded at clock {clock}")]
    EventCap { cap: u64, clock: f64 },

    /// Invalid configuration (unparsable distribution spec, coupled queues
    /// whose quantiles disagree below the splice level, ...).
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
