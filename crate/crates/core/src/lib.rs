//! Maximum queue length in M/G/1 busy periods under the Foreground-Background
//! (least-attained-service) discipline: service-time distribution toolkit,
//! closed-form/recursive tail bounds and buffer-overflow quantiles, and a
//! deterministic event-driven simulator for the FB, FB* and FIFO disciplines.

pub mod analytics;
pub mod dist;
pub mod error;
pub mod numeric;
pub mod sim;

pub use dist::ServiceDistribution;
pub use error::{Error, Result};
