//! Deterministic, seeded discrete-event simulation of the M/G/1 queue
//! under the FB, FB* and FIFO disciplines: busy-cycle maxima, horizon
//! maxima and first-passage times, coupled dual-queue paths, and the
//! replicated estimation layer with confidence intervals.

mod coupled;
mod engine;
mod estimate;
pub mod fb;
mod rng;
pub mod trace;

pub use coupled::{
    check_quantile_agreement, coupled_ensemble, run_coupled, CoupledOptions, CoupledPathRecord,
    CoupledSummary,
};
pub use engine::{
    run_busy_cycle, run_busy_cycle_with, run_horizon, BusyCycleOutput, BusyCycleRecord, Draws,
    HorizonRecord, RunOptions, ScriptDraws, StreamDraws,
};
pub use estimate::{
    collect_cycles, estimate_exceedance, horizon_ensemble, EstimateOptions, EstimateRow,
};
pub use rng::StreamPair;
pub use trace::{verify_work_conservation, ConservationReport, EventKind, TraceEvent};

use crate::dist::ServiceDistribution;

/// Service discipline of a simulated queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discipline {
    /// Foreground-Background: the customers with least attained service
    /// share the server equally.
    Fb,
    /// FB with the busy-period initiator demoted to lowest priority, served
    /// only when alone.
    FbStar,
    /// Head-of-line single server.
    Fifo,
}

impl std::fmt::Display for Discipline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Discipline::Fb => "fb",
            Discipline::FbStar => "fbstar",
            Discipline::Fifo => "fifo",
        })
    }
}

impl std::str::FromStr for Discipline {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "fb" => Ok(Discipline::Fb),
            "fbstar" => Ok(Discipline::FbStar),
            "fifo" => Ok(Discipline::Fifo),
            other => Err(crate::error::Error::Config(format!(
                "unknown discipline `{other}` (expected fb, fbstar or fifo)"
            ))),
        }
    }
}

/// Parameters of a simulated M/G/1 queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueParams {
    /// Poisson arrival rate.
    pub lambda: f64,
    pub dist: ServiceDistribution,
    pub discipline: Discipline,
}
