//! Event-driven busy-cycle and horizon simulation.
//!
//! Ties between an internal event (completion or merge) and an arrival at
//! the same instant resolve in favor of the internal event; any fixed order
//! is distributionally irrelevant under continuous service laws, and fixing
//! one keeps runs deterministic.

use std::collections::VecDeque;

use crate::dist::ServiceDistribution;
use crate::error::{Error, Result};
use crate::sim::fb::{FbEvent, FbState};
use crate::sim::rng::StreamPair;
use crate::sim::trace::{EventKind, TraceEvent};
use crate::sim::{Discipline, QueueParams};

/// Knobs for a single busy-cycle or horizon run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Hard stop on the number of processed events; exceeding it is an
    /// error (relevant for overloaded queues).
    pub event_cap: u64,
    /// Replace the first service draw of the cycle (the FB* initiator's
    /// service time) with a fixed value. The service stream is not advanced
    /// for the forced draw.
    pub force_first_service: Option<f64>,
    /// Record a full event trace.
    pub record_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            event_cap: 10_000_000,
            force_first_service: None,
            record_trace: false,
        }
    }
}

/// Per-cycle statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusyCycleRecord {
    /// Largest number of customers simultaneously present.
    pub max_len: u32,
    /// Idle period plus busy period.
    pub cycle_len: f64,
    /// Busy period alone.
    pub busy_len: f64,
    /// Number of sub-busy periods (FB* only; 0 elsewhere): how many times
    /// the initiator's service was interrupted by an arrival.
    pub k_subbusy: u32,
    /// Service requirement of the customer that opened the busy period.
    pub first_service: f64,
}

/// A busy-cycle run plus its optional trace.
#[derive(Debug, Clone)]
pub struct BusyCycleOutput {
    pub record: BusyCycleRecord,
    pub trace: Option<Vec<TraceEvent>>,
}

/// Maximum queue length over a fixed horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonRecord {
    pub max_over_horizon: u32,
    /// First time the head count exceeded the overflow level, if it did.
    pub first_passage_time: Option<f64>,
}

/// Source of interarrival gaps and service requirements. Production runs
/// wire the seeded uniform streams; tests may wire explicit scripts.
pub trait Draws {
    fn interarrival(&mut self) -> f64;
    fn service(&mut self) -> Result<f64>;
}

/// The production draw source: inverse-transform sampling from one arrival
/// stream and one service stream.
pub struct StreamDraws<'a> {
    pub streams: &'a mut StreamPair,
    pub lambda: f64,
    pub dist: ServiceDistribution,
}

impl Draws for StreamDraws<'_> {
    fn interarrival(&mut self) -> f64 {
        self.streams.interarrival(self.lambda)
    }

    fn service(&mut self) -> Result<f64> {
        self.dist.sample(self.streams.service_uniform())
    }
}

/// Scripted draws for deterministic scenarios.
pub struct ScriptDraws {
    pub interarrivals: std::vec::IntoIter<f64>,
    pub services: std::vec::IntoIter<f64>,
}

impl ScriptDraws {
    pub fn new(interarrivals: Vec<f64>, services: Vec<f64>) -> Self {
        ScriptDraws {
            interarrivals: interarrivals.into_iter(),
            services: services.into_iter(),
        }
    }
}

impl Draws for ScriptDraws {
    fn interarrival(&mut self) -> f64 {
        self.interarrivals.next().expect("interarrival script exhausted")
    }

    fn service(&mut self) -> Result<f64> {
        Ok(self.services.next().expect("service script exhausted"))
    }
}

/// Work-conserving single-server state for the disciplines that need no
/// initiator bookkeeping.
enum Core {
    Fb(FbState),
    Fifo(VecDeque<f64>),
}

impl Core {
    fn new(discipline: Discipline) -> Core {
        match discipline {
            Discipline::Fb => Core::Fb(FbState::new()),
            Discipline::Fifo => Core::Fifo(VecDeque::new()),
            Discipline::FbStar => unreachable!("FB* runs through its own loop"),
        }
    }

    fn len(&self) -> u32 {
        match self {
            Core::Fb(s) => s.len() as u32,
            Core::Fifo(q) => q.len() as u32,
        }
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn total_remaining(&self) -> f64 {
        match self {
            Core::Fb(s) => s.total_remaining(),
            Core::Fifo(q) => q.iter().sum(),
        }
    }

    fn profile(&self) -> Vec<(f64, u32)> {
        match self {
            Core::Fb(s) => s.group_profile(),
            Core::Fifo(_) => Vec::new(),
        }
    }

    fn arrival(&mut self, service: f64) {
        match self {
            Core::Fb(s) => s.arrival(service),
            Core::Fifo(q) => q.push_back(service),
        }
    }

    /// Wall time to the next internal event, if any.
    fn next_dt(&self) -> Option<f64> {
        match self {
            Core::Fb(s) => s.next_event().map(|e| e.dt()),
            Core::Fifo(q) => q.front().map(|&r| r.max(0.0)),
        }
    }

    /// Serve for `dt` without an internal event firing.
    fn advance(&mut self, dt: f64) {
        if self.is_empty() || dt == 0.0 {
            return;
        }
        match self {
            Core::Fb(s) => s.advance(dt),
            Core::Fifo(q) => *q.front_mut().unwrap() -= dt,
        }
    }

    /// Apply the pending internal event; returns its kind and departures.
    fn apply_next(&mut self) -> (EventKind, u32) {
        match self {
            Core::Fb(s) => {
                let ev = s.next_event().expect("apply_next on empty state");
                let kind = match ev {
                    FbEvent::Completion { .. } => EventKind::Completion,
                    FbEvent::Merge { .. } => EventKind::Merge,
                };
                (kind, s.apply(ev))
            }
            Core::Fifo(q) => {
                q.pop_front();
                (EventKind::Completion, 1)
            }
        }
    }
}

/// Trace recorder; a no-op unless tracing was requested.
struct Recorder {
    trace: Option<Vec<TraceEvent>>,
}

impl Recorder {
    fn new(enabled: bool) -> Self {
        Recorder { trace: enabled.then(Vec::new) }
    }

    fn note(
        &mut self,
        clock: f64,
        kind: EventKind,
        queue_len: u32,
        departures: u32,
        service_added: f64,
        detail: impl FnOnce() -> (f64, Vec<(f64, u32)>),
    ) {
        if let Some(t) = &mut self.trace {
            let (total_remaining, groups) = detail();
            t.push(TraceEvent {
                clock,
                kind,
                queue_len,
                departures,
                service_added,
                total_remaining,
                groups,
            });
        }
    }
}

/// Simulates one idle period plus one busy period from an empty system.
pub fn run_busy_cycle(
    params: &QueueParams,
    streams: &mut StreamPair,
    opts: &RunOptions,
) -> Result<BusyCycleOutput> {
    let mut draws = StreamDraws { streams, lambda: params.lambda, dist: params.dist };
    run_busy_cycle_with(params.discipline, &mut draws, opts)
}

/// [`run_busy_cycle`] over an arbitrary draw source.
pub fn run_busy_cycle_with(
    discipline: Discipline,
    draws: &mut dyn Draws,
    opts: &RunOptions,
) -> Result<BusyCycleOutput> {
    match discipline {
        Discipline::FbStar => busy_cycle_fbstar(draws, opts),
        _ => busy_cycle_core(discipline, draws, opts),
    }
}

fn first_service(draws: &mut dyn Draws, opts: &RunOptions) -> Result<f64> {
    match opts.force_first_service {
        Some(b) => Ok(b),
        None => draws.service(),
    }
}

fn busy_cycle_core(
    discipline: Discipline,
    draws: &mut dyn Draws,
    opts: &RunOptions,
) -> Result<BusyCycleOutput> {
    let idle = draws.interarrival();
    let mut clock = idle;
    let mut core = Core::new(discipline);
    let mut rec = Recorder::new(opts.record_trace);

    let b1 = first_service(draws, opts)?;
    core.arrival(b1);
    let mut max_len = 1u32;
    rec.note(clock, EventKind::Arrival, 1, 0, b1, || (b1, core.profile()));

    let mut next_arrival = clock + draws.interarrival();
    let mut events = 1u64;

    loop {
        events += 1;
        if events > opts.event_cap {
            return Err(Error::EventCap { cap: opts.event_cap, clock });
        }

        let t_internal = clock + core.next_dt().expect("busy loop with empty core");
        if next_arrival < t_internal {
            core.advance(next_arrival - clock);
            clock = next_arrival;
            let b = draws.service()?;
            core.arrival(b);
            next_arrival = clock + draws.interarrival();
            max_len = max_len.max(core.len());
            rec.note(clock, EventKind::Arrival, core.len(), 0, b, || {
                (core.total_remaining(), core.profile())
            });
        } else {
            clock = t_internal;
            let (kind, departures) = core.apply_next();
            rec.note(clock, kind, core.len(), departures, 0.0, || {
                (core.total_remaining(), core.profile())
            });
            if core.is_empty() {
                break;
            }
        }
    }

    Ok(BusyCycleOutput {
        record: BusyCycleRecord {
            max_len,
            cycle_len: clock,
            busy_len: clock - idle,
            k_subbusy: 0,
            first_service: b1,
        },
        trace: rec.trace,
    })
}

/// FB* cycle: the customer that opens the busy period has lowest priority
/// and is served only when alone; everyone else runs under FB. Each arrival
/// that interrupts the initiator's service opens one sub-busy period.
fn busy_cycle_fbstar(draws: &mut dyn Draws, opts: &RunOptions) -> Result<BusyCycleOutput> {
    let idle = draws.interarrival();
    let mut clock = idle;
    let mut rec = Recorder::new(opts.record_trace);

    let b1 = first_service(draws, opts)?;
    let mut initiator = b1;
    let mut crowd = FbState::new();
    let mut k_subbusy = 0u32;
    let mut max_len = 1u32;
    rec.note(clock, EventKind::Arrival, 1, 0, b1, || (b1, vec![]));

    let mut next_arrival = clock + draws.interarrival();
    let mut events = 1u64;

    loop {
        events += 1;
        if events > opts.event_cap {
            return Err(Error::EventCap { cap: opts.event_cap, clock });
        }

        if crowd.is_empty() {
            // Initiator in service.
            let t_done = clock + initiator.max(0.0);
            if next_arrival < t_done {
                initiator -= next_arrival - clock;
                clock = next_arrival;
                k_subbusy += 1;
                let b = draws.service()?;
                crowd.arrival(b);
                next_arrival = clock + draws.interarrival();
                let len = crowd.len() as u32 + 1;
                max_len = max_len.max(len);
                rec.note(clock, EventKind::Arrival, len, 0, b, || {
                    (crowd.total_remaining() + initiator, crowd.group_profile())
                });
            } else {
                clock = t_done;
                rec.note(clock, EventKind::Completion, 0, 1, 0.0, || (0.0, vec![]));
                break; // initiator leaves an otherwise empty system
            }
        } else {
            // A sub-busy period: the crowd runs under FB, initiator frozen.
            let ev = crowd.next_event().expect("crowd nonempty");
            let t_internal = clock + ev.dt();
            if next_arrival < t_internal {
                crowd.advance(next_arrival - clock);
                clock = next_arrival;
                let b = draws.service()?;
                crowd.arrival(b);
                next_arrival = clock + draws.interarrival();
                let len = crowd.len() as u32 + 1;
                max_len = max_len.max(len);
                rec.note(clock, EventKind::Arrival, len, 0, b, || {
                    (crowd.total_remaining() + initiator, crowd.group_profile())
                });
            } else {
                clock = t_internal;
                let kind = match ev {
                    FbEvent::Completion { .. } => EventKind::Completion,
                    FbEvent::Merge { .. } => EventKind::Merge,
                };
                let departures = crowd.apply(ev);
                rec.note(clock, kind, crowd.len() as u32 + 1, departures, 0.0, || {
                    (crowd.total_remaining() + initiator, crowd.group_profile())
                });
            }
        }
    }

    Ok(BusyCycleOutput {
        record: BusyCycleRecord {
            max_len,
            cycle_len: clock,
            busy_len: clock - idle,
            k_subbusy,
            first_service: b1,
        },
        trace: rec.trace,
    })
}

/// Runs the queue from empty over `[0, t_end]`, tracking the running
/// maximum head count and the first time it exceeds `overflow_level`.
///
/// The head count only grows at arrivals, so events strictly beyond the
/// horizon cannot change either output and the run stops there.
pub fn run_horizon(
    params: &QueueParams,
    t_end: f64,
    overflow_level: u32,
    streams: &mut StreamPair,
    opts: &RunOptions,
) -> Result<HorizonRecord> {
    if !(t_end > 0.0) {
        return Err(Error::domain(format!("horizon must be positive, got {t_end}")));
    }
    if params.discipline == Discipline::FbStar {
        return Err(Error::domain(
            "FB* is defined per busy period; horizon runs support FB and FIFO",
        ));
    }

    let mut draws = StreamDraws { streams, lambda: params.lambda, dist: params.dist };
    let mut clock = 0.0_f64;
    let mut core = Core::new(params.discipline);
    let mut max_len = 0u32;
    let mut first_passage = None;
    let mut next_arrival = draws.interarrival();
    let mut events = 0u64;

    loop {
        events += 1;
        if events > opts.event_cap {
            return Err(Error::EventCap { cap: opts.event_cap, clock });
        }

        let t_internal = core.next_dt().map(|dt| clock + dt).unwrap_or(f64::INFINITY);
        if next_arrival < t_internal {
            if next_arrival > t_end {
                break;
            }
            core.advance(next_arrival - clock);
            clock = next_arrival;
            let b = draws.service()?;
            core.arrival(b);
            next_arrival = clock + draws.interarrival();
            let len = core.len();
            max_len = max_len.max(len);
            if first_passage.is_none() && len > overflow_level {
                first_passage = Some(clock);
            }
        } else {
            if t_internal > t_end {
                break;
            }
            clock = t_internal;
            core.apply_next();
        }
    }

    Ok(HorizonRecord { max_over_horizon: max_len, first_passage_time: first_passage })
}
