//! Event traces and the work-conservation self-check.

/// What happened at a trace epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    Completion,
    Merge,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EventKind::Arrival => "arrival",
            EventKind::Completion => "completion",
            EventKind::Merge => "merge",
        })
    }
}

/// State snapshot taken immediately after an event was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub clock: f64,
    pub kind: EventKind,
    /// Customers present after the event (initiator included under FB*).
    pub queue_len: u32,
    /// Departures at this event (completions only).
    pub departures: u32,
    /// Service requirement added at this event (arrivals only).
    pub service_added: f64,
    /// Unfinished work after the event, initiator included.
    pub total_remaining: f64,
    /// `(age, member count)` per group, youngest first; empty under FIFO.
    pub groups: Vec<(f64, u32)>,
}

/// Outcome of [`verify_work_conservation`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationReport {
    pub pass: bool,
    pub events_checked: usize,
    /// First violated check: `(event index, description)`.
    pub first_violation: Option<(usize, String)>,
}

/// Checks an event trace for the structural invariants of the simulator:
/// work drains at exactly unit rate while the system is busy, only the
/// served (youngest) group ages, untouched groups keep their exact ages,
/// and arrivals/departures reconcile the head count.
pub fn verify_work_conservation(trace: &[TraceEvent]) -> ConservationReport {
    let mut first_violation = None;
    let fail = |idx: usize, msg: String, slot: &mut Option<(usize, String)>| {
        if slot.is_none() {
            *slot = Some((idx, msg));
        }
    };

    for (idx, w) in trace.windows(2).enumerate() {
        let (prev, cur) = (&w[0], &w[1]);
        let i = idx + 1;

        if cur.clock < prev.clock {
            fail(i, format!("clock went backwards: {} -> {}", prev.clock, cur.clock), &mut first_violation);
            continue;
        }

        // Work conservation: busy time drains remaining work one-for-one.
        let elapsed = cur.clock - prev.clock;
        let busy = if prev.queue_len > 0 { elapsed } else { 0.0 };
        let added = if cur.kind == EventKind::Arrival { cur.service_added } else { 0.0 };
        let expected = prev.total_remaining - busy + added;
        let tol = 1e-9 * (1.0 + cur.clock.abs() + prev.total_remaining.abs());
        if (cur.total_remaining - expected).abs() > tol {
            fail(
                i,
                format!(
                    "work conservation: remaining {} vs expected {} at clock {}",
                    cur.total_remaining, expected, cur.clock
                ),
                &mut first_violation,
            );
        }

        // Head-count reconciliation.
        let expected_len = match cur.kind {
            EventKind::Arrival => prev.queue_len + 1,
            EventKind::Completion => prev.queue_len.saturating_sub(cur.departures),
            EventKind::Merge => prev.queue_len,
        };
        if cur.queue_len != expected_len {
            fail(
                i,
                format!("head count: {} vs expected {}", cur.queue_len, expected_len),
                &mut first_violation,
            );
        }

        // Ages strictly increasing within each snapshot.
        for pair in cur.groups.windows(2) {
            if pair[0].0 >= pair[1].0 {
                fail(i, format!("group ages not strictly increasing: {:?}", cur.groups), &mut first_violation);
            }
        }

        // Only the served (youngest) group may age: every group in the new
        // snapshot either keeps an exact non-youngest age from the previous
        // one, is at least as old as the previously served group, or is the
        // age-0 group of a fresh arrival.
        if !prev.groups.is_empty() {
            let served_age = prev.groups[0].0;
            let frozen: Vec<f64> = prev.groups.iter().skip(1).map(|g| g.0).collect();
            for g in &cur.groups {
                let ok = frozen.contains(&g.0)
                    || g.0 >= served_age
                    || (cur.kind == EventKind::Arrival && g.0 == 0.0);
                if !ok {
                    fail(
                        i,
                        format!("age {} changed outside the served group", g.0),
                        &mut first_violation,
                    );
                }
            }
        }
    }

    ConservationReport {
        pass: first_violation.is_none(),
        events_checked: trace.len().saturating_sub(1),
        first_violation,
    }
}
