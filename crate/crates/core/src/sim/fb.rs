//! Age-group bookkeeping for the Foreground-Background discipline.
//!
//! Customers are grouped by attained service (age); groups are kept in
//! strictly increasing age order and only the youngest group is served,
//! each of its `m` members at rate `1/m`. Three things can happen next:
//! the youngest group's minimum remaining service completes (after
//! `m * r_min` of wall time), the youngest group's age catches up with the
//! next group (after `m * (a1 - a0)`), or an external arrival interrupts.
//!
//! All state changes are structural: a merge assigns the older group's age
//! rather than comparing accumulated floats, and a completion removes the
//! members that defined the event. No epsilon comparisons anywhere.

/// Customers sharing one attained-service level.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeGroup {
    /// Attained service of every member.
    pub age: f64,
    /// Remaining service requirements, ascending.
    pub members: Vec<f64>,
}

/// Internal FB event, measured in wall time from "now".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FbEvent {
    /// The youngest group's minimum remaining service finishes.
    Completion { dt: f64, service_left: f64 },
    /// The youngest group's age reaches the next group's age.
    Merge { dt: f64, age_gap: f64 },
}

impl FbEvent {
    pub fn dt(&self) -> f64 {
        match *self {
            FbEvent::Completion { dt, .. } | FbEvent::Merge { dt, .. } => dt,
        }
    }
}

/// The set of age groups of an FB queue, youngest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FbState {
    pub groups: Vec<AgeGroup>,
}

impl FbState {
    pub fn new() -> Self {
        FbState { groups: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Number of customers present.
    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }

    /// Total unfinished work.
    pub fn total_remaining(&self) -> f64 {
        self.groups.iter().flat_map(|g| g.members.iter()).sum()
    }

    /// Customers with attained service strictly below `age_cut`.
    pub fn count_younger_than(&self, age_cut: f64) -> usize {
        self.groups
            .iter()
            .take_while(|g| g.age < age_cut)
            .map(|g| g.members.len())
            .sum()
    }

    /// Admit a customer with service requirement `service` at age 0.
    ///
    /// A fresh group is created unless an age-0 group already exists (only
    /// possible when an interarrival time is exactly zero), in which case
    /// the arrival joins it.
    pub fn arrival(&mut self, service: f64) {
        debug_assert!(service > 0.0);
        if let Some(first) = self.groups.first_mut() {
            if first.age == 0.0 {
                let pos = first.members.partition_point(|&r| r < service);
                first.members.insert(pos, service);
                return;
            }
        }
        self.groups.insert(0, AgeGroup { age: 0.0, members: vec![service] });
    }

    /// The next internal event, if any customer is present.
    ///
    /// A completion and a merge due at the same instant resolve to the
    /// completion. Negative wall times cannot arise in exact arithmetic;
    /// rounding in `advance` may produce them at ulp scale, so they are
    /// clamped to zero to keep the clock monotone.
    pub fn next_event(&self) -> Option<FbEvent> {
        let young = self.groups.first()?;
        let m = young.members.len() as f64;
        let service_left = young.members[0];
        let completion = FbEvent::Completion {
            dt: (m * service_left).max(0.0),
            service_left,
        };
        match self.groups.get(1) {
            Some(next) => {
                let age_gap = next.age - young.age;
                let merge = FbEvent::Merge { dt: (m * age_gap).max(0.0), age_gap };
                if merge.dt() < completion.dt() {
                    Some(merge)
                } else {
                    Some(completion)
                }
            }
            None => Some(completion),
        }
    }

    /// Serve the youngest group for `dt` of wall time without any internal
    /// event firing (an arrival is about to interrupt).
    pub fn advance(&mut self, dt: f64) {
        if dt == 0.0 {
            return;
        }
        let young = self.groups.first_mut().expect("advance on empty state");
        let share = dt / young.members.len() as f64;
        young.age += share;
        for r in &mut young.members {
            *r -= share;
        }
    }

    /// Apply an internal event previously returned by [`next_event`].
    /// Returns the number of departures (zero for a merge).
    ///
    /// The exact per-member quantities embedded in the event are applied,
    /// not `dt / m`, so the member that defined a completion reaches zero
    /// exactly and a merged group lands exactly on its target age.
    pub fn apply(&mut self, event: FbEvent) -> u32 {
        match event {
            FbEvent::Completion { service_left, .. } => {
                let young = &mut self.groups[0];
                let departing = young.members.iter().take_while(|&&r| r == service_left).count();
                debug_assert!(departing >= 1);
                young.members.drain(..departing);
                young.age += service_left;
                for r in &mut young.members {
                    *r -= service_left;
                }
                if young.members.is_empty() {
                    self.groups.remove(0);
                }
                departing as u32
            }
            FbEvent::Merge { age_gap, .. } => {
                debug_assert!(self.groups.len() >= 2);
                let mut young = self.groups.remove(0);
                for r in &mut young.members {
                    *r -= age_gap;
                }
                // Ages become equal structurally: the merged members take
                // the older group's age verbatim.
                let target = &mut self.groups[0];
                let merged = merge_sorted(&young.members, &target.members);
                target.members = merged;
                0
            }
        }
    }

    /// Snapshot of `(age, member count)` per group, youngest first.
    pub fn group_profile(&self) -> Vec<(f64, u32)> {
        self.groups.iter().map(|g| (g.age, g.members.len() as u32)).collect()
    }

    #[cfg(debug_assertions)]
    pub fn assert_invariants(&self) {
        for w in self.groups.windows(2) {
            assert!(w[0].age < w[1].age, "group ages not strictly increasing");
        }
        for g in &self.groups {
            assert!(!g.members.is_empty());
            for w in g.members.windows(2) {
                assert!(w[0] <= w[1], "members not sorted");
            }
        }
    }
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
