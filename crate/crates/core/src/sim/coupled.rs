//! Coupled simulation of two FB queues sharing arrivals and service
//! uniforms.
//!
//! Both queues are driven by one arrival stream and one uniform stream;
//! queue F receives `F^{-1}(U_k)`, queue G receives `G^{-1}(U_k)`. When the
//! two quantile functions agree below a splice level `p`, the count of
//! customers younger than `F^{-1}(p)` evolves identically in both queues,
//! and the F head count never exceeds the G head count plus the number of
//! arrivals whose uniform reached `p`. Both facts are checked at every
//! event epoch, not assumed.
//!
//! The driver steps both queues through the union of their event epochs, so
//! the below-splice dynamics stay bit-identical in the two states.

use rayon::prelude::*;

use crate::dist::ServiceDistribution;
use crate::error::{Error, Result};
use crate::sim::fb::FbState;
use crate::sim::rng::StreamPair;

/// Options for a coupled run.
#[derive(Debug, Clone, Copy)]
pub struct CoupledOptions {
    /// Splice level `p`: the two laws must share their quantile function on
    /// `[0, p)`.
    pub p_splice: f64,
    /// Horizon.
    pub t_end: f64,
    pub event_cap: u64,
}

/// Per-path outcome of a coupled run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoupledPathRecord {
    pub events: u64,
    /// Epochs where `N_F > N_G + K_p`.
    pub count_violations: u64,
    /// Epochs where the two below-splice head counts differed.
    pub age_class_violations: u64,
    pub max_f: u32,
    pub max_g: u32,
    /// Arrivals with uniform at or above the splice level.
    pub k_p: u64,
}

/// Aggregate over many coupled paths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoupledSummary {
    pub paths: u64,
    pub events: u64,
    pub count_violations: u64,
    pub age_class_violations: u64,
    pub max_f: u32,
    pub max_g: u32,
}

/// Verifies that the two quantile functions agree on `[0, p)`.
///
/// Checked on a proportional grid plus near-zero and near-`p` points;
/// relative tolerance `1e-9`.
pub fn check_quantile_agreement(
    dist_f: &ServiceDistribution,
    dist_g: &ServiceDistribution,
    p_splice: f64,
) -> Result<()> {
    let mut probes: Vec<f64> = (0..128).map(|i| p_splice * (i as f64 + 0.5) / 128.0).collect();
    probes.push(1e-12);
    probes.push(p_splice * (1.0 - 1e-12));
    for u in probes {
        let qf = dist_f.quantile(u)?;
        let qg = dist_g.quantile(u)?;
        if (qf - qg).abs() > 1e-9 * (1.0 + qf.abs()) {
            return Err(Error::Config(format!(
                "quantiles disagree below the splice level: F^-1({u}) = {qf}, G^-1({u}) = {qg}"
            )));
        }
    }
    Ok(())
}

/// Runs one coupled path and reports any violation of the two pathwise
/// relations.
pub fn run_coupled(
    lambda: f64,
    dist_f: &ServiceDistribution,
    dist_g: &ServiceDistribution,
    opts: &CoupledOptions,
    streams: &mut StreamPair,
) -> Result<CoupledPathRecord> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("lambda must be > 0, got {lambda}")));
    }
    if !(opts.p_splice > 0.0 && opts.p_splice < 1.0) {
        return Err(Error::domain(format!(
            "splice level must be in (0, 1), got {}",
            opts.p_splice
        )));
    }
    if !(opts.t_end > 0.0) {
        return Err(Error::domain("horizon must be positive"));
    }
    check_quantile_agreement(dist_f, dist_g, opts.p_splice)?;

    // Age threshold of the shared young class.
    let age_cut = dist_f.quantile(opts.p_splice)?;

    let mut state_f = FbState::new();
    let mut state_g = FbState::new();
    let mut clock = 0.0_f64;
    let mut next_arrival = streams.interarrival(lambda);
    let mut rec = CoupledPathRecord::default();

    loop {
        rec.events += 1;
        if rec.events > opts.event_cap {
            return Err(Error::EventCap { cap: opts.event_cap, clock });
        }

        let ev_f = state_f.next_event();
        let ev_g = state_g.next_event();
        let t_f = ev_f.map(|e| clock + e.dt()).unwrap_or(f64::INFINITY);
        let t_g = ev_g.map(|e| clock + e.dt()).unwrap_or(f64::INFINITY);
        let t_internal = t_f.min(t_g);

        if next_arrival < t_internal {
            if next_arrival > opts.t_end {
                break;
            }
            let dt = next_arrival - clock;
            if !state_f.is_empty() {
                state_f.advance(dt);
            }
            if !state_g.is_empty() {
                state_g.advance(dt);
            }
            clock = next_arrival;
            let u = streams.service_uniform();
            state_f.arrival(dist_f.sample(u)?);
            state_g.arrival(dist_g.sample(u)?);
            if u >= opts.p_splice {
                rec.k_p += 1;
            }
            next_arrival = clock + streams.interarrival(lambda);
        } else {
            if t_internal > opts.t_end {
                break;
            }
            let dt = t_internal - clock;
            // Queues whose own event fires now apply it (the event embodies
            // the elapsed service); the other advances passively.
            if t_f == t_internal {
                state_f.apply(ev_f.expect("t_f finite"));
            } else if !state_f.is_empty() {
                state_f.advance(dt);
            }
            if t_g == t_internal {
                state_g.apply(ev_g.expect("t_g finite"));
            } else if !state_g.is_empty() {
                state_g.advance(dt);
            }
            clock = t_internal;
        }

        let n_f = state_f.len() as u64;
        let n_g = state_g.len() as u64;
        rec.max_f = rec.max_f.max(n_f as u32);
        rec.max_g = rec.max_g.max(n_g as u32);
        if n_f > n_g + rec.k_p {
            rec.count_violations += 1;
        }
        if state_f.count_younger_than(age_cut) != state_g.count_younger_than(age_cut) {
            rec.age_class_violations += 1;
        }
    }

    Ok(rec)
}

/// Runs `paths` independent coupled paths and aggregates.
pub fn coupled_ensemble(
    lambda: f64,
    dist_f: &ServiceDistribution,
    dist_g: &ServiceDistribution,
    opts: &CoupledOptions,
    paths: u64,
    seed: u64,
) -> Result<CoupledSummary> {
    check_quantile_agreement(dist_f, dist_g, opts.p_splice)?;
    let records: Vec<CoupledPathRecord> = (0..paths)
        .into_par_iter()
        .map(|rep| {
            let mut streams = StreamPair::for_replication(seed, rep);
            run_coupled(lambda, dist_f, dist_g, opts, &mut streams)
        })
        .collect::<Result<_>>()?;
    let mut summary = CoupledSummary { paths, ..Default::default() };
    for r in records {
        summary.events += r.events;
        summary.count_violations += r.count_violations;
        summary.age_class_violations += r.age_class_violations;
        summary.max_f = summary.max_f.max(r.max_f);
        summary.max_g = summary.max_g.max(r.max_g);
    }
    Ok(summary)
}
