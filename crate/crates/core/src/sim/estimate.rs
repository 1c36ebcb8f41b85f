//! Replicated Monte-Carlo layers over the single-run engine.
//!
//! Every replication draws its own streams from `(seed, index)`, so results
//! are independent of execution order and worker count; rayon only changes
//! wall time, never output.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::wilson_interval;
use crate::sim::engine::{run_busy_cycle, run_horizon, BusyCycleRecord, HorizonRecord, RunOptions};
use crate::sim::rng::StreamPair;
use crate::sim::QueueParams;

/// 97.5% normal quantile: the 95% two-sided Wilson interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Empirical exceedance estimate at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub n: u32,
    /// Empirical `P(M > n)`.
    pub r_hat: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub cycles: u64,
}

/// Options for the replication layers.
#[derive(Debug, Clone, Copy, Default)]
pub struct EstimateOptions {
    /// Accept parameters with `rho >= 1` (first-passage studies); the event
    /// cap is then the only stop.
    pub allow_unstable: bool,
    pub run: RunOptions,
}

fn check_stability(params: &QueueParams, allow_unstable: bool) -> Result<()> {
    let rho = params.lambda * params.dist.mean();
    if rho >= 1.0 && !allow_unstable {
        return Err(Error::Unstable {
            rho,
            hint: "pass allow_unstable to simulate an overloaded queue under the event cap",
        });
    }
    Ok(())
}

/// Runs `cycles` busy cycles and returns the per-level empirical
/// exceedance probabilities `P(M > n)` for `n = 0..=n_max` with 95% Wilson
/// intervals. `r_hat` is nonincreasing in `n` by construction.
pub fn estimate_exceedance(
    params: &QueueParams,
    n_max: u32,
    cycles: u64,
    seed: u64,
    opts: &EstimateOptions,
) -> Result<Vec<EstimateRow>> {
    if cycles < 1 {
        return Err(Error::domain("need at least one cycle"));
    }
    check_stability(params, opts.allow_unstable)?;

    let bins = n_max as usize + 2;
    let histogram = (0..cycles)
        .into_par_iter()
        .map(|rep| {
            let mut streams = StreamPair::for_replication(seed, rep);
            let out = run_busy_cycle(params, &mut streams, &opts.run)?;
            Ok((out.record.max_len as usize).min(bins - 1))
        })
        .try_fold(
            || vec![0u64; bins],
            |mut acc, idx: Result<usize>| {
                acc[idx?] += 1;
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;

    // Suffix sums: #{max_len > n}.
    let mut exceed = vec![0u64; n_max as usize + 1];
    let mut running = histogram[bins - 1];
    for n in (0..=n_max as usize).rev() {
        exceed[n] = running;
        running += histogram[n];
    }
    debug_assert_eq!(running, cycles);
    debug_assert_eq!(histogram[0], 0, "a busy period holds at least one customer");

    Ok(exceed
        .iter()
        .enumerate()
        .map(|(n, &count)| {
            let (ci_low, ci_high) = wilson_interval(count, cycles, Z95);
            EstimateRow {
                n: n as u32,
                r_hat: count as f64 / cycles as f64,
                ci_low,
                ci_high,
                cycles,
            }
        })
        .collect())
}

/// Runs `cycles` busy cycles and returns every per-cycle record
/// (replication order).
pub fn collect_cycles(
    params: &QueueParams,
    cycles: u64,
    seed: u64,
    opts: &EstimateOptions,
) -> Result<Vec<BusyCycleRecord>> {
    check_stability(params, opts.allow_unstable)?;
    (0..cycles)
        .into_par_iter()
        .map(|rep| {
            let mut streams = StreamPair::for_replication(seed, rep);
            Ok(run_busy_cycle(params, &mut streams, &opts.run)?.record)
        })
        .collect()
}

/// Runs `reps` independent horizon simulations of `[0, t_end]`.
pub fn horizon_ensemble(
    params: &QueueParams,
    t_end: f64,
    overflow_level: u32,
    reps: u64,
    seed: u64,
    opts: &EstimateOptions,
) -> Result<Vec<HorizonRecord>> {
    check_stability(params, opts.allow_unstable)?;
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut streams = StreamPair::for_replication(seed, rep);
            run_horizon(params, t_end, overflow_level, &mut streams, &opts.run)
        })
        .collect()
}
