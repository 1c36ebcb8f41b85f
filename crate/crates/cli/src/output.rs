//! Self-describing output: every artifact embeds the tool version, seed and
//! full configuration, and states its time unit.

use fbq_core::analytics::BoundRow;
use fbq_core::sim::EstimateRow;
use serde_json::{json, Value};
use std::fmt::Write as _;

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Comment-style header lines for CSV artifacts.
pub fn csv_header(seed: Option<u64>, config: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# fbq {VERSION}");
    let _ = writeln!(s, "# time unit: milliseconds");
    if let Some(seed) = seed {
        let _ = writeln!(s, "# seed: {seed}");
    }
    if !config.is_empty() {
        let _ = writeln!(s, "# config: {}", config.summary());
    }
    s
}

/// Meta object for JSON artifacts.
pub fn json_meta(seed: Option<u64>, config: &ExperimentConfig) -> Value {
    json!({
        "version": VERSION,
        "time_unit": "milliseconds",
        "seed": seed,
        "config": config.summary(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The shared bound/estimate CSV schema:
/// `n,rho_pow,q_n,exact_mm1,r_hat,ci_low,ci_high` with empty fields where a
/// column does not apply.
pub fn bounds_csv(
    seed: Option<u64>,
    config: &ExperimentConfig,
    analytic: &[BoundRow],
    empirical: &[EstimateRow],
) -> String {
    let mut s = csv_header(seed, config);
    s.push_str("n,rho_pow,q_n,exact_mm1,r_hat,ci_low,ci_high\n");
    let levels = analytic.len().max(empirical.len());
    let find_a = |n: usize| analytic.iter().find(|r| r.n as usize == n);
    let find_e = |n: usize| empirical.iter().find(|r| r.n as usize == n);
    for n in 0..levels {
        let a = find_a(n);
        let e = find_e(n);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            n,
            fmt_opt(a.map(|r| r.rho_pow)),
            fmt_opt(a.map(|r| r.q)),
            fmt_opt(a.and_then(|r| r.exact_mm1)),
            fmt_opt(e.map(|r| r.r_hat)),
            fmt_opt(e.map(|r| r.ci_low)),
            fmt_opt(e.map(|r| r.ci_high)),
        );
    }
    s
}

/// Rows as a JSON array under the shared schema.
pub fn bounds_json(
    seed: Option<u64>,
    config: &ExperimentConfig,
    analytic: &[BoundRow],
    empirical: &[EstimateRow],
) -> Value {
    let levels = analytic.len().max(empirical.len());
    let rows: Vec<Value> = (0..levels)
        .map(|n| {
            let a = analytic.iter().find(|r| r.n as usize == n);
            let e = empirical.iter().find(|r| r.n as usize == n);
            json!({
                "n": n,
                "rho_pow": a.map(|r| r.rho_pow),
                "q_n": a.map(|r| r.q),
                "exact_mm1": a.and_then(|r| r.exact_mm1),
                "r_hat": e.map(|r| r.r_hat),
                "ci_low": e.map(|r| r.ci_low),
                "ci_high": e.map(|r| r.ci_high),
            })
        })
        .collect();
    json!({ "meta": json_meta(seed, config), "rows": rows })
}

/// Writes to `--out` or stdout.
pub fn emit(out: Option<&std::path::Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}
