//! Closed-form and recursive bound computations for the busy-period maximum
//! queue length, overflow-time quantiles, the critical service value of an
//! overloaded queue, and the spliced-tail bound pipeline for unstable queues.
//!
//! Everything that can underflow a double at realistic buffer sizes
//! (`rho^d` with `d` in the hundreds or thousands) is carried in log domain.

use crate::dist::ServiceDistribution;
use crate::error::{Error, Result};
use crate::numeric;

/// Threshold below which the geometric-bound recursion switches to its
/// log-domain continuation.
const Q_LOG_SWITCH: f64 = 1e-250;

/// Which upper bound on `P(M > d)` backs an overflow quantile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// The distribution-free geometric bound `rho^d`.
    RhoPow,
    /// The sharper transform recursion `q_d`.
    QSequence,
    /// The exact M/M/1 law (exponential service only).
    ExactMm1,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::RhoPow => "rho_pow",
            BoundKind::QSequence => "q_sequence",
            BoundKind::ExactMm1 => "exact_mm1",
        })
    }
}

/// One level of a [`BoundTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub n: u32,
    /// Geometric bound `rho^n`.
    pub rho_pow: f64,
    /// Transform-recursion bound `q_n`.
    pub q: f64,
    /// Exact exceedance probability, populated for exponential service.
    pub exact_mm1: Option<f64>,
    /// `1 - E e^{-lambda B}`, populated at `n = 1` only.
    pub r1_exact: Option<f64>,
}

/// Per-level exceedance bounds for a stable queue.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    pub lambda: f64,
    pub dist: ServiceDistribution,
    pub rho: f64,
    pub rows: Vec<BoundRow>,
}

/// Exact busy-period exceedance law for the M/M/1 queue:
/// `P(M > n) = rho^n (1 - rho) / (1 - rho^{n+1})`.
pub fn mm1_exceedance(rho: f64, n: u32) -> Result<f64> {
    check_rho(rho)?;
    Ok(ln_mm1_exceedance(rho, n)?.exp())
}

/// `ln P(M > n)` for the M/M/1 law, stable for large `n`.
pub fn ln_mm1_exceedance(rho: f64, n: u32) -> Result<f64> {
    check_rho(rho)?;
    let ln_rho = rho.ln();
    let num = n as f64 * ln_rho + (-rho).ln_1p();
    let denom = (-((n + 1) as f64 * ln_rho).exp()).ln_1p();
    Ok(num - denom)
}

/// The distribution-free geometric tail bound `rho^n`.
pub fn rho_bound(rho: f64, n: u32) -> Result<f64> {
    check_rho(rho)?;
    Ok((n as f64 * rho.ln()).exp())
}

/// Exact first exceedance probability `r_1 = 1 - E e^{-lambda B}`.
pub fn r1_exact(dist: &ServiceDistribution, lambda: f64) -> Result<f64> {
    check_positive(lambda, "lambda")?;
    dist.one_minus_laplace(lambda)
}

/// Builds the bound table `q_0 = 1`, `q_{n+1} = 1 - E e^{-lambda q_n B}`
/// for levels `0..=n_max`, alongside `rho^n` and (for exponential service)
/// the exact law.
pub fn q_table(dist: &ServiceDistribution, lambda: f64, n_max: u32) -> Result<BoundTable> {
    check_positive(lambda, "lambda")?;
    let mean = dist.mean();
    if mean.is_infinite() {
        return Err(Error::InfiniteMean);
    }
    let rho = lambda * mean;
    if rho >= 1.0 {
        return Err(Error::Unstable {
            rho,
            hint: "the q-sequence exists only for rho < 1; for overloaded queues use the \
                   spliced-tail overflow bound instead",
        });
    }

    let exact = |n: u32| match dist {
        ServiceDistribution::Exponential { .. } => Some(
            mm1_exceedance(rho, n).expect("rho checked"),
        ),
        _ => None,
    };

    let mut rows = Vec::with_capacity(n_max as usize + 1);
    let mut q = 1.0_f64;
    for n in 0..=n_max {
        if n > 0 {
            q = dist.one_minus_laplace(lambda * q)?;
        }
        rows.push(BoundRow {
            n,
            rho_pow: rho_bound(rho, n)?,
            q,
            exact_mm1: exact(n),
            r1_exact: if n == 1 { Some(q) } else { None },
        });
    }
    Ok(BoundTable { lambda, dist: *dist, rho, rows })
}

/// `ln q_d` with a log-domain continuation once `q` leaves the range of a
/// double. The continuation multiplies by `rho` per level, which preserves
/// validity as an upper bound because `q_{n+1} <= rho q_n`.
fn ln_q_bound(dist: &ServiceDistribution, lambda: f64, rho: f64, d: u32) -> Result<f64> {
    let mut q = 1.0_f64;
    let mut n = 0u32;
    while n < d && q > Q_LOG_SWITCH {
        q = dist.one_minus_laplace(lambda * q)?;
        n += 1;
    }
    Ok(q.ln() + (d - n) as f64 * rho.ln())
}

/// Outcome of the stochastic-domination tail bound for services dominated
/// by the tail `(1 + c x)^{-alpha}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaBound {
    /// Base of the geometric bound `P(M > n) <= theta^n`.
    pub theta: f64,
    /// Set when `theta >= 1`, in which case the bound carries no content.
    pub vacuous: bool,
}

/// `theta = lambda / ((alpha - 1)(alpha - 2) c^2)` for services whose tail
/// is dominated by `(1 + c x)^{-alpha}` with `alpha > 2`.
pub fn pareto_theta(lambda: f64, alpha: f64, c: f64) -> Result<ThetaBound> {
    check_positive(lambda, "lambda")?;
    check_positive(c, "c")?;
    if !(alpha > 2.0) {
        return Err(Error::domain(format!("pareto_theta needs alpha > 2, got {alpha}")));
    }
    let theta = lambda / ((alpha - 1.0) * (alpha - 2.0) * c * c);
    Ok(ThetaBound { theta, vacuous: theta >= 1.0 })
}

/// Expected regeneration-cycle length `mu = 1 / (lambda (1 - rho))`
/// (one idle period plus one busy period).
pub fn cycle_mean(lambda: f64, rho: f64) -> Result<f64> {
    check_positive(lambda, "lambda")?;
    check_rho(rho)?;
    Ok(1.0 / (lambda * (1.0 - rho)))
}

/// Buffer-overflow quantile report.
///
/// `t_quantile = mu ln(1-p) / ln(pm_le_d_lower)` where `pm_le_d_lower` is
/// the selected lower bound on `P(M <= d)`. The relation behind it is an
/// asymptotic equality in `d`, recorded by the `asymptotic` flag. All
/// arithmetic is done in log domain; `log10_t` is always finite even when
/// `t_quantile` itself overflows a double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverflowReport {
    pub d: u32,
    pub p: f64,
    /// Expected cycle length (ms).
    pub mu: f64,
    /// Lower bound on `P(M <= d)` (rounds to 1.0 for large `d`).
    pub pm_le_d_lower: f64,
    /// `ln` of the upper bound on `P(M > d)` that backs the quantile.
    pub ln_pm_gt_d: f64,
    /// Overflow-time quantile (ms); `+inf` when past the range of a double.
    pub t_quantile: f64,
    /// `log10` of the quantile, always finite.
    pub log10_t: f64,
    pub bound_kind: BoundKind,
    /// The underlying time-scaling relation holds as `d -> inf`.
    pub asymptotic: bool,
}

/// Lower `p`-quantile of the time to overflow of a buffer of size `d`,
/// using the selected tail bound.
pub fn overflow_quantile(
    dist: &ServiceDistribution,
    lambda: f64,
    d: u32,
    p: f64,
    bound: BoundKind,
) -> Result<OverflowReport> {
    check_positive(lambda, "lambda")?;
    if d < 1 {
        return Err(Error::domain("buffer size d must be >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("risk level p must be in (0,1), got {p}")));
    }
    let mean = dist.mean();
    if mean.is_infinite() {
        return Err(Error::InfiniteMean);
    }
    let rho = lambda * mean;
    if rho >= 1.0 {
        return Err(Error::Unstable {
            rho,
            hint: "overflow quantiles of this kind require a stable queue",
        });
    }

    let ln_bd = match bound {
        BoundKind::RhoPow => d as f64 * rho.ln(),
        BoundKind::QSequence => ln_q_bound(dist, lambda, rho, d)?,
        BoundKind::ExactMm1 => {
            if !matches!(dist, ServiceDistribution::Exponential { .. }) {
                return Err(Error::domain(
                    "the exact_mm1 bound applies to exponential service only",
                ));
            }
            ln_mm1_exceedance(rho, d)?
        }
    };
    if ln_bd >= 0.0 {
        return Err(Error::domain(format!(
            "selected bound on P(M > {d}) is vacuous (ln = {ln_bd:.3})"
        )));
    }

    let mu = cycle_mean(lambda, rho)?;
    // ln t = ln mu + ln(-ln(1-p)) - ln(-ln(1 - b_d))
    let ln_num = (-(-p).ln_1p()).ln();
    let ln_denom = numeric::ln_neg_ln_one_minus_exp(ln_bd)?;
    let ln_t = mu.ln() + ln_num - ln_denom;

    Ok(OverflowReport {
        d,
        p,
        mu,
        // 1 - e^{ln_bd} without cancellation for tiny bounds
        pm_le_d_lower: -ln_bd.exp_m1(),
        ln_pm_gt_d: ln_bd,
        t_quantile: ln_t.exp(),
        log10_t: ln_t / std::f64::consts::LN_10,
        bound_kind: bound,
        asymptotic: true,
    })
}

/// Heuristic FIFO overflow estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FifoOverflowEstimate {
    pub d: u32,
    /// Service-time threshold `d/lambda + sigma_mult * sqrt(d/lambda)`.
    pub threshold: f64,
    /// Tail probability `1 - F(threshold)`.
    pub tail_prob: f64,
    /// Median arrival time of such a customer, `ln 2 / (lambda tail)`;
    /// `+inf` when the tail underflows.
    pub t_median: f64,
    /// Set when the tail probability underflowed to zero.
    pub tail_underflowed: bool,
}

/// Median time until a FIFO buffer of size `d` overflows, estimated as the
/// median arrival time of a single customer long enough to fill the buffer
/// by itself (`sigma_mult = 3` threshold inflation).
///
/// This is a heuristic lower-order estimate, not a theorem; it is reported
/// alongside the bound-based quantiles for contrast.
pub fn fifo_overflow_median(
    dist: &ServiceDistribution,
    lambda: f64,
    d: u32,
) -> Result<FifoOverflowEstimate> {
    fifo_overflow_median_with(dist, lambda, d, 3.0)
}

/// [`fifo_overflow_median`] with an explicit threshold inflation factor.
pub fn fifo_overflow_median_with(
    dist: &ServiceDistribution,
    lambda: f64,
    d: u32,
    sigma_mult: f64,
) -> Result<FifoOverflowEstimate> {
    check_positive(lambda, "lambda")?;
    if d < 1 {
        return Err(Error::domain("buffer size d must be >= 1"));
    }
    let base = d as f64 / lambda;
    let threshold = base + sigma_mult * base.sqrt();
    let tail = dist.survival(threshold)?;
    let (t_median, underflowed) = if tail > 0.0 {
        (std::f64::consts::LN_2 / (lambda * tail), false)
    } else {
        (f64::INFINITY, true)
    };
    Ok(FifoOverflowEstimate {
        d,
        threshold,
        tail_prob: tail,
        t_median,
        tail_underflowed: underflowed,
    })
}

/// Regenerative approximation `P(M(t) <= d) ~ P(M <= d)^{t / mu}`,
/// evaluated in log domain.
pub fn max_interval_prob(t: f64, mu: f64, pm_le_d: f64) -> Result<f64> {
    check_positive(t, "t")?;
    check_positive(mu, "mu")?;
    if !(pm_le_d > 0.0 && pm_le_d <= 1.0) {
        return Err(Error::domain(format!(
            "P(M <= d) must be in (0, 1], got {pm_le_d}"
        )));
    }
    Ok((t / mu * pm_le_d.ln()).exp())
}

/// Critical service value of an overloaded queue: the smallest `c` with
/// `lambda E(B /\ c) >= 1`. Customers shorter than `c*` almost surely leave
/// the queue; `+inf` when the queue is stable (no critical value exists).
pub fn critical_value(dist: &ServiceDistribution, lambda: f64) -> Result<f64> {
    check_positive(lambda, "lambda")?;
    let mean = dist.mean();
    if mean.is_finite() && lambda * mean < 1.0 {
        return Ok(f64::INFINITY);
    }
    // lambda E(B /\ c) is continuous and nondecreasing from 0; bracket and
    // bisect. If the target is only reached in the limit (lambda E B = 1
    // exactly), the bracketing search diverges and we report +inf.
    let f = |c: f64| lambda * dist.truncated_mean(c).expect("c >= 0") - 1.0;
    let mut hi = 1.0_f64;
    let mut tries = 0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 2000 {
            return Ok(f64::INFINITY);
        }
    }
    Ok(numeric::bisect(f, 0.0, hi, 1e-10))
}

/// `P(Poisson(nu) >= k)`, stable for tiny `nu`.
pub fn poisson_tail(nu: f64, k: u32) -> Result<f64> {
    check_nonneg(nu, "nu")?;
    if k == 0 {
        return Ok(1.0);
    }
    if nu == 0.0 {
        return Ok(0.0);
    }
    if k == 1 {
        return Ok(-(-nu).exp_m1());
    }
    // P(N >= k) equals the regularized lower incomplete gamma P(k, nu),
    // whose series evaluation keeps relative precision for small nu.
    Ok(statrs::function::gamma::gamma_lr(k as f64, nu))
}

/// Components of the spliced-tail overflow bound for an unstable queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnstableOverflowBound {
    /// Total probability bound `P(M(t) > x) <= fb_term + poisson_term`.
    pub total: f64,
    /// Interval-maximum bound on the spliced (stable) queue exceeding `x1`.
    pub fb_term: f64,
    /// `P(Poisson(lambda t / (1+a)) >= x2)`: arrivals whose service falls
    /// in the replaced tail.
    pub poisson_term: f64,
    pub x1: u32,
    pub x2: u32,
    /// Load of the spliced queue, `lambda (ln(a+1) + 1)`.
    pub rho_a: f64,
    /// Cycle mean of the spliced queue.
    pub mu_a: f64,
    /// Rate of the tail-arrival Poisson process, `lambda / (1 + a)`.
    pub poisson_rate: f64,
}

/// Upper bound on `P(M(t) > x)` for the unstable queue with service density
/// `1/(1+x)^2`, obtained by splicing the tail at `a`, bounding the spliced
/// queue's interval maximum through its geometric tail bound, and adding the
/// Poisson count of tail arrivals. When `split` is `None` the additive split
/// `x1 + x2 = x` is optimized over `x2` in `0..=min(x, 64)`.
pub fn unstable_overflow_bound(
    t: f64,
    x: u32,
    a: f64,
    lambda: f64,
    split: Option<(u32, u32)>,
) -> Result<UnstableOverflowBound> {
    check_nonneg(t, "t")?;
    check_positive(lambda, "lambda")?;
    let spliced = ServiceDistribution::spliced(a)?;
    let rho_a = lambda * spliced.mean();
    if rho_a >= 1.0 {
        return Err(Error::Unstable {
            rho: rho_a,
            hint: "the spliced queue must be stable; reduce a or lambda",
        });
    }
    let mu_a = cycle_mean(lambda, rho_a)?;
    let poisson_rate = lambda / (1.0 + a);

    let eval = |x1: u32, x2: u32| -> Result<UnstableOverflowBound> {
        let fb_term = if t == 0.0 {
            0.0
        } else {
            // 1 - (1 - rho_a^{x1})^{t/mu}; the inner product is assembled in
            // log domain so x1 in the thousands cannot underflow.
            let ln_b = x1 as f64 * rho_a.ln();
            let ln_one_minus_b = if ln_b <= -37.0 {
                -ln_b.exp()
            } else {
                (-ln_b.exp()).ln_1p()
            };
            let exponent_ln = (t / mu_a).ln() + (-ln_one_minus_b).ln();
            -(-exponent_ln.exp()).exp_m1()
        };
        let poisson_term = poisson_tail(poisson_rate * t, x2)?;
        Ok(UnstableOverflowBound {
            total: fb_term + poisson_term,
            fb_term,
            poisson_term,
            x1,
            x2,
            rho_a,
            mu_a,
            poisson_rate,
        })
    };

    match split {
        Some((x1, x2)) => {
            if x1 + x2 != x {
                return Err(Error::domain(format!(
                    "split {x1} + {x2} does not sum to x = {x}"
                )));
            }
            eval(x1, x2)
        }
        None => {
            let mut best: Option<UnstableOverflowBound> = None;
            for x2 in 0..=x.min(64) {
                let cand = eval(x - x2, x2)?;
                if best.as_ref().is_none_or(|b| cand.total < b.total) {
                    best = Some(cand);
                }
            }
            Ok(best.expect("at least one split evaluated"))
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain(format!("load rho must be in (0, 1), got {rho}")));
    }
    Ok(())
}

fn check_positive(v: f64, what: &str) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::domain(format!("{what} must be > 0, got {v}")));
    }
    Ok(())
}

fn check_nonneg(v: f64, what: &str) -> Result<()> {
    if !(v >= 0.0) {
        return Err(Error::domain(format!("{what} must be >= 0, got {v}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pareto4() -> ServiceDistribution {
        ServiceDistribution::pareto(4.0).unwrap()
    }

    #[test]
    fn mm1_exceedance_reference() {
        assert_eq!(mm1_exceedance(0.5, 0).unwrap(), 1.0);
        assert_relative_eq!(mm1_exceedance(0.5, 1).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        for n in 0..30 {
            for &rho in &[0.1, 0.5, 0.9, 0.99] {
                let v = mm1_exceedance(rho, n).unwrap();
                assert!(v <= rho_bound(rho, n).unwrap() + 1e-15, "rho={rho} n={n}");
            }
        }
        assert!(mm1_exceedance(1.0, 2).is_err());
        assert!(mm1_exceedance(0.0, 2).is_err());
    }

    #[test]
    fn rho_bound_reference() {
        assert_eq!(rho_bound(0.9, 0).unwrap(), 1.0);
        assert_relative_eq!(rho_bound(0.9, 2).unwrap(), 0.81, epsilon = 1e-15);
        // Log-domain evaluation; mpmath reference.
        assert_relative_eq!(
            rho_bound(0.9, 1000).unwrap(),
            1.747_871_251_722_651_6e-46,
            max_relative = 1e-12
        );
    }

    #[test]
    fn r1_exact_reference() {
        let e1 = ServiceDistribution::exponential(1.0).unwrap();
        assert_relative_eq!(r1_exact(&e1, 1.0).unwrap(), 0.5, epsilon = 1e-15);

        // For M/M/1, r_1 from the exact law collapses to lambda/(lambda+mu).
        for &(mu, lambda) in &[(2.0, 1.0), (3.0, 2.0), (1.0, 0.3)] {
            let d = ServiceDistribution::exponential(mu).unwrap();
            let rho = lambda / mu;
            assert_relative_eq!(
                r1_exact(&d, lambda).unwrap(),
                mm1_exceedance(rho, 1).unwrap(),
                max_relative = 1e-13
            );
        }

        // Heavy-tailed case against the quadrature reference (mpmath).
        assert_relative_eq!(
            r1_exact(&pareto4(), 1.8).unwrap(),
            0.421_589_560_917_558_72,
            max_relative = 1e-10
        );
    }

    #[test]
    fn q_table_invariants_and_sharpness() {
        let table = q_table(&pareto4(), 1.8, 100).unwrap();
        assert_relative_eq!(table.rho, 0.9, epsilon = 1e-15);
        assert_eq!(table.rows[0].q, 1.0);
        assert_eq!(table.rows[0].rho_pow, 1.0);
        assert_eq!(table.rows[1].r1_exact, Some(table.rows[1].q));

        let q1 = table.rows[1].q;
        for w in table.rows.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(b.q <= table.rho * a.q + 1e-15, "q_{} vs rho q_{}", b.n, a.n);
            assert!(b.q <= a.q);
            assert!(b.q >= 0.0 && b.q <= 1.0);
            assert!(b.q <= b.rho_pow + 1e-15);
            if b.n >= 1 {
                let coro = q1 * rho_bound(table.rho, b.n - 1).unwrap();
                assert!(b.q <= coro + 1e-15);
            }
        }

        // Sharpness ratio of the two bound families at level 100
        // (mpmath reference 7.48591...).
        let ratio = q1 * rho_bound(0.9, 99).unwrap() / table.rows[100].q;
        assert_relative_eq!(ratio, 7.485_912_414_545_5, max_relative = 1e-7);
        assert!((ratio - 7.5).abs() / 7.5 < 0.10);
    }

    #[test]
    fn q_table_is_exact_for_mm1() {
        // For exponential service the recursion reproduces the exact law.
        let d = ServiceDistribution::exponential(2.0).unwrap();
        let table = q_table(&d, 1.0, 20).unwrap();
        for row in &table.rows {
            let exact = row.exact_mm1.unwrap();
            assert!(row.q >= exact - 1e-13);
            assert_relative_eq!(row.q, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn q_table_rejections() {
        let d = ServiceDistribution::exponential(1.0).unwrap();
        match q_table(&d, 1.5, 5) {
            Err(Error::Unstable { rho, .. }) => assert_relative_eq!(rho, 1.5),
            other => panic!("expected Unstable, got {other:?}"),
        }
        let heavy = ServiceDistribution::pareto(1.5).unwrap();
        assert_eq!(q_table(&heavy, 1.0, 5), Err(Error::InfiniteMean));
    }

    #[test]
    fn transform_slope_is_bounded_by_rho() {
        // phi(x) = 1 - E e^{-lambda x B} has phi(0) = 0 and phi' <= rho.
        let d = pareto4();
        let lambda = 1.8;
        let rho = lambda * d.mean();
        let phi = |x: f64| d.one_minus_laplace(lambda * x).unwrap();
        assert_eq!(phi(0.0), 0.0);
        let h = 1e-6;
        for i in 1..=10 {
            let x = i as f64 / 10.0;
            let slope = (phi(x + h) - phi(x - h)) / (2.0 * h);
            assert!(slope <= rho + 1e-6, "slope {slope} at x={x}");
            assert!(slope >= 0.0);
        }
    }

    #[test]
    fn pareto_theta_reference() {
        let b = pareto_theta(1.8, 4.0, 1.0).unwrap();
        assert_relative_eq!(b.theta, 0.3, epsilon = 1e-15);
        assert!(!b.vacuous);

        let v = pareto_theta(6.0, 4.0, 1.0).unwrap();
        assert_relative_eq!(v.theta, 1.0, epsilon = 1e-15);
        assert!(v.vacuous);

        assert!(pareto_theta(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn pareto_theta_matches_dominating_mean() {
        // theta = lambda * int_0^inf x (1 + c x)^{-alpha} dx; quadrature
        // oracle, integrated far enough out that the polynomial tail
        // remainder is below the comparison tolerance.
        for &(lambda, alpha, c) in &[(1.8, 4.0, 1.0), (0.5, 3.5, 2.0), (2.0, 5.0, 0.7)] {
            let m = numeric::integrate(
                |x: f64| x * (1.0 + c * x).powf(-alpha),
                0.0,
                4e6 / c,
                1e-9,
                1e-18,
            )
            .unwrap();
            assert_relative_eq!(
                pareto_theta(lambda, alpha, c).unwrap().theta,
                lambda * m,
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn cycle_mean_reference() {
        assert_relative_eq!(cycle_mean(1.8, 0.9).unwrap(), 5.555_555_555_555_555, epsilon = 1e-12);
        assert_relative_eq!(cycle_mean(1.0, 1e-12).unwrap(), 1.0, max_relative = 1e-9);
        // Both displayed forms agree: 1/(lambda(1-rho)) = 1/lambda + EB/(1-rho).
        for &(lambda, rho) in &[(1.8, 0.9), (0.01, 0.931), (1.0, 0.5)] {
            let eb = rho / lambda;
            let alt = 1.0 / lambda + eb / (1.0 - rho);
            assert_relative_eq!(cycle_mean(lambda, rho).unwrap(), alt, max_relative = 1e-12);
        }
        let mu = cycle_mean(0.01, 0.931_034_037_197_618_3).unwrap();
        assert_relative_eq!(mu, 1_449.990_632_140_446_5, max_relative = 1e-9);
    }

    #[test]
    fn overflow_quantile_reproduces_heavy_tail_scales() {
        // Pareto service, buffer 1000: beyond 1e46 ms (mpmath 2.2031e46).
        let rep = overflow_quantile(&pareto4(), 1.8, 1000, 0.5, BoundKind::RhoPow).unwrap();
        assert!(rep.t_quantile > 1e46);
        assert_relative_eq!(rep.t_quantile, 2.203_147_208_916e46, max_relative = 1e-9);
        assert_relative_eq!(rep.log10_t, 46.343_0, epsilon = 1e-3);
        assert!(rep.asymptotic);

        // Weibull shape 1/4 at the same load: beyond 1e48.
        let w = ServiceDistribution::weibull(0.25).unwrap();
        let lam = 0.9 / 24.0;
        let rep = overflow_quantile(&w, lam, 1000, 0.5, BoundKind::RhoPow).unwrap();
        assert!(rep.t_quantile > 1e48);
        assert_relative_eq!(rep.t_quantile, 1.057_510_660_279_7e48, max_relative = 1e-9);

        // Weibull shape 1/2: beyond 1e46.
        let w2 = ServiceDistribution::weibull(0.5).unwrap();
        let rep = overflow_quantile(&w2, 0.45, 1000, 0.5, BoundKind::RhoPow).unwrap();
        assert!(rep.t_quantile > 1e46);
    }

    #[test]
    fn overflow_quantile_no_underflow_at_huge_buffers() {
        let rep = overflow_quantile(&pareto4(), 1.8, 10_000, 0.5, BoundKind::RhoPow).unwrap();
        assert!(rep.log10_t.is_finite() && rep.log10_t > 0.0);
        assert!(rep.t_quantile.is_infinite()); // past f64 range, log10 carries it
        assert_relative_eq!(rep.log10_t, 458.160_458_562_693, epsilon = 1e-9);

        let rep_q = overflow_quantile(&pareto4(), 1.8, 10_000, 0.5, BoundKind::QSequence).unwrap();
        assert!(rep_q.log10_t.is_finite());
        // The q bound is sharper, so its quantile is at least as large.
        assert!(rep_q.log10_t >= rep.log10_t);
    }

    #[test]
    fn overflow_quantile_monotone_in_d() {
        let mut last = 0.0;
        for d in [1, 2, 5, 10, 50, 200] {
            let rep = overflow_quantile(&pareto4(), 1.8, d, 0.5, BoundKind::QSequence).unwrap();
            assert!(rep.log10_t > last);
            last = rep.log10_t;
            // Consistency with the defining formula, recomputed from the
            // rounded report field: pm_le_d_lower = 1 - b stores b with
            // absolute error ~eps, so ln(pm) carries relative error eps/b.
            let b = rep.ln_pm_gt_d.exp();
            let tol = 1e-12 + 2.0 * f64::EPSILON / b;
            assert_relative_eq!(
                rep.t_quantile,
                rep.mu * (1.0 - rep.p).ln() / rep.pm_le_d_lower.ln(),
                max_relative = tol
            );
        }
    }

    #[test]
    fn overflow_quantile_rejections() {
        let e = ServiceDistribution::exponential(2.0).unwrap();
        assert!(overflow_quantile(&pareto4(), 1.8, 1000, 0.5, BoundKind::ExactMm1).is_err());
        assert!(overflow_quantile(&e, 1.0, 0, 0.5, BoundKind::RhoPow).is_err());
        assert!(overflow_quantile(&e, 1.0, 5, 0.0, BoundKind::RhoPow).is_err());
        assert!(overflow_quantile(&e, 3.0, 5, 0.5, BoundKind::RhoPow).is_err());
    }

    #[test]
    fn fifo_median_reference() {
        // mpmath: threshold 626.266, t1 = 9.504e7 (< 1e8, vs 2.2e46 for FB).
        let rep = fifo_overflow_median(&pareto4(), 1.8, 1000).unwrap();
        assert_relative_eq!(rep.threshold, 626.266_233_674_210_3, max_relative = 1e-12);
        assert_relative_eq!(rep.t_median, 9.504_049_399_991_687e7, max_relative = 1e-9);
        assert!(rep.t_median < 1e8);
        assert!(!rep.tail_underflowed);

        // Threshold in the all-mass region: t1 = ln 2 / lambda.
        let u = ServiceDistribution::weibull(1.0).unwrap();
        let rep = fifo_overflow_median_with(&u, 2.0, 1, 0.0).unwrap();
        let tail = (-0.5_f64).exp();
        assert_relative_eq!(rep.t_median, std::f64::consts::LN_2 / (2.0 * tail), epsilon = 1e-12);
    }

    #[test]
    fn fifo_median_flags_underflowed_tail() {
        // exp(-threshold) dies past ~745; the estimate must flag it and
        // report +inf rather than divide by zero.
        let u = ServiceDistribution::weibull(1.0).unwrap();
        let rep = fifo_overflow_median(&u, 1.0, 1000).unwrap();
        assert!(rep.tail_underflowed);
        assert!(rep.t_median.is_infinite());
    }

    #[test]
    fn fifo_median_weibull_scales() {
        // Computed values for the Weibull scenarios; these deliberately
        // document this toolkit's own derivation (2.0e21 and 6.9e6), which
        // does not reproduce every reported order of magnitude elsewhere.
        let w2 = ServiceDistribution::weibull(0.5).unwrap();
        let rep = fifo_overflow_median(&w2, 0.45, 1000).unwrap();
        assert_relative_eq!(rep.t_median, 2.003_760_175_973_877_5e21, max_relative = 1e-9);

        let w4 = ServiceDistribution::weibull(0.25).unwrap();
        let rep = fifo_overflow_median(&w4, 0.0375, 1000).unwrap();
        assert_relative_eq!(rep.t_median, 6.948_623_427_642_286e6, max_relative = 1e-9);
    }

    #[test]
    fn max_interval_prob_reference() {
        assert_eq!(max_interval_prob(17.0, 2.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(max_interval_prob(2.0, 2.0, 0.7).unwrap(), 0.7, epsilon = 1e-15);
        // 50 cycles at the exact M/M/1 value for d = 2 (mpmath reference).
        let pm = 1.0 - mm1_exceedance(0.5, 2).unwrap();
        assert_relative_eq!(
            max_interval_prob(100.0, 2.0, pm).unwrap(),
            4.494_284_060_561_676_7e-4,
            max_relative = 1e-12
        );
        assert!(max_interval_prob(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn critical_value_reference() {
        let e1 = ServiceDistribution::exponential(1.0).unwrap();
        let c = critical_value(&e1, 2.0).unwrap();
        assert_relative_eq!(c, std::f64::consts::LN_2, epsilon = 1e-8);
        assert_relative_eq!(2.0 * e1.truncated_mean(c).unwrap(), 1.0, epsilon = 1e-8);

        // Stable queue: no critical value.
        assert!(critical_value(&e1, 0.5).unwrap().is_infinite());

        // Infinite-mean Pareto at lambda = 1: solves ln(1 + c) = 1.
        let p2 = ServiceDistribution::pareto(2.0).unwrap();
        let c = critical_value(&p2, 1.0).unwrap();
        assert_relative_eq!(c, std::f64::consts::E - 1.0, epsilon = 1e-8);
        assert_relative_eq!(p2.truncated_mean(c).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn poisson_tail_reference() {
        assert_eq!(poisson_tail(3.7, 0).unwrap(), 1.0);
        assert_relative_eq!(
            poisson_tail(2.0, 1).unwrap(),
            1.0 - (-2.0_f64).exp(),
            epsilon = 1e-15
        );
        // Series-stable for tiny rates (mpmath reference).
        assert_relative_eq!(
            poisson_tail(1e-4, 1).unwrap(),
            9.999_500_016_666_25e-5,
            max_relative = 1e-12
        );
        assert_eq!(poisson_tail(0.0, 3).unwrap(), 0.0);
        // Cross-check k >= 2 against a direct partial sum.
        let nu = 2.5_f64;
        let pmf: Vec<f64> = (0..6).scan((-nu).exp(), |acc, k| {
            let out = *acc;
            *acc *= nu / (k + 1) as f64;
            Some(out)
        }).collect();
        let direct = 1.0 - pmf.iter().take(4).sum::<f64>();
        assert_relative_eq!(poisson_tail(nu, 4).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn unstable_bound_components() {
        // The documented operating point: a = 1e40, lambda = 0.01. The
        // spliced queue is stable at rho_a = 0.93103 (mu_a = 1450.0);
        // rho_a^999 = 9.92e-32. At t = 1e30 the combined bound is small.
        let b = unstable_overflow_bound(1e30, 1000, 1e40, 0.01, Some((999, 1))).unwrap();
        assert_relative_eq!(b.rho_a, 0.931_034_037_197_618_3, max_relative = 1e-12);
        assert_relative_eq!(b.mu_a, 1_449.990_632_140_446_5, max_relative = 1e-9);
        assert!(b.total < 0.02, "total = {}", b.total);
        assert!(b.fb_term > 0.0 && b.poisson_term > 0.0);

        // At t = 1e40 the interval-maximum term saturates: the geometric
        // bound cannot pin 999 levels for that long a horizon.
        let b40 = unstable_overflow_bound(1e40, 1000, 1e40, 0.01, Some((999, 1))).unwrap();
        assert!(b40.fb_term > 0.99);

        // Far-tail Poisson split is negligible.
        let far = unstable_overflow_bound(1e30, 1000, 1e40, 0.01, Some((936, 64))).unwrap();
        assert!(far.poisson_term < 1e-300);

        // t -> 0 sends the whole bound to 0.
        let zero = unstable_overflow_bound(0.0, 1000, 1e40, 0.01, None).unwrap();
        assert_eq!(zero.total, 0.0);
    }

    #[test]
    fn unstable_bound_split_optimization_and_monotonicity() {
        let free = unstable_overflow_bound(1e30, 1000, 1e40, 0.01, None).unwrap();
        let fixed = unstable_overflow_bound(1e30, 1000, 1e40, 0.01, Some((999, 1))).unwrap();
        assert!(free.total <= fixed.total + 1e-15);
        assert_eq!(free.x1 + free.x2, 1000);

        // Monotone nondecreasing in t, nonincreasing in x.
        let mut last = 0.0;
        for &t in &[1e20, 1e25, 1e30, 1e33] {
            let b = unstable_overflow_bound(t, 1000, 1e40, 0.01, None).unwrap();
            assert!(b.total >= last);
            last = b.total;
        }
        let mut last = f64::INFINITY;
        for &x in &[500, 800, 1000, 1500] {
            let b = unstable_overflow_bound(1e30, x, 1e40, 0.01, None).unwrap();
            assert!(b.total <= last + 1e-15);
            last = b.total;
        }
    }

    #[test]
    fn unstable_bound_rejects_overloaded_splice() {
        match unstable_overflow_bound(1.0, 10, 1e40, 0.02, None) {
            Err(Error::Unstable { rho, .. }) => assert!(rho > 1.0),
            other => panic!("expected Unstable, got {other:?}"),
        }
    }
}
