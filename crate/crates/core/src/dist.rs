//! Service-time distribution family.
//!
//! Five parametric laws, all with log-convex densities on their admissible
//! parameter ranges: exponential, Pareto (shifted, support `[0, inf)`),
//! Weibull with shape below one, gamma with shape at most one (the
//! decreasing-likelihood-ratio range), and a spliced law that follows the
//! heavy Pareto density `1/(1+x)^2` up to a splice point and continues with
//! a matched exponential tail so that the mean is finite.
//!
//! Everything is evaluated through closed forms where they exist; the
//! remaining Laplace transforms go through adaptive Gauss-Kronrod
//! quadrature of the survival function, which also keeps `1 - E e^{-sB}`
//! free of cancellation for small `s`.

use crate::error::{Error, Result};
use crate::numeric;
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};
use std::fmt;
use std::str::FromStr;

/// Relative tolerance for the quadrature-backed functionals.
const QUAD_REL_TOL: f64 = 1e-12;

/// Absolute tolerance of the log-convexity midpoint test.
const LOG_CONVEX_TOL: f64 = 1e-9;

/// A parametric service-time law.
///
/// Variant fields are public so that tests can build deliberately
/// out-of-range instances (e.g. a shape-2 gamma, whose density is
/// log-concave); the checked constructors are the supported entry points
/// and reject those.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceDistribution {
    /// Rate `mu > 0`; density `mu e^{-mu x}`.
    Exponential { rate: f64 },
    /// Tail index `alpha > 1`; density `(alpha-1)(1+x)^{-alpha}`,
    /// distribution function `1 - (1+x)^{-(alpha-1)}`. The mean is infinite
    /// for `alpha <= 2`.
    Pareto { alpha: f64 },
    /// Shape `beta` in `(0, 1]`; tail `exp(-x^beta)`.
    Weibull { beta: f64 },
    /// Rate `alpha > 0` and shape `k` in `(0, 1]`; density
    /// `alpha^k x^{k-1} e^{-alpha x} / Gamma(k)`. Shapes above one are
    /// rejected: that density is log-concave, not log-convex.
    GammaDlr { rate: f64, shape: f64 },
    /// Splice point `a > 1`; density `1/(1+x)^2` for `x <= a` continued by
    /// the matched exponential `e^{-(x-a)/(a+1)} / (a+1)^2`. Continuous,
    /// log-convex, mean `ln(a+1) + 1`.
    SplicedParetoExp { splice: f64 },
}

use ServiceDistribution::*;

/// Outcome of the discrete log-convexity check.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConvexityReport {
    /// True when no midpoint triple violated convexity beyond tolerance.
    pub pass: bool,
    /// Worst signed violation `2 ln f(m) - ln f(x_i) - ln f(x_j)` observed;
    /// positive values are violations, the test passes while the worst stays
    /// at or below the tolerance.
    pub worst_violation: f64,
    /// Number of triples actually checked.
    pub checked: usize,
    /// Triples skipped because the log-density was not finite there.
    pub non_checkable: usize,
}

impl ServiceDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::domain(format!("exponential rate must be > 0, got {rate}")));
        }
        Ok(Exponential { rate })
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::domain(format!("pareto alpha must be > 1, got {alpha}")));
        }
        Ok(Pareto { alpha })
    }

    pub fn weibull(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain(format!("weibull beta must be in (0, 1], got {beta}")));
        }
        Ok(Weibull { beta })
    }

    pub fn gamma_dlr(rate: f64, shape: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::domain(format!("gamma rate must be > 0, got {rate}")));
        }
        if !(shape > 0.0 && shape <= 1.0) {
            // Shapes above one give a log-concave density; refuse rather
            // than silently produce a law outside the bounds' hypotheses.
            return Err(Error::domain(format!(
                "gamma shape must be in (0, 1] for a log-convex density, got {shape}"
            )));
        }
        Ok(GammaDlr { rate, shape })
    }

    /// The spliced Pareto/exponential law with splice point `a > 1`.
    pub fn spliced(a: f64) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::domain(format!("splice point must be > 1, got {a}")));
        }
        Ok(SplicedParetoExp { splice: a })
    }

    /// Density at `x >= 0`. May be `+inf` at `x = 0` for the Weibull and
    /// gamma laws with shape below one.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_nonneg(x, "pdf argument")?;
        Ok(match *self {
            Exponential { rate } => rate * (-rate * x).exp(),
            Pareto { alpha } => (alpha - 1.0) * (-alpha * x.ln_1p()).exp(),
            Weibull { beta } => {
                if x == 0.0 {
                    if beta < 1.0 {
                        f64::INFINITY
                    } else {
                        1.0
                    }
                } else {
                    beta * x.powf(beta - 1.0) * (-x.powf(beta)).exp()
                }
            }
            GammaDlr { rate, shape } => {
                if x == 0.0 {
                    if shape < 1.0 {
                        f64::INFINITY
                    } else {
                        rate
                    }
                } else {
                    self.ln_pdf(x)?.exp()
                }
            }
            SplicedParetoExp { splice } => {
                if x <= splice {
                    (-2.0 * x.ln_1p()).exp()
                } else {
                    (-2.0 * splice.ln_1p() - (x - splice) / (splice + 1.0)).exp()
                }
            }
        })
    }

    /// Natural log of the density, evaluated without intermediate
    /// under/overflow. `-inf` where the density vanishes.
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        check_nonneg(x, "ln_pdf argument")?;
        Ok(match *self {
            Exponential { rate } => rate.ln() - rate * x,
            Pareto { alpha } => (alpha - 1.0).ln() - alpha * x.ln_1p(),
            Weibull { beta } => beta.ln() + (beta - 1.0) * x.ln() - x.powf(beta),
            GammaDlr { rate, shape } => {
                shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)
            }
            SplicedParetoExp { splice } => {
                if x <= splice {
                    -2.0 * x.ln_1p()
                } else {
                    -2.0 * splice.ln_1p() - (x - splice) / (splice + 1.0)
                }
            }
        })
    }

    /// Distribution function at `x >= 0`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_nonneg(x, "cdf argument")?;
        Ok(match *self {
            Exponential { rate } => -(-rate * x).exp_m1(),
            Pareto { alpha } => -(-(alpha - 1.0) * x.ln_1p()).exp_m1(),
            Weibull { beta } => -(-x.powf(beta)).exp_m1(),
            GammaDlr { rate, shape } => {
                if x == 0.0 {
                    0.0
                } else {
                    gamma_lr(shape, rate * x)
                }
            }
            SplicedParetoExp { splice } => {
                if x <= splice {
                    x / (1.0 + x)
                } else {
                    1.0 - (-(x - splice) / (splice + 1.0)).exp() / (splice + 1.0)
                }
            }
        })
    }

    /// Survival function `1 - cdf(x)`, computed directly so far tails keep
    /// full relative precision.
    pub fn survival(&self, x: f64) -> Result<f64> {
        check_nonneg(x, "survival argument")?;
        Ok(match *self {
            Exponential { rate } => (-rate * x).exp(),
            Pareto { alpha } => (-(alpha - 1.0) * x.ln_1p()).exp(),
            Weibull { beta } => (-x.powf(beta)).exp(),
            GammaDlr { rate, shape } => {
                if x == 0.0 {
                    1.0
                } else {
                    gamma_ur(shape, rate * x)
                }
            }
            SplicedParetoExp { splice } => {
                if x <= splice {
                    1.0 / (1.0 + x)
                } else {
                    (-(x - splice) / (splice + 1.0)).exp() / (splice + 1.0)
                }
            }
        })
    }

    /// Generalized inverse `inf { x : cdf(x) >= u }` for `u` in `[0, 1)`.
    ///
    /// Closed form everywhere except the gamma law, which is bracketed and
    /// bisected to absolute tolerance 1e-12.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::domain(format!("quantile argument must be in [0, 1), got {u}")));
        }
        Ok(match *self {
            Exponential { rate } => -(-u).ln_1p() / rate,
            // exp_m1/ln_1p route keeps full precision for small u; for
            // alpha = 2 the divisor is exactly 1.0, which makes this
            // bit-identical to the spliced law's head below its splice
            // level (the coupled simulator relies on that).
            Pareto { alpha } => (-(-u).ln_1p() / (alpha - 1.0)).exp_m1(),
            Weibull { beta } => (-(-u).ln_1p()).powf(1.0 / beta),
            GammaDlr { rate, shape } => {
                if u == 0.0 {
                    return Ok(0.0);
                }
                let mut hi = (shape / rate).max(1.0 / rate);
                while gamma_lr(shape, rate * hi) < u {
                    hi *= 2.0;
                }
                let mut x = numeric::bisect(|x| gamma_lr(shape, rate * x) - u, 0.0, hi, 1e-12);
                // Newton polish: the absolute-x tolerance alone leaves a
                // visible cdf residual where the density is steep (small
                // shapes near zero).
                for _ in 0..8 {
                    let f = gamma_lr(shape, rate * x) - u;
                    let slope = self.ln_pdf(x)?.exp();
                    if !(slope.is_finite() && slope > 0.0) {
                        break;
                    }
                    let next = x - f / slope;
                    if !(next > 0.0 && next.is_finite()) {
                        break;
                    }
                    let step = (next - x).abs();
                    x = next;
                    if step <= 1e-15 * x {
                        break;
                    }
                }
                x
            }
            SplicedParetoExp { splice } => {
                let head_level = splice / (splice + 1.0); // cdf at the splice point
                if u <= head_level {
                    (-(-u).ln_1p()).exp_m1()
                } else {
                    splice - (splice + 1.0) * ((splice + 1.0).ln() + (-u).ln_1p())
                }
            }
        })
    }

    /// Inverse-transform draw from a uniform `u` in `[0, 1)`.
    ///
    /// Alias of [`quantile`](Self::quantile): the simulator samples only
    /// through this path, so two queues fed the same uniforms receive
    /// coupled service times.
    pub fn sample(&self, u: f64) -> Result<f64> {
        self.quantile(u)
    }

    /// Mean service time `E B`; `+inf` where the mean diverges
    /// (Pareto with `alpha <= 2`).
    pub fn mean(&self) -> f64 {
        match *self {
            Exponential { rate } => 1.0 / rate,
            Pareto { alpha } => {
                if alpha > 2.0 {
                    1.0 / (alpha - 2.0)
                } else {
                    f64::INFINITY
                }
            }
            Weibull { beta } => gamma(1.0 + 1.0 / beta),
            GammaDlr { rate, shape } => shape / rate,
            SplicedParetoExp { splice } => splice.ln_1p() + 1.0,
        }
    }

    /// Truncated mean `E(B /\ c) = int_0^c (1 - cdf(x)) dx`, nondecreasing
    /// and concave in `c`.
    pub fn truncated_mean(&self, c: f64) -> Result<f64> {
        check_nonneg(c, "truncation point")?;
        Ok(match *self {
            Exponential { rate } => -(-rate * c).exp_m1() / rate,
            Pareto { alpha } => {
                // (1 - (1+c)^{-(alpha-2)}) / (alpha-2), continuous at alpha = 2
                // where it degenerates to ln(1+c).
                let t = (alpha - 2.0) * c.ln_1p();
                if t.abs() < 1e-12 {
                    c.ln_1p()
                } else {
                    -(-t).exp_m1() / (alpha - 2.0)
                }
            }
            Weibull { beta } => {
                // int_0^c e^{-x^beta} dx = gamma_inc(1/beta, c^beta) / beta
                if c == 0.0 {
                    0.0
                } else {
                    let inv = 1.0 / beta;
                    gamma_lr(inv, c.powf(beta)) * gamma(inv) * inv
                }
            }
            GammaDlr { rate, shape } => {
                if c == 0.0 {
                    0.0
                } else {
                    let z = rate * c;
                    shape / rate * gamma_lr(shape + 1.0, z) + c * gamma_ur(shape, z)
                }
            }
            SplicedParetoExp { splice } => {
                if c <= splice {
                    c.ln_1p()
                } else {
                    splice.ln_1p() - ((splice - c) / (splice + 1.0)).exp_m1()
                }
            }
        })
    }

    /// Laplace transform `E e^{-sB}` for `s >= 0`.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        Ok(1.0 - self.one_minus_laplace(s)?)
    }

    /// `1 - E e^{-sB}`, evaluated without cancellation: for the quadrature
    /// kinds it is `s * int_0^inf e^{-sx}(1 - F(x)) dx`, so small `s` keeps
    /// full relative precision. This is the quantity the bound recursion
    /// consumes.
    pub fn one_minus_laplace(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(Error::domain(format!("transform argument must be >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        match *self {
            Exponential { rate } => Ok(s / (rate + s)),
            GammaDlr { rate, shape } => Ok(-(-shape * (s / rate).ln_1p()).exp_m1()),
            Pareto { .. } | Weibull { .. } => {
                let (j, _) = numeric::survival_laplace(
                    |x| self.survival(x).expect("x >= 0"),
                    s,
                    &[1.0],
                    None,
                    QUAD_REL_TOL,
                )?;
                Ok(s * j)
            }
            SplicedParetoExp { splice } => {
                let (head, reached_splice) = numeric::survival_laplace(
                    |x| self.survival(x).expect("x >= 0"),
                    s,
                    &[1.0],
                    Some(splice),
                    QUAD_REL_TOL,
                )?;
                let j = if reached_splice {
                    // Exact exponential-tail remainder beyond the splice:
                    // int_a^inf e^{-sx} e^{-(x-a)/(a+1)}/(a+1) dx.
                    head + (-s * splice).exp() / (s * (splice + 1.0) + 1.0)
                } else {
                    head
                };
                Ok(s * j)
            }
        }
    }

    /// Discrete midpoint log-convexity check on a strictly increasing grid
    /// in the support interior.
    ///
    /// For every grid pair `(x_i, x_{i+2})` the midpoint
    /// `m = (x_i + x_{i+2})/2` must satisfy
    /// `2 ln f(m) <= ln f(x_i) + ln f(x_{i+2}) + tol` with `tol = 1e-9`.
    /// Points where the log-density is not finite are reported as
    /// non-checkable rather than as failures.
    pub fn check_log_convex(&self, grid: &[f64]) -> Result<LogConvexityReport> {
        if grid.len() < 3 {
            return Err(Error::domain("log-convexity grid needs at least 3 points"));
        }
        for w in grid.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::domain(
                    "log-convexity grid must be strictly increasing and positive",
                ));
            }
        }

        let mut worst = f64::NEG_INFINITY;
        let mut checked = 0usize;
        let mut non_checkable = 0usize;

        for w in grid.windows(3) {
            let (lo, hi) = (w[0], w[2]);
            let mid = 0.5 * (lo + hi);
            let (f_lo, f_mid, f_hi) = (self.ln_pdf(lo)?, self.ln_pdf(mid)?, self.ln_pdf(hi)?);
            if !(f_lo.is_finite() && f_mid.is_finite() && f_hi.is_finite()) {
                non_checkable += 1;
                continue;
            }
            let violation = 2.0 * f_mid - f_lo - f_hi;
            worst = worst.max(violation);
            checked += 1;
        }

        if checked == 0 {
            return Err(Error::domain("no checkable triples in the grid"));
        }
        Ok(LogConvexityReport {
            pass: worst <= LOG_CONVEX_TOL,
            worst_violation: worst,
            checked,
            non_checkable,
        })
    }
}

fn check_nonneg(x: f64, what: &str) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("{what} must be >= 0, got {x}")));
    }
    Ok(())
}

/// Config/CLI syntax: `exp:rate=2`, `pareto:alpha=4`, `weibull:beta=0.25`,
/// `gamma:rate=1,shape=0.5`, `spliced:a=1e40`.
impl FromStr for ServiceDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("distribution spec `{s}` is missing `:`")))?;
        let mut params = std::collections::BTreeMap::new();
        for piece in rest.split(',') {
            let (k, v) = piece
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad parameter `{piece}` in `{s}`")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad number `{v}` in `{s}`")))?;
            params.insert(k.trim().to_string(), value);
        }
        let get = |key: &str| {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::Config(format!("`{s}` is missing parameter `{key}`")))
        };
        let expect_keys = |keys: &[&str]| {
            for k in params.keys() {
                if !keys.contains(&k.as_str()) {
                    return Err(Error::Config(format!("unknown parameter `{k}` in `{s}`")));
                }
            }
            Ok(())
        };
        match kind.trim() {
            "exp" => {
                expect_keys(&["rate"])?;
                ServiceDistribution::exponential(get("rate")?)
            }
            "pareto" => {
                expect_keys(&["alpha"])?;
                ServiceDistribution::pareto(get("alpha")?)
            }
            "weibull" => {
                expect_keys(&["beta"])?;
                ServiceDistribution::weibull(get("beta")?)
            }
            "gamma" => {
                expect_keys(&["rate", "shape"])?;
                ServiceDistribution::gamma_dlr(get("rate")?, get("shape")?)
            }
            "spliced" => {
                expect_keys(&["a"])?;
                ServiceDistribution::spliced(get("a")?)
            }
            other => Err(Error::Config(format!("unknown distribution kind `{other}`"))),
        }
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Exponential { rate } => write!(f, "exp:rate={rate}"),
            Pareto { alpha } => write!(f, "pareto:alpha={alpha}"),
            Weibull { beta } => write!(f, "weibull:beta={beta}"),
            GammaDlr { rate, shape } => write!(f, "gamma:rate={rate},shape={shape}"),
            SplicedParetoExp { splice } => write!(f, "spliced:a={splice}"),
        }
    }
}
