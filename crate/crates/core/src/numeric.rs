//! Numeric kernels: Gauss-Kronrod quadrature, a driver for Laplace-type
//! integrals of survival functions on `[0, inf)`, bisection root finding,
//! and log-domain helpers used by the bound calculations.

use crate::error::{Error, Result};

/// 15-point Kronrod abscissae on [-1, 1] (positive half, descending).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

/// 7-point Gauss weights (for the error estimate).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod weights.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One Gauss-Kronrod 15/7 panel on `[a, b]`. Returns `(integral, err_est)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    // The center is a node of both rules; the embedded 7-point Gauss rule
    // uses the odd Kronrod abscissae plus the center.
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];

    for (j, &wg) in WG.iter().enumerate().take(3) {
        let idx = 2 * j + 1;
        let x = half * XGK[idx];
        let fsum = f(center - x) + f(center + x);
        gauss += wg * fsum;
        kronrod += WGK[idx] * fsum;
    }
    for j in 0..4 {
        let idx = 2 * j;
        let x = half * XGK[idx];
        kronrod += WGK[idx] * (f(center - x) + f(center + x));
    }

    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (integral, err)
}

/// Adaptive quadrature on a finite interval by recursive panel bisection.
///
/// Stops when the summed error estimate is below
/// `rel_tol * |integral| + abs_floor`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }

    // Work list of (lo, hi, value, err) panels, refined worst-first.
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let max_panels = 4096;

    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() + abs_floor {
            return Ok(total);
        }
        if panels.len() >= max_panels {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}]: err {err:.3e} vs target {:.3e}",
                rel_tol * total.abs() + abs_floor
            )));
        }
        // Split the panel with the largest error estimate.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval no longer splittable at f64 resolution; accept as is.
            let (v, _) = gk15(&f, lo, hi);
            panels.push((lo, hi, v, 0.0));
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Integral of `exp(-s x) * g(x)` over `[0, inf)` for a nonincreasing
/// survival-type integrand `g` with `0 <= g <= 1` and `s > 0`.
///
/// The axis is split into geometrically growing segments starting from
/// `min(1, 1/s)`, each integrated adaptively; `knots` are inserted as extra
/// segment boundaries (density scale changes, splice points). Integration
/// stops once the tail bound `g(x) exp(-s x) / s` is negligible, or at
/// `hard_cap` (the caller then adds a closed-form remainder).
///
/// Returns `(integral_up_to_stop, reached_cap)`.
pub fn survival_laplace<G: Fn(f64) -> f64>(
    g: G,
    s: f64,
    knots: &[f64],
    hard_cap: Option<f64>,
    rel_tol: f64,
) -> Result<(f64, bool)> {
    if !(s > 0.0) {
        return Err(Error::Quadrature(format!("survival_laplace needs s > 0, got {s}")));
    }
    let cap = hard_cap.unwrap_or(f64::INFINITY);
    let integrand = |x: f64| (-s * x).exp() * g(x);

    let mut total = 0.0_f64;
    let mut lo = 0.0_f64;
    let mut width = (1.0_f64.min(1.0 / s)).max(1e-300);
    let mut segments = 0u32;

    loop {
        let mut hi = (lo + width).min(cap);
        // Honor interior knots as segment boundaries.
        for &k in knots {
            if k > lo && k < hi {
                hi = k;
            }
        }
        total += integrate(&integrand, lo, hi, rel_tol, 0.0)?;
        segments += 1;

        if hi >= cap {
            return Ok((total, true));
        }
        let tail_bound = g(hi) * (-s * hi).exp() / s;
        if tail_bound <= rel_tol * total.abs() && segments >= 4 {
            return Ok((total, false));
        }
        if segments > 3000 {
            return Err(Error::Quadrature(format!(
                "survival_laplace: tail did not become negligible by x = {hi:.3e} (s = {s:.3e})"
            )));
        }
        width = (hi - lo).max(width) * 2.0;
        lo = hi;
    }
}

/// Bisection for the smallest root of a nondecreasing function.
///
/// Requires `f(lo) <= 0 <= f(hi)`; returns the abscissa to absolute
/// tolerance `tol_x`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol_x: f64) -> f64 {
    debug_assert!(lo <= hi);
    for _ in 0..200 {
        if hi - lo <= tol_x {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ln(-ln(1 - e^ln_b))` for `ln_b < 0`: the log of `-ln(1 - b)` where
/// `b = e^ln_b` is an exceedance bound that may be far below the smallest
/// positive double.
///
/// For `ln_b <= -40`, `-ln(1-b) = b (1 + b/2 + ...)` and the correction is
/// below 1e-17 relative, so `ln_b` itself is returned.
pub fn ln_neg_ln_one_minus_exp(ln_b: f64) -> Result<f64> {
    if ln_b >= 0.0 {
        return Err(Error::domain(format!(
            "bound is vacuous: ln(bound) = {ln_b} >= 0"
        )));
    }
    if ln_b <= -40.0 {
        return Ok(ln_b);
    }
    let b = ln_b.exp();
    let v = -(-b).ln_1p(); // -ln(1 - b) > 0
    Ok(v.ln())
}

/// Wilson score interval for a binomial proportion.
///
/// Returns `(low, high)` for `successes` out of `n` at normal quantile `z`.
/// The interval always contains the point estimate (at the extremes the
/// algebra gives exactly `p`, which rounding must not spoil).
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Upper-tail probability of a chi-square distribution with `dof` degrees
/// of freedom evaluated at `stat`.
pub fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(dof / 2.0, stat / 2.0)
}
