//! Splits an income sample into an exponential bulk plus a power-law tail.
//!
//! The bulk temperature comes from a truncated-exponential fit below the
//! 90th percentile, the tail exponent from a Hill fit with the cutoff chosen
//! to minimize the tail KS distance, and the class boundary from the
//! crossing of the two fitted cumulative laws. Income and population shares
//! above the boundary are read off the data itself, not the fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{fit_pareto_hill, ks_statistic_fn, mean, regression_slope, LorenzCurve};

/// Minimum sample count: the tail window is a few percent of the data and
/// the Hill fit needs dozens of points to mean anything.
pub const MIN_SAMPLES: usize = 1_000;

/// Minimum number of rows in a cumulative table.
pub const MIN_BINNED_ROWS: usize = 20;

/// Tail cutoff candidates: quantiles from 95% to 99%.
const TAIL_QUANTILES: [f64; 9] = [0.95, 0.955, 0.96, 0.965, 0.97, 0.975, 0.98, 0.985, 0.99];

/// Result of a two-class decomposition. When no credible tail exists the
/// report degenerates to a single class: `f = 0` and no boundary.
#[derive(Clone, Debug, Serialize)]
pub struct TwoClassReport {
    /// Bulk temperature of the exponential majority.
    pub t_r: f64,
    /// Cumulative power-law exponent of the tail, absent for a single class.
    pub alpha: Option<f64>,
    /// Boundary income where the fitted bulk and tail cumulative laws cross.
    pub r_star: Option<f64>,
    /// Share of total income received above the boundary.
    pub f: f64,
    /// Share of the population above the boundary.
    pub upper_fraction: f64,
    /// Gini coefficient implied by an exponential bulk plus a tail owning
    /// the fraction `f`: (1 + f) / 2.
    pub gini_two_class: f64,
    /// Lower bound on `f`: everyone above the boundary earns at least
    /// `r_star`, so `f >= upper_fraction * r_star / mean`.
    pub f_floor: f64,
    /// KS distance of the bulk window against the fitted exponential,
    /// conditioned on the window.
    pub ks_bulk: f64,
    /// KS distance of the tail against the fitted power law, absent for a
    /// single class.
    pub ks_tail: Option<f64>,
}

impl TwoClassReport {
    fn single_class(t_r: f64, ks_bulk: f64) -> Self {
        TwoClassReport {
            t_r,
            alpha: None,
            r_star: None,
            f: 0.0,
            upper_fraction: 0.0,
            gini_two_class: 0.5,
            f_floor: 0.0,
            ks_bulk,
            ks_tail: None,
        }
    }
}

/// Linear-interpolation quantile of an ascending-sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = pos - i as f64;
    sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
}

/// Maximum-likelihood temperature of an exponential observed only on
/// `[0, cutoff]`. The truncated mean `T - cutoff/(e^{cutoff/T} - 1)` rises
/// monotonically from 0 to `cutoff/2` as `T` grows, so the estimate is the
/// unique root; a window mean at or beyond `cutoff/2` has no exponential
/// explanation and falls back to the plain mean.
fn fit_truncated_exponential(window_mean: f64, cutoff: f64) -> f64 {
    if !(window_mean > 0.0) || window_mean >= 0.499_999 * cutoff {
        return window_mean;
    }
    let truncated_mean = |t: f64| t - cutoff / (cutoff / t).exp_m1();
    let mut lo = window_mean;
    let mut hi = window_mean;
    while truncated_mean(hi) < window_mean {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_mean(mid) < window_mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Find where the fitted bulk and tail cumulative laws cross, searching
/// between the bulk temperature and the largest observation. Returns `None`
/// unless the bulk law dominates at the left end and the tail law at the
/// right end; a pure exponential fails that ordering and stays single-class.
fn crossing(
    log_bulk: impl Fn(f64) -> f64,
    log_tail: impl Fn(f64) -> f64,
    lo0: f64,
    hi0: f64,
) -> Option<f64> {
    let h = |r: f64| log_bulk(r) - log_tail(r);
    let (mut lo, mut hi) = (lo0, hi0);
    if !(lo > 0.0 && hi > lo) || !(h(lo) > 0.0) || !(h(hi) < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Decompose an income sample into an exponential bulk and a Pareto tail.
///
/// The boundary `r_star` solves `exp(-r/T) = s * (xmin/r)^alpha`, where `s`
/// is the observed share above the tail cutoff. Both class shares (`f`,
/// `upper_fraction`) are empirical sums above the boundary. Samples must be
/// non-negative and finite.
pub fn two_class_decompose(samples: &[f64]) -> Result<TwoClassReport> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InvalidSize {
            min: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if samples.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::param("samples", "incomes must be finite and >= 0"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();

    let cutoff = quantile_sorted(&sorted, 0.90);
    let bulk = &sorted[..sorted.partition_point(|&x| x <= cutoff)];
    if bulk.is_empty() || !(cutoff > 0.0) {
        return Err(Error::param("samples", "bulk window is degenerate"));
    }
    let t_r = fit_truncated_exponential(mean(bulk), cutoff);
    let window_cdf = |x: f64| (-x / t_r).exp_m1() / (-cutoff / t_r).exp_m1();
    let ks_bulk = ks_statistic_fn(bulk, window_cdf)?;

    // Tail cutoff: the candidate quantile whose Hill fit tracks its own
    // tail best in KS distance.
    let mut best: Option<(f64, f64, f64, usize)> = None;
    for q in TAIL_QUANTILES {
        let xmin = quantile_sorted(&sorted, q);
        let Ok(alpha) = fit_pareto_hill(&sorted, xmin) else {
            continue;
        };
        let tail = &sorted[sorted.partition_point(|&x| x <= xmin)..];
        let ks = ks_statistic_fn(tail, |x| 1.0 - (xmin / x).powf(alpha))?;
        if best.map_or(true, |(b, ..)| ks < b) {
            best = Some((ks, alpha, xmin, tail.len()));
        }
    }
    let Some((ks_tail, alpha, xmin, n_tail)) = best else {
        return Ok(TwoClassReport::single_class(t_r, ks_bulk));
    };

    let tail_share = n_tail as f64 / n as f64;
    let log_bulk = |r: f64| -r / t_r;
    let log_tail = |r: f64| tail_share.ln() + alpha * (xmin.ln() - r.ln());
    let Some(r_star) = crossing(log_bulk, log_tail, t_r, sorted[n - 1]) else {
        return Ok(TwoClassReport::single_class(t_r, ks_bulk));
    };

    let above = &sorted[sorted.partition_point(|&x| x <= r_star)..];
    let total: f64 = sorted.iter().sum();
    let upper_sum: f64 = above.iter().sum();
    let f = upper_sum / total;
    let upper_fraction = above.len() as f64 / n as f64;
    Ok(TwoClassReport {
        t_r,
        alpha: Some(alpha),
        r_star: Some(r_star),
        f,
        upper_fraction,
        gini_two_class: 0.5 * (1.0 + f),
        f_floor: upper_fraction * r_star / (total / n as f64),
        ks_bulk,
        ks_tail: Some(ks_tail),
    })
}

/// Decompose a cumulative table of `(lower bound, count at or above)` rows.
///
/// Rows are read as a CCDF sampled at the bounds, log-linearly interpolated
/// between them and extended past the last bound by the fitted power law.
/// The bulk temperature comes from bracket densities (differences of
/// adjacent counts), which cancel any constant tail mass sitting under the
/// bulk rows; the tail exponent from a log-log regression anchored at the
/// candidate row that minimizes the conditional-CCDF gap.
pub fn two_class_decompose_binned(rows: &[(f64, f64)]) -> Result<TwoClassReport> {
    let ccdf = normalized_ccdf(rows)?;

    // Bulk: log bracket densities against bracket midpoints, over rows
    // covering the lower 90% of the population.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in ccdf.windows(2) {
        let (r0, c0) = w[0];
        let (r1, c1) = w[1];
        if c0 < 0.10 {
            break;
        }
        if c1 < c0 {
            xs.push(0.5 * (r0 + r1));
            ys.push(((c0 - c1) / (r1 - r0)).ln());
        }
    }
    let slope = regression_slope(&xs, &ys)?;
    if !(slope < 0.0) {
        return Err(Error::Malformed("bulk rows are not exponential-like".into()));
    }
    let t_r = -1.0 / slope;
    // Anchor the bulk cumulative law at the bulk rows' mean log offset.
    let bulk_rows: Vec<&(f64, f64)> = ccdf.iter().filter(|(_, c)| *c >= 0.10).collect();
    let log_amp = bulk_rows
        .iter()
        .map(|(r, c)| c.ln() + r / t_r)
        .sum::<f64>()
        / bulk_rows.len() as f64;
    let ks_bulk = bulk_rows
        .iter()
        .map(|(r, c)| (c - (log_amp - r / t_r).exp()).abs())
        .fold(0.0, f64::max);

    // Tail: anchor candidates in the top 1-5%, exponent by log-log
    // regression over the rows from the anchor outward.
    let mut best: Option<(f64, f64, usize)> = None;
    for (j, &(r_j, c_j)) in ccdf.iter().enumerate() {
        if !(0.01..=0.05).contains(&c_j) || !(r_j > 0.0) || j + 2 > ccdf.len() {
            continue;
        }
        let xs: Vec<f64> = ccdf[j..].iter().map(|(r, _)| r.ln()).collect();
        let ys: Vec<f64> = ccdf[j..].iter().map(|(_, c)| c.ln()).collect();
        let Ok(slope) = regression_slope(&xs, &ys) else {
            continue;
        };
        if !(slope < 0.0) {
            continue;
        }
        let alpha = -slope;
        let gap = ccdf[j..]
            .iter()
            .map(|(r, c)| (c / c_j - (r_j / r).powf(alpha)).abs())
            .fold(0.0, f64::max);
        if best.map_or(true, |(b, ..)| gap < b) {
            best = Some((gap, alpha, j));
        }
    }
    let Some((ks_tail, alpha, j)) = best else {
        return Ok(TwoClassReport::single_class(t_r, ks_bulk));
    };
    // A cumulative exponent at or below 1 has a divergent implied mean, so
    // no finite income share can be attributed to such a tail.
    if alpha <= 1.0 {
        return Ok(TwoClassReport::single_class(t_r, ks_bulk));
    }
    let (r_anchor, c_anchor) = ccdf[j];

    let log_bulk = |r: f64| log_amp - r / t_r;
    let log_tail = |r: f64| c_anchor.ln() + alpha * (r_anchor.ln() - r.ln());
    let r_max = ccdf[ccdf.len() - 1].0;
    let Some(r_star) = crossing(log_bulk, log_tail, t_r, r_max) else {
        return Ok(TwoClassReport::single_class(t_r, ks_bulk));
    };

    let upper_fraction = interp_ccdf(&ccdf, r_star);
    let mean_income = integral_ccdf(&ccdf, 0.0, alpha);
    let f = (r_star * upper_fraction + integral_ccdf(&ccdf, r_star, alpha)) / mean_income;
    Ok(TwoClassReport {
        t_r,
        alpha: Some(alpha),
        r_star: Some(r_star),
        f,
        upper_fraction,
        gini_two_class: 0.5 * (1.0 + f),
        f_floor: upper_fraction * r_star / mean_income,
        ks_bulk,
        ks_tail: Some(ks_tail),
    })
}

/// Validate a cumulative table and normalize it into a CCDF, dropping the
/// empty far tail.
fn normalized_ccdf(rows: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if rows.len() < MIN_BINNED_ROWS {
        return Err(Error::InvalidSize {
            min: MIN_BINNED_ROWS,
            got: rows.len(),
        });
    }
    for w in rows.windows(2) {
        if !(w[1].0 > w[0].0) || w[1].1 > w[0].1 {
            return Err(Error::Malformed(
                "bounds must increase and counts must not".into(),
            ));
        }
    }
    let total = rows[0].1;
    if !(total > 0.0)
        || rows
            .iter()
            .any(|r| !r.0.is_finite() || !r.1.is_finite() || r.0 < 0.0 || r.1 < 0.0)
    {
        return Err(Error::Malformed("counts/bounds out of range".into()));
    }
    let ccdf: Vec<(f64, f64)> = rows
        .iter()
        .take_while(|r| r.1 > 0.0)
        .map(|&(r, c)| (r, c / total))
        .collect();
    if ccdf.len() < 4 {
        return Err(Error::Malformed("too few occupied rows".into()));
    }
    Ok(ccdf)
}

/// Lorenz curve implied by a cumulative table: for each bound, the share of
/// the population below it against the share of total income below it. The
/// open top bracket is extended by a power law fitted to the outermost
/// rows; when no convergent exponent exists (`alpha <= 1`) the table is
/// treated as ending at its last bound.
pub fn lorenz_from_binned(rows: &[(f64, f64)]) -> Result<LorenzCurve> {
    let ccdf = normalized_ccdf(rows)?;
    let alpha = extension_exponent(&ccdf).unwrap_or(1.0);
    let e_total = integral_ccdf(&ccdf, 0.0, alpha);
    if !(e_total > 0.0) {
        return Err(Error::ZeroTotal);
    }
    let mut points = vec![(0.0, 0.0)];
    for &(r, c) in &ccdf {
        let above = r * c + integral_ccdf(&ccdf, r, alpha);
        let x = 1.0 - c;
        if x > points.last().unwrap().0 {
            points.push((x, 1.0 - above / e_total));
        }
    }
    points.push((1.0, 1.0));
    Ok(LorenzCurve { points })
}

/// Cumulative exponent for extending the open top bracket: a log-log
/// regression over the outermost rows (those holding at most 5% of the
/// population, or the last three when the table is coarse). Only exponents
/// above 1 yield a finite extension.
fn extension_exponent(ccdf: &[(f64, f64)]) -> Option<f64> {
    let mut start = ccdf.partition_point(|&(_, c)| c > 0.05);
    if ccdf.len() - start < 3 {
        start = ccdf.len().saturating_sub(3);
    }
    let window = &ccdf[start..];
    if window.len() < 2 || window.iter().any(|&(r, _)| !(r > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = window.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = window.iter().map(|(_, c)| c.ln()).collect();
    let slope = regression_slope(&xs, &ys).ok()?;
    (slope < -1.0).then_some(-slope)
}

/// CCDF at `r` from the table points, log-linear between bounds. Below the
/// first bound everyone is counted; past the last bound callers use the
/// fitted tail law instead.
fn interp_ccdf(ccdf: &[(f64, f64)], r: f64) -> f64 {
    if r <= ccdf[0].0 {
        return 1.0;
    }
    for w in ccdf.windows(2) {
        let (r0, c0) = w[0];
        let (r1, c1) = w[1];
        if r <= r1 {
            let t = (r - r0) / (r1 - r0);
            return (c0.ln() * (1.0 - t) + c1.ln() * t).exp();
        }
    }
    ccdf[ccdf.len() - 1].1
}

/// Integral of the interpolated CCDF from `from` to infinity; the stretch
/// past the last bound uses the fitted power law (finite for `alpha > 1`).
/// For non-negative incomes `E[X]` is the integral from 0 and
/// `E[X 1{X > t}] = t*C(t) +` the integral from `t`.
fn integral_ccdf(ccdf: &[(f64, f64)], from: f64, alpha: f64) -> f64 {
    let mut acc = 0.0;
    // The whole population sits at or above the first bound.
    if from < ccdf[0].0 {
        acc += ccdf[0].0 - from;
    }
    for w in ccdf.windows(2) {
        let (r0, c0) = w[0];
        let (r1, c1) = w[1];
        if r1 <= from {
            continue;
        }
        let a = from.max(r0);
        let ca = if a <= r0 { c0 } else { interp_ccdf(ccdf, a) };
        if c1 == c0 {
            acc += c0 * (r1 - a);
        } else {
            let lam = (c0.ln() - c1.ln()) / (r1 - r0);
            let cb = ca * (-lam * (r1 - a)).exp();
            acc += (ca - cb) / lam;
        }
    }
    let (r_last, c_last) = ccdf[ccdf.len() - 1];
    if alpha > 1.0 {
        let start = from.max(r_last);
        let c_start = if start <= r_last {
            c_last
        } else {
            c_last * (r_last / start).powf(alpha)
        };
        acc += c_start * start / (alpha - 1.0);
    }
    acc
}
