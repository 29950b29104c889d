//! Empirical distribution statistics: histograms, entropy, Lorenz curves,
//! and parametric fits used to compare simulation output against the
//! closed-form laws.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::laws::DistributionLaw;
use crate::{Error, Result};

/// Bin layout for [`Histogram::from_samples`].
#[derive(Clone, Debug, PartialEq)]
pub enum Binning {
    /// `count` equal-width bins spanning `[min, max]` of the samples.
    EqualWidth { count: usize },
    /// `count` log-spaced bins spanning `[min, max]`; requires positive samples.
    Log { count: usize },
    /// Explicit ascending edges; `n` edges define `n - 1` bins. The final
    /// edge may be `f64::INFINITY` to capture an unbounded overflow bin.
    Edges(Vec<f64>),
}

/// Counts over half-open bins `[e_k, e_{k+1})`; the last bin also includes
/// its right edge. With explicit edges, samples outside the covered range
/// are dropped (and absent from `total`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn from_samples(samples: &[f64], binning: &Binning) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("histogram samples"));
        }
        let edges = match binning {
            Binning::EqualWidth { count } => {
                let count = require_bins(*count)?;
                let (lo, hi) = sample_range(samples)?;
                if lo == hi {
                    // Degenerate range: unit-width bins anchored at the value.
                    (0..=count).map(|k| lo + k as f64).collect()
                } else {
                    (0..=count)
                        .map(|k| lo + (hi - lo) * k as f64 / count as f64)
                        .collect()
                }
            }
            Binning::Log { count } => {
                let count = require_bins(*count)?;
                let (lo, hi) = sample_range(samples)?;
                if lo <= 0.0 {
                    return Err(Error::param("samples", "log binning requires positive values"));
                }
                if lo == hi {
                    (0..=count).map(|k| lo * 2f64.powi(k as i32)).collect()
                } else {
                    let (ll, lh) = (lo.ln(), hi.ln());
                    (0..=count)
                        .map(|k| (ll + (lh - ll) * k as f64 / count as f64).exp())
                        .collect()
                }
            }
            Binning::Edges(edges) => {
                if edges.len() < 2 {
                    return Err(Error::InvalidSize {
                        min: 2,
                        got: edges.len(),
                    });
                }
                if edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::param("edges", "must be strictly increasing"));
                }
                edges.clone()
            }
        };
        let mut counts = vec![0u64; edges.len() - 1];
        let last = *edges.last().unwrap();
        for &x in samples {
            if x < edges[0] || x > last {
                continue;
            }
            // partition_point finds the first edge > x; x == last edge lands
            // past the end and is clamped into the final (closed) bin.
            let idx = edges.partition_point(|&e| e <= x).min(counts.len());
            counts[idx - 1] += 1;
        }
        Ok(Histogram { edges, counts })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of samples captured by the bins.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Per-bin occupation probabilities `n_k / n`.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Per-bin probability densities (probability / bin width); zero for an
    /// unbounded final bin.
    pub fn densities(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| {
                let width = w[1] - w[0];
                if width.is_finite() {
                    c as f64 / (n * width)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Shannon entropy per sample over occupied bins, in nats:
    /// `S = -Σ (n_k/n) ln(n_k/n)`.
    pub fn entropy(&self) -> f64 {
        let n = self.total() as f64;
        -self
            .counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                p * p.ln()
            })
            .sum::<f64>()
    }
}

fn require_bins(count: usize) -> Result<usize> {
    if count == 0 {
        Err(Error::param("count", "must be at least 1"))
    } else {
        Ok(count)
    }
}

fn sample_range(samples: &[f64]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in samples {
        if !x.is_finite() {
            return Err(Error::param("samples", "must be finite"));
        }
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok((lo, hi))
}

/// Exact log-multiplicity `ln(n! / Π n_k!)` of a histogram occupation
/// vector. For totals up to 170 every factorial is representable in `f64`,
/// so this provides an independent check that per-sample entropy times `n`
/// approximates `ln W` with the usual Stirling defect.
pub fn log_multiplicity(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    ln_factorial(n) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

/// Piecewise-linear Lorenz curve through `(i/n, S_i/S_n)` for sorted
/// samples, anchored at `(0, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzCurve {
    pub points: Vec<(f64, f64)>,
}

impl LorenzCurve {
    /// Area under the curve by the trapezoid rule (exact for the polyline).
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    /// Gini coefficient `1 - 2 * area`.
    pub fn gini(&self) -> f64 {
        1.0 - 2.0 * self.area()
    }
}

/// Empirical Lorenz curve of the samples (sorted ascending). Requires a
/// positive total; individual negative values (debts) are allowed and can
/// push the curve below zero.
pub fn lorenz_empirical(samples: &[f64]) -> Result<LorenzCurve> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("lorenz samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut points = Vec::with_capacity(sorted.len() + 1);
    points.push((0.0, 0.0));
    let mut cum = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cum += x;
        points.push(((i + 1) as f64 / n, cum));
    }
    let total = cum;
    if !(total > 0.0) {
        return Err(Error::ZeroTotal);
    }
    for p in &mut points {
        p.1 /= total;
    }
    Ok(LorenzCurve { points })
}

/// Empirical Gini coefficient, defined as `1 - 2 * area` under the
/// empirical Lorenz curve (so the two statistics are exactly consistent).
pub fn gini_empirical(samples: &[f64]) -> Result<f64> {
    Ok(lorenz_empirical(samples)?.gini())
}

/// Maximum-likelihood temperature of an exponential law with a known floor:
/// `T = mean - floor`.
pub fn fit_exponential(samples: &[f64], floor: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("exponential fit samples"));
    }
    let t = mean(samples) - floor;
    if !(t > 0.0) {
        return Err(Error::param("samples", "mean does not exceed the floor"));
    }
    Ok(t)
}

/// Fit both floor and temperature of a shifted exponential: the floor
/// estimate is the sample minimum, the temperature the mean above it.
pub fn fit_shifted_exponential(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("exponential fit samples"));
    }
    let floor = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let t = fit_exponential(samples, floor)?;
    Ok((floor, t))
}

/// Method-of-moments fit of the gamma law in shape-correction form:
/// `T = var/mean`, `beta = mean^2/var - 1`.
pub fn fit_gamma_moments(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidSize {
            min: 2,
            got: samples.len(),
        });
    }
    let m = mean(samples);
    let var = samples.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / samples.len() as f64;
    if !(m > 0.0 && var > 0.0) {
        return Err(Error::param("samples", "need positive mean and variance"));
    }
    Ok((m * m / var - 1.0, var / m))
}

/// Hill estimator of the tail exponent over samples strictly above `xmin`:
/// `alpha = n_tail / Σ ln(x_i / xmin)`.
pub fn fit_pareto_hill(samples: &[f64], xmin: f64) -> Result<f64> {
    if !(xmin > 0.0) {
        return Err(Error::param("xmin", "must be positive"));
    }
    let mut n_tail = 0usize;
    let mut sum = 0.0;
    for &x in samples {
        if x > xmin {
            n_tail += 1;
            sum += (x / xmin).ln();
        }
    }
    if n_tail < 50 {
        return Err(Error::InsufficientTail {
            need: 50,
            got: n_tail,
        });
    }
    Ok(n_tail as f64 / sum)
}

/// Two-sided Kolmogorov–Smirnov distance between the samples and a law.
pub fn ks_statistic(samples: &[f64], law: &DistributionLaw) -> Result<f64> {
    ks_statistic_fn(samples, |x| law.cdf(x))
}

/// KS distance against an arbitrary CDF.
pub fn ks_statistic_fn(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("ks samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    Ok(d)
}

/// Significance level for [`ks_critical`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsLevel {
    OnePercent,
    FivePercent,
}

/// Asymptotic critical value of the KS distance: `1.63/sqrt(n)` at the 1%
/// level, `1.36/sqrt(n)` at 5%.
pub fn ks_critical(n: usize, level: KsLevel) -> f64 {
    let c = match level {
        KsLevel::OnePercent => 1.63,
        KsLevel::FivePercent => 1.36,
    };
    c / (n as f64).sqrt()
}

/// Least-squares slope of `ln CCDF` against `ln x` over the window
/// `[lo, hi]`, returned as the positive tail exponent `alpha`
/// (`CCDF ~ x^-alpha`). The regression runs over 50 log-spaced window
/// points; at least 10 samples must survive beyond `hi`.
pub fn fit_ccdf_exponent(samples: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::param("window", "need 0 < lo < hi"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let beyond = sorted.len() - sorted.partition_point(|&x| x <= hi);
    if beyond < 10 {
        return Err(Error::InsufficientTail {
            need: 10,
            got: beyond,
        });
    }
    let points = 50;
    let (ll, lh) = (lo.ln(), hi.ln());
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for k in 0..points {
        let lx = ll + (lh - ll) * k as f64 / (points - 1) as f64;
        let x = lx.exp();
        let ccdf = (sorted.len() - sorted.partition_point(|&s| s <= x)) as f64 / n;
        if ccdf > 0.0 {
            xs.push(lx);
            ys.push(ccdf.ln());
        }
    }
    let slope = regression_slope(&xs, &ys)?;
    Ok(-slope)
}

/// Ordinary least-squares slope of `ys` on `xs`.
pub(crate) fn regression_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::InvalidSize {
            min: 2,
            got: xs.len().min(ys.len()),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::param("xs", "no variation in regressor"));
    }
    Ok(sxy / sxx)
}

pub(crate) fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp, Gamma as GammaDist, Pareto};

    #[test]
    fn histogram_basic_layouts() {
        // All-equal samples collapse into the first unit-width bin.
        let h = Histogram::from_samples(&[1.0, 1.0, 1.0], &Binning::EqualWidth { count: 1 })
            .unwrap();
        assert_eq!(h.counts(), &[3]);

        let h = Histogram::from_samples(
            &[0.5, 1.5],
            &Binning::Edges(vec![0.0, 1.0, 2.0]),
        )
        .unwrap();
        assert_eq!(h.counts(), &[1, 1]);

        // The final bin is closed on the right.
        let h = Histogram::from_samples(&[2.0], &Binning::Edges(vec![0.0, 1.0, 2.0])).unwrap();
        assert_eq!(h.counts(), &[0, 1]);

        // Out-of-range samples are dropped with explicit edges.
        let h = Histogram::from_samples(
            &[-1.0, 0.5, 9.0],
            &Binning::Edges(vec![0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(h.total(), 1);

        // Unbounded overflow bin.
        let h = Histogram::from_samples(
            &[0.5, 1e9],
            &Binning::Edges(vec![0.0, 1.0, f64::INFINITY]),
        )
        .unwrap();
        assert_eq!(h.counts(), &[1, 1]);
        assert_eq!(h.densities()[1], 0.0);

        assert!(
            Histogram::from_samples(&[0.0, 1.0], &Binning::Log { count: 4 }).is_err()
        );
        let h = Histogram::from_samples(
            &[1.0, 30.0, 100.0],
            &Binning::Log { count: 2 },
        )
        .unwrap();
        assert_eq!(h.counts(), &[1, 2]);
    }

    #[test]
    fn histogram_counts_sum_to_input() {
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin() + 2.0).collect();
        let h = Histogram::from_samples(&samples, &Binning::EqualWidth { count: 17 }).unwrap();
        assert_eq!(h.total(), 1000);
        let p: f64 = h.probabilities().iter().sum();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_simple_splits() {
        let h = Histogram::from_samples(
            &[0.5, 1.5],
            &Binning::Edges(vec![0.0, 1.0, 2.0]),
        )
        .unwrap();
        assert!((h.entropy() - f64::ln(2.0)).abs() < 1e-15);
        let h = Histogram::from_samples(&[0.5, 0.6], &Binning::Edges(vec![0.0, 1.0, 2.0]))
            .unwrap();
        assert_eq!(h.entropy(), 0.0);
    }

    #[test]
    fn multiplicity_matches_hand_count() {
        // 4 items split 2/2: W = 6.
        assert!((log_multiplicity(&[2, 2]) - 6f64.ln()).abs() < 1e-12);
        // Everything in one bin: W = 1.
        assert_eq!(log_multiplicity(&[4]), 0.0);
    }

    #[test]
    fn lorenz_extremes() {
        // Perfect equality: curve on the diagonal, Gini 0.
        let g = gini_empirical(&vec![5.0; 64]).unwrap();
        assert!(g.abs() < 1e-12);

        // One holder of everything among 100: Gini 0.99.
        let mut samples = vec![0.0; 99];
        samples.push(1.0);
        let g = gini_empirical(&samples).unwrap();
        assert!((g - 0.99).abs() < 1e-12, "gini {g}");

        assert!(matches!(
            gini_empirical(&[0.0, 0.0]),
            Err(Error::ZeroTotal)
        ));
    }

    #[test]
    fn gini_matches_direct_rank_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let exp = Exp::new(1.0 / 3.0).unwrap();
        let samples: Vec<f64> = (0..5000).map(|_| exp.sample(&mut rng)).collect();
        let via_curve = gini_empirical(&samples).unwrap();
        // G = sum((2i - n - 1) x_(i)) / (n * total) over sorted samples.
        let mut sorted = samples.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len() as f64;
        let total: f64 = sorted.iter().sum();
        let direct: f64 = sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| (2.0 * (i + 1) as f64 - n - 1.0) * x)
            .sum::<f64>()
            / (n * total);
        assert!((via_curve - direct).abs() < 1e-10);
        // Exponential samples sit near Gini 1/2.
        assert!((via_curve - 0.5).abs() < 0.02, "gini {via_curve}");
    }

    #[test]
    fn exponential_fit_recovers_temperature_and_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let exp = Exp::new(1.0 / 1800.0).unwrap();
        let samples: Vec<f64> = (0..200_000)
            .map(|_| exp.sample(&mut rng) - 800.0)
            .collect();
        let (floor, t) = fit_shifted_exponential(&samples).unwrap();
        assert!((floor + 800.0).abs() < 1.0, "floor {floor}");
        assert!((t - 1800.0).abs() < 0.02 * 1800.0, "T {t}");
    }

    #[test]
    fn gamma_moment_fit_recovers_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let gamma = GammaDist::new(4.0, 2.5).unwrap();
        let samples: Vec<f64> = (0..100_000).map(|_| gamma.sample(&mut rng)).collect();
        let (beta, t) = fit_gamma_moments(&samples).unwrap();
        assert!((beta - 3.0).abs() < 0.15, "beta {beta}");
        assert!((t - 2.5).abs() < 0.125, "T {t}");
    }

    #[test]
    fn hill_estimator_recovers_pareto_exponent() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let pareto = Pareto::new(41_000.0, 1.9).unwrap();
        let samples: Vec<f64> = (0..100_000).map(|_| pareto.sample(&mut rng)).collect();
        let alpha = fit_pareto_hill(&samples, 41_000.0).unwrap();
        assert!((alpha - 1.9).abs() < 0.02, "alpha {alpha}");
        assert!(matches!(
            fit_pareto_hill(&samples, 1e12),
            Err(Error::InsufficientTail { .. })
        ));
    }

    #[test]
    fn ks_null_calibration_and_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let law = DistributionLaw::Exponential {
            temperature: 2.0,
            floor: 0.0,
        };
        let exp = Exp::new(0.5).unwrap();
        let n = 1000;
        let crit = ks_critical(n, KsLevel::OnePercent);
        let mut below = 0;
        for _ in 0..200 {
            let samples: Vec<f64> = (0..n).map(|_| exp.sample(&mut rng)).collect();
            if ks_statistic(&samples, &law).unwrap() < crit {
                below += 1;
            }
        }
        // The 1% critical value should pass at least 95% of null draws.
        assert!(below >= 190, "only {below}/200 below critical");

        // Misfit detection: gamma-shaped samples against the exponential law.
        let gamma = GammaDist::new(4.0, 0.5).unwrap();
        let samples: Vec<f64> = (0..n).map(|_| gamma.sample(&mut rng)).collect();
        let d = ks_statistic(&samples, &law).unwrap();
        assert!(d > crit, "misfit not detected: D = {d}");
    }

    #[test]
    fn ks_single_sample_at_median() {
        let law = DistributionLaw::Exponential {
            temperature: 1.0,
            floor: 0.0,
        };
        let median = f64::ln(2.0);
        let d = ks_statistic(&[median], &law).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ccdf_exponent_fit_on_pareto_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pareto = Pareto::new(1.0, 1.7).unwrap();
        let samples: Vec<f64> = (0..200_000).map(|_| pareto.sample(&mut rng)).collect();
        let alpha = fit_ccdf_exponent(&samples, 2.0, 50.0).unwrap();
        assert!((alpha - 1.7).abs() < 0.1, "alpha {alpha}");
    }
}
