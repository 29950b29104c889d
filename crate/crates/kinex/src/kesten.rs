//! Income diffusion with mixed additive and multiplicative noise.
//!
//! Each walker follows `dr = -(A0 + a r) dt + sqrt(2 (B0 + b r^2) dt) xi`
//! with a reflecting boundary at zero. The additive part dominates small
//! incomes and relaxes them toward an exponential with temperature `B0/A0`;
//! the multiplicative part takes over beyond `sqrt(B0/b)` and builds a
//! power-law tail whose cumulative exponent is `1 + a/b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Drift and diffusion profile of the income walk. All four coefficients
/// must be positive; `b` may be made arbitrarily small to approach the
/// purely additive limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KestenParams {
    /// Additive drift toward zero.
    pub a0: f64,
    /// Proportional drift rate.
    pub a: f64,
    /// Additive diffusion strength.
    pub b0: f64,
    /// Multiplicative diffusion strength.
    pub b: f64,
}

impl KestenParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("a0", self.a0),
            ("a", self.a),
            ("b0", self.b0),
            ("b", self.b),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Income temperature of the additive-dominated bulk.
    pub fn temperature(&self) -> f64 {
        self.b0 / self.a0
    }

    /// Income scale where multiplicative noise takes over.
    pub fn crossover(&self) -> f64 {
        (self.b0 / self.b).sqrt()
    }

    /// Ratio `a/b`; the cumulative tail exponent is one plus this.
    pub fn ab_ratio(&self) -> f64 {
        self.a / self.b
    }
}

/// Evolve `n_walkers` independent incomes for `n_steps` Euler steps of
/// size `dt` and return the final positions. Walkers start at the bulk
/// temperature, so `n_steps * dt` must cover the relaxation time; the
/// proportional drift must satisfy `dt * a < 0.1` for the explicit step to
/// be meaningful.
pub fn income_kesten_simulate(
    params: &KestenParams,
    n_walkers: usize,
    n_steps: u64,
    dt: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut walkers = KestenWalkers::new(params, n_walkers, dt, seed)?;
    for _ in 0..n_steps {
        walkers.step();
    }
    Ok(walkers.into_incomes())
}

/// An ensemble of independent income walkers advanced one Euler step at a
/// time. All walkers start at the bulk temperature.
#[derive(Clone, Debug)]
pub struct KestenWalkers {
    params: KestenParams,
    dt: f64,
    incomes: Vec<f64>,
    rng: ChaCha8Rng,
}

impl KestenWalkers {
    pub fn new(params: &KestenParams, n_walkers: usize, dt: f64, seed: u64) -> Result<Self> {
        params.validate()?;
        if n_walkers == 0 {
            return Err(Error::InvalidSize { min: 1, got: 0 });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", "must be finite and > 0"));
        }
        if dt * params.a >= 0.1 {
            return Err(Error::param("dt", "dt * a must stay below 0.1"));
        }
        Ok(KestenWalkers {
            params: *params,
            dt,
            incomes: vec![params.temperature(); n_walkers],
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Advance every walker by one Euler step of size `dt`.
    pub fn step(&mut self) {
        let dt = self.dt;
        let p = self.params;
        for r in self.incomes.iter_mut() {
            let xi: f64 = self.rng.sample(StandardNormal);
            let drift = -(p.a0 + p.a * *r) * dt;
            let amp = (2.0 * (p.b0 + p.b * *r * *r) * dt).sqrt();
            let next = *r + drift + amp * xi;
            // Reflecting boundary: negative incomes bounce back.
            *r = next.abs();
        }
    }

    pub fn incomes(&self) -> &[f64] {
        &self.incomes
    }

    pub fn into_incomes(self) -> Vec<f64> {
        self.incomes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::DistributionLaw;
    use crate::stats::{fit_exponential, fit_pareto_hill, ks_critical, ks_statistic, KsLevel};

    #[test]
    fn parameters_are_validated() {
        let good = KestenParams {
            a0: 1.0,
            a: 1.0,
            b0: 1.0,
            b: 0.5,
        };
        assert!(income_kesten_simulate(&good, 10, 10, 0.01, 1).is_ok());
        for bad in [
            KestenParams { a0: 0.0, ..good },
            KestenParams { a: -1.0, ..good },
            KestenParams { b0: f64::NAN, ..good },
            KestenParams { b: 0.0, ..good },
        ] {
            assert!(income_kesten_simulate(&bad, 10, 10, 0.01, 1).is_err());
        }
        assert!(income_kesten_simulate(&good, 0, 10, 0.01, 1).is_err());
        assert!(income_kesten_simulate(&good, 10, 10, 0.0, 1).is_err());
        assert!(income_kesten_simulate(&good, 10, 10, 0.2, 1).is_err());
    }

    #[test]
    fn additive_dominated_limit_recovers_the_exponential_temperature() {
        // With b (and a) tiny the walk is a plain additive process whose
        // stationary law is exponential with temperature B0/A0.
        let params = KestenParams {
            a0: 1.0,
            a: 0.01,
            b0: 1.0,
            b: 1e-8,
        };
        let samples = income_kesten_simulate(&params, 20_000, 1_500, 0.02, 5).unwrap();
        let t = fit_exponential(&samples, 0.0).unwrap();
        assert!((t - 1.0).abs() < 0.05, "t {t}");
    }

    #[test]
    fn mixed_process_matches_the_interpolating_law() {
        let params = KestenParams {
            a0: 1.0,
            a: 1.0,
            b0: 1.0,
            b: 0.5,
        };
        let law = DistributionLaw::ArctanInterpolating {
            temperature: params.temperature(),
            crossover: params.crossover(),
            ab_ratio: params.ab_ratio(),
        };
        let samples = income_kesten_simulate(&params, 100_000, 15_000, 0.002, 7).unwrap();
        let ks = ks_statistic(&samples, &law).unwrap();
        assert!(
            ks < ks_critical(samples.len(), KsLevel::OnePercent),
            "ks {ks}"
        );

        // Cumulative tail exponent 1 + a/b, read off the top 0.2%.
        let mut sorted = samples;
        sorted.sort_by(|x, y| x.total_cmp(y));
        let xmin = sorted[(0.998 * sorted.len() as f64) as usize];
        let hill = fit_pareto_hill(&sorted, xmin).unwrap();
        let target = 1.0 + params.ab_ratio();
        assert!((hill - target).abs() < 0.15 * target, "hill {hill}");
    }

    #[test]
    fn runs_are_deterministic_in_the_seed() {
        let params = KestenParams {
            a0: 1.0,
            a: 1.0,
            b0: 1.0,
            b: 0.5,
        };
        let one = income_kesten_simulate(&params, 64, 200, 0.01, 9).unwrap();
        let two = income_kesten_simulate(&params, 64, 200, 0.01, 9).unwrap();
        let other = income_kesten_simulate(&params, 64, 200, 0.01, 10).unwrap();
        assert_eq!(one, two);
        assert_ne!(one, other);
    }
}
