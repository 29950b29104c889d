//! Wealth dynamics without conservation: every agent's wealth grows
//! stochastically, so only the distribution of relative wealth (wealth over
//! the population mean) reaches a stationary shape. Two models live here:
//! the mean-field redistribution-plus-multiplicative-noise diffusion, and a
//! pairwise proportional-transfer model where each transaction also creates
//! wealth.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative wealths w̃_i = w_i/⟨w⟩ under mean-field dynamics with
/// redistribution strength `j` and multiplicative noise variance `sigma2`.
/// The stationary density is the inverse-gamma form with shape parameter
/// `kappa = j/sigma2` (power-law tail exponent 2 + kappa, sharp cutoff at
/// small w̃).
#[derive(Clone, Debug, PartialEq)]
pub struct RelativeWealthState {
    w_tilde: Vec<f64>,
    j: f64,
    sigma2: f64,
}

impl RelativeWealthState {
    /// Everyone starts at the mean.
    pub fn new(n: usize, j: f64, sigma2: f64) -> Result<Self> {
        Self::from_wealths(vec![1.0; n.max(1)], j, sigma2).and_then(|s| {
            if n == 0 {
                Err(Error::InvalidSize { min: 1, got: 0 })
            } else {
                Ok(s)
            }
        })
    }

    /// Adopt an existing wealth vector, normalizing its mean to 1.
    pub fn from_wealths(wealths: Vec<f64>, j: f64, sigma2: f64) -> Result<Self> {
        if wealths.is_empty() {
            return Err(Error::InvalidSize { min: 1, got: 0 });
        }
        if wealths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::param("wealths", "entries must be finite and > 0"));
        }
        if !(j.is_finite() && j >= 0.0) {
            return Err(Error::param("j", "must be finite and >= 0"));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::param("sigma2", "must be finite and > 0"));
        }
        let mut state = Self {
            w_tilde: wealths,
            j,
            sigma2,
        };
        state.renormalize();
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.w_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w_tilde.is_empty()
    }

    pub fn w_tilde(&self) -> &[f64] {
        &self.w_tilde
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    fn renormalize(&mut self) {
        let mean = self.w_tilde.iter().sum::<f64>() / self.w_tilde.len() as f64;
        for w in &mut self.w_tilde {
            *w /= mean;
        }
    }

    /// Advance every agent by one Euler increment
    /// `dw̃ = j·(1 − w̃)·dt + sqrt(2·sigma2·dt)·w̃·ξ`, rejecting and
    /// re-drawing any Gaussian ξ that would push a wealth non-positive,
    /// then pin the mean back to 1.
    pub fn bm_step<R: Rng>(&mut self, dt: f64, rng: &mut R) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", "must be finite and > 0"));
        }
        if dt * (self.j + 2.0 * self.sigma2) >= 0.1 {
            return Err(Error::param("dt", "too coarse: need dt*(j + 2*sigma2) < 0.1"));
        }
        let amplitude = (2.0 * self.sigma2 * dt).sqrt();
        for w in &mut self.w_tilde {
            loop {
                let xi: f64 = rng.sample(StandardNormal);
                let next = *w + self.j * (1.0 - *w) * dt + amplitude * *w * xi;
                if next > 0.0 {
                    *w = next;
                    break;
                }
            }
        }
        self.renormalize();
        Ok(())
    }
}

/// One transaction of the growth-and-transfer model: a random payer hands a
/// fraction `gamma` of its wealth to a random payee, then both parties'
/// wealth is scaled by `1 + zeta`. The slice is renormalized to mean 1
/// afterwards, so it always holds relative wealths.
pub fn slanina_step<R: Rng>(
    wealths: &mut [f64],
    gamma: f64,
    zeta: f64,
    rng: &mut R,
) -> Result<()> {
    if wealths.len() < 2 {
        return Err(Error::InvalidSize {
            min: 2,
            got: wealths.len(),
        });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param("gamma", "must lie in (0, 1)"));
    }
    if !(zeta.is_finite() && zeta >= 0.0) {
        return Err(Error::param("zeta", "must be finite and >= 0"));
    }
    let n = wealths.len();
    let payer = rng.random_range(0..n);
    let mut payee = rng.random_range(0..n - 1);
    if payee >= payer {
        payee += 1;
    }
    let delta = gamma * wealths[payer];
    wealths[payer] = (wealths[payer] - delta) * (1.0 + zeta);
    wealths[payee] = (wealths[payee] + delta) * (1.0 + zeta);
    let mean = wealths.iter().sum::<f64>() / n as f64;
    for w in wealths {
        *w /= mean;
    }
    Ok(())
}

/// Long-run engine for the growth-and-transfer model. Tracks the growing
/// total lazily and rescales only when it threatens overflow, so a step is
/// O(1) instead of the O(N) renormalization of [`slanina_step`].
#[derive(Clone, Debug)]
pub struct SlaninaModel {
    wealths: Vec<f64>,
    total: f64,
    gamma: f64,
    zeta: f64,
}

impl SlaninaModel {
    pub fn new(n: usize, gamma: f64, zeta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize { min: 2, got: n });
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::param("gamma", "must lie in (0, 1)"));
        }
        if !(zeta.is_finite() && zeta >= 0.0) {
            return Err(Error::param("zeta", "must be finite and >= 0"));
        }
        Ok(Self {
            wealths: vec![1.0; n],
            total: n as f64,
            gamma,
            zeta,
        })
    }

    pub fn len(&self) -> usize {
        self.wealths.len()
    }

    pub fn step<R: Rng>(&mut self, rng: &mut R) {
        let n = self.wealths.len();
        let payer = rng.random_range(0..n);
        let mut payee = rng.random_range(0..n - 1);
        if payee >= payer {
            payee += 1;
        }
        let delta = self.gamma * self.wealths[payer];
        self.total += self.zeta * (self.wealths[payer] + self.wealths[payee]);
        self.wealths[payer] = (self.wealths[payer] - delta) * (1.0 + self.zeta);
        self.wealths[payee] = (self.wealths[payee] + delta) * (1.0 + self.zeta);
        if self.total > 1e100 {
            let scale = n as f64 / self.total;
            for w in &mut self.wealths {
                *w *= scale;
            }
            self.total = n as f64;
        }
    }

    /// Current wealths normalized to mean 1; their sum is `len()`.
    pub fn relative_wealths(&self) -> Vec<f64> {
        let scale = self.wealths.len() as f64 / self.total;
        self.wealths.iter().map(|w| w * scale).collect()
    }
}
