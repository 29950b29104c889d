//! Closed-form stationary distributions and the summary statistics they imply.
//!
//! Every law here arises as the long-run state of one of the simulators in
//! this crate:
//!
//! * `Exponential` — additive symmetric exchange, optionally with a debt
//!   floor; the temperature is the mean balance above the floor.
//! * `Gamma` — exchange with a saving propensity; `beta_from_lambda` maps the
//!   saving fraction to the shape correction.
//! * `InverseGammaBm` — mean-field multiplicative growth with redistribution;
//!   the density is `c * exp(-kappa/x) / x^(2+kappa)` with mean exactly 1.
//! * `ArctanInterpolating` — stationary state of mixed additive plus
//!   multiplicative diffusion: exponential at small incomes, power law with
//!   tail exponent `2 + ab_ratio` beyond the crossover scale.
//! * `FamilyIncome` — sum of two independent exponential incomes,
//!   `(r/T^2) * exp(-r/T)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::quad;
use crate::{Error, Result};

/// A parametric stationary distribution with closed-form (or numerically
/// normalized) density, CDF, and complementary CDF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DistributionLaw {
    /// `pdf(x) = exp(-(x - floor)/T) / T` for `x >= floor`.
    Exponential { temperature: f64, floor: f64 },
    /// `pdf(x) = x^beta exp(-x/T) / (T^(beta+1) Gamma(beta+1))` on `x >= 0`.
    Gamma { beta: f64, temperature: f64 },
    /// `pdf(x) = kappa^(1+kappa)/Gamma(1+kappa) * exp(-kappa/x) / x^(2+kappa)`.
    InverseGammaBm { kappa: f64 },
    /// `pdf(r) ∝ exp(-(r0/T) atan(r/r0)) / (1 + (r/r0)^2)^(1 + ab_ratio/2)`.
    ArctanInterpolating {
        temperature: f64,
        crossover: f64,
        ab_ratio: f64,
    },
    /// `pdf(r) = (r/T^2) exp(-r/T)`: sum of two independent exponentials.
    FamilyIncome { temperature: f64 },
}

impl DistributionLaw {
    /// Check parameter ranges; the evaluation methods assume this has passed.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionLaw::Exponential { temperature, floor } => {
                require_positive("temperature", temperature)?;
                require_finite("floor", floor)
            }
            DistributionLaw::Gamma { beta, temperature } => {
                require_positive("temperature", temperature)?;
                if !beta.is_finite() || beta <= -1.0 {
                    return Err(Error::param("beta", "must be a finite value > -1"));
                }
                Ok(())
            }
            DistributionLaw::InverseGammaBm { kappa } => require_positive("kappa", kappa),
            DistributionLaw::ArctanInterpolating {
                temperature,
                crossover,
                ab_ratio,
            } => {
                require_positive("temperature", temperature)?;
                require_positive("crossover", crossover)?;
                require_positive("ab_ratio", ab_ratio)
            }
            DistributionLaw::FamilyIncome { temperature } => {
                require_positive("temperature", temperature)
            }
        }
    }

    /// Smallest and largest values with nonzero density.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistributionLaw::Exponential { floor, .. } => (floor, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Probability density at `x` (zero outside the support).
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            DistributionLaw::Exponential { temperature, floor } => {
                exponential_pdf(x, temperature, floor)
            }
            DistributionLaw::Gamma { beta, temperature } => gamma_pdf(x, beta, temperature),
            DistributionLaw::InverseGammaBm { kappa } => bm_stationary_pdf(x, kappa),
            DistributionLaw::ArctanInterpolating {
                temperature,
                crossover,
                ab_ratio,
            } => arctan_pdf(x, temperature, crossover, ab_ratio),
            DistributionLaw::FamilyIncome { temperature } => family_pdf(x, temperature),
        }
    }

    /// Cumulative distribution function at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionLaw::Exponential { temperature, floor } => {
                if x <= floor {
                    0.0
                } else {
                    -(-(x - floor) / temperature).exp_m1()
                }
            }
            DistributionLaw::Gamma { beta, temperature } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(beta + 1.0, x / temperature)
                }
            }
            DistributionLaw::InverseGammaBm { kappa } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_ur(1.0 + kappa, kappa / x)
                }
            }
            DistributionLaw::ArctanInterpolating {
                temperature,
                crossover,
                ab_ratio,
            } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let theta = crossover / temperature;
                    let z = arctan_angular_mass(theta, ab_ratio, std::f64::consts::FRAC_PI_2);
                    arctan_angular_mass(theta, ab_ratio, (x / crossover).atan()) / z
                }
            }
            DistributionLaw::FamilyIncome { temperature } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let u = x / temperature;
                    1.0 - (-u).exp() * (1.0 + u)
                }
            }
        }
    }

    /// Complementary CDF (upper tail probability) at `x`.
    pub fn ccdf(&self, x: f64) -> f64 {
        match *self {
            DistributionLaw::Exponential { temperature, floor } => {
                exponential_ccdf(x, temperature, floor)
            }
            DistributionLaw::Gamma { beta, temperature } => {
                if x <= 0.0 {
                    1.0
                } else {
                    gamma_ur(beta + 1.0, x / temperature)
                }
            }
            DistributionLaw::InverseGammaBm { kappa } => {
                if x <= 0.0 {
                    1.0
                } else {
                    gamma_lr(1.0 + kappa, kappa / x)
                }
            }
            DistributionLaw::FamilyIncome { temperature } => {
                if x <= 0.0 {
                    1.0
                } else {
                    let u = x / temperature;
                    (-u).exp() * (1.0 + u)
                }
            }
            DistributionLaw::ArctanInterpolating { .. } => 1.0 - self.cdf(x),
        }
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {value}")))
    }
}

fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite, got {value}")))
    }
}

/// Exponential density with a shifted lower edge (debt floor).
pub fn exponential_pdf(x: f64, temperature: f64, floor: f64) -> f64 {
    if x < floor {
        0.0
    } else {
        (-(x - floor) / temperature).exp() / temperature
    }
}

/// Upper tail of the shifted exponential.
pub fn exponential_ccdf(x: f64, temperature: f64, floor: f64) -> f64 {
    if x < floor {
        1.0
    } else {
        (-(x - floor) / temperature).exp()
    }
}

/// Gamma density in shape-correction form: `x^beta e^(-x/T) / (T^(beta+1) Γ(beta+1))`.
///
/// `beta = 0` reduces to the plain exponential with zero floor.
pub fn gamma_pdf(x: f64, beta: f64, temperature: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if beta == 0.0 {
            1.0 / temperature
        } else if beta > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let log_density = beta * x.ln() - x / temperature
        - (beta + 1.0) * temperature.ln()
        - ln_gamma(beta + 1.0);
    log_density.exp()
}

/// Shape correction of the stationary distribution of proportional-fee
/// exchange, obtained by matching the behavior of the density near zero:
/// `beta = -1 - ln(2) / ln(1 - gamma)`.
///
/// `gamma = 1/2` gives `beta = 0` (pure exponential); smaller fees give a
/// positive correction (density vanishing at zero).
pub fn beta_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param("gamma", "must lie in (0, 1)"));
    }
    Ok(-1.0 - std::f64::consts::LN_2 / (1.0 - gamma).ln())
}

/// Shape correction of the stationary distribution under a uniform saving
/// propensity: `beta = 3 lambda / (1 - lambda)`.
pub fn beta_from_lambda(lambda: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::param("lambda", "must lie in [0, 1)"));
    }
    Ok(3.0 * lambda / (1.0 - lambda))
}

/// Stationary density of mean-field multiplicative growth with
/// redistribution strength `kappa` (exchange rate over volatility):
/// `kappa^(1+kappa)/Γ(1+kappa) * exp(-kappa/x) / x^(2+kappa)`.
///
/// The mean is exactly 1; moments of order `>= 1 + kappa` diverge.
pub fn bm_stationary_pdf(x: f64, kappa: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_density =
        (1.0 + kappa) * kappa.ln() - ln_gamma(1.0 + kappa) - kappa / x - (2.0 + kappa) * x.ln();
    log_density.exp()
}

/// Unnormalized log-density of the interpolating law with a free drift
/// weight `theta`:
///
/// `log k(r) = -theta * atan(r/r0) - (1 + ab_ratio/2) * ln(1 + (r/r0)^2)`.
///
/// `theta = r0/T > 0` is the usual mixed additive/multiplicative profile;
/// negative `theta` produces a hard small-`r` cutoff instead of an
/// exponential shoulder. Exposed in log form because the interesting limits
/// (`r0 -> 0` at fixed `theta * r0`) overflow `exp` long before they lose
/// meaning.
pub fn arctan_log_kernel(r: f64, theta: f64, r0: f64, ab_ratio: f64) -> f64 {
    let s = r / r0;
    -theta * s.atan() - (1.0 + 0.5 * ab_ratio) * s.mul_add(s, 1.0).ln()
}

/// Mass of the angular form of the interpolating law on `[0, u]`,
/// `∫_0^u exp(-theta v) cos(v)^ab dv`, where `u = atan(r/r0)`.
///
/// The substitution `r = r0 tan(v)` turns the half-line integral of the
/// density kernel into this smooth integral on `[0, pi/2]`, which adaptive
/// quadrature resolves to near machine precision without tail truncation.
fn arctan_angular_mass(theta: f64, ab_ratio: f64, u: f64) -> f64 {
    quad::integrate(
        &|v: f64| (-theta * v).exp() * v.cos().powf(ab_ratio),
        0.0,
        u,
        1e-14,
    )
}

/// Normalized density of the interpolating law: exponential with temperature
/// `T` below the crossover `r0`, power law `r^-(2 + ab_ratio)` above it.
pub fn arctan_pdf(r: f64, temperature: f64, crossover: f64, ab_ratio: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let theta = crossover / temperature;
    let z = crossover * arctan_angular_mass(theta, ab_ratio, std::f64::consts::FRAC_PI_2);
    arctan_log_kernel(r, theta, crossover, ab_ratio).exp() / z
}

/// Density of the sum of two independent exponential incomes with common
/// temperature: `(r/T^2) exp(-r/T)`.
pub fn family_pdf(r: f64, temperature: f64) -> f64 {
    if r < 0.0 {
        0.0
    } else {
        r / (temperature * temperature) * (-r / temperature).exp()
    }
}

/// Lorenz curve of the exponential distribution: `y = x + (1-x) ln(1-x)`.
pub fn lorenz_exponential(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    if x >= 1.0 {
        return 1.0;
    }
    let r = 1.0 - x;
    x + r * r.ln()
}

/// Lorenz curve of an exponential bulk carrying `1 - f` of the total plus a
/// point-like top class holding income fraction `f`, which appears as a
/// vertical jump at `x = 1`.
pub fn lorenz_two_class(x: f64, f: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&f));
    let jump = if x >= 1.0 { f } else { 0.0 };
    (1.0 - f) * lorenz_exponential(x) + jump
}

/// Gini coefficient of the exponential distribution.
pub fn gini_exponential() -> f64 {
    0.5
}

/// Gini coefficient of the two-class profile with top income fraction `f`:
/// `(1 + f) / 2`.
pub fn gini_two_class(f: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&f));
    0.5 * (1.0 + f)
}

/// Gini coefficient of the two-earner family income law: `3/8`.
pub fn gini_family() -> f64 {
    0.375
}

/// Revenue-maximizing unit price against an exponential money distribution
/// with temperature `t`: revenue `p exp(-p/t)` peaks at `p = t`.
pub fn optimal_price(t: f64) -> f64 {
    t
}

/// Income scheme for the hierarchical-organization generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LydallScheme {
    /// Level incomes `base + (k-1) * step`.
    Additive { base: f64, step: f64 },
    /// Level incomes `base * ratio^(k-1)`.
    Multiplicative { base: f64, ratio: f64 },
}

/// Head counts and incomes for one level of a hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LydallLevel {
    /// 1-based level index, counting up from the bottom of the pyramid.
    pub level: usize,
    pub income: f64,
    pub count: u64,
}

/// Populate a hierarchy of `n_levels` levels in which each manager oversees
/// `branching` subordinates: level `k` (1 = bottom) holds
/// `ceil(branching^(n_levels - k))` people with the income given by `scheme`.
///
/// With a multiplicative income scheme the level counts versus incomes fall
/// on a power law of log-log slope `-ln(branching) / ln(ratio)`; an additive
/// scheme yields an exponential (log-linear) profile instead.
pub fn lydall_generate(
    n_levels: usize,
    branching: f64,
    scheme: &LydallScheme,
) -> Result<Vec<LydallLevel>> {
    if n_levels < 2 {
        return Err(Error::param("n_levels", "must be at least 2"));
    }
    if !(branching.is_finite() && branching > 1.0) {
        return Err(Error::param("branching", "must be finite and > 1"));
    }
    match *scheme {
        LydallScheme::Additive { base, step } => {
            require_positive("base", base)?;
            require_positive("step", step)?;
        }
        LydallScheme::Multiplicative { base, ratio } => {
            require_positive("base", base)?;
            if !(ratio.is_finite() && ratio > 1.0) {
                return Err(Error::param("ratio", "must be finite and > 1"));
            }
        }
    }
    Ok((1..=n_levels)
        .map(|k| {
            let income = match *scheme {
                LydallScheme::Additive { base, step } => base + (k - 1) as f64 * step,
                LydallScheme::Multiplicative { base, ratio } => {
                    base * ratio.powi(k as i32 - 1)
                }
            };
            LydallLevel {
                level: k,
                income,
                count: branching.powi((n_levels - k) as i32).ceil() as u64,
            }
        })
        .collect())
}
