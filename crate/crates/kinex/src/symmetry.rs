//! Empirical probe of time-reversal symmetry in pairwise exchange. In a
//! stationary run, every applied payment is an observed transition
//! (u, v) -> (u - d, v + d) between payer and payee balances. The probe bins
//! these events and compares the rate of each transition class with the rate
//! of the class that undoes it, payments (v + d, u - d) -> (v, u). Rules
//! whose payment law treats the two agents symmetrically balance the two
//! rates; rules that key the amount to the payer's balance do not.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kinetics::{ExchangeRule, Kinetics, SimConfig};
use crate::population::TransferOutcome;

/// Run layout for a transition-symmetry measurement.
#[derive(Clone, Debug)]
pub struct SymmetrySettings {
    pub n_agents: usize,
    pub initial_balance: f64,
    pub debt_limit: f64,
    pub seed: u64,
    /// Steps discarded before counting starts; must reach stationarity or
    /// relaxation flux masquerades as asymmetry.
    pub burn_in: u64,
    /// Steps observed after burn-in.
    pub n_samples: u64,
    /// Width of the balance bins for payer and payee coordinates.
    pub money_bin_width: f64,
    /// Width of the bins for the transferred amount.
    pub delta_bin_width: f64,
}

impl SymmetrySettings {
    fn validate(&self) -> Result<()> {
        if !(self.money_bin_width.is_finite() && self.money_bin_width > 0.0) {
            return Err(Error::param("money_bin_width", "must be finite and > 0"));
        }
        if !(self.delta_bin_width.is_finite() && self.delta_bin_width > 0.0) {
            return Err(Error::param("delta_bin_width", "must be finite and > 0"));
        }
        if self.n_samples == 0 {
            return Err(Error::param("n_samples", "must be >= 1"));
        }
        Ok(())
    }
}

/// One binned transition class with its forward and reverse counts.
/// `z = (forward - reverse) / sqrt(forward + reverse)` is approximately
/// standard normal when the two rates are equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryCell {
    pub payer_bin: usize,
    pub payee_bin: usize,
    pub delta_bin: usize,
    pub forward: u64,
    pub reverse: u64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionSymmetryReport {
    /// Adequately sampled cells, ordered by bin indices.
    pub cells: Vec<SymmetryCell>,
    /// Cells dropped for having fewer than 100 total counts.
    pub excluded: usize,
    /// Largest |z| over the retained cells; 0 when none qualify.
    pub max_abs_z: f64,
    /// Applied exchanges observed during the counting window.
    pub samples: u64,
}

const MIN_CELL_COUNT: u64 = 100;

/// Measure forward/reverse transition balance for `rule` in the stationary
/// state. Firm rounds are many-body events with no pairwise transition
/// kernel and are refused.
pub fn measure_transition_symmetry(
    rule: &ExchangeRule,
    settings: &SymmetrySettings,
) -> Result<TransitionSymmetryReport> {
    if matches!(rule, ExchangeRule::FirmRound { .. }) {
        return Err(Error::param(
            "rule",
            "firm rounds have no pairwise transition kernel to probe",
        ));
    }
    settings.validate()?;

    let config = SimConfig {
        n_agents: settings.n_agents,
        initial_balance: settings.initial_balance,
        rule: rule.clone(),
        debt_limit: settings.debt_limit,
        n_steps: settings.burn_in + settings.n_samples,
        seed: settings.seed,
        snapshot_schedule: Vec::new(),
    };
    let mut engine = Kinetics::prepare(&config)?;
    for _ in 0..settings.burn_in {
        engine.step();
    }

    let floor = -settings.debt_limit;
    let money_bin = |m: f64| ((m - floor) / settings.money_bin_width) as usize;
    let delta_bin = |d: f64| (d / settings.delta_bin_width) as usize;

    let mut counts: HashMap<(usize, usize, usize), (u64, u64)> = HashMap::new();
    let mut samples = 0u64;
    for _ in 0..settings.n_samples {
        let event = engine.step();
        if event.outcome != TransferOutcome::Applied || event.amount <= 0.0 {
            continue;
        }
        samples += 1;
        let (u, v, d) = (event.payer_before, event.payee_before, event.amount);
        let db = delta_bin(d);
        counts
            .entry((money_bin(u), money_bin(v), db))
            .or_default()
            .0 += 1;
        // This event undoes a payment from balance v + d to balance u - d.
        counts
            .entry((money_bin(v + d), money_bin(u - d), db))
            .or_default()
            .1 += 1;
    }

    let mut cells: Vec<SymmetryCell> = Vec::new();
    let mut excluded = 0usize;
    for (&(payer_bin, payee_bin, delta_bin), &(forward, reverse)) in &counts {
        let total = forward + reverse;
        if total < MIN_CELL_COUNT {
            excluded += 1;
            continue;
        }
        let z = (forward as f64 - reverse as f64) / (total as f64).sqrt();
        cells.push(SymmetryCell {
            payer_bin,
            payee_bin,
            delta_bin,
            forward,
            reverse,
            z,
        });
    }
    cells.sort_by_key(|c| (c.payer_bin, c.payee_bin, c.delta_bin));
    let max_abs_z = cells.iter().map(|c| c.z.abs()).fold(0.0, f64::max);

    Ok(TransitionSymmetryReport {
        cells,
        excluded,
        max_abs_z,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(seed: u64) -> SymmetrySettings {
        SymmetrySettings {
            n_agents: 1000,
            initial_balance: 1000.0,
            debt_limit: 0.0,
            seed,
            burn_in: 2_000_000,
            n_samples: 4_000_000,
            money_bin_width: 2000.0,
            delta_bin_width: 250.0,
        }
    }

    #[test]
    fn fixed_amount_exchange_balances_forward_and_reverse() {
        let rule = ExchangeRule::FixedAmount { amount: 250.0 };
        let report = measure_transition_symmetry(&rule, &settings(11)).unwrap();
        assert!(!report.cells.is_empty());
        assert!(
            report.max_abs_z <= 3.0,
            "max |z| = {}, cells {:?}",
            report.max_abs_z,
            report.cells
        );
    }

    #[test]
    fn proportional_exchange_breaks_reversal_symmetry() {
        let rule = ExchangeRule::Proportional { gamma: 1.0 / 3.0 };
        let mut s = settings(12);
        s.n_samples = 2_000_000;
        let report = measure_transition_symmetry(&rule, &s).unwrap();
        assert!(
            report.max_abs_z >= 5.0,
            "max |z| = {}, expected a strong violation",
            report.max_abs_z
        );
    }

    #[test]
    fn directed_links_stay_balanced_in_aggregate() {
        let rule = ExchangeRule::DirectedLinks {
            base: Box::new(ExchangeRule::FixedAmount { amount: 250.0 }),
        };
        let mut s = settings(13);
        s.n_agents = 2000;
        s.burn_in = 4_000_000;
        let report = measure_transition_symmetry(&rule, &s).unwrap();
        assert!(!report.cells.is_empty());
        assert!(
            report.max_abs_z <= 3.0,
            "max |z| = {}, cells {:?}",
            report.max_abs_z,
            report.cells
        );
    }

    #[test]
    fn firm_rounds_are_refused() {
        let rule = ExchangeRule::FirmRound {
            firm: crate::firm::FirmParams {
                v: 10.0,
                eta: 0.5,
                chi: 0.5,
                h: 0.1,
                wage: 1.0,
                l_max: 1e6,
                k_max: 1e6,
            },
            base: None,
        };
        assert!(matches!(
            measure_transition_symmetry(&rule, &settings(1)),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn sparse_runs_flag_undersampled_cells() {
        let rule = ExchangeRule::FixedAmount { amount: 250.0 };
        let mut s = settings(14);
        s.burn_in = 10_000;
        s.n_samples = 3_000;
        let report = measure_transition_symmetry(&rule, &s).unwrap();
        assert!(report.excluded > 0);
    }

    #[test]
    fn reports_are_deterministic() {
        let rule = ExchangeRule::FixedAmount { amount: 250.0 };
        let mut s = settings(15);
        s.burn_in = 50_000;
        s.n_samples = 100_000;
        let a = measure_transition_symmetry(&rule, &s).unwrap();
        let b = measure_transition_symmetry(&rule, &s).unwrap();
        assert_eq!(a, b);
    }
}
