//! Integer-cent balances for exact conservation audits. The additive
//! exchange rules move whole cents, so a run can assert bit-identical
//! totals instead of a floating-point tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::population::{Population, TransferOutcome};

/// Agent balances in integer cents with a common debt floor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentPopulation {
    balances: Vec<i64>,
    debt_limit: i64,
}

impl CentPopulation {
    pub fn new(n: usize, initial_cents: i64) -> Result<Self> {
        Self::with_debt_limit(n, initial_cents, 0)
    }

    pub fn with_debt_limit(n: usize, initial_cents: i64, debt_limit: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { min: 1, got: 0 });
        }
        if initial_cents < 0 {
            return Err(Error::param("initial_cents", "must be >= 0"));
        }
        if debt_limit < 0 {
            return Err(Error::param("debt_limit", "must be >= 0"));
        }
        Ok(Self {
            balances: vec![initial_cents; n],
            debt_limit,
        })
    }

    pub fn len(&self) -> usize {
        self.balances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balances.is_empty()
    }

    pub fn balances(&self) -> &[i64] {
        &self.balances
    }

    pub fn debt_limit(&self) -> i64 {
        self.debt_limit
    }

    /// Exact total in cents.
    pub fn total_cents(&self) -> i64 {
        self.balances.iter().sum()
    }

    /// Move `cents` from payer to payee unless it would push the payer
    /// below the debt floor.
    pub fn transfer(&mut self, payer: usize, payee: usize, cents: i64) -> Result<TransferOutcome> {
        let len = self.balances.len();
        if payer >= len {
            return Err(Error::InvalidAgent { index: payer, len });
        }
        if payee >= len {
            return Err(Error::InvalidAgent { index: payee, len });
        }
        if payer == payee {
            return Err(Error::param("payee", "must differ from payer"));
        }
        if cents < 0 {
            return Err(Error::param("cents", "must be >= 0"));
        }
        if self.balances[payer] - cents < -self.debt_limit {
            return Ok(TransferOutcome::Rejected);
        }
        self.balances[payer] -= cents;
        self.balances[payee] += cents;
        Ok(TransferOutcome::Applied)
    }

    /// View as real-valued balances in currency units (cents / 100).
    pub fn to_population(&self) -> Result<Population> {
        let balances = self.balances.iter().map(|&c| c as f64 / 100.0).collect();
        Population::from_balances(balances, self.debt_limit as f64 / 100.0)
    }
}

/// Random exchange of a fixed whole-cent amount between uniformly drawn
/// pairs. Conservation is exact by construction; the final total equals the
/// initial one bit for bit.
pub fn run_fixed_exact(
    n_agents: usize,
    initial_cents: i64,
    delta_cents: i64,
    debt_limit: i64,
    steps: u64,
    seed: u64,
) -> Result<CentPopulation> {
    if n_agents < 2 {
        return Err(Error::InvalidSize {
            min: 2,
            got: n_agents,
        });
    }
    if delta_cents <= 0 {
        return Err(Error::param("delta_cents", "must be > 0"));
    }
    let mut pop = CentPopulation::with_debt_limit(n_agents, initial_cents, debt_limit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..steps {
        let payer = rng.random_range(0..n_agents);
        let mut payee = rng.random_range(0..n_agents - 1);
        if payee >= payer {
            payee += 1;
        }
        pop.transfer(payer, payee, delta_cents)?;
    }
    Ok(pop)
}
