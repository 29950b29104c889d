//! Agent populations: a flat vector of money balances plus the debt floor
//! that every transfer must respect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convenience alias: balances and transfer amounts are plain `f64` money.
pub type Money = f64;

/// Whether an attempted transfer went through or was blocked by the floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferOutcome {
    Applied,
    Rejected,
}

/// A closed economy of agents, each holding a money balance. Total money
/// only moves between agents; no transfer may take a balance below
/// `-debt_limit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    balances: Vec<Money>,
    debt_limit: Money,
}

impl Population {
    /// `n_agents` agents, each starting with `initial_balance`, no debt
    /// allowed.
    pub fn new(n_agents: usize, initial_balance: Money) -> Result<Self> {
        Self::with_debt_limit(n_agents, initial_balance, 0.0)
    }

    /// Same, but balances may go as low as `-debt_limit`.
    pub fn with_debt_limit(
        n_agents: usize,
        initial_balance: Money,
        debt_limit: Money,
    ) -> Result<Self> {
        Self::from_balances(vec![initial_balance; n_agents], debt_limit)
    }

    /// Adopt an explicit balance vector. Every balance must already respect
    /// the floor.
    pub fn from_balances(balances: Vec<Money>, debt_limit: Money) -> Result<Self> {
        if balances.is_empty() {
            return Err(Error::InvalidSize { min: 1, got: 0 });
        }
        if !(debt_limit.is_finite() && debt_limit >= 0.0) {
            return Err(Error::param("debt_limit", "must be finite and >= 0"));
        }
        if balances.iter().any(|b| !b.is_finite()) {
            return Err(Error::param("balances", "must all be finite"));
        }
        if balances.iter().any(|&b| b < -debt_limit) {
            return Err(Error::param("balances", "below the debt floor"));
        }
        Ok(Self {
            balances,
            debt_limit,
        })
    }

    pub fn len(&self) -> usize {
        self.balances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balances.is_empty()
    }

    pub fn balances(&self) -> &[Money] {
        &self.balances
    }

    /// Lowest balance any agent may reach (`-debt_limit`).
    pub fn floor(&self) -> Money {
        -self.debt_limit
    }

    pub fn debt_limit(&self) -> Money {
        self.debt_limit
    }

    pub fn total_money(&self) -> Money {
        self.balances.iter().sum()
    }

    pub fn mean_balance(&self) -> Money {
        self.total_money() / self.balances.len() as f64
    }

    /// Temperature of the exponential law this economy relaxes to under
    /// additive random exchange: mean balance measured from the floor.
    pub fn effective_temperature(&self) -> Money {
        self.mean_balance() - self.floor()
    }

    /// Sum of the negative balance parts, i.e. aggregate outstanding debt.
    pub fn total_debt(&self) -> Money {
        self.balances.iter().map(|&b| (-b).max(0.0)).sum()
    }

    /// Move `amount` from `payer` to `payee` if the payer stays at or above
    /// the floor; otherwise leave both balances untouched.
    pub fn transfer(
        &mut self,
        payer: usize,
        payee: usize,
        amount: Money,
    ) -> Result<TransferOutcome> {
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
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(Error::param("amount", "must be finite and >= 0"));
        }
        if self.balances[payer] - amount < -self.debt_limit {
            return Ok(TransferOutcome::Rejected);
        }
        self.balances[payer] -= amount;
        self.balances[payee] += amount;
        Ok(TransferOutcome::Applied)
    }

    /// Mutable access for the exchange engines in this crate; all of them
    /// preserve the floor invariant themselves.
    pub(crate) fn balances_mut(&mut self) -> &mut [Money] {
        &mut self.balances
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_moves_money_when_funds_allow() {
        let mut pop = Population::from_balances(vec![10.0, 0.0], 0.0).unwrap();
        let out = pop.transfer(0, 1, 4.0).unwrap();
        assert_eq!(out, TransferOutcome::Applied);
        assert_eq!(pop.balances(), &[6.0, 4.0]);
    }

    #[test]
    fn transfer_rejected_at_zero_floor() {
        let mut pop = Population::from_balances(vec![3.0, 0.0], 0.0).unwrap();
        let out = pop.transfer(0, 1, 5.0).unwrap();
        assert_eq!(out, TransferOutcome::Rejected);
        assert_eq!(pop.balances(), &[3.0, 0.0]);
    }

    #[test]
    fn transfer_may_dip_into_allowed_debt() {
        let mut pop = Population::from_balances(vec![3.0, 0.0], 800.0).unwrap();
        let out = pop.transfer(0, 1, 5.0).unwrap();
        assert_eq!(out, TransferOutcome::Applied);
        assert_eq!(pop.balances(), &[-2.0, 5.0]);
        assert_eq!(pop.total_money(), 3.0);
    }

    #[test]
    fn transfer_validates_agents_and_amount() {
        let mut pop = Population::new(2, 100.0).unwrap();
        assert!(matches!(
            pop.transfer(0, 2, 1.0),
            Err(Error::InvalidAgent { index: 2, len: 2 })
        ));
        assert!(matches!(
            pop.transfer(5, 0, 1.0),
            Err(Error::InvalidAgent { index: 5, len: 2 })
        ));
        assert!(pop.transfer(0, 0, 1.0).is_err());
        assert!(pop.transfer(0, 1, -1.0).is_err());
        assert!(pop.transfer(0, 1, f64::NAN).is_err());
    }

    #[test]
    fn construction_validates_inputs() {
        assert!(Population::new(0, 1.0).is_err());
        assert!(Population::new(1, 0.0).is_ok());
        assert!(Population::with_debt_limit(3, 0.0, -1.0).is_err());
        assert!(Population::from_balances(vec![1.0, -0.5], 0.0).is_err());
        assert!(Population::from_balances(vec![1.0, -0.5], 0.5).is_ok());
        assert!(Population::from_balances(vec![f64::NAN], 0.0).is_err());
    }

    #[test]
    fn temperature_measures_mean_above_floor() {
        let pop = Population::from_balances(vec![-800.0, 2800.0], 800.0).unwrap();
        assert_eq!(pop.total_money(), 2000.0);
        assert_eq!(pop.mean_balance(), 1000.0);
        assert_eq!(pop.effective_temperature(), 1800.0);
        assert_eq!(pop.total_debt(), 800.0);
    }
}
