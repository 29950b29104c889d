//! Conserved money-plus-stock market. Agents hold cash and shares; each
//! round they pick a preferred stock fraction of their wealth, a clearing
//! price matches aggregate demand to the fixed share supply, and everyone
//! rebalances at that price. Trading moves the price but never an agent's
//! wealth at the concurrent price, so both totals are conserved while the
//! wealth distribution drifts toward its stationary shape.

use rand::Rng;

use crate::error::{Error, Result};

/// Joint cash/share holdings with the last clearing price. Wealth of agent
/// `i` is `money[i] + price * stock[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketState {
    money: Vec<f64>,
    stock: Vec<f64>,
    price: f64,
}

impl MarketState {
    pub fn new(money: Vec<f64>, stock: Vec<f64>, price: f64) -> Result<Self> {
        if money.is_empty() {
            return Err(Error::InvalidSize { min: 1, got: 0 });
        }
        if money.len() != stock.len() {
            return Err(Error::param("stock", "must match money in length"));
        }
        if money.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::param("money", "entries must be finite and >= 0"));
        }
        if stock.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::param("stock", "entries must be finite and >= 0"));
        }
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::param("price", "must be finite and > 0"));
        }
        Ok(Self {
            money,
            stock,
            price,
        })
    }

    pub fn len(&self) -> usize {
        self.money.len()
    }

    pub fn is_empty(&self) -> bool {
        self.money.is_empty()
    }

    pub fn money(&self) -> &[f64] {
        &self.money
    }

    pub fn stock(&self) -> &[f64] {
        &self.stock
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn total_money(&self) -> f64 {
        self.money.iter().sum()
    }

    pub fn total_stock(&self) -> f64 {
        self.stock.iter().sum()
    }

    pub fn wealth(&self, i: usize) -> f64 {
        self.money[i] + self.price * self.stock[i]
    }

    /// Wealth of every agent at the current price.
    pub fn wealths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.wealth(i)).collect()
    }

    /// Rebalance every agent to the given stock fractions at the implied
    /// clearing price. Returns the new price. Share supply and cash totals
    /// are conserved by the clearing identity.
    pub fn rebalance(&mut self, fractions: &[f64]) -> Result<f64> {
        let price = clearing_price(fractions, self)?;
        for i in 0..self.len() {
            let wealth = self.money[i] + price * self.stock[i];
            self.stock[i] = fractions[i] * wealth / price;
            self.money[i] = (1.0 - fractions[i]) * wealth;
        }
        self.price = price;
        Ok(price)
    }

    /// One market round: every agent draws a fresh preference uniform on
    /// [0, 1) and the market rebalances. A preference draw that admits no
    /// clearing price is re-drawn (up to a retry cap, after which the error
    /// propagates); returns the new price and how many re-draws happened.
    pub fn round<R: Rng>(&mut self, rng: &mut R) -> Result<(f64, u32)> {
        let mut fractions = vec![0.0; self.len()];
        let mut redraws = 0;
        loop {
            for f in &mut fractions {
                *f = rng.random::<f64>();
            }
            match self.rebalance(&fractions) {
                Ok(price) => return Ok((price, redraws)),
                Err(err) if redraws >= 100 => return Err(err),
                Err(_) => redraws += 1,
            }
        }
    }

    /// Variant of `round` that re-draws only one random agent's preference
    /// per round; everyone else keeps the fraction implied by their current
    /// holdings.
    pub fn round_single<R: Rng>(&mut self, rng: &mut R) -> Result<(f64, u32)> {
        let mut fractions: Vec<f64> = (0..self.len())
            .map(|i| {
                let wealth = self.wealth(i);
                if wealth > 0.0 {
                    self.price * self.stock[i] / wealth
                } else {
                    0.0
                }
            })
            .collect();
        let who = rng.random_range(0..self.len());
        let mut redraws = 0;
        loop {
            fractions[who] = rng.random::<f64>();
            match self.rebalance(&fractions) {
                Ok(price) => return Ok((price, redraws)),
                Err(err) if redraws >= 100 => return Err(err),
                Err(_) => redraws += 1,
            }
        }
    }
}

/// The unique price at which desired stock holdings `f_i·w_i/p` absorb the
/// whole share supply: `p = Σf_i·m_i / (S − Σf_i·s_i)`.
pub fn clearing_price(fractions: &[f64], mkt: &MarketState) -> Result<f64> {
    if fractions.len() != mkt.len() {
        return Err(Error::param("fractions", "must match market in length"));
    }
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::param("fractions", "entries must lie in [0, 1]"));
    }
    let money_bid: f64 = fractions
        .iter()
        .zip(&mkt.money)
        .map(|(f, m)| f * m)
        .sum();
    if money_bid <= 0.0 {
        return Err(Error::NoDemand);
    }
    let stock_kept: f64 = fractions
        .iter()
        .zip(&mkt.stock)
        .map(|(f, s)| f * s)
        .sum();
    let released = mkt.total_stock() - stock_kept;
    if released <= 0.0 {
        return Err(Error::NoClearing);
    }
    Ok(money_bid / released)
}
