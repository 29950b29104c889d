//! A profit-maximizing firm embedded in the exchange economy: it borrows
//! capital, hires labor, sells its output to randomly drawn buyers, and
//! returns the capital with interest. The net effect is a many-body money
//! transfer that conserves the total.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{Population, TransferOutcome};

/// Production and market parameters of the firm.
///
/// Output is Cobb-Douglas, `Q = L^chi * K^(1-chi)`, sold against the demand
/// curve `R(Q) = v / Q^eta`, with wage `wage` per unit of labor and interest
/// rate `h` on borrowed capital. `l_max`/`k_max` bound the region in which an
/// interior optimum is accepted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirmParams {
    pub v: f64,
    pub eta: f64,
    pub chi: f64,
    pub h: f64,
    pub wage: f64,
    pub l_max: f64,
    pub k_max: f64,
}

impl FirmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v.is_finite() && self.v > 0.0) {
            return Err(Error::param("v", "must be finite and > 0"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::param("eta", "must lie in (0, 1)"));
        }
        if !(self.chi > 0.0 && self.chi < 1.0) {
            return Err(Error::param("chi", "must lie in (0, 1)"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::param("h", "must be finite and > 0"));
        }
        if !(self.wage.is_finite() && self.wage > 0.0) {
            return Err(Error::param("wage", "must be finite and > 0"));
        }
        if !(self.l_max.is_finite() && self.l_max > 0.0) {
            return Err(Error::param("l_max", "must be finite and > 0"));
        }
        if !(self.k_max.is_finite() && self.k_max > 0.0) {
            return Err(Error::param("k_max", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Interior profit maximum of `F(L, K) = v*(L^chi K^(1-chi))^(1-eta) - wage*L - h*K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirmOptimum {
    pub capital: f64,
    pub labor: f64,
    pub profit: f64,
}

/// Solve the firm's problem in closed form.
///
/// The first-order conditions give `K = L * (1-chi)*wage / (chi*h)` and then
/// a single power equation for `L`; the revenue exponent `1 - eta < 1` makes
/// the profit strictly concave, so the stationary point is the global
/// maximum. If it falls outside the `l_max`/`k_max` box the parameters admit
/// no acceptable interior optimum.
pub fn optimize_firm(params: &FirmParams) -> Result<FirmOptimum> {
    params.validate()?;
    let FirmParams {
        v,
        eta,
        chi,
        h,
        wage,
        l_max,
        k_max,
    } = *params;
    let rho = 1.0 - eta;
    // Capital per unit labor from the FOC ratio, then L from dF/dL = 0.
    let c = (1.0 - chi) * wage / (chi * h);
    let labor = (v * rho * chi * c.powf((1.0 - chi) * rho) / wage).powf(1.0 / eta);
    let capital = c * labor;
    if !(labor.is_finite() && capital.is_finite()) {
        return Err(Error::NoInteriorOptimum);
    }
    if labor > l_max || capital > k_max {
        return Err(Error::NoInteriorOptimum);
    }
    let profit = firm_profit(params, labor, capital);
    Ok(FirmOptimum {
        capital,
        labor,
        profit,
    })
}

/// Profit at an arbitrary operating point.
pub fn firm_profit(params: &FirmParams, labor: f64, capital: f64) -> f64 {
    let q = labor.powf(params.chi) * capital.powf(1.0 - params.chi);
    params.v * q.powf(1.0 - params.eta) - params.wage * labor - params.h * capital
}

/// One firm round resolved to integer headcounts: `workers` people each earn
/// one wage, `units` product units sell at `price` apiece, and the borrowed
/// capital comes back with interest. Fractional labor is rounded up (the
/// marginal hire), fractional output down (unfinished units stay with the
/// firm).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirmPlan {
    pub optimum: FirmOptimum,
    pub workers: usize,
    pub units: u64,
    pub price: f64,
    /// Wage paid to each individual worker.
    pub wage: f64,
    /// Total repayment owed to the lender: capital plus interest.
    pub repayment: f64,
}

pub fn firm_plan(params: &FirmParams) -> Result<FirmPlan> {
    let optimum = optimize_firm(params)?;
    let q = optimum.labor.powf(params.chi) * optimum.capital.powf(1.0 - params.chi);
    let price = params.v / q.powf(params.eta);
    Ok(FirmPlan {
        optimum,
        workers: optimum.labor.ceil() as usize,
        units: q.floor() as u64,
        price,
        wage: params.wage,
        repayment: optimum.capital * (1.0 + params.h),
    })
}

/// Smallest population that can stage a round: firm, lender, disjoint
/// workers and buyers.
pub fn firm_round_min_agents(plan: &FirmPlan) -> usize {
    plan.workers + plan.units as usize + 2
}

/// What happened in one firm round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirmRoundReport {
    pub outcome: TransferOutcome,
    pub workers_paid: usize,
    pub units_sold: u64,
    pub price: f64,
    pub wage_bill: f64,
    pub revenue: f64,
    pub interest: f64,
    /// Realized profit of the firm agent (revenue minus wage bill and
    /// interest); slightly below the continuous optimum because of the
    /// integer head counts.
    pub profit: f64,
}

/// Stage one complete firm round on the population.
///
/// A firm agent borrows the optimal capital from a lender, pays one wage to
/// each worker, sells the produced units to buyers drawn at random (a buyer
/// who cannot afford the price is skipped and another is drawn), and repays
/// capital plus interest. Every component payment respects the debt floor;
/// if any leg cannot complete, all balances are rolled back and the round
/// reports `Rejected`. Total money is conserved either way.
pub fn firm_round<R: Rng>(
    pop: &mut Population,
    params: &FirmParams,
    rng: &mut R,
) -> Result<FirmRoundReport> {
    let plan = firm_plan(params)?;
    firm_round_planned(pop, &plan, rng)
}

pub(crate) fn firm_round_planned<R: Rng>(
    pop: &mut Population,
    plan: &FirmPlan,
    rng: &mut R,
) -> Result<FirmRoundReport> {
    let n = pop.len();
    let need = firm_round_min_agents(plan);
    if n < need {
        return Err(Error::InvalidSize { min: need, got: n });
    }

    // Draw firm, lender candidates, workers and buyer candidates as a random
    // permutation prefix (partial Fisher-Yates).
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..n - 1 {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let firm = order[0];
    let workers = &order[1..1 + plan.workers];
    // Everyone else is a candidate lender first, buyer afterwards.
    let pool = &order[1 + plan.workers..];

    let mut journal = Journal::new(pop);
    let report_rejected = |price: f64| FirmRoundReport {
        outcome: TransferOutcome::Rejected,
        workers_paid: 0,
        units_sold: 0,
        price,
        wage_bill: 0.0,
        revenue: 0.0,
        interest: 0.0,
        profit: 0.0,
    };

    // Borrow the capital from the first pool member able to extend it.
    let mut lender = None;
    for &candidate in pool {
        journal.touch(pop, candidate);
        journal.touch(pop, firm);
        if pop.transfer(candidate, firm, plan.optimum.capital)? == TransferOutcome::Applied {
            lender = Some(candidate);
            break;
        }
    }
    let Some(lender) = lender else {
        journal.rollback(pop);
        return Ok(report_rejected(plan.price));
    };

    // Wages out of the firm's working balance.
    let mut wage_bill = 0.0;
    for &worker in workers {
        journal.touch(pop, worker);
        if pop.transfer(firm, worker, plan.wage)? == TransferOutcome::Rejected {
            journal.rollback(pop);
            return Ok(report_rejected(plan.price));
        }
        wage_bill += plan.wage;
    }

    // Sell the units to buyers who can afford them.
    let mut revenue = 0.0;
    let mut units_sold = 0u64;
    let buyers = pool.iter().copied().filter(|&a| a != lender);
    for buyer in buyers {
        if units_sold == plan.units {
            break;
        }
        journal.touch(pop, buyer);
        if pop.transfer(buyer, firm, plan.price)? == TransferOutcome::Applied {
            revenue += plan.price;
            units_sold += 1;
        }
    }
    if units_sold < plan.units {
        journal.rollback(pop);
        return Ok(report_rejected(plan.price));
    }

    // Return the capital with interest.
    if pop.transfer(firm, lender, plan.repayment)? == TransferOutcome::Rejected {
        journal.rollback(pop);
        return Ok(report_rejected(plan.price));
    }

    let interest = plan.repayment - plan.optimum.capital;
    Ok(FirmRoundReport {
        outcome: TransferOutcome::Applied,
        workers_paid: plan.workers,
        units_sold,
        price: plan.price,
        wage_bill,
        revenue,
        interest,
        profit: revenue - wage_bill - interest,
    })
}

/// Undo log: original balances of every agent a round has touched, restored
/// verbatim on rollback so aborted rounds are exact no-ops.
struct Journal {
    entries: Vec<(usize, f64)>,
    touched: Vec<bool>,
}

impl Journal {
    fn new(pop: &Population) -> Self {
        Self {
            entries: Vec::new(),
            touched: vec![false; pop.len()],
        }
    }

    fn touch(&mut self, pop: &Population, agent: usize) {
        if !self.touched[agent] {
            self.touched[agent] = true;
            self.entries.push((agent, pop.balances()[agent]));
        }
    }

    fn rollback(&self, pop: &mut Population) {
        let balances = pop.balances_mut();
        for &(agent, original) in &self.entries {
            balances[agent] = original;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> FirmParams {
        FirmParams {
            v: 10.0,
            eta: 0.5,
            chi: 0.5,
            h: 0.1,
            wage: 1.0,
            l_max: 100.0,
            k_max: 1000.0,
        }
    }

    /// Analytic gradient of the profit function.
    fn gradient(p: &FirmParams, labor: f64, capital: f64) -> (f64, f64) {
        let rho = 1.0 - p.eta;
        let q = labor.powf(p.chi) * capital.powf(1.0 - p.chi);
        let revenue = p.v * q.powf(rho);
        (
            rho * p.chi * revenue / labor - p.wage,
            rho * (1.0 - p.chi) * revenue / capital - p.h,
        )
    }

    #[test]
    fn first_order_conditions_vanish_at_the_optimum() {
        for (eta, chi, h, wage) in [
            (0.5, 0.5, 0.1, 1.0),
            (0.3, 0.7, 0.25, 2.0),
            (0.8, 0.2, 0.05, 0.5),
        ] {
            let p = FirmParams {
                v: 10.0,
                eta,
                chi,
                h,
                wage,
                l_max: 1e9,
                k_max: 1e9,
            };
            let opt = optimize_firm(&p).unwrap();
            assert!(opt.profit > 0.0);
            let (dl, dk) = gradient(&p, opt.labor, opt.capital);
            assert!(
                dl.abs() < 1e-6 * opt.profit && dk.abs() < 1e-6 * opt.profit,
                "gradient ({dl}, {dk}) at profit {}",
                opt.profit
            );
        }
    }

    #[test]
    fn optimum_matches_refined_grid_search() {
        let p = params();
        let mut lo = (1e-3, 1e-3);
        let mut hi = (p.l_max, p.k_max);
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for _round in 0..3 {
            for i in 0..=200u32 {
                for j in 0..=200u32 {
                    let l = lo.0 + (hi.0 - lo.0) * i as f64 / 200.0;
                    let k = lo.1 + (hi.1 - lo.1) * j as f64 / 200.0;
                    if l <= 0.0 || k <= 0.0 {
                        continue;
                    }
                    let f = firm_profit(&p, l, k);
                    if f > best.2 {
                        best = (l, k, f);
                    }
                }
            }
            // Refine around the incumbent.
            let wl = (hi.0 - lo.0) / 20.0;
            let wk = (hi.1 - lo.1) / 20.0;
            lo = ((best.0 - wl).max(1e-3), (best.1 - wk).max(1e-3));
            hi = (best.0 + wl, best.1 + wk);
        }
        let opt = optimize_firm(&p).unwrap();
        assert!((opt.labor - best.0).abs() / best.0 < 5e-3, "L {} vs {}", opt.labor, best.0);
        assert!((opt.capital - best.1).abs() / best.1 < 5e-3, "K {} vs {}", opt.capital, best.1);
        assert!((opt.profit - best.2).abs() / best.2 < 5e-3, "F {} vs {}", opt.profit, best.2);
    }

    #[test]
    fn higher_wage_means_less_labor() {
        let p = params();
        let mut dear = p;
        dear.wage = 2.0;
        let cheap = optimize_firm(&p).unwrap();
        let costly = optimize_firm(&dear).unwrap();
        assert!(costly.labor < cheap.labor);
    }

    #[test]
    fn optimum_outside_bounds_is_refused() {
        let mut p = params();
        p.l_max = 5.0; // interior optimum needs ~20 units of labor
        assert!(matches!(optimize_firm(&p), Err(Error::NoInteriorOptimum)));
        let mut p = params();
        p.k_max = 50.0;
        assert!(matches!(optimize_firm(&p), Err(Error::NoInteriorOptimum)));
    }

    #[test]
    fn round_conserves_money_and_reports_consistently() {
        let p = params();
        // Balances must let at least one agent front the optimal capital.
        let mut pop = Population::new(100, 250.0).unwrap();
        let before = pop.total_money();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let report = firm_round(&mut pop, &p, &mut rng).unwrap();
        assert_eq!(report.outcome, TransferOutcome::Applied);
        let plan = firm_plan(&p).unwrap();
        assert_eq!(report.workers_paid, plan.workers);
        assert_eq!(report.units_sold, plan.units);
        assert!((report.revenue - plan.units as f64 * plan.price).abs() < 1e-9);
        assert!(report.profit > 0.0);
        let after = pop.total_money();
        assert!((after - before).abs() / before < 1e-12);
        assert!(pop.balances().iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn aborted_round_rolls_back_exactly() {
        let p = params();
        // One agent can lend the capital, but nobody can afford the product,
        // so the round must abort after wages were already paid out.
        let mut balances = vec![0.5; 100];
        balances[37] = 10_000.0;
        let mut pop = Population::from_balances(balances.clone(), 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let report = firm_round(&mut pop, &p, &mut rng).unwrap();
        assert_eq!(report.outcome, TransferOutcome::Rejected);
        assert_eq!(pop.balances(), balances.as_slice());
    }

    #[test]
    fn round_needs_enough_agents() {
        let p = params();
        let plan = firm_plan(&p).unwrap();
        let need = firm_round_min_agents(&plan);
        let mut pop = Population::new(need - 1, 100.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            firm_round(&mut pop, &p, &mut rng),
            Err(Error::InvalidSize { .. })
        ));
    }

    #[test]
    fn long_run_of_firm_rounds_stays_at_the_same_total() {
        let p = params();
        let mut pop = Population::new(200, 250.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut applied = 0;
        for _ in 0..500 {
            if firm_round(&mut pop, &p, &mut rng).unwrap().outcome == TransferOutcome::Applied {
                applied += 1;
            }
        }
        assert!(applied > 400, "only {applied} rounds applied");
        let total = pop.total_money();
        assert!((total - 50_000.0).abs() / 50_000.0 < 1e-9);
    }
}
