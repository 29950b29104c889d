//! Kinetic-exchange economy laboratory.
//!
//! `kinex` simulates ensembles of agents trading money under conservative
//! pairwise rules (with optional debt, saving propensities, firms, and
//! bank-mediated lending), plus market and multiplicative-growth models, and
//! provides the analytic machinery to test the resulting distributions:
//! closed-form laws, a stationary drift/diffusion solver, entropy and Lorenz
//! diagnostics, and estimators for temperatures and tail exponents.

pub mod error;
pub mod exact;
pub mod firm;
pub mod fokker_planck;
pub mod growth;
pub mod io;
pub mod kesten;
pub mod kinetics;
pub mod laws;
pub mod market;
pub mod population;
pub mod quad;
pub mod reserve;
pub mod stats;
pub mod symmetry;
pub mod two_class;

pub use error::{Error, Result};
pub use exact::CentPopulation;
pub use firm::{FirmOptimum, FirmParams, FirmRoundReport};
pub use growth::{RelativeWealthState, SlaninaModel};
pub use kesten::{income_kesten_simulate, KestenParams, KestenWalkers};
pub use kinetics::{ExchangeRule, Kinetics, KineticsRun, SimConfig, Snapshot, StepEvent};
pub use laws::DistributionLaw;
pub use market::MarketState;
pub use population::{Money, Population, TransferOutcome};
pub use reserve::ReserveEconomy;
pub use stats::{Binning, Histogram, KsLevel, LorenzCurve};
pub use symmetry::{SymmetrySettings, TransitionSymmetryReport};
pub use two_class::{
    lorenz_from_binned, two_class_decompose, two_class_decompose_binned, TwoClassReport,
};
