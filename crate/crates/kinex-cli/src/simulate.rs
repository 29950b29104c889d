//! The `simulate` subcommand: one flag surface for every model, emitting
//! snapshot CSVs, an entropy trajectory, and a rerunnable manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kinex::io;
use kinex::kinetics::{entropy_edges, run_kinetics, splitmix64};
use kinex::{
    Binning, ExchangeRule, FirmParams, Histogram, KestenParams, KestenWalkers, MarketState,
    Population, RelativeWealthState, ReserveEconomy, SimConfig, SlaninaModel,
};

use crate::config::{resolve_out, Overlay};
use crate::manifest::{file_digest, RunManifest, ARTIFACT_VERSION};
use crate::{runtime, usage, AppResult};

/// Config keys accepted by `simulate`, mirroring the long flag names.
const SIMULATE_KEYS: &[&str] = &[
    "model",
    "agents",
    "steps",
    "seed",
    "m0",
    "delta",
    "gamma",
    "lambda",
    "debt-limit",
    "reserve-ratio",
    "J",
    "sigma2",
    "zeta",
    "dt",
    "a0",
    "a",
    "b0",
    "b",
    "stock0",
    "price0",
    "v",
    "eta",
    "chi",
    "h",
    "wage",
    "l-max",
    "k-max",
    "snapshots",
    "replicas",
    "out",
];

#[derive(Args)]
pub struct SimulateArgs {
    /// Flat key=value config file; explicit flags override its entries
    #[arg(long, value_name = "FILE", conflicts_with = "from_manifest")]
    pub config: Option<PathBuf>,
    /// Rerun the resolved configuration recorded in an earlier manifest
    #[arg(long, value_name = "FILE")]
    pub from_manifest: Option<PathBuf>,
    /// fixed | frac-avg | pair-sum | proportional | saving | random-saving |
    /// directed | firm | reserve | silver | bm | slanina | kesten
    #[arg(long)]
    pub model: Option<String>,
    /// Number of agents (walkers for kesten)
    #[arg(long)]
    pub agents: Option<usize>,
    /// Steps to run: exchange events for pairwise models, sweeps otherwise
    #[arg(long)]
    pub steps: Option<u64>,
    /// RNG seed; identical seeds give byte-identical outputs
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial money per agent (base money per agent for reserve)
    #[arg(long)]
    pub m0: Option<f64>,
    /// Transfer amount for fixed exchange (also the directed/firm base rule)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Transfer fraction: payer share for proportional, Slanina coupling
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Saving propensity for the saving rule
    #[arg(long)]
    pub lambda: Option<f64>,
    /// How far below zero a balance may go
    #[arg(long)]
    pub debt_limit: Option<f64>,
    /// Required reserve ratio for the lending model
    #[arg(long)]
    pub reserve_ratio: Option<f64>,
    /// Redistribution strength for bm
    #[arg(long = "J")]
    pub j: Option<f64>,
    /// Multiplicative noise variance for bm
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Growth rate per trade for slanina
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Euler time step for bm and kesten
    #[arg(long)]
    pub dt: Option<f64>,
    /// Additive drift for kesten
    #[arg(long)]
    pub a0: Option<f64>,
    /// Multiplicative drift for kesten
    #[arg(long)]
    pub a: Option<f64>,
    /// Additive diffusion for kesten
    #[arg(long)]
    pub b0: Option<f64>,
    /// Multiplicative diffusion for kesten
    #[arg(long)]
    pub b: Option<f64>,
    /// Initial stock per agent for silver
    #[arg(long)]
    pub stock0: Option<f64>,
    /// Initial clearing price for silver
    #[arg(long)]
    pub price0: Option<f64>,
    /// Firm output price
    #[arg(long)]
    pub v: Option<f64>,
    /// Firm labor exponent
    #[arg(long)]
    pub eta: Option<f64>,
    /// Firm capital exponent
    #[arg(long)]
    pub chi: Option<f64>,
    /// Firm capital cost rate
    #[arg(long)]
    pub h: Option<f64>,
    /// Firm wage
    #[arg(long)]
    pub wage: Option<f64>,
    /// Firm labor pool bound
    #[arg(long)]
    pub l_max: Option<f64>,
    /// Firm capital bound
    #[arg(long)]
    pub k_max: Option<f64>,
    /// Evenly spaced snapshot count; the final state is always included
    #[arg(long)]
    pub snapshots: Option<u64>,
    /// Independent replicas in replica-NNN subdirectories, seeds split
    /// deterministically from --seed
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Output directory (also settable via KINEX_OUT_DIR)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Model {
    Fixed,
    FracAvg,
    PairSum,
    Proportional,
    Saving,
    RandomSaving,
    Directed,
    Firm,
    Reserve,
    Silver,
    Bm,
    Slanina,
    Kesten,
}

impl Model {
    fn parse(name: &str) -> AppResult<Model> {
        Ok(match name {
            "fixed" => Model::Fixed,
            "frac-avg" => Model::FracAvg,
            "pair-sum" => Model::PairSum,
            "proportional" => Model::Proportional,
            "saving" => Model::Saving,
            "random-saving" => Model::RandomSaving,
            "directed" => Model::Directed,
            "firm" => Model::Firm,
            "reserve" => Model::Reserve,
            "silver" => Model::Silver,
            "bm" => Model::Bm,
            "slanina" => Model::Slanina,
            "kesten" => Model::Kesten,
            other => return Err(usage(format!("unknown model {other:?}"))),
        })
    }

    fn as_str(self) -> &'static str {
        match self {
            Model::Fixed => "fixed",
            Model::FracAvg => "frac-avg",
            Model::PairSum => "pair-sum",
            Model::Proportional => "proportional",
            Model::Saving => "saving",
            Model::RandomSaving => "random-saving",
            Model::Directed => "directed",
            Model::Firm => "firm",
            Model::Reserve => "reserve",
            Model::Silver => "silver",
            Model::Bm => "bm",
            Model::Slanina => "slanina",
            Model::Kesten => "kesten",
        }
    }
}

/// Every simulate parameter after precedence resolution. Parameters the
/// chosen model does not consume stay at their defaults and are echoed into
/// the manifest anyway, so a rerun always resolves identically.
#[derive(Clone)]
struct SimulateSpec {
    model: Model,
    agents: usize,
    steps: u64,
    seed: u64,
    m0: f64,
    delta: f64,
    gamma: f64,
    lambda: f64,
    debt_limit: f64,
    reserve_ratio: f64,
    j: f64,
    sigma2: f64,
    zeta: f64,
    dt: f64,
    a0: f64,
    a: f64,
    b0: f64,
    b: f64,
    stock0: f64,
    price0: f64,
    v: f64,
    eta: f64,
    chi: f64,
    h: f64,
    wage: f64,
    l_max: f64,
    k_max: f64,
    snapshots: u64,
}

impl SimulateSpec {
    fn resolve(args: &SimulateArgs, overlay: &Overlay) -> AppResult<SimulateSpec> {
        let model_name = match &args.model {
            Some(name) => name.clone(),
            None => overlay
                .raw("model")
                .map(str::to_string)
                .ok_or_else(|| usage("--model is required"))?,
        };
        let model = Model::parse(&model_name)?;
        let gamma_default = if model == Model::Slanina { 0.05 } else { 1.0 / 3.0 };
        let dt_default = if model == Model::Kesten { 0.002 } else { 0.01 };
        let spec = SimulateSpec {
            model,
            agents: overlay.resolve(args.agents, "agents", 500)?,
            steps: overlay.resolve(args.steps, "steps", 1_000_000)?,
            seed: overlay.resolve(args.seed, "seed", 0)?,
            m0: overlay.resolve(args.m0, "m0", 1_000.0)?,
            delta: overlay.resolve(args.delta, "delta", 1.0)?,
            gamma: overlay.resolve(args.gamma, "gamma", gamma_default)?,
            lambda: overlay.resolve(args.lambda, "lambda", 0.25)?,
            debt_limit: overlay.resolve(args.debt_limit, "debt-limit", 0.0)?,
            reserve_ratio: overlay.resolve(args.reserve_ratio, "reserve-ratio", 0.8)?,
            j: overlay.resolve(args.j, "J", 0.5)?,
            sigma2: overlay.resolve(args.sigma2, "sigma2", 0.25)?,
            zeta: overlay.resolve(args.zeta, "zeta", 0.02)?,
            dt: overlay.resolve(args.dt, "dt", dt_default)?,
            a0: overlay.resolve(args.a0, "a0", 1.0)?,
            a: overlay.resolve(args.a, "a", 1.0)?,
            b0: overlay.resolve(args.b0, "b0", 1.0)?,
            b: overlay.resolve(args.b, "b", 0.5)?,
            stock0: overlay.resolve(args.stock0, "stock0", 1.0)?,
            price0: overlay.resolve(args.price0, "price0", 1.0)?,
            v: overlay.resolve(args.v, "v", 10.0)?,
            eta: overlay.resolve(args.eta, "eta", 0.5)?,
            chi: overlay.resolve(args.chi, "chi", 0.5)?,
            h: overlay.resolve(args.h, "h", 0.1)?,
            wage: overlay.resolve(args.wage, "wage", 1.0)?,
            l_max: overlay.resolve(args.l_max, "l-max", 100.0)?,
            k_max: overlay.resolve(args.k_max, "k-max", 1_000.0)?,
            snapshots: overlay.resolve(args.snapshots, "snapshots", 0)?,
        };
        if spec.steps == 0 {
            return Err(usage("--steps must be >= 1"));
        }
        Ok(spec)
    }

    /// Canonical string echo, keyed by flag name; `{}` on floats prints the
    /// shortest digits that parse back to the same value.
    fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        put("model", self.model.as_str().to_string());
        put("agents", self.agents.to_string());
        put("steps", self.steps.to_string());
        put("seed", self.seed.to_string());
        put("m0", self.m0.to_string());
        put("delta", self.delta.to_string());
        put("gamma", self.gamma.to_string());
        put("lambda", self.lambda.to_string());
        put("debt-limit", self.debt_limit.to_string());
        put("reserve-ratio", self.reserve_ratio.to_string());
        put("J", self.j.to_string());
        put("sigma2", self.sigma2.to_string());
        put("zeta", self.zeta.to_string());
        put("dt", self.dt.to_string());
        put("a0", self.a0.to_string());
        put("a", self.a.to_string());
        put("b0", self.b0.to_string());
        put("b", self.b.to_string());
        put("stock0", self.stock0.to_string());
        put("price0", self.price0.to_string());
        put("v", self.v.to_string());
        put("eta", self.eta.to_string());
        put("chi", self.chi.to_string());
        put("h", self.h.to_string());
        put("wage", self.wage.to_string());
        put("l-max", self.l_max.to_string());
        put("k-max", self.k_max.to_string());
        put("snapshots", self.snapshots.to_string());
        map
    }
}

pub fn run(args: &SimulateArgs) -> AppResult<()> {
    let overlay = if let Some(path) = &args.from_manifest {
        let manifest = RunManifest::load(path)?;
        if manifest.command != "simulate" {
            return Err(usage(format!(
                "manifest records a {:?} run, not simulate",
                manifest.command
            )));
        }
        Overlay::from_entries(manifest.config)
    } else if let Some(path) = &args.config {
        Overlay::from_file(path)?
    } else {
        Overlay::empty()
    };
    overlay.check_keys(SIMULATE_KEYS)?;
    let spec = SimulateSpec::resolve(args, &overlay)?;
    let out = resolve_out(args.out.clone(), &overlay);
    let replicas: u64 = overlay.resolve(args.replicas, "replicas", 1)?;
    if replicas == 0 {
        return Err(usage("--replicas must be >= 1"));
    }

    if replicas == 1 {
        run_one(&spec, &out)
    } else {
        for k in 0..replicas {
            let mut child = spec.clone();
            child.seed = replica_seed(spec.seed, k);
            run_one(&child, &out.join(format!("replica-{k:03}")))?;
        }
        Ok(())
    }
}

/// Replica seeds are consecutive outputs of the splitmix64 stream seeded at
/// the base seed, so each replica is decorrelated yet fully determined by
/// (seed, index).
fn replica_seed(seed: u64, k: u64) -> u64 {
    splitmix64(seed.wrapping_add((k + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn run_one(spec: &SimulateSpec, out: &Path) -> AppResult<()> {
    std::fs::create_dir_all(out).map_err(runtime)?;
    let started = Instant::now();
    let emitted = drive(spec, out)?;
    let mut files = BTreeMap::new();
    for name in emitted {
        let digest = file_digest(&out.join(&name))?;
        files.insert(name, digest);
    }
    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        command: "simulate".into(),
        config: spec.echo(),
        seed: spec.seed,
        files,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        steps_done: spec.steps,
    };
    let path = out.join("manifest.json");
    manifest.save(&path)?;
    println!("{}", path.display());
    Ok(())
}

fn drive(spec: &SimulateSpec, out: &Path) -> AppResult<Vec<String>> {
    match spec.model {
        Model::Reserve => {
            let eco = ReserveEconomy::new(
                spec.agents,
                spec.m0 * spec.agents as f64,
                spec.reserve_ratio,
                spec.seed,
            )
            .map_err(usage)?;
            // Entropy cadence matches the pairwise models: once per N events.
            drive_stepped(spec, out, &mut ReserveDriver { eco }, spec.agents as u64)
        }
        Model::Silver => {
            let mkt = MarketState::new(
                vec![spec.m0; spec.agents],
                vec![spec.stock0; spec.agents],
                spec.price0,
            )
            .map_err(usage)?;
            let rng = ChaCha8Rng::seed_from_u64(spec.seed);
            drive_stepped(spec, out, &mut SilverDriver { mkt, rng }, sweep_stride(spec.steps))
        }
        Model::Bm => {
            let state = RelativeWealthState::new(spec.agents, spec.j, spec.sigma2).map_err(usage)?;
            // Probe one sweep on a clone so a too-coarse dt fails as a flag
            // error instead of mid-run.
            let mut probe = state.clone();
            probe
                .bm_step(spec.dt, &mut ChaCha8Rng::seed_from_u64(0))
                .map_err(usage)?;
            let rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut driver = BmDriver {
                state,
                rng,
                dt: spec.dt,
            };
            drive_stepped(spec, out, &mut driver, sweep_stride(spec.steps))
        }
        Model::Slanina => {
            let model = SlaninaModel::new(spec.agents, spec.gamma, spec.zeta).map_err(usage)?;
            let rng = ChaCha8Rng::seed_from_u64(spec.seed);
            drive_stepped(spec, out, &mut SlaninaDriver { model, rng }, sweep_stride(spec.steps))
        }
        Model::Kesten => {
            let params = KestenParams {
                a0: spec.a0,
                a: spec.a,
                b0: spec.b0,
                b: spec.b,
            };
            let walkers =
                KestenWalkers::new(&params, spec.agents, spec.dt, spec.seed).map_err(usage)?;
            drive_stepped(spec, out, &mut KestenDriver { walkers }, sweep_stride(spec.steps))
        }
        _ => drive_kinetics(spec, out),
    }
}

fn exchange_rule(spec: &SimulateSpec) -> ExchangeRule {
    match spec.model {
        Model::Fixed => ExchangeRule::FixedAmount { amount: spec.delta },
        Model::FracAvg => ExchangeRule::RandomFractionOfAverage,
        Model::PairSum => ExchangeRule::RandomFractionOfPairSum,
        Model::Proportional => ExchangeRule::Proportional { gamma: spec.gamma },
        Model::Saving => ExchangeRule::SavingPropensity {
            lambda: spec.lambda,
        },
        Model::RandomSaving => ExchangeRule::RandomSavingPropensity,
        Model::Directed => ExchangeRule::DirectedLinks {
            base: Box::new(ExchangeRule::FixedAmount { amount: spec.delta }),
        },
        Model::Firm => ExchangeRule::FirmRound {
            firm: FirmParams {
                v: spec.v,
                eta: spec.eta,
                chi: spec.chi,
                h: spec.h,
                wage: spec.wage,
                l_max: spec.l_max,
                k_max: spec.k_max,
            },
            base: Some(Box::new(ExchangeRule::RandomFractionOfAverage)),
        },
        _ => unreachable!("not a pairwise-exchange model"),
    }
}

fn drive_kinetics(spec: &SimulateSpec, out: &Path) -> AppResult<Vec<String>> {
    let config = SimConfig {
        n_agents: spec.agents,
        initial_balance: spec.m0,
        rule: exchange_rule(spec),
        debt_limit: spec.debt_limit,
        n_steps: spec.steps,
        seed: spec.seed,
        snapshot_schedule: schedule(spec.steps, spec.snapshots),
    };
    config.validate().map_err(usage)?;
    let run = run_kinetics(&config).map_err(runtime)?;
    let mut files = Vec::new();
    for snap in &run.snapshots {
        let name = format!("snapshot-{}.csv", snap.step);
        io::write_balances_csv(&out.join(&name), &snap.balances).map_err(runtime)?;
        files.push(name);
    }
    let series: Vec<(u64, f64)> = run.entropy.iter().map(|p| (p.step, p.entropy)).collect();
    io::write_entropy_csv(&out.join("entropy.csv"), &series).map_err(runtime)?;
    files.push("entropy.csv".into());
    Ok(files)
}

/// Snapshot steps: `snapshots` evenly spaced checkpoints, with the final
/// state always included.
fn schedule(steps: u64, snapshots: u64) -> Vec<u64> {
    let mut at: Vec<u64> = (1..=snapshots)
        .map(|j| ((steps as u128 * j as u128) / snapshots as u128) as u64)
        .filter(|&s| s > 0)
        .collect();
    at.push(steps);
    at.dedup();
    at
}

/// Entropy rows for sweep-stepped models, capped near 2000 so long runs do
/// not drown the trajectory file.
fn sweep_stride(steps: u64) -> u64 {
    (steps / 2_000).max(1)
}

/// A model the CLI advances step by step, as opposed to the pairwise
/// kinetics engine which runs whole. One `advance` is one CLI step.
trait SteppedModel {
    fn advance(&mut self) -> kinex::Result<()>;
    fn values(&self) -> kinex::Result<Vec<f64>>;
    fn write_snapshot(&self, path: &Path) -> kinex::Result<()>;
    /// Initial state as a population, for the fixed entropy binning.
    fn population(&self) -> kinex::Result<Population> {
        Population::from_balances(self.values()?, 0.0)
    }
}

struct ReserveDriver {
    eco: ReserveEconomy,
}

impl SteppedModel for ReserveDriver {
    fn advance(&mut self) -> kinex::Result<()> {
        self.eco.step();
        Ok(())
    }
    fn values(&self) -> kinex::Result<Vec<f64>> {
        Ok(self.eco.population()?.balances().to_vec())
    }
    fn write_snapshot(&self, path: &Path) -> kinex::Result<()> {
        io::write_balances_csv(path, self.eco.population()?.balances())
    }
    fn population(&self) -> kinex::Result<Population> {
        self.eco.population()
    }
}

struct SilverDriver {
    mkt: MarketState,
    rng: ChaCha8Rng,
}

impl SteppedModel for SilverDriver {
    fn advance(&mut self) -> kinex::Result<()> {
        self.mkt.round(&mut self.rng).map(|_| ())
    }
    fn values(&self) -> kinex::Result<Vec<f64>> {
        Ok(self.mkt.wealths())
    }
    fn write_snapshot(&self, path: &Path) -> kinex::Result<()> {
        io::write_market_csv(path, &self.mkt)
    }
}

struct BmDriver {
    state: RelativeWealthState,
    rng: ChaCha8Rng,
    dt: f64,
}

impl SteppedModel for BmDriver {
    fn advance(&mut self) -> kinex::Result<()> {
        self.state.bm_step(self.dt, &mut self.rng)
    }
    fn values(&self) -> kinex::Result<Vec<f64>> {
        Ok(self.state.w_tilde().to_vec())
    }
    fn write_snapshot(&self, path: &Path) -> kinex::Result<()> {
        io::write_relative_csv(path, self.state.w_tilde())
    }
}

struct SlaninaDriver {
    model: SlaninaModel,
    rng: ChaCha8Rng,
}

impl SteppedModel for SlaninaDriver {
    fn advance(&mut self) -> kinex::Result<()> {
        self.model.step(&mut self.rng);
        Ok(())
    }
    fn values(&self) -> kinex::Result<Vec<f64>> {
        Ok(self.model.relative_wealths())
    }
    fn write_snapshot(&self, path: &Path) -> kinex::Result<()> {
        io::write_relative_csv(path, &self.model.relative_wealths())
    }
}

struct KestenDriver {
    walkers: KestenWalkers,
}

impl SteppedModel for KestenDriver {
    fn advance(&mut self) -> kinex::Result<()> {
        self.walkers.step();
        Ok(())
    }
    fn values(&self) -> kinex::Result<Vec<f64>> {
        Ok(self.walkers.incomes().to_vec())
    }
    fn write_snapshot(&self, path: &Path) -> kinex::Result<()> {
        io::write_values_csv(path, self.walkers.incomes())
    }
}

fn drive_stepped(
    spec: &SimulateSpec,
    out: &Path,
    model: &mut dyn SteppedModel,
    stride: u64,
) -> AppResult<Vec<String>> {
    let binning = Binning::Edges(entropy_edges(&model.population().map_err(runtime)?));
    let stride = stride.max(1);
    let mut entropy: Vec<(u64, f64)> = Vec::new();
    let mut record = |step: u64, values: &[f64]| -> AppResult<()> {
        let hist = Histogram::from_samples(values, &binning).map_err(runtime)?;
        entropy.push((step, hist.entropy()));
        Ok(())
    };
    record(0, &model.values().map_err(runtime)?)?;

    let plan = schedule(spec.steps, spec.snapshots);
    let mut next = plan.iter().copied().peekable();
    let mut files = Vec::new();
    for step in 1..=spec.steps {
        model.advance().map_err(runtime)?;
        let snap_due = next.peek().copied() == Some(step);
        let ent_due = step % stride == 0 || step == spec.steps;
        if !(snap_due || ent_due) {
            continue;
        }
        if ent_due {
            record(step, &model.values().map_err(runtime)?)?;
        }
        if snap_due {
            next.next();
            let name = format!("snapshot-{step}.csv");
            model.write_snapshot(&out.join(&name)).map_err(runtime)?;
            files.push(name);
        }
    }
    io::write_entropy_csv(&out.join("entropy.csv"), &entropy).map_err(runtime)?;
    files.push("entropy.csv".into());
    Ok(files)
}
