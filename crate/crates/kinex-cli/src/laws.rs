//! The `laws` subcommand: evaluate an analytic law on an even grid and
//! write (r, pdf, ccdf) plot data.

use std::path::PathBuf;

use clap::Args;

use kinex::io;
use kinex::DistributionLaw;

use crate::config::{resolve_out, Overlay};
use crate::{runtime, usage, AppResult};

/// Config keys accepted by `laws`, mirroring the long flag names.
const LAWS_KEYS: &[&str] = &["law", "T", "floor", "beta", "kappa", "r0", "ab", "grid", "out"];

#[derive(Args)]
pub struct LawsArgs {
    /// Flat key=value config file; explicit flags override its entries
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Law to tabulate: exp | gamma | bm | arctan | family
    #[arg(long)]
    pub law: Option<String>,
    /// Temperature for exp, gamma, arctan, family
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Lower support edge (debt floor) for exp
    #[arg(long)]
    pub floor: Option<f64>,
    /// Shape correction for gamma
    #[arg(long)]
    pub beta: Option<f64>,
    /// Shape parameter for bm
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Crossover scale for arctan
    #[arg(long)]
    pub r0: Option<f64>,
    /// Drift ratio for arctan
    #[arg(long)]
    pub ab: Option<f64>,
    /// Evaluation grid as lo:hi:n
    #[arg(long)]
    pub grid: Option<String>,
    /// Output directory (also settable via KINEX_OUT_DIR)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

pub fn run(args: &LawsArgs) -> AppResult<()> {
    let overlay = match &args.config {
        Some(path) => Overlay::from_file(path)?,
        None => Overlay::empty(),
    };
    overlay.check_keys(LAWS_KEYS)?;
    let name = match &args.law {
        Some(name) => name.clone(),
        None => overlay
            .raw("law")
            .map(str::to_string)
            .ok_or_else(|| usage("--law is required"))?,
    };
    let temperature = overlay.resolve(args.t, "T", 1.0)?;
    let floor = overlay.resolve(args.floor, "floor", 0.0)?;
    let beta = overlay.resolve(args.beta, "beta", 1.0)?;
    let kappa = overlay.resolve(args.kappa, "kappa", 2.0)?;
    let r0 = overlay.resolve(args.r0, "r0", 1.0)?;
    let ab = overlay.resolve(args.ab, "ab", 1.0)?;
    let grid_raw = match &args.grid {
        Some(raw) => raw.clone(),
        None => overlay.raw("grid").unwrap_or("0:10:201").to_string(),
    };
    let grid = parse_grid(&grid_raw)?;

    let law = match name.as_str() {
        "exp" => DistributionLaw::Exponential { temperature, floor },
        "gamma" => DistributionLaw::Gamma { beta, temperature },
        "bm" => DistributionLaw::InverseGammaBm { kappa },
        "arctan" => DistributionLaw::ArctanInterpolating {
            temperature,
            crossover: r0,
            ab_ratio: ab,
        },
        "family" => DistributionLaw::FamilyIncome { temperature },
        other => return Err(usage(format!("unknown law {other:?}"))),
    };
    law.validate().map_err(usage)?;

    let rows: Vec<(f64, f64, f64)> = grid.iter().map(|&r| (r, law.pdf(r), law.ccdf(r))).collect();
    let out = resolve_out(args.out.clone(), &overlay);
    std::fs::create_dir_all(&out).map_err(runtime)?;
    let path = out.join(format!("law-{name}.csv"));
    io::write_curve_csv(&path, &rows).map_err(runtime)?;
    println!("{}", path.display());
    Ok(())
}

fn parse_grid(raw: &str) -> AppResult<Vec<f64>> {
    let bad = || usage(format!("grid must be lo:hi:n with hi > lo and n >= 2, got {raw:?}"));
    let parts: Vec<&str> = raw.split(':').collect();
    let [lo_raw, hi_raw, n_raw] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo_raw.parse().map_err(|_| bad())?;
    let hi: f64 = hi_raw.parse().map_err(|_| bad())?;
    let n: usize = n_raw.parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) || n < 2 {
        return Err(bad());
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}
