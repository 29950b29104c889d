//! The `analyze` subcommand: law fits, Lorenz curves, and Gini values from
//! sample files or cumulative (lower_bound, cum_count) tables.

use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Value};

use kinex::io;
use kinex::stats::{
    fit_gamma_moments, fit_pareto_hill, fit_shifted_exponential, gini_empirical, ks_statistic,
    ks_statistic_fn, lorenz_empirical,
};
use kinex::{lorenz_from_binned, two_class_decompose, two_class_decompose_binned, DistributionLaw};

use crate::config::{resolve_out, Overlay};
use crate::{runtime, usage, AppResult};

/// Config keys accepted by `analyze`, mirroring the long flag names.
const ANALYZE_KEYS: &[&str] = &["input", "binned", "fit", "xmin", "lorenz", "gini", "out"];

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Flat key=value config file; explicit flags override its entries
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Sample CSV, or a cumulative table with --binned
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Read the input as a (lower_bound, cum_count) table
    #[arg(long)]
    pub binned: bool,
    /// Law to fit: exp | gamma | pareto | two-class
    #[arg(long)]
    pub fit: Option<String>,
    /// Tail cutoff for the pareto fit
    #[arg(long)]
    pub xmin: Option<f64>,
    /// Also write the Lorenz curve as lorenz.csv
    #[arg(long)]
    pub lorenz: bool,
    /// Also report the Gini coefficient
    #[arg(long)]
    pub gini: bool,
    /// Output directory (also settable via KINEX_OUT_DIR)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

pub fn run(args: &AnalyzeArgs) -> AppResult<()> {
    let overlay = match &args.config {
        Some(path) => Overlay::from_file(path)?,
        None => Overlay::empty(),
    };
    overlay.check_keys(ANALYZE_KEYS)?;
    let input: PathBuf = overlay
        .resolve_opt(args.input.clone(), "input")?
        .ok_or_else(|| usage("--input is required"))?;
    let binned = overlay.resolve_switch(args.binned, "binned")?;
    let fit = match &args.fit {
        Some(kind) => Some(kind.clone()),
        None => overlay.raw("fit").map(str::to_string),
    };
    let xmin = overlay.resolve_opt(args.xmin, "xmin")?;
    let lorenz = overlay.resolve_switch(args.lorenz, "lorenz")?;
    let gini = overlay.resolve_switch(args.gini, "gini")?;
    let out = resolve_out(args.out.clone(), &overlay);

    if fit.is_none() && !lorenz && !gini {
        return Err(usage("nothing to do: pass --fit, --lorenz, and/or --gini"));
    }
    std::fs::create_dir_all(&out).map_err(runtime)?;

    let mut report = serde_json::Map::new();
    if binned {
        let rows = io::read_binned_csv(&input).map_err(usage)?;
        report.insert("input_kind".into(), json!("binned"));
        report.insert("rows".into(), json!(rows.len()));
        if let Some(kind) = &fit {
            if kind != "two-class" {
                return Err(usage("--binned tables support only --fit two-class"));
            }
            let tc = two_class_decompose_binned(&rows).map_err(usage)?;
            report.insert("fit".into(), tagged("two-class", &tc)?);
        }
        if lorenz || gini {
            let curve = lorenz_from_binned(&rows).map_err(usage)?;
            if gini {
                report.insert("gini".into(), json!(curve.gini()));
            }
            if lorenz {
                io::write_lorenz_csv(&out.join("lorenz.csv"), &curve).map_err(runtime)?;
            }
        }
    } else {
        let samples = io::read_values_csv(&input).map_err(usage)?;
        report.insert("input_kind".into(), json!("samples"));
        report.insert("rows".into(), json!(samples.len()));
        if let Some(kind) = &fit {
            report.insert("fit".into(), fit_samples(kind, &samples, xmin)?);
        }
        if gini {
            report.insert("gini".into(), json!(gini_empirical(&samples).map_err(usage)?));
        }
        if lorenz {
            let curve = lorenz_empirical(&samples).map_err(usage)?;
            io::write_lorenz_csv(&out.join("lorenz.csv"), &curve).map_err(runtime)?;
        }
    }

    let text = serde_json::to_string_pretty(&Value::Object(report)).map_err(runtime)?;
    std::fs::write(out.join("report.json"), format!("{text}\n")).map_err(runtime)?;
    println!("{text}");
    Ok(())
}

fn fit_samples(kind: &str, samples: &[f64], xmin: Option<f64>) -> AppResult<Value> {
    Ok(match kind {
        "exp" => {
            let (floor, temperature) = fit_shifted_exponential(samples).map_err(usage)?;
            let law = DistributionLaw::Exponential { temperature, floor };
            let ks = ks_statistic(samples, &law).map_err(usage)?;
            json!({"law": "exp", "floor": floor, "temperature": temperature, "ks": ks})
        }
        "gamma" => {
            let (beta, temperature) = fit_gamma_moments(samples).map_err(usage)?;
            let law = DistributionLaw::Gamma { beta, temperature };
            let ks = ks_statistic(samples, &law).map_err(usage)?;
            json!({"law": "gamma", "beta": beta, "temperature": temperature, "ks": ks})
        }
        "pareto" => {
            let xmin = xmin.ok_or_else(|| usage("--fit pareto requires --xmin"))?;
            let alpha = fit_pareto_hill(samples, xmin).map_err(usage)?;
            let tail: Vec<f64> = samples.iter().copied().filter(|&x| x > xmin).collect();
            let ks =
                ks_statistic_fn(&tail, |x| 1.0 - (xmin / x).powf(alpha)).map_err(usage)?;
            json!({
                "law": "pareto", "xmin": xmin, "alpha": alpha, "ks": ks,
                "tail_count": tail.len(),
            })
        }
        "two-class" => {
            let tc = two_class_decompose(samples).map_err(usage)?;
            tagged("two-class", &tc)?
        }
        other => return Err(usage(format!("unknown fit {other:?}"))),
    })
}

/// Serialize a report struct and stamp a `law` tag into the object.
fn tagged<T: serde::Serialize>(law: &str, report: &T) -> AppResult<Value> {
    let mut value = serde_json::to_value(report).map_err(runtime)?;
    value
        .as_object_mut()
        .expect("reports serialize to objects")
        .insert("law".into(), json!(law));
    Ok(value)
}
