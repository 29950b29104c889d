//! Scratch measurement harness (not part of the deliverable).

use std::time::Instant;

use kinex::kinetics::{entropy_edges, run_kinetics};
use kinex::reserve::{branch_temperatures, run_reserve_ratio};
use kinex::stats::{
    fit_ccdf_exponent, fit_exponential, fit_gamma_moments, fit_pareto_hill,
    fit_shifted_exponential, ks_critical, ks_statistic, log_multiplicity,
};
use kinex::{
    Binning, DistributionLaw, ExchangeRule, Histogram, KsLevel, MarketState,
    RelativeWealthState, SimConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pooled_snapshots(run: &kinex::KineticsRun) -> Vec<f64> {
    let mut pooled = Vec::new();
    for snap in &run.snapshots {
        pooled.extend_from_slice(&snap.balances);
    }
    pooled.extend_from_slice(run.final_population.balances());
    pooled
}

fn late_schedule(steps: u64, count: u64, spacing: u64) -> Vec<u64> {
    (1..=count).map(|k| steps - (count - k) * spacing).collect()
}

fn c06(seed: u64, n: usize, steps: u64, pool: u64, spacing: u64, lo: f64, hi: f64) {
    let t0 = Instant::now();
    let config = SimConfig {
        n_agents: n,
        initial_balance: 1000.0,
        rule: ExchangeRule::RandomSavingPropensity,
        debt_limit: 0.0,
        n_steps: steps,
        seed,
        snapshot_schedule: late_schedule(steps, pool, spacing),
    };
    let run = run_kinetics(&config).unwrap();
    let pooled = pooled_snapshots(&run);
    let beyond = pooled.iter().filter(|&&m| m > hi).count();
    let slope = fit_ccdf_exponent(&pooled, lo, hi);
    println!(
        "c06 seed={seed} n={n} steps={steps} pool={pool} window=[{lo},{hi}] decades={:.2} beyond={beyond} slope={:?} dt={:.1}s",
        (hi / lo).log10(),
        slope,
        t0.elapsed().as_secs_f64()
    );
}

fn c06_ccdf(seed: u64, n: usize, steps: u64, pool: u64, spacing: u64) {
    let t0 = Instant::now();
    let config = SimConfig {
        n_agents: n,
        initial_balance: 1000.0,
        rule: ExchangeRule::RandomSavingPropensity,
        debt_limit: 0.0,
        n_steps: steps,
        seed,
        snapshot_schedule: late_schedule(steps, pool, spacing),
    };
    let run = run_kinetics(&config).unwrap();
    let mut pooled = pooled_snapshots(&run);
    pooled.sort_by(|a, b| a.total_cmp(b));
    let total = pooled.len() as f64;
    println!("c06ccdf seed={seed} n={n} steps={steps} pooled={} dt={:.1}s", pooled.len(), t0.elapsed().as_secs_f64());
    let mut m = 500.0f64;
    while m <= 400_000.0 {
        let beyond = pooled.len() - pooled.partition_point(|&x| x <= m);
        println!("  m={m:>9.0} ccdf={:.3e} beyond={beyond}", beyond as f64 / total);
        m *= 1.5;
    }
    for (lo, hi) in [(1_500.0, 60_000.0), (2_000.0, 80_000.0), (3_000.0, 120_000.0), (1_000.0, 40_000.0)] {
        let slope = fit_ccdf_exponent(&pooled, lo, hi);
        println!("  window=[{lo},{hi}] decades={:.2} slope={slope:?}", (hi / lo as f64).log10());
    }
}

fn c03(seed: u64, n: usize, m0: f64, events: u64) {
    let t0 = Instant::now();
    let pop = run_reserve_ratio(n, m0, 0.8, events, seed).unwrap();
    let (tp, tm) = branch_temperatures(&pop);
    println!(
        "c03 seed={seed} n={n} events={events} t+={tp:.1} t-={tm:.1} ratio={:.4} dt={:.1}s",
        tm / tp,
        t0.elapsed().as_secs_f64()
    );
}

fn c03_pool(seed: u64, n: usize, m0: f64, burn: u64, pool: u64, spacing: u64) {
    let t0 = Instant::now();
    let mut econ = kinex::ReserveEconomy::new(n, m0, 0.8, seed).unwrap();
    for _ in 0..burn {
        econ.step();
    }
    let (mut tp_acc, mut tm_acc) = (0.0, 0.0);
    for _ in 0..pool {
        for _ in 0..spacing {
            econ.step();
        }
        let (tp, tm) = branch_temperatures(&econ.population().unwrap());
        tp_acc += tp;
        tm_acc += tm;
    }
    println!(
        "c03pool seed={seed} n={n} burn={burn} pool={pool} ratio={:.4} t+={:.1} dt={:.1}s",
        tm_acc / tp_acc,
        tp_acc / pool as f64,
        t0.elapsed().as_secs_f64()
    );
}

fn c05(seed: u64, lambda: f64, n: usize, steps: u64, pool: u64, spacing: u64) {
    let t0 = Instant::now();
    let config = SimConfig {
        n_agents: n,
        initial_balance: 1000.0,
        rule: ExchangeRule::SavingPropensity { lambda },
        debt_limit: 0.0,
        n_steps: steps,
        seed,
        snapshot_schedule: late_schedule(steps, pool, spacing),
    };
    let run = run_kinetics(&config).unwrap();
    let pooled = pooled_snapshots(&run);
    let (beta, temp) = fit_gamma_moments(&pooled).unwrap();
    println!(
        "c05 seed={seed} lambda={lambda} n={n} steps={steps} beta={beta:.4} T={temp:.1} dt={:.1}s",
        t0.elapsed().as_secs_f64()
    );
}

fn c04(seed: u64, n: usize, steps: u64, pool: u64, spacing: u64) {
    let t0 = Instant::now();
    let config = SimConfig {
        n_agents: n,
        initial_balance: 1000.0,
        rule: ExchangeRule::Proportional { gamma: 1.0 / 3.0 },
        debt_limit: 0.0,
        n_steps: steps,
        seed,
        snapshot_schedule: late_schedule(steps, pool, spacing),
    };
    let run = run_kinetics(&config).unwrap();
    let pooled = pooled_snapshots(&run);
    let (beta_mom, temp) = fit_gamma_moments(&pooled).unwrap();

    // Three-parameter linear fit ln p = c + beta ln m - m/theta on log bins.
    let hist = Histogram::from_samples(
        &pooled.iter().copied().filter(|&m| m > 10.0).collect::<Vec<_>>(),
        &Binning::Log { count: 30 },
    )
    .unwrap();
    let dens = hist.densities();
    let edges = hist.edges();
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (k, &d) in dens.iter().enumerate() {
        let center = (edges[k] * edges[k + 1]).sqrt();
        if d > 0.0 && center <= 1_500.0 {
            rows.push((center.ln(), center, d.ln()));
        }
    }
    // Solve least squares for y = c + b*lnm - m/theta via normal equations.
    let nr = rows.len() as f64;
    let (mut slm, mut sm, mut sy) = (0.0, 0.0, 0.0);
    for &(lm, m, y) in &rows {
        slm += lm;
        sm += m;
        sy += y;
    }
    let (mlm, mm, my) = (slm / nr, sm / nr, sy / nr);
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(lm, m, y) in &rows {
        let (x1, x2, yy) = (lm - mlm, m - mm, y - my);
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * yy;
        b2 += x2 * yy;
    }
    let det = a11 * a22 - a12 * a12;
    let beta_small = (b1 * a22 - b2 * a12) / det;
    let inv_theta = -(a11 * b2 - a12 * b1) / det;
    println!(
        "c04 seed={seed} n={n} steps={steps} beta_mom={beta_mom:.4} T={temp:.1} beta_small={beta_small:.4} theta={:.1} rows={} dt={:.1}s",
        1.0 / inv_theta,
        rows.len(),
        t0.elapsed().as_secs_f64()
    );
}

fn c11() {
    use kinex::laws::{arctan_pdf, bm_stationary_pdf};
    // r0 -> 0: the interpolating law collapses onto the pure power shape
    // r^-(2+ab), which is the inverse-gamma form with its small-w essential
    // damping stripped.
    for r0 in [1e-2, 1e-3, 1e-4] {
        let (t, ab) = (1.0, 2.0);
        let reference = |r: f64| bm_stationary_pdf(r, ab) * (ab / r).exp();
        let anchor = 10.0;
        let scale = arctan_pdf(anchor, t, r0, ab) / reference(anchor);
        let mut worst = 0.0f64;
        for k in 0..=200 {
            let r = 1.0 * (100.0f64).powf(k as f64 / 200.0);
            let ratio = arctan_pdf(r, t, r0, ab) / (reference(r) * scale);
            worst = worst.max((ratio - 1.0).abs());
        }
        println!("c11 r0={r0:.0e} worst_shape_dev={worst:.3e}");
    }
}

fn c12() {
    use kinex::laws::{lorenz_two_class};
    use kinex::quad::integrate;
    use kinex::stats::gini_empirical;
    use rand::Rng;

    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let exp_samples: Vec<f64> =
        (0..1_000_000).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let g_exp = gini_empirical(&exp_samples).unwrap();
    let gamma_samples: Vec<f64> = exp_samples
        .chunks_exact(2)
        .map(|pair| pair[0] + pair[1])
        .collect();
    // Top up to 1e6 Gamma(beta=1) draws.
    let mut gamma_samples = gamma_samples;
    while gamma_samples.len() < 1_000_000 {
        let a: f64 = -(1.0 - rng.random::<f64>()).ln();
        let b: f64 = -(1.0 - rng.random::<f64>()).ln();
        gamma_samples.push(a + b);
    }
    let g_gamma = gini_empirical(&gamma_samples).unwrap();
    println!(
        "c12 g_exp={g_exp:.5} (want 0.5) g_gamma={g_gamma:.5} (want 0.375) dt={:.1}s",
        t0.elapsed().as_secs_f64()
    );
    for f in [0.0, 0.04, 0.2] {
        let area = integrate(&|x| lorenz_two_class(x, f), 0.0, 1.0, 1e-14);
        let gini = 1.0 - 2.0 * area;
        println!("  f={f} gini={gini:.10} want={:.10} err={:.2e}", 0.5 * (1.0 + f), (gini - 0.5 * (1.0 + f)).abs());
    }
}

fn c08(seed: u64, n: usize, steps: u64) {
    let t0 = Instant::now();
    let config = SimConfig {
        n_agents: n,
        initial_balance: 1000.0,
        rule: ExchangeRule::RandomFractionOfAverage,
        debt_limit: 0.0,
        n_steps: steps,
        seed,
        snapshot_schedule: vec![],
    };
    let run = run_kinetics(&config).unwrap();
    let t_hat = fit_exponential(run.final_population.balances(), 0.0).unwrap();

    // Law entropy and its per-sample noise scale on the same binning.
    let edges = &run.entropy_edges;
    let law = DistributionLaw::Exponential { temperature: t_hat, floor: 0.0 };
    let mut s_law = 0.0;
    let mut s2 = 0.0;
    for w in edges.windows(2) {
        let p = (law.cdf(w[1]) - law.cdf(w[0])).max(0.0);
        if p > 0.0 {
            s_law -= p * p.ln();
            s2 += p * p.ln() * p.ln();
        }
    }
    let sigma = ((s2 - s_law * s_law) / n as f64).sqrt();

    // Sweep-averaged trajectory, dip below running max.
    let per_sweep = (n as u64).div_ceil(steps.div_euclid(run.entropy.len() as u64).max(1));
    let window = per_sweep.max(1) as usize;
    let smoothed: Vec<f64> = run
        .entropy
        .windows(window)
        .map(|w| w.iter().map(|p| p.entropy).sum::<f64>() / window as f64)
        .collect();
    let mut runmax = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &s in &smoothed {
        runmax = runmax.max(s);
        worst = worst.max(runmax - s);
    }
    let s_final = run.entropy.last().unwrap().entropy;
    println!(
        "c08 seed={seed} n={n} steps={steps} points={} window={window} s_final={s_final:.4} s_law={s_law:.4} rel={:.4} sigma={sigma:.4} worst_dip={worst:.4} dip/sigma={:.2} dt={:.1}s",
        run.entropy.len(),
        (s_final - s_law).abs() / s_law,
        worst / sigma,
        t0.elapsed().as_secs_f64()
    );
}

fn c08_stirling(seed: u64) {
    let n = 170usize;
    let config = SimConfig {
        n_agents: n,
        initial_balance: 1000.0,
        rule: ExchangeRule::RandomFractionOfAverage,
        debt_limit: 0.0,
        n_steps: 200_000,
        seed,
        snapshot_schedule: vec![],
    };
    let run = run_kinetics(&config).unwrap();
    let edges = entropy_edges(&run.final_population);
    let hist = Histogram::from_samples(run.final_population.balances(), &Binning::Edges(edges)).unwrap();
    let s = hist.entropy();
    let ln_w = log_multiplicity(hist.counts());
    let occupied: Vec<u64> = hist.counts().iter().copied().filter(|&c| c > 0).collect();
    let k = occupied.len();
    let tau = std::f64::consts::TAU;
    let d0 = 0.5 * (tau * n as f64).ln()
        - occupied.iter().map(|&c| 0.5 * (tau * c as f64).ln()).sum::<f64>();
    let d = ln_w - n as f64 * s;
    println!(
        "c08s seed={seed} K={k} lnW={ln_w:.4} NS={:.4} d={d:.4} d0={d0:.4} |d-d0|={:.4} bound={:.4}",
        n as f64 * s,
        (d - d0).abs(),
        (k as f64 + 1.0) / 12.0
    );
}

fn c10(seed: u64, n: usize, burn: u64, pool: u64, spacing: u64) {
    let t0 = Instant::now();
    let mut state = RelativeWealthState::new(n, 0.5, 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 0.005;
    for _ in 0..burn {
        state.bm_step(dt, &mut rng).unwrap();
    }
    let law = DistributionLaw::InverseGammaBm { kappa: 2.0 };
    let ks = ks_statistic(state.w_tilde(), &law).unwrap();
    let crit = ks_critical(n, KsLevel::OnePercent);

    let mut pooled = Vec::new();
    let mut mean_acc = 0.0;
    for _ in 0..pool {
        for _ in 0..spacing {
            state.bm_step(dt, &mut rng).unwrap();
        }
        mean_acc += state.w_tilde().iter().sum::<f64>() / n as f64;
        pooled.extend_from_slice(state.w_tilde());
    }
    let mut sorted = pooled.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let xmin = sorted[(0.99 * sorted.len() as f64) as usize];
    let hill = fit_pareto_hill(&sorted, xmin).unwrap();
    println!(
        "c10 seed={seed} n={n} burn={burn} ks={ks:.4} crit={crit:.4} mean={:.6} hill={hill:.3} dt={:.1}s",
        mean_acc / pool as f64,
        t0.elapsed().as_secs_f64()
    );
}

fn c09(seed: u64, n: usize, rounds: u64) {
    let t0 = Instant::now();
    let mut mkt = MarketState::new(vec![10.0; 500], vec![1.0; 500], 1.0).unwrap();
    let _ = n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..rounds {
        mkt.round(&mut rng).unwrap();
    }
    let wealths = mkt.wealths();
    let (beta, temp) = fit_gamma_moments(&wealths).unwrap();
    let law = DistributionLaw::Gamma { beta, temperature: temp };
    let ks = ks_statistic(&wealths, &law).unwrap();
    let crit = ks_critical(wealths.len(), KsLevel::FivePercent);
    println!(
        "c09 seed={seed} rounds={rounds} beta={beta:.3} ks={ks:.4} crit={crit:.4} money_rel={:.2e} stock_rel={:.2e} dt={:.1}s",
        (mkt.total_money() - 5000.0).abs() / 5000.0,
        (mkt.total_stock() - 500.0).abs() / 500.0,
        t0.elapsed().as_secs_f64()
    );
}

fn c01(seed: u64, delta: f64, steps: u64) {
    let t0 = Instant::now();
    let config = SimConfig {
        n_agents: 500,
        initial_balance: 1000.0,
        rule: ExchangeRule::FixedAmount { amount: delta },
        debt_limit: 0.0,
        n_steps: steps,
        seed,
        snapshot_schedule: vec![],
    };
    let run = run_kinetics(&config).unwrap();
    let law = DistributionLaw::Exponential { temperature: 1000.0, floor: 0.0 };
    let ks = ks_statistic(run.final_population.balances(), &law).unwrap();
    println!(
        "c01 seed={seed} delta={delta} steps={steps} ks={ks:.4} crit={:.4} dt={:.1}s",
        ks_critical(500, KsLevel::OnePercent),
        t0.elapsed().as_secs_f64()
    );
}

fn c02(seed: u64, steps: u64) {
    let t0 = Instant::now();
    let config = SimConfig {
        n_agents: 500,
        initial_balance: 1000.0,
        rule: ExchangeRule::FixedAmount { amount: 20.0 },
        debt_limit: 800.0,
        n_steps: steps,
        seed,
        snapshot_schedule: vec![],
    };
    let run = run_kinetics(&config).unwrap();
    let (floor, t) = fit_shifted_exponential(run.final_population.balances()).unwrap();
    println!(
        "c02 seed={seed} steps={steps} floor={floor:.1} T={t:.1} dt={:.1}s",
        t0.elapsed().as_secs_f64()
    );
}

fn cli_two_class(seed: u64, n: usize, w: f64, xmin: f64) {
    use kinex::two_class_decompose;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    let bulk_span = -(-xmin).exp_m1();
    for _ in 0..n {
        let u: f64 = rng.random();
        let x = if rng.random::<f64>() < 1.0 - w {
            -(1.0 - u * bulk_span).ln()
        } else {
            xmin * (1.0 - u).powf(-1.0 / 1.7)
        };
        samples.push(x);
    }
    match two_class_decompose(&samples) {
        Ok(r) => println!(
            "clitc seed={seed} n={n} w={w} xmin={xmin} t_r={:.3} alpha={:?} r_star={:?} f={:.4} uf={:.4}",
            r.t_r, r.alpha, r.r_star, r.f, r.upper_fraction
        ),
        Err(e) => println!("clitc seed={seed} err={e}"),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let which = args.first().map(String::as_str).unwrap_or("");
    match which {
        "clitc" => {
            for seed in [23u64, 24, 25, 26, 27] {
                cli_two_class(seed, 20_000, 0.03, 3.0);
            }
            for seed in [23u64, 24, 25] {
                cli_two_class(seed, 50_000, 0.03, 3.0);
                cli_two_class(seed, 20_000, 0.05, 3.0);
            }
        }
        "c01" => {
            for seed in [1u64, 2, 3] {
                c01(seed, 20.0, 10_000_000);
            }
        }
        "c02" => {
            for seed in [1u64, 2, 3] {
                c02(seed, 10_000_000);
            }
        }
        "c03" => {
            for seed in [1u64, 2, 3] {
                c03(seed, 1000, 1_000_000.0, 20_000_000);
            }
        }
        "c03pool" => {
            for seed in [1u64, 2, 3] {
                c03_pool(seed, 1000, 1_000_000.0, 10_000_000, 40, 500_000);
            }
        }
        "c04" => {
            for seed in [1u64, 2, 3] {
                c04(seed, 2000, 10_000_000, 9, 100_000);
            }
        }
        "c11" => c11(),
        "c12" => c12(),
        "c05" => {
            for seed in [1u64, 2, 3] {
                c05(seed, 0.25, 2000, 10_000_000, 9, 100_000);
                c05(seed, 0.5, 2000, 10_000_000, 9, 100_000);
            }
        }
        "c05zero" => {
            for seed in [1u64, 2, 3] {
                let config = SimConfig {
                    n_agents: 500,
                    initial_balance: 1000.0,
                    rule: ExchangeRule::SavingPropensity { lambda: 0.0 },
                    debt_limit: 0.0,
                    n_steps: 1_000_000,
                    seed,
                    snapshot_schedule: vec![],
                };
                let run = run_kinetics(&config).unwrap();
                let law = DistributionLaw::Exponential { temperature: 1000.0, floor: 0.0 };
                let ks = ks_statistic(run.final_population.balances(), &law).unwrap();
                println!("c05zero seed={seed} ks={ks:.4} crit={:.4}", ks_critical(500, KsLevel::OnePercent));
            }
        }
        "c06" => {
            for seed in [1u64, 2, 3] {
                c06(seed, 1000, 30_000_000, 29, 500_000, 2_000.0, 80_000.0);
            }
        }
        "c06ccdf" => {
            for seed in [1u64, 2, 3] {
                c06_ccdf(seed, 1000, 80_000_000, 120, 400_000);
            }
        }
        "c06big" => {
            for seed in [1u64, 2, 3, 4, 5] {
                c06_ccdf(seed, 10_000, 40_000_000, 100, 200_000);
            }
        }
        "c08" => {
            for seed in [1u64, 2, 3] {
                c08(seed, 500, 1_000_000);
            }
            for seed in [1u64, 2, 3] {
                c08_stirling(seed);
            }
        }
        "c09" => {
            for seed in [1u64, 2, 3] {
                c09(seed, 500, 100_000);
            }
        }
        "c10" => {
            for seed in [1u64, 2, 3] {
                c10(seed, 10_000, 12_000, 5, 800);
            }
        }
        other => eprintln!("unknown probe {other:?}"),
    }
}
// appended: cli two-class probe
