use kinex::laws::DistributionLaw;
use kinex::stats::{fit_pareto_hill, ks_critical, ks_statistic, KsLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

fn kesten(
    a0: f64,
    a: f64,
    b0: f64,
    b: f64,
    n: usize,
    steps: u64,
    dt: f64,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_r = b0 / a0;
    let mut r = vec![t_r; n];
    for _ in 0..steps {
        for ri in r.iter_mut() {
            let xi: f64 = rng.sample(StandardNormal);
            let drift = -(a0 + a * *ri) * dt;
            let amp = (2.0 * (b0 + b * *ri * *ri) * dt).sqrt();
            let mut next = *ri + drift + amp * xi;
            if next < 0.0 {
                next = -next;
            }
            *ri = next;
        }
    }
    r
}

#[test]
fn probe_kesten() {
    let (a0, a, b0, b) = (1.0, 1.0, 1.0, 0.5);
    let law = DistributionLaw::ArctanInterpolating {
        temperature: b0 / a0,
        crossover: (b0 / b).sqrt(),
        ab_ratio: a / b,
    };
    for (n, dt, t_total) in [
        (30_000usize, 0.01, 30.0),
        (30_000, 0.005, 30.0),
        (30_000, 0.002, 30.0),
        (100_000, 0.005, 30.0),
        (100_000, 0.002, 30.0),
    ] {
        let steps = (t_total / dt) as u64;
        let t0 = Instant::now();
        let mut samples = kesten(a0, a, b0, b, n, steps, dt, 7);
        let sim_t = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let ks = ks_statistic(&samples, &law).unwrap();
        let ks_t = t0.elapsed().as_secs_f64();
        samples.sort_by(|x, y| x.total_cmp(y));
        let q998 = samples[(0.998 * n as f64) as usize];
        let hill = fit_pareto_hill(&samples, q998).unwrap();
        println!(
            "n={n} dt={dt} steps={steps} sim={sim_t:.1}s ks={ks:.5} (crit {:.5}) ks_time={ks_t:.1}s hill@q998({q998:.1})={hill:.3}",
            ks_critical(n, KsLevel::OnePercent)
        );
    }
}
