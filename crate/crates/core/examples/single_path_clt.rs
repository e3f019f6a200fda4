//! Rescaled terminal value of the rightmost path against a standard normal.
//!
//! ```text
//! cargo run --release --example single_path_clt -- [eps] [replicates] [seed]
//! ```

use rayon::prelude::*;
use sticky_op::lattice::{NoiseField, PercConfig, Site};
use sticky_op::moments::{estimate_moments, MomentParams};
use sticky_op::paths::trace_rho;
use sticky_op::stats::{ks_one_sample, mean, normal_cdf, variance};

fn main() -> sticky_op::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(0.05, |s| s.parse().expect("eps"));
    let replicates: u64 = args.next().map_or(2000, |s| s.parse().expect("replicates"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let p = 0.8;

    let est = estimate_moments(&MomentParams { replicates: 256, ..MomentParams::new(p, seed ^ 0xABCD) })?;
    let (alpha, sigma) = (est.alpha.value, est.sigma());
    let n = (1.0 / (eps * eps)).round() as usize;

    let noise = NoiseField::new(seed);
    let z: Vec<f64> = (0..replicates)
        .into_par_iter()
        .filter_map(|i| {
            let cfg = PercConfig::new(noise.replicate(i), p).ok()?;
            let tr = trace_rho(&cfg, Site::origin(), n, 64).ok()?;
            let x = *tr.path.positions.last()? as f64;
            Some((x - alpha * n as f64) / (sigma * (n as f64).sqrt()))
        })
        .collect();

    let ks = ks_one_sample(&z, normal_cdf)?;
    println!("alpha = {alpha:.4}, sigma = {sigma:.4}, n = {n}");
    println!("mean {:.4}, variance {:.4} over {} paths", mean(&z), variance(&z), z.len());
    println!("KS vs N(0, 1): D = {:.4}, p = {:.4}", ks.statistic, ks.p_value);
    println!("(lattice parity makes the raw statistic coarse; the experiment runner jitters within a cell)");
    Ok(())
}
