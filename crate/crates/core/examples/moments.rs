//! Speed, diffusivity and their derivative for the rightmost path.
//!
//! ```text
//! cargo run --release --example moments -- [p] [replicates] [h] [seed]
//! ```

use std::time::Instant;

use sticky_op::moments::{estimate_alpha_prime, MomentParams};

fn main() -> sticky_op::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(0.8, |s| s.parse().expect("p"));
    let replicates: usize = args.next().map_or(256, |s| s.parse().expect("replicates"));
    let h: f64 = args.next().map_or(0.02, |s| s.parse().expect("h"));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));

    let mut params = MomentParams::new(p, seed);
    params.replicates = replicates;

    let start = Instant::now();
    let ap = estimate_alpha_prime(&params, h)?;
    let est = &ap.center;
    println!("p = {p}, {} steady increments", est.n_samples);
    println!("E[tau]  = {:.4} ± {:.4}", est.f_ij[&(0, 1)].value, est.f_ij[&(0, 1)].stderr);
    println!("alpha   = {:.5} ± {:.5}", est.alpha.value, est.alpha.stderr);
    println!("sigma^2 = {:.5} ± {:.5}", est.sigma2.value, est.sigma2.stderr);
    println!("alpha'  = {:.4} ± {:.4} (central)", ap.central.value, ap.central.stderr);
    println!("alpha'  = {:.4} ± {:.4} (coupled)", ap.coupled.value, ap.coupled.stderr);
    println!("b       = {:.4}", ap.central.value / est.sigma());
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
