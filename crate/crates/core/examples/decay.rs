//! Probability that the origin reaches level `n` without percolating,
//! with a log-linear fit.

use sticky_op::moments::{estimate_decay, DecayParams};

fn main() -> sticky_op::Result<()> {
    let params = DecayParams { p: 0.8, seed: 5, replicates: 100_000, n_max: 30, horizon: 60, fit_from: 5, fit_to: 30 };
    let d = estimate_decay(&params)?;
    for (n, q) in d.q.iter().enumerate().filter(|(_, q)| **q > 0.0) {
        println!("n = {n:2}  q = {q:.3e}  log q = {:7.3}", q.ln());
    }
    println!("fit over {:?}", d.fit_levels);
    println!("c2 = {:.3} ± {:.3}, log c1 = {:.3}, R^2 = {:.4}", d.c2.value, d.c2.stderr, d.log_c1.value, d.r_squared);
    Ok(())
}
