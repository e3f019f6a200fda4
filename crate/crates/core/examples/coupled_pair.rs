//! One pair of rightmost paths in the monotone coupling of `p - eps` and
//! `p + eps`, started apart, printed until they merge.

use sticky_op::coupled::{pair_functionals, trace_pair, RescaledPair, ScalingMap};
use sticky_op::lattice::{NoiseField, Site};

fn main() -> sticky_op::Result<()> {
    let (p, eps): (f64, f64) = (0.8, 0.05);
    let (alpha, sigma) = (0.5771, 0.8728);
    let n = (2.0 / (eps * eps)).round() as usize;

    let pair = trace_pair(NoiseField::new(3), p, eps, Site::new(8, 0), Site::origin(), n, 64)?;
    println!("meeting index: {:?}, ordering violations: {}", pair.meeting_index, pair.violations);
    for k in (0..=n).step_by(50) {
        let (m, pl) = pair.at(k).unwrap();
        println!("n = {k:4}  minus {m:5}  plus {pl:5}  plus - minus {:4}", pl - m);
    }

    let map = ScalingMap::new(alpha, sigma, eps)?;
    let rescaled = RescaledPair::from_lattice(&pair, &map);
    let fx = pair_functionals(&rescaled, 0.05, 1.0);
    println!("rescaled meeting time {:.4}", fx.meeting_time);
    println!("together fraction on [tau, 1] {:.3}", fx.together_fraction);
    println!("terminal gap r(1) - l(1) = {:.4}", fx.terminal_gap);
    Ok(())
}
