//! Branching-perturbed coalescing arrows: extremal paths bracket the
//! single-arrow walk and paths on the same side coalesce.

use sticky_op::lattice::Site;
use sticky_op::web::{trace_extremal, trace_walk, ArrowField, Side};

fn main() -> sticky_op::Result<()> {
    let eps: f64 = 0.05;
    let n = (1.0 / (eps * eps)).round() as usize;
    let field = ArrowField::new(11, eps)?;

    let z = Site::origin();
    let l = trace_extremal(&field, z, n, Side::Left);
    let w = trace_walk(&field, z, n);
    let r = trace_extremal(&field, z, n, Side::Right);
    println!("from the origin after {n} steps: left {}  walk {}  right {}", l.positions[n], w.positions[n], r.positions[n]);
    println!("rescaled spread (r - l) eps = {:.3}", (r.positions[n] - l.positions[n]) as f64 * eps);

    let far = Site::new(20, 0);
    let a = trace_extremal(&field, far, n, Side::Right);
    let b = trace_extremal(&field, z, n, Side::Left);
    match (0..=n).find(|&k| b.positions[k] >= a.positions[k]) {
        Some(k) => println!("left extremal from 0 meets right extremal from 20 at step {k}"),
        None => println!("left extremal from 0 and right extremal from 20 stay apart"),
    }
    let c = trace_extremal(&field, Site::new(6, 0), n, Side::Right);
    if let Some(k) = (0..=n).find(|&k| c.positions[k] == r.positions[k]) {
        println!("right extremals from 0 and 6 coalesce at step {k}");
    }
    Ok(())
}
