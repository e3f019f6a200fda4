//! Edge-state chains and arrow flips in dynamical time.
//!
//! ```text
//! cargo run --release --example dynamical
//! ```

use sticky_op::lattice::{Dir, NoiseField, Site};
use sticky_op::paths::trace_rho;
use sticky_op::web::{evolve_dynamical, DynamicalArrowField, DynamicalPercolation};

fn main() -> sticky_op::Result<()> {
    let (p, eps) = (0.8, 0.05);
    let dyn_perc = DynamicalPercolation::new(NoiseField::new(9), p, eps)?;

    let edges = 20_000i64;
    for s in [0.0, 5.0, 20.0, 60.0] {
        let (mut both, mut open) = (0.0, 0.0);
        for i in 0..edges {
            let (x, t) = (2 * i, 0);
            let a = dyn_perc.is_open_at_time(x, t, Dir::Right, 0.0);
            let b = dyn_perc.is_open_at_time(x, t, Dir::Right, s);
            both += f64::from(u8::from(a && b));
            open += f64::from(u8::from(b));
        }
        let n = edges as f64;
        let cov = both / n - p * open / n;
        println!("s = {s:5}: open fraction {:.4}, cov {:.4}, p(1-p)exp(-eps s) {:.4}", open / n, cov, p * (1.0 - p) * (-eps * s).exp());
    }

    for s in [0.0, 10.0, 40.0] {
        let snap = dyn_perc.at(s);
        let x = trace_rho(&snap, Site::origin(), 400, 64).map(|tr| tr.path.positions[400]);
        println!("rho(400) in the snapshot at s = {s}: {x:?}");
    }

    let arrows = DynamicalArrowField::new(4, 1.0)?;
    let starts = [Site::origin(), Site::new(10, 0)];
    for d in evolve_dynamical(&arrows, &starts, &[0.0, 0.5, 2.0], 200)? {
        let ends: Vec<i64> = d.paths.iter().map(|p| p.positions[200]).collect();
        println!("arrow walks at s = {}: endpoints {ends:?}", d.s);
    }
    Ok(())
}
