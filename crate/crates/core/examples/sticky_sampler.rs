//! Exact left-right sticky pair with drift `b`, compared with the
//! Euler-Maruyama threshold scheme.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sticky_op::sticky::{sample_sticky_gap, sample_sticky_pair_em, sample_sticky_pair_exact, Start};

fn occupation(l: &[f64], r: &[f64], tol: f64) -> f64 {
    l.iter().zip(r).filter(|(a, b)| (*b - *a).abs() <= tol).count() as f64 / l.len() as f64
}

fn main() -> sticky_op::Result<()> {
    let (b, t_max, dt) = (1.0, 1.0, 1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let samples = 2000;

    let (mut exact_gap, mut exact_occ, mut em_occ) = (0.0, 0.0, 0.0);
    for _ in 0..samples {
        let s = sample_sticky_pair_exact(b, Start::new(0.0, 0.0), Start::new(0.0, 0.0), t_max, dt, &mut rng)?;
        exact_gap += s.r.values.last().unwrap() - s.l.values.last().unwrap();
        exact_occ += occupation(&s.l.values, &s.r.values, 1e-12);
        let e = sample_sticky_pair_em(b, 0.02, Start::new(0.0, 0.0), Start::new(0.0, 0.0), t_max, dt, &mut rng)?;
        em_occ += occupation(&e.l.values, &e.r.values, 0.02);
    }
    let n = samples as f64;
    println!("exact: mean r(1) - l(1) = {:.4}, time together {:.3}", exact_gap / n, exact_occ / n);
    println!("Euler-Maruyama (threshold 0.02): time within threshold {:.3}", em_occ / n);

    let w = sample_sticky_gap(b, 0.0, t_max, dt, &mut rng)?;
    let zero = w.values.iter().filter(|&&v| v == 0.0).count();
    println!("one gap path: {zero} of {} grid points at 0", w.len());
    Ok(())
}
