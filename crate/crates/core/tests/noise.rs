use sticky_op::lattice::{Dir, NoiseField};
use sticky_op::stats::{correlation, ks_one_sample, ks_two_sample, lag1_autocorrelation};

fn row(noise: &NoiseField, t: i64, dir: Dir) -> Vec<f64> {
    (0..20_000i64).map(|k| noise.weight_at(2 * k - 20_000 + t.rem_euclid(2), t, dir)).collect()
}

#[test]
fn weights_are_uniform() {
    let noise = NoiseField::new(2024);
    for (t, dir) in [(0, Dir::Right), (1, Dir::Left), (1 << 20, Dir::Right)] {
        let w = row(&noise, t, dir);
        assert!(w.iter().all(|&v| (0.0..1.0).contains(&v)));
        let ks = ks_one_sample(&w, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ks.p_value > 0.001, "{t} {dir:?}: {ks:?}");
    }
}

#[test]
fn neighbouring_weights_are_uncorrelated() {
    let noise = NoiseField::new(7);
    let a = row(&noise, 10, Dir::Right);
    let b = row(&noise, 10, Dir::Left);
    let c = row(&noise, 12, Dir::Right);
    let tol = 4.0 / (a.len() as f64).sqrt();
    assert!(lag1_autocorrelation(&a).abs() < tol);
    assert!(correlation(&a, &b).abs() < tol);
    assert!(correlation(&a, &c).abs() < tol);
}

#[test]
fn replicates_are_independent_fields() {
    let noise = NoiseField::new(11);
    let a = row(&noise.replicate(0), 3, Dir::Right);
    let b = row(&noise.replicate(1), 3, Dir::Right);
    assert!(correlation(&a, &b).abs() < 4.0 / (a.len() as f64).sqrt());
    assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.001);
    assert_ne!(noise.replicate(0).seed(), noise.replicate(1).seed());
    assert_eq!(noise.replicate(5), NoiseField::new(11).replicate(5));
}
