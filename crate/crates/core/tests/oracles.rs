//! Library results against brute-force reference implementations.

mod common;

use common::{bfs_percolates, bfs_rightmost, chain_autocovariance, enumerate_paths};
use sticky_op::fixture::FixtureConfig;
use sticky_op::lattice::{NoiseField, PercConfig, Site};
use sticky_op::moments::{estimate_decay, DecayParams};
use sticky_op::paths::{find_break_points, trace_gamma, trace_rho};
use sticky_op::sticky::{skorohod_reflect, ContinuumPath};
use sticky_op::Error;

#[test]
fn rho_matches_bfs_across_parameters() {
    for (k, p) in [0.7, 0.75, 0.85, 0.95].into_iter().enumerate() {
        let noise = NoiseField::new(100 + k as u64);
        for i in 0..100 {
            let cfg = PercConfig::new(noise.replicate(i), p).unwrap();
            let reference = bfs_rightmost(&cfg, 0, 0, 40, 120);
            let tr = trace_rho(&cfg, Site::origin(), 40, 120).unwrap();
            assert!(tr.trusted());
            let got: Vec<Option<i64>> = tr.path.positions.iter().map(|&x| Some(x)).collect();
            assert_eq!(got, reference, "p {p} replicate {i}");
        }
    }
}

#[test]
fn rho_from_shifted_start() {
    let noise = NoiseField::new(9);
    for i in 0..50 {
        let cfg = PercConfig::new(noise.replicate(i), 0.75).unwrap();
        let z = Site::new(13, 7);
        let tr = trace_rho(&cfg, z, 30, 100).unwrap();
        let reference = bfs_rightmost(&cfg, z.x, z.t, 30, 100);
        assert_eq!(tr.path.positions.iter().map(|&x| Some(x)).collect::<Vec<_>>(), reference);
    }
}

/// Pointwise maximum of every open path reaching the full depth.
fn gamma_by_enumeration(cfg: &PercConfig, z: Site, n: usize, horizon: usize) -> Option<Vec<i64>> {
    let paths = enumerate_paths(cfg, z.x, z.t, n + horizon);
    if paths.is_empty() {
        return None;
    }
    Some((0..=n).map(|k| paths.iter().map(|p| p[k]).max().unwrap()).collect())
}

#[test]
fn gamma_is_pointwise_max_of_surviving_paths() {
    let noise = NoiseField::new(31);
    let mut found = 0;
    for i in 0..300 {
        let cfg = PercConfig::new(noise.replicate(i), 0.6).unwrap();
        let z = Site::origin();
        let got = trace_gamma(&cfg, z, 10, 6).unwrap().map(|g| g.positions);
        let want = gamma_by_enumeration(&cfg, z, 10, 6);
        assert_eq!(got, want, "replicate {i}");
        found += usize::from(want.is_some());
    }
    assert!(found > 50 && found < 300, "degenerate sample: {found} surviving");
}

#[test]
fn break_points_match_bfs_percolation() {
    let noise = NoiseField::new(8);
    let horizon = 25;
    for i in 0..60 {
        let cfg = PercConfig::new(noise.replicate(i), 0.7).unwrap();
        let Ok(rho) = trace_rho(&cfg, Site::origin(), 150, 64) else { continue };
        let seq = find_break_points(&cfg, &rho, horizon).unwrap();
        let expected: Vec<i64> = (1..rho.path.positions.len())
            .filter(|&n| bfs_percolates(&cfg, rho.path.positions[n], n as i64, horizon))
            .map(|n| n as i64)
            .collect();
        assert_eq!(seq.break_times, expected, "replicate {i}");
        let total: i64 = seq.increments.iter().map(|&(x, _)| x).sum();
        if let Some(&last) = seq.break_times.last() {
            assert_eq!(total, rho.path.positions[last as usize]);
        }
    }
}

#[test]
fn reflection_matches_lindley_recursion() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let n = rng.random_range(1..200);
        let mut v = vec![rng.random::<f64>()];
        for _ in 1..n {
            v.push(v.last().unwrap() + rng.random::<f64>() - 0.55);
        }
        let (g, reg) = skorohod_reflect(&ContinuumPath::new(0.0, 0.01, v.clone()).unwrap()).unwrap();
        let mut w = v[0];
        for k in 1..n {
            w = (w + v[k] - v[k - 1]).max(0.0);
            assert!((g.values[k] - w).abs() < 1e-9);
            assert!(reg.values[k] >= reg.values[k - 1]);
        }
    }
}

#[test]
fn closed_form_autocovariance_matches_matrix_exponential() {
    for p in [0.2f64, 0.5, 0.8] {
        for eps in [0.01f64, 0.1, 1.0] {
            for s in [0.0, 0.3, 2.0, 17.0] {
                let exact = p * (1.0 - p) * (-eps * s).exp();
                assert!((chain_autocovariance(p, eps, s) - exact).abs() < 1e-12, "{p} {eps} {s}");
            }
        }
    }
}

#[test]
fn decay_at_p_one_has_no_events() {
    let r = estimate_decay(&DecayParams { p: 1.0, seed: 1, replicates: 64, n_max: 10, horizon: 10, fit_from: 2, fit_to: 10 });
    assert!(matches!(r, Err(Error::NoDecayEvents)));
}

#[test]
fn fixture_tracing_matches_bfs() {
    let text = include_str!("../fixtures/small.edges");
    let fx = FixtureConfig::parse(text).unwrap();
    let tr = trace_rho(&fx, Site::origin(), 6, 20).unwrap();
    let reference = bfs_rightmost(&fx, 0, 0, 6, 10);
    assert_eq!(tr.path.positions.iter().map(|&x| Some(x)).collect::<Vec<_>>(), reference);
    assert_eq!(tr.path.positions, vec![0, 1, 2, 1, 2, 3, 2]);
}
