#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use sticky_op::coupled::{trace_pair, ScalingMap};
use sticky_op::lattice::{coupled_configs, Dir, EdgeSource, NoiseField, PercConfig, Site};
use sticky_op::paths::{trace_gamma, trace_rho};
use sticky_op::stats::ks_two_sample;
use sticky_op::sticky::{skorohod_reflect, ContinuumPath};
use sticky_op::web::{trace_extremal, trace_walk, ArrowField, Side};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn coupling_is_monotone(seed in any::<u64>(), p in 0.1f64..0.9, eps in 0.0f64..0.1, x in -500i64..500, t in 0i64..500) {
        let x = x - (x + t).rem_euclid(2);
        let (lo, hi) = coupled_configs(NoiseField::new(seed), p, eps.min(p).min(1.0 - p)).unwrap();
        for dir in [Dir::Left, Dir::Right] {
            prop_assert!(!lo.is_open_at(x, t, dir) || hi.is_open_at(x, t, dir));
        }
    }

    #[test]
    fn rho_keeps_parity_and_moves_by_one_or_back(seed in any::<u64>(), p in 0.7f64..0.95) {
        let cfg = PercConfig::new(NoiseField::new(seed), p).unwrap();
        let tr = trace_rho(&cfg, Site::new(4, 2), 120, 64).unwrap();
        let pos = &tr.path.positions;
        for (k, w) in pos.windows(2).enumerate() {
            prop_assert_eq!((w[1] + 3 + k as i64).rem_euclid(2), 0);
            prop_assert!(w[1] <= w[0] + 1);
        }
    }

    #[test]
    fn rho_dominates_gamma(seed in any::<u64>(), p in 0.7f64..0.95) {
        let cfg = PercConfig::new(NoiseField::new(seed), p).unwrap();
        let z = Site::origin();
        if let Some(g) = trace_gamma(&cfg, z, 80, 40).unwrap() {
            let rho = trace_rho(&cfg, z, 80, 64).unwrap();
            for (a, b) in rho.path.positions.iter().zip(&g.positions) {
                prop_assert!(a >= b);
            }
            prop_assert!(g.is_nearest_neighbour());
        }
    }

    #[test]
    fn rho_is_monotone_in_p(seed in any::<u64>(), p in 0.72f64..0.9, dp in 0.0f64..0.08) {
        let noise = NoiseField::new(seed);
        let a = trace_rho(&PercConfig::new(noise, p).unwrap(), Site::origin(), 100, 64).unwrap();
        let b = trace_rho(&PercConfig::new(noise, p + dp).unwrap(), Site::origin(), 100, 64).unwrap();
        for (x, y) in a.path.positions.iter().zip(&b.path.positions) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn coupled_pair_stays_ordered_after_meeting(seed in any::<u64>(), gap in 0i64..12) {
        let pair = trace_pair(NoiseField::new(seed), 0.8, 0.05, Site::new(2 * gap, 0), Site::origin(), 300, 64).unwrap();
        prop_assert_eq!(pair.violations, 0);
        if let Some(k) = pair.meeting_index {
            for j in k..=300 {
                let (m, p) = pair.at(j).unwrap();
                prop_assert!(p >= m);
            }
        }
    }

    #[test]
    fn reflection_properties(start in 0.0f64..1.0, steps in prop::collection::vec(-1.0f64..1.0, 1..200)) {
        let mut v = vec![start];
        for s in &steps {
            v.push(v.last().unwrap() + s);
        }
        let f = ContinuumPath::new(0.0, 0.1, v.clone()).unwrap();
        let (g, reg) = skorohod_reflect(&f).unwrap();
        prop_assert_eq!(reg.values[0], 0.0);
        for k in 0..v.len() {
            prop_assert!(g.values[k] >= 0.0);
            prop_assert_eq!(g.values[k], v[k] + reg.values[k]);
            if k > 0 {
                prop_assert!(reg.values[k] >= reg.values[k - 1]);
                if reg.values[k] > reg.values[k - 1] {
                    prop_assert!(g.values[k].abs() < 1e-12);
                }
            }
        }
        let (g2, reg2) = skorohod_reflect(&g).unwrap();
        prop_assert_eq!(g2.values, g.values);
        prop_assert!(reg2.values.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn scaling_round_trip(v in -2.0f64..2.0, s in 0.1f64..3.0, eps in 0.001f64..1.0, x in -1e4f64..1e4, t in 0.0f64..1e5) {
        let m = ScalingMap::new(v, s, eps).unwrap();
        let (u, r) = m.apply(x, t);
        let (x2, t2) = m.unapply(u, r);
        prop_assert!((x2 - x).abs() <= 1e-6 * (1.0 + x.abs() + t.abs()));
        prop_assert!((t2 - t).abs() <= 1e-9 * (1.0 + t));
    }

    #[test]
    fn ks_statistic_is_symmetric_and_bounded(a in prop::collection::vec(-5.0f64..5.0, 1..60), b in prop::collection::vec(-5.0f64..5.0, 1..60)) {
        let ab = ks_two_sample(&a, &b).unwrap();
        let ba = ks_two_sample(&b, &a).unwrap();
        prop_assert_eq!(ab.statistic, ba.statistic);
        prop_assert!((0.0..=1.0).contains(&ab.statistic));
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        prop_assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
    }
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn web_extremals_bracket_the_walk(seed in any::<u64>(), eps in 0.0f64..0.3, x in -20i64..20) {
        let f = ArrowField::new(seed, eps).unwrap();
        let z = Site::new(2 * x, 0);
        let l = trace_extremal(&f, z, 200, Side::Left);
        let w = trace_walk(&f, z, 200);
        let r = trace_extremal(&f, z, 200, Side::Right);
        for k in 0..=200 {
            prop_assert!(l.positions[k] <= w.positions[k] && w.positions[k] <= r.positions[k]);
        }
    }

    #[test]
    fn same_side_extremals_coalesce(seed in any::<u64>(), eps in 0.0f64..0.3, gap in 1i64..6) {
        let f = ArrowField::new(seed, eps).unwrap();
        for side in [Side::Left, Side::Right] {
            let a = trace_extremal(&f, Site::origin(), 400, side);
            let b = trace_extremal(&f, Site::new(2 * gap, 0), 400, side);
            if let Some(k) = (0..=400).find(|&k| a.positions[k] == b.positions[k]) {
                prop_assert_eq!(&a.positions[k..], &b.positions[k..]);
            }
            for k in 0..=400 {
                prop_assert!(a.positions[k] <= b.positions[k]);
            }
        }
    }
}
