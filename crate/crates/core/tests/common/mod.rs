//! Brute-force reference implementations shared by the integration tests.
//! None of these reuse library code beyond the edge predicate.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use sticky_op::lattice::{Dir, EdgeSource};

/// Rightmost reachable position at each level from the source segment
/// `[x - 2 * half, x]` (same parity as `x`), by plain breadth-first
/// propagation of the full occupied set. `None` once the set is empty.
pub fn bfs_rightmost<E: EdgeSource>(cfg: &E, x: i64, t: i64, levels: usize, half: i64) -> Vec<Option<i64>> {
    let mut cur: BTreeSet<i64> = (0..=half).map(|j| x - 2 * j).collect();
    let mut out = vec![Some(x)];
    for k in 0..levels {
        let tk = t + k as i64;
        let mut next = BTreeSet::new();
        for &y in &cur {
            for dir in [Dir::Left, Dir::Right] {
                if cfg.is_open_at(y, tk, dir) {
                    next.insert(y + dir.delta());
                }
            }
        }
        out.push(next.iter().next_back().copied());
        cur = next;
    }
    out
}

/// Whether `(x, t)` has an open path of `depth` steps, by layered BFS.
pub fn bfs_percolates<E: EdgeSource>(cfg: &E, x: i64, t: i64, depth: usize) -> bool {
    let mut cur: BTreeSet<i64> = [x].into();
    for k in 0..depth {
        let tk = t + k as i64;
        let mut next = BTreeSet::new();
        for &y in &cur {
            for dir in [Dir::Left, Dir::Right] {
                if cfg.is_open_at(y, tk, dir) {
                    next.insert(y + dir.delta());
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        cur = next;
    }
    true
}

/// Every open path of exactly `depth` steps from `(x, t)`.
pub fn enumerate_paths<E: EdgeSource>(cfg: &E, x: i64, t: i64, depth: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut prefix = vec![x];
    fn rec<E: EdgeSource>(cfg: &E, t0: i64, depth: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == depth + 1 {
            out.push(prefix.clone());
            return;
        }
        let y = *prefix.last().unwrap();
        let t = t0 + prefix.len() as i64 - 1;
        for dir in [Dir::Left, Dir::Right] {
            if cfg.is_open_at(y, t, dir) {
                prefix.push(y + dir.delta());
                rec(cfg, t0, depth, prefix, out);
                prefix.pop();
            }
        }
    }
    rec(cfg, t, depth, &mut prefix, &mut out);
    out
}

/// Sticky random walk on `h Z_{>=0}` with time step `h²`: upward bias
/// `√2 b h` away from 0, and at 0 a jump to `h` with probability `√2 b h`,
/// otherwise a hold. Returns the position after `t` time units.
pub fn sticky_walk_gap<R: Rng>(b: f64, h: f64, t: f64, rng: &mut R) -> f64 {
    let q = std::f64::consts::SQRT_2 * b * h;
    assert!(q <= 1.0);
    let up = 0.5 * (1.0 + q);
    let steps = (t / (h * h)).round() as usize;
    let mut k: u64 = 0;
    for _ in 0..steps {
        let u: f64 = rng.random();
        if k == 0 {
            if u < q {
                k = 1;
            }
        } else if u < up {
            k += 1;
        } else {
            k -= 1;
        }
    }
    k as f64 * h
}

pub type Mat2 = [[f64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `exp(Q s)` by scaling and squaring of a truncated Taylor series.
pub fn mat_exp(q: &Mat2, s: f64) -> Mat2 {
    let norm = q.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max) * s;
    let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
    let scale = s / 2f64.powi(squarings as i32);
    let a = [[q[0][0] * scale, q[0][1] * scale], [q[1][0] * scale, q[1][1] * scale]];
    let mut sum = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = sum;
    for k in 1..30 {
        term = mat_mul(&term, &a);
        for i in 0..2 {
            for j in 0..2 {
                term[i][j] /= k as f64;
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mat_mul(&sum, &sum);
    }
    sum
}

/// Covariance of the open indicator at lag `s` for the stationary chain
/// with rates `0 -> 1: eps p` and `1 -> 0: eps (1 - p)`.
pub fn chain_autocovariance(p: f64, eps: f64, s: f64) -> f64 {
    // state 0 = closed, 1 = open
    let q = [[-eps * p, eps * p], [eps * (1.0 - p), -eps * (1.0 - p)]];
    let m = mat_exp(&q, s);
    p * m[1][1] - p * p
}
