//! Rightmost paths in oriented percolation.
//!
//! * [`trace_rho`] follows `ρ_z(n)`, the rightmost site at time `t + n`
//!   reachable by an open path from the half-line `(-∞, x] × {t}`.
//! * [`trace_gamma`] finds the rightmost open path from `z` that survives to a
//!   given depth (a finite-horizon stand-in for the rightmost infinite path).
//! * [`find_break_points`] locates the times at which `ρ` sits on a
//!   percolating site, which split `ρ` into i.i.d. increments.
//!
//! ## Truncation of the half-line
//!
//! `trace_rho` tracks the reachable set only inside a band of width `window`
//! trailing the current rightmost position. Any region of the form
//! `{(y, k) : y >= w(k)}` gives the exact rightmost position as long as the
//! reachable set inside it does not die out: the true rightmost path must
//! cross every path that stays inside the band, and after its last crossing
//! it lies strictly to the right of that path, hence inside the band. So the
//! band only has to be wide enough that the reachable set inside it
//! survives. Extinction is reported as [`Error::EmptyReachable`]; a front that
//! falls back onto the left wall of the band sets
//! [`RhoTrace::boundary_contact`] and the replicate should be discarded.

use crate::error::{Error, Result};
use crate::lattice::{Dir, EdgeSource, Site};

/// `positions[k]` is the path's location at time `start.t + k`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct LatticePath {
    pub start: Site,
    pub positions: Vec<i64>,
}

impl LatticePath {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Number of steps (one less than the number of positions).
    pub fn steps(&self) -> usize {
        self.positions.len().saturating_sub(1)
    }

    pub fn end_time(&self) -> i64 {
        self.start.t + self.steps() as i64
    }

    /// Position at absolute time `t`, if covered.
    pub fn at_time(&self, t: i64) -> Option<i64> {
        let k = t - self.start.t;
        if k < 0 {
            return None;
        }
        self.positions.get(k as usize).copied()
    }

    /// Checks parity and the `ρ` step constraint `positions[k+1] <= positions[k] + 1`.
    pub fn is_valid_rho(&self) -> bool {
        self.positions
            .iter()
            .enumerate()
            .all(|(k, &y)| (y + self.start.t + k as i64).rem_euclid(2) == 0)
            && self.positions.windows(2).all(|w| w[1] <= w[0] + 1)
    }
}

/// A genuine open path: consecutive positions differ by exactly one.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct GammaPath {
    pub start: Site,
    pub positions: Vec<i64>,
}

impl GammaPath {
    pub fn is_nearest_neighbour(&self) -> bool {
        self.positions.windows(2).all(|w| (w[1] - w[0]).abs() == 1)
    }

    pub fn as_lattice_path(&self) -> LatticePath {
        LatticePath { start: self.start, positions: self.positions.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct RhoTrace {
    pub path: LatticePath,
    /// The front fell back onto the left wall of the tracking band.
    pub boundary_contact: bool,
}

impl RhoTrace {
    pub fn trusted(&self) -> bool {
        !self.boundary_contact
    }
}

/// Rightmost reachable positions from the half-line left of `z`, for
/// `n_steps` steps, tracking a band of `window` lattice units behind the front.
pub fn trace_rho<E: EdgeSource>(cfg: &E, z: Site, n_steps: usize, window: usize) -> Result<RhoTrace> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if window < 2 {
        return Err(Error::InvalidArgument("window must be at least 2".into()));
    }
    let half = (window / 2) as i64;

    // Occupancy of lo, lo + 2, ..., lo + 2 * (len - 1).
    let mut lo = z.x - 2 * half;
    let mut cur = vec![true; half as usize + 1];
    let mut next: Vec<bool> = Vec::with_capacity(cur.len() + 2);

    let mut positions = Vec::with_capacity(n_steps + 1);
    positions.push(z.x);
    let mut boundary_contact = false;

    for k in 0..n_steps {
        let t = z.t + k as i64;
        let len = cur.len();
        next.clear();
        next.resize(len + 1, false);
        let base = lo - 1;
        for j in 0..=len {
            let y = base + 2 * j as i64;
            let from_left = j >= 1 && cur[j - 1] && cfg.is_open_at(y - 1, t, Dir::Right);
            next[j] = from_left || (j < len && cur[j] && cfg.is_open_at(y + 1, t, Dir::Left));
        }
        let Some(front_j) = next.iter().rposition(|&b| b) else {
            return Err(Error::EmptyReachable { level: k + 1 });
        };
        if front_j == 0 {
            boundary_contact = true;
        }
        let front = base + 2 * front_j as i64;
        positions.push(front);

        let first_j = front_j.saturating_sub(half as usize);
        lo = base + 2 * first_j as i64;
        cur.clear();
        cur.extend_from_slice(&next[first_j..=front_j]);
    }

    Ok(RhoTrace { path: LatticePath { start: z, positions }, boundary_contact })
}

/// Depth-first explorer over the forward cone of a site, with a dead-site
/// memo that is reset in O(1) between queries.
#[derive(Debug, Default)]
pub struct ConeExplorer {
    stamp: u32,
    dead: Vec<u32>,
    stack: Vec<(i64, u8)>,
}

#[inline]
fn cone_index(depth: usize, offset: i64) -> usize {
    // offset in [-depth, depth] with parity of depth
    depth * (depth + 1) / 2 + ((offset + depth as i64) / 2) as usize
}

/// Outcome of a bounded forward exploration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exploration {
    /// Positions of the rightmost open path reaching the target depth
    /// (`depth + 1` entries).
    Reached(Vec<i64>),
    /// The cluster dies before the target; carries the deepest level seen.
    DiedAt(usize),
}

impl ConeExplorer {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, depth: usize) {
        let need = (depth + 1) * (depth + 2) / 2;
        if self.dead.len() < need {
            self.dead.resize(need, 0);
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.dead.iter_mut().for_each(|v| *v = 0);
            self.stamp = 1;
        }
        self.stack.clear();
    }

    /// Right-greedy depth-first search from `z` for an open path of `depth`
    /// steps. The first path found is the rightmost one.
    pub fn explore<E: EdgeSource>(&mut self, cfg: &E, z: Site, depth: usize) -> Exploration {
        self.reset(depth);
        if depth == 0 {
            return Exploration::Reached(vec![z.x]);
        }
        let stamp = self.stamp;
        let mut deepest = 0usize;
        // (position, next direction to try: 0 = right, 1 = left, 2 = exhausted)
        self.stack.push((z.x, 0));
        while let Some(top) = self.stack.last_mut() {
            let (y, state) = *top;
            top.1 = state.saturating_add(1);
            let d = self.stack.len() - 1;
            if d == depth {
                return Exploration::Reached(self.stack.iter().map(|&(y, _)| y).collect());
            }
            let t = z.t + d as i64;
            let dir = match state {
                0 => Dir::Right,
                1 => Dir::Left,
                _ => {
                    self.dead[cone_index(d, y - z.x)] = stamp;
                    self.stack.pop();
                    continue;
                }
            };
            let child = y + dir.delta();
            if self.dead[cone_index(d + 1, child - z.x)] != stamp && cfg.is_open_at(y, t, dir) {
                self.stack.push((child, 0));
                deepest = deepest.max(d + 1);
            }
        }
        Exploration::DiedAt(deepest)
    }

    pub fn percolates_to<E: EdgeSource>(&mut self, cfg: &E, z: Site, depth: usize) -> bool {
        matches!(self.explore(cfg, z, depth), Exploration::Reached(_))
    }
}

/// Whether `z` has an open path of `depth` steps.
pub fn percolates_to<E: EdgeSource>(cfg: &E, z: Site, depth: usize) -> bool {
    ConeExplorer::new().percolates_to(cfg, z, depth)
}

/// Deepest level (relative to `z`) reached by the open cluster of `z`,
/// capped at `max_depth`.
pub fn cluster_depth<E: EdgeSource>(cfg: &E, z: Site, max_depth: usize) -> usize {
    match ConeExplorer::new().explore(cfg, z, max_depth) {
        Exploration::Reached(_) => max_depth,
        Exploration::DiedAt(d) => d,
    }
}

/// Rightmost open path from `z` that reaches time `z.t + n_steps + horizon`,
/// truncated to its first `n_steps` steps. `None` when `z` does not reach the
/// horizon, i.e. `z` is (up to the horizon) not a percolation point.
pub fn trace_gamma<E: EdgeSource>(cfg: &E, z: Site, n_steps: usize, horizon: usize) -> Result<Option<GammaPath>> {
    if n_steps == 0 || horizon == 0 {
        return Err(Error::InvalidArgument("n_steps and horizon must be at least 1".into()));
    }
    Ok(match ConeExplorer::new().explore(cfg, z, n_steps + horizon) {
        Exploration::Reached(mut positions) => {
            positions.truncate(n_steps + 1);
            Some(GammaPath { start: z, positions })
        }
        Exploration::DiedAt(_) => None,
    })
}

/// Break-point decomposition of a `ρ` path.
///
/// `break_times` are offsets from `start.t`; `increments[i]` is
/// `(X_{i+1}, τ_{i+1})` with `X_1 = ρ(T_1) - start.x`.
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize)]
pub struct RegenSequence {
    pub increments: Vec<(i64, i64)>,
    pub break_times: Vec<i64>,
}

impl RegenSequence {
    /// Increments with index >= 2, which are i.i.d.
    pub fn steady(&self) -> &[(i64, i64)] {
        self.increments.get(1..).unwrap_or(&[])
    }

    /// `W(n) = Σ_{i<=n} (X_i - α τ_i)` for n = 1..len.
    pub fn centered_walk(&self, alpha: f64) -> Vec<f64> {
        self.increments
            .iter()
            .scan(0.0, |acc, &(x, tau)| {
                *acc += x as f64 - alpha * tau as f64;
                Some(*acc)
            })
            .collect()
    }
}

/// Times `n >= 1` at which `(ρ(n), n)` has an open path of `horizon` further
/// steps. Truncating at a finite horizon errs only on sites whose cluster is
/// finite but deeper than `horizon`, an exponentially rare event.
pub fn find_break_points<E: EdgeSource>(cfg: &E, rho: &RhoTrace, horizon: usize) -> Result<RegenSequence> {
    if rho.boundary_contact {
        return Err(Error::InvalidArgument("ρ trace has boundary contact".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let path = &rho.path;
    let mut explorer = ConeExplorer::new();
    let mut seq = RegenSequence::default();
    let (mut last_t, mut last_x) = (0i64, path.start.x);
    for (n, &x) in path.positions.iter().enumerate().skip(1) {
        let site = Site { x, t: path.start.t + n as i64 };
        if explorer.percolates_to(cfg, site, horizon) {
            let n = n as i64;
            seq.break_times.push(n);
            seq.increments.push((x - last_x, n - last_t));
            last_t = n;
            last_x = x;
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{NoiseField, PercConfig};

    struct AllOpen;
    impl EdgeSource for AllOpen {
        fn is_open_at(&self, _: i64, _: i64, _: Dir) -> bool {
            true
        }
    }

    #[test]
    fn rho_all_open_is_diagonal() {
        let r = trace_rho(&AllOpen, Site::origin(), 5, 20).unwrap();
        assert_eq!(r.path.positions, vec![0, 1, 2, 3, 4, 5]);
        assert!(r.trusted());
    }

    #[test]
    fn gamma_all_open_is_diagonal() {
        let g = trace_gamma(&AllOpen, Site::new(2, 4), 4, 10).unwrap().unwrap();
        assert_eq!(g.positions, vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn all_times_break_at_p_one() {
        let cfg = PercConfig::new(NoiseField::new(3), 1.0).unwrap();
        let r = trace_rho(&cfg, Site::origin(), 30, 40).unwrap();
        let seq = find_break_points(&cfg, &r, 10).unwrap();
        assert_eq!(seq.break_times, (1..=30).collect::<Vec<_>>());
        assert!(seq.increments.iter().all(|&inc| inc == (1, 1)));
    }

    #[test]
    fn closed_lattice_has_no_gamma_and_empty_rho() {
        let cfg = PercConfig::new(NoiseField::new(3), 0.0).unwrap();
        assert!(trace_gamma(&cfg, Site::origin(), 3, 3).unwrap().is_none());
        assert!(matches!(
            trace_rho(&cfg, Site::origin(), 3, 10),
            Err(Error::EmptyReachable { level: 1 })
        ));
        assert_eq!(cluster_depth(&cfg, Site::origin(), 10), 0);
    }

    #[test]
    fn rho_respects_step_constraint_and_parity() {
        let cfg = PercConfig::new(NoiseField::new(17), 0.75).unwrap();
        for r in 0..20 {
            let c = cfg.replicate(r);
            let tr = trace_rho(&c, Site::new(1, 3), 100, 120).unwrap();
            assert!(tr.path.is_valid_rho());
        }
    }

    #[test]
    fn regen_invariants() {
        let cfg = PercConfig::new(NoiseField::new(5), 0.8).unwrap();
        let tr = trace_rho(&cfg, Site::origin(), 400, 100).unwrap();
        let seq = find_break_points(&cfg, &tr, 40).unwrap();
        let mut sum = 0;
        for (i, &(x, tau)) in seq.increments.iter().enumerate() {
            sum += tau;
            assert_eq!(seq.break_times[i], sum);
            assert!(tau >= 1);
            assert_eq!((x - tau).rem_euclid(2), 0);
            if i >= 1 {
                assert!(x.abs() <= tau);
            }
        }
        let w = seq.centered_walk(0.5);
        assert_eq!(w.len(), seq.increments.len());
    }

    #[test]
    fn invalid_arguments() {
        assert!(trace_rho(&AllOpen, Site::origin(), 0, 10).is_err());
        assert!(trace_gamma(&AllOpen, Site::origin(), 0, 10).is_err());
        let r = trace_rho(&AllOpen, Site::origin(), 3, 10).unwrap();
        let flagged = RhoTrace { boundary_contact: true, ..r };
        assert!(find_break_points(&AllOpen, &flagged, 5).is_err());
    }

    #[test]
    fn cone_index_is_dense() {
        let mut seen = std::collections::HashSet::new();
        for d in 0..12usize {
            for off in (-(d as i64)..=d as i64).step_by(2) {
                assert!(seen.insert(cone_index(d, off)));
            }
        }
        assert_eq!(seen.len(), 13 * 12 / 2);
        assert_eq!(*seen.iter().max().unwrap(), 13 * 12 / 2 - 1);
    }
}
