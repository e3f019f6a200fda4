//! Coalescing-arrow discrete web, its branching perturbation, and the two
//! dynamical models (arrow flips and edge-state chains).
//!
//! Every site of the even sublattice carries one arrow, `±1` with probability
//! 1/2. With branching parameter `ε`, a site also carries the other arrow
//! with probability `ε`. Dynamical versions are evaluated lazily per site or
//! edge from counter-based exponential clocks.

use crate::error::{Error, Result};
use crate::lattice::{derive_seed, edge_key, unit_f64, Dir, EdgeSource, NoiseField, PercConfig, Site};
use crate::paths::GammaPath;

const STREAM_ARROW: u64 = 1;
const STREAM_EXTRA: u64 = 2;
const STREAM_FLIP: u64 = 3;
const STREAM_CHAIN: u64 = 4;
const MAX_EVENTS: u64 = 1 << 15;

fn site_key(x: i64, t: i64) -> u64 {
    edge_key(x, t, Dir::Left)
}

/// `k`-th uniform of the stream attached to `key`.
fn event_uniform(noise: &NoiseField, key: u64, k: u64) -> f64 {
    assert!(k < MAX_EVENTS, "event stream exhausted");
    unit_f64(noise.hash_key(key | k << 49))
}

/// Exponential with rate `rate` from a uniform in `[0, 1)`.
fn exponential(u: f64, rate: f64) -> f64 {
    -(1.0 - u).ln() / rate
}

/// Source of arrows, possibly with extra (branching) arrows.
pub trait ArrowSource {
    fn arrow(&self, x: i64, t: i64) -> Dir;

    fn has_extra(&self, _x: i64, _t: i64) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrowField {
    arrows: NoiseField,
    extras: NoiseField,
    eps: f64,
}

impl ArrowField {
    pub fn new(seed: u64, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidProbability(eps));
        }
        Ok(Self { arrows: NoiseField::new(derive_seed(seed, STREAM_ARROW)), extras: NoiseField::new(derive_seed(seed, STREAM_EXTRA)), eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Same branching parameter on replicate `index`.
    pub fn replicate(&self, index: u64) -> Self {
        Self { arrows: self.arrows.replicate(index), extras: self.extras.replicate(index), eps: self.eps }
    }
}

impl ArrowSource for ArrowField {
    fn arrow(&self, x: i64, t: i64) -> Dir {
        if self.arrows.hash_key(site_key(x, t)) >> 63 == 1 {
            Dir::Right
        } else {
            Dir::Left
        }
    }

    fn has_extra(&self, x: i64, t: i64) -> bool {
        self.eps > 0.0 && unit_f64(self.extras.hash_key(site_key(x, t))) < self.eps
    }
}

/// The edge `(x, t) -> (x + dir, t + 1)` is open iff it carries an arrow.
impl EdgeSource for ArrowField {
    fn is_open_at(&self, x: i64, t: i64, dir: Dir) -> bool {
        self.arrow(x, t) == dir || self.has_extra(x, t)
    }
}

/// Path following the primary arrow from `z`.
pub fn trace_walk<A: ArrowSource>(field: &A, z: Site, n_steps: usize) -> GammaPath {
    let mut positions = Vec::with_capacity(n_steps + 1);
    let mut x = z.x;
    positions.push(x);
    for k in 0..n_steps {
        x += field.arrow(x, z.t + k as i64).delta();
        positions.push(x);
    }
    GammaPath { start: z, positions }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Leftmost or rightmost path from `z` using both primary and extra arrows.
pub fn trace_extremal<A: ArrowSource>(field: &A, z: Site, n_steps: usize, side: Side) -> GammaPath {
    let preferred = match side {
        Side::Left => Dir::Left,
        Side::Right => Dir::Right,
    };
    let mut positions = Vec::with_capacity(n_steps + 1);
    let mut x = z.x;
    positions.push(x);
    for k in 0..n_steps {
        let t = z.t + k as i64;
        let step = if field.arrow(x, t) == preferred || field.has_extra(x, t) { preferred } else { preferred.flip() };
        x += step.delta();
        positions.push(x);
    }
    GammaPath { start: z, positions }
}

/// Arrows that flip at the events of independent rate-`rate` Poisson clocks,
/// one per site, in dynamical time `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalArrowField {
    base: ArrowField,
    clocks: NoiseField,
    rate: f64,
}

impl DynamicalArrowField {
    pub fn new(seed: u64, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::InvalidArgument(format!("flip rate must be nonnegative, got {rate}")));
        }
        Ok(Self { base: ArrowField::new(seed, 0.0)?, clocks: NoiseField::new(derive_seed(seed, STREAM_FLIP)), rate })
    }

    pub fn base(&self) -> &ArrowField {
        &self.base
    }

    pub fn replicate(&self, index: u64) -> Self {
        Self { base: self.base.replicate(index), clocks: self.clocks.replicate(index), rate: self.rate }
    }

    /// Number of flips at `(x, t)` during `[0, s]`.
    pub fn flips(&self, x: i64, t: i64, s: f64) -> u64 {
        if self.rate == 0.0 {
            return 0;
        }
        let key = site_key(x, t);
        let (mut clock, mut k) = (0.0, 0u64);
        loop {
            clock += exponential(event_uniform(&self.clocks, key, k), self.rate);
            if clock > s {
                return k;
            }
            k += 1;
        }
    }

    pub fn arrow_at(&self, x: i64, t: i64, s: f64) -> Dir {
        let a = self.base.arrow(x, t);
        if self.flips(x, t, s) % 2 == 1 {
            a.flip()
        } else {
            a
        }
    }

    /// The field frozen at dynamical time `s`.
    pub fn at(&self, s: f64) -> Snapshot<'_> {
        Snapshot { field: self, s }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a> {
    field: &'a DynamicalArrowField,
    pub s: f64,
}

impl ArrowSource for Snapshot<'_> {
    fn arrow(&self, x: i64, t: i64) -> Dir {
        self.field.arrow_at(x, t, self.s)
    }
}

/// Walks from each of `starts` in the snapshots at each time of `s_list`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalPaths {
    pub s: f64,
    pub paths: Vec<GammaPath>,
}

pub fn evolve_dynamical(field: &DynamicalArrowField, starts: &[Site], s_list: &[f64], n_steps: usize) -> Result<Vec<DynamicalPaths>> {
    if s_list.windows(2).any(|w| w[1] < w[0]) || s_list.first().is_some_and(|&s| s < 0.0) {
        return Err(Error::InvalidArgument("s_list must be nonnegative and nondecreasing".into()));
    }
    Ok(s_list
        .iter()
        .map(|&s| {
            let snap = field.at(s);
            DynamicalPaths { s, paths: starts.iter().map(|&z| trace_walk(&snap, z, n_steps)).collect() }
        })
        .collect())
}

/// Bond percolation in which every edge runs an independent stationary
/// two-state chain: open to closed at rate `eps (1 - p)`, closed to open at
/// rate `eps p`. The state at `s = 0` is the static configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalPercolation {
    initial: PercConfig,
    clocks: NoiseField,
    eps: f64,
}

impl DynamicalPercolation {
    pub fn new(noise: NoiseField, p: f64, eps: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("rate scale must be positive, got {eps}")));
        }
        Ok(Self { initial: PercConfig::new(noise, p)?, clocks: NoiseField::new(derive_seed(noise.seed(), STREAM_CHAIN)), eps })
    }

    pub fn p(&self) -> f64 {
        self.initial.p()
    }

    pub fn is_open_at_time(&self, x: i64, t: i64, dir: Dir, s: f64) -> bool {
        let mut open = self.initial.is_open_at(x, t, dir);
        if s <= 0.0 {
            return open;
        }
        let p = self.p();
        let key = edge_key(x, t, dir);
        let (mut clock, mut k) = (0.0, 0u64);
        loop {
            let rate = if open { self.eps * (1.0 - p) } else { self.eps * p };
            clock += exponential(event_uniform(&self.clocks, key, k), rate);
            if clock > s {
                return open;
            }
            open = !open;
            k += 1;
        }
    }

    /// The configuration at dynamical time `s`.
    pub fn at(&self, s: f64) -> PercolationSnapshot<'_> {
        PercolationSnapshot { dynamics: self, s }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PercolationSnapshot<'a> {
    dynamics: &'a DynamicalPercolation,
    pub s: f64,
}

impl EdgeSource for PercolationSnapshot<'_> {
    fn is_open_at(&self, x: i64, t: i64, dir: Dir) -> bool {
        self.dynamics.is_open_at_time(x, t, dir, self.s)
    }
}
