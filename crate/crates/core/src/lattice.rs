//! Lazy i.i.d. edge weights on the oriented lattice and the monotone
//! p-open predicate built on top of them.
//!
//! The lattice is `{(x, t) : x + t even}` with directed edges from `(x, t)` to
//! `(x ± 1, t + 1)`. Each edge carries a uniform weight `ω_e ∈ [0, 1)` that is
//! computed on demand from `(seed, edge)`, so nothing is ever stored and any
//! number of threads can query the same field.
//!
//! # Edge key layout
//!
//! An edge is packed into a 64-bit key before hashing:
//!
//! ```text
//!  bit 63 .. 49   48     47 .. 24          23 .. 0
//!  +-----------+-----+----------------+----------------+
//!  |   zero    | dir | t (low 24 bits)| x (low 24 bits)|
//!  +-----------+-----+----------------+----------------+
//! ```
//!
//! `x` and `t` are stored as the low 24 bits of their two's complement
//! representation, so coordinates in `[-2^23, 2^23)` map to distinct keys.
//! `dir` is 1 for the `+1` edge and 0 for the `-1` edge.
//!
//! The weight is the SplitMix64 output for counter `key` on the stream
//! selected by `seed`:
//!
//! ```text
//! state  = mix64(seed + 0x9E3779B97F4A7C15)
//! h      = mix64(state + key * 0x9E3779B97F4A7C15)      (wrapping)
//! ω_e    = (h >> 11) * 2^-53
//! ```
//!
//! where `mix64` is Stafford's "Mix13" finalizer
//! (`z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31`).

use crate::error::{Error, Result};

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_C1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_C2: u64 = 0x94D0_49BB_1331_11EB;
const COORD_MASK: u64 = 0x00FF_FFFF;
const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

/// Stafford Mix13 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_C1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_C2);
    z ^ (z >> 31)
}

/// Top 53 bits of `h` as a double in `[0, 1)`.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * UNIT
}

/// Derives the seed of sub-stream `index` from a master seed. Used to give
/// every replicate its own independent field.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ 0x5851_F42D_4C95_7F2D).wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)))
}

/// A site of the even sublattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Site {
    pub x: i64,
    pub t: i64,
}

impl Site {
    /// Panics if `x + t` is odd.
    pub fn new(x: i64, t: i64) -> Self {
        Self::try_new(x, t).expect("site must satisfy x + t even")
    }

    pub fn try_new(x: i64, t: i64) -> Result<Self> {
        if (x + t).rem_euclid(2) != 0 {
            return Err(Error::InvalidArgument(format!("site ({x}, {t}) has odd x + t")));
        }
        Ok(Self { x, t })
    }

    pub fn origin() -> Self {
        Self { x: 0, t: 0 }
    }

    #[inline]
    pub fn step(self, dir: Dir) -> Self {
        Self { x: self.x + dir.delta(), t: self.t + 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    Left,
    Right,
}

impl Dir {
    #[inline]
    pub fn delta(self) -> i64 {
        match self {
            Dir::Left => -1,
            Dir::Right => 1,
        }
    }

    pub fn from_delta(d: i64) -> Option<Self> {
        match d {
            -1 => Some(Dir::Left),
            1 => Some(Dir::Right),
            _ => None,
        }
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Dir::Left => Dir::Right,
            Dir::Right => Dir::Left,
        }
    }
}

/// A directed edge `from -> (from.x + dir, from.t + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub from: Site,
    pub dir: Dir,
}

impl EdgeRef {
    pub fn new(from: Site, dir: Dir) -> Self {
        Self { from, dir }
    }

    pub fn target(self) -> Site {
        self.from.step(self.dir)
    }

    /// Packed key, see the module docs for the layout.
    #[inline]
    pub fn key(self) -> u64 {
        edge_key(self.from.x, self.from.t, self.dir)
    }
}

#[inline]
pub fn edge_key(x: i64, t: i64, dir: Dir) -> u64 {
    let d = match dir {
        Dir::Left => 0u64,
        Dir::Right => 1u64,
    };
    (x as u64 & COORD_MASK) | ((t as u64 & COORD_MASK) << 24) | (d << 48)
}

/// Seed-keyed field of i.i.d. uniform edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseField {
    seed: u64,
    state: u64,
}

impl NoiseField {
    pub fn new(seed: u64) -> Self {
        Self { seed, state: mix64(seed.wrapping_add(GOLDEN_GAMMA)) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent field for replicate `index`.
    pub fn replicate(&self, index: u64) -> Self {
        Self::new(derive_seed(self.seed, index))
    }

    #[inline]
    pub fn hash_key(&self, key: u64) -> u64 {
        mix64(self.state.wrapping_add(key.wrapping_mul(GOLDEN_GAMMA)))
    }

    #[inline]
    pub fn weight_at(&self, x: i64, t: i64, dir: Dir) -> f64 {
        unit_f64(self.hash_key(edge_key(x, t, dir)))
    }

    #[inline]
    pub fn edge_weight(&self, e: EdgeRef) -> f64 {
        self.weight_at(e.from.x, e.from.t, e.dir)
    }
}

/// Anything that can answer "is this directed edge open?".
pub trait EdgeSource {
    fn is_open_at(&self, x: i64, t: i64, dir: Dir) -> bool;

    fn is_open(&self, e: EdgeRef) -> bool {
        self.is_open_at(e.from.x, e.from.t, e.dir)
    }
}

impl<E: EdgeSource + ?Sized> EdgeSource for &E {
    #[inline]
    fn is_open_at(&self, x: i64, t: i64, dir: Dir) -> bool {
        (**self).is_open_at(x, t, dir)
    }
}

/// Bond percolation configuration: edge `e` is open iff `ω_e < p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercConfig {
    pub noise: NoiseField,
    p: f64,
}

impl PercConfig {
    pub fn new(noise: NoiseField, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Self { noise, p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Same parameter on replicate `index` of the noise.
    pub fn replicate(&self, index: u64) -> Self {
        Self { noise: self.noise.replicate(index), p: self.p }
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.noise, p)
    }
}

impl EdgeSource for PercConfig {
    #[inline]
    fn is_open_at(&self, x: i64, t: i64, dir: Dir) -> bool {
        self.noise.weight_at(x, t, dir) < self.p
    }
}

/// Configurations at `p - eps` and `p + eps` on the same noise; every edge
/// open in the first is open in the second.
pub fn coupled_configs(noise: NoiseField, p: f64, eps: f64) -> Result<(PercConfig, PercConfig)> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability(p));
    }
    if eps.is_nan() || eps < 0.0 || eps > p.min(1.0 - p) {
        return Err(Error::InvalidCoupling { p, eps });
    }
    Ok((PercConfig::new(noise, p - eps)?, PercConfig::new(noise, p + eps)?))
}
