//! Continuum side: grid paths, the Skorohod reflection map, and samplers for
//! the left-right sticky pair `(l, r)` with drift `b`.
//!
//! The exact sampler builds the pair after its meeting time from three
//! ingredients on an auxiliary clock `u`:
//!
//! * `Z(u)`, the Skorohod reflection at 0 of `z0 + B(u) + 2bu`, with regulator
//!   `L(u)`;
//! * the clock change `C⁻¹(u) = 2u + L(u)/b`, whose inverse `C` maps real
//!   time to clock time;
//! * an independent Brownian motion `B′`.
//!
//! Then `r(t) = m + B′(t - C(t)) + Z(C(t))` and `l(t) = m + B′(t - C(t)) - Z(C(t))`
//! where `m` is the midpoint at the meeting time. While `Z > 0` the clock runs
//! at half speed and the two coordinates are independent drifted Brownian
//! motions; while `L` grows the clock is frozen, `Z = 0`, and `l = r` moves
//! with `B′` alone.
//!
//! On a clock grid of step `du`, each step is laid out in real time as a
//! moving segment of length `2du` followed by a stuck segment of length
//! `ΔL/b` during which the gap is exactly zero.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Values of a real path on the grid `t0 + k dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumPath {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl ContinuumPath {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("path values must be finite".into()));
        }
        Ok(Self { t0, dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// Linear interpolation; `None` outside `[t0, end_time]`.
    pub fn at(&self, t: f64) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let s = (t - self.t0) / self.dt;
        let last = (self.len() - 1) as f64;
        if s < -1e-9 || s > last + 1e-9 {
            return None;
        }
        let s = s.clamp(0.0, last);
        let k = (s.floor() as usize).min(self.len() - 1);
        if k + 1 >= self.len() {
            return Some(self.values[k]);
        }
        let w = s - k as f64;
        Some(self.values[k] * (1.0 - w) + self.values[k + 1] * w)
    }

    /// Index of the first grid point at or after `t`.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        (((t - self.t0) / self.dt - 1e-9).ceil().max(0.0) as usize).min(self.len())
    }
}

/// Reflection of `f` at 0: `g = f + reg` with
/// `reg(t) = -min(0, inf_{s<=t} f(s))`.
pub fn skorohod_reflect(f: &ContinuumPath) -> Result<(ContinuumPath, ContinuumPath)> {
    let Some(&f0) = f.values.first() else {
        return Err(Error::EmptySample);
    };
    if f0 < 0.0 {
        return Err(Error::NegativeStart(f0));
    }
    let mut reg = 0.0f64;
    let mut g = Vec::with_capacity(f.len());
    let mut r = Vec::with_capacity(f.len());
    for &v in &f.values {
        reg = reg.max(-v);
        g.push(v + reg);
        r.push(reg);
    }
    Ok((ContinuumPath { t0: f.t0, dt: f.dt, values: g }, ContinuumPath { t0: f.t0, dt: f.dt, values: r }))
}

/// The clock change `C⁻¹(u_k) = 2 u_k + L_k / b` on a uniform clock grid,
/// and its inverse `C` by monotone linear interpolation between knots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeChange {
    pub du: f64,
    /// `C⁻¹(k du)`.
    pub c_inv: Vec<f64>,
}

impl TimeChange {
    pub fn from_regulator(regulator: &[f64], du: f64, b: f64) -> Self {
        let c_inv = regulator.iter().enumerate().map(|(k, l)| 2.0 * k as f64 * du + l / b).collect();
        Self { du, c_inv }
    }

    /// Real time covered by the grid.
    pub fn horizon(&self) -> f64 {
        self.c_inv.last().copied().unwrap_or(0.0)
    }

    /// Real time at the end of the moving part of step `k` (from knot `k-1`).
    fn moving_end(&self, k: usize) -> f64 {
        self.c_inv[k - 1] + 2.0 * self.du
    }

    /// `C(t)` as a clock position `(k, frac)`: the clock sits between knots
    /// `k - 1` and `k`, a fraction `frac` of the way. Frozen segments report
    /// `frac = 1`.
    fn locate(&self, t: f64, hint: &mut usize) -> (usize, f64) {
        let n = self.c_inv.len();
        while *hint + 1 < n && self.c_inv[*hint + 1] <= t {
            *hint += 1;
        }
        let k = *hint + 1;
        if k >= n {
            return (n - 1, 1.0);
        }
        let me = self.moving_end(k);
        if t >= me {
            (k, 1.0)
        } else {
            (k, ((t - self.c_inv[k - 1]) / (2.0 * self.du)).clamp(0.0, 1.0))
        }
    }

    /// `C(t)`.
    pub fn c(&self, t: f64) -> f64 {
        let mut hint = 0;
        let (k, frac) = self.locate(t, &mut hint);
        ((k - 1) as f64 + frac) * self.du
    }
}

/// Post-meeting core: the half-gap `Z(C(t_j))` and the elapsed common-noise
/// time `t_j - C(t_j)` on the output grid `t_j = j dt`, `j = 0..=n`.
fn sticky_core<R: Rng + ?Sized>(b: f64, z0: f64, n: usize, dt: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let du = dt / 2.0;
    let sq = du.sqrt();
    let horizon = n as f64 * dt;

    let mut z = vec![z0];
    let mut reg = vec![0.0];
    let mut y = z0;
    let mut l = 0.0f64;
    let mut t_end = 0.0;
    while t_end < horizon + dt {
        let g: f64 = rng.sample(StandardNormal);
        y += sq * g + 2.0 * b * du;
        l = l.max(-y);
        z.push(if y + l <= 0.0 { 0.0 } else { y + l });
        reg.push(l);
        t_end = 2.0 * (z.len() - 1) as f64 * du + l / b;
    }
    let tc = TimeChange::from_regulator(&reg, du, b);

    let mut zs = Vec::with_capacity(n + 1);
    let mut ss = Vec::with_capacity(n + 1);
    let mut hint = 0;
    for j in 0..=n {
        let t = j as f64 * dt;
        let (k, frac) = tc.locate(t, &mut hint);
        let zv = z[k - 1] * (1.0 - frac) + z[k] * frac;
        let c = ((k - 1) as f64 + frac) * du;
        zs.push(zv.max(0.0));
        ss.push((t - c).max(0.0));
    }
    (zs, ss)
}

/// A sampled `(l, r)` pair on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StickyPairSample {
    pub l: ContinuumPath,
    pub r: ContinuumPath,
    /// First grid time with `l <= r`.
    pub tau: Option<f64>,
    pub b: f64,
}

/// Starting point `(x, t)` of one coordinate in the continuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Start {
    pub x: f64,
    pub t: f64,
}

impl Start {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }
}

fn check_pair_args(b: f64, dt: f64, l0: Start, r0: Start, t_max: f64) -> Result<usize> {
    if !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("drift b must be positive, got {b}")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let ts = l0.t.max(r0.t);
    if !(t_max > ts) {
        return Err(Error::InvalidArgument("t_max must exceed the later start time".into()));
    }
    Ok(((t_max - ts) / dt).round().max(1.0) as usize)
}

/// Both coordinates at the later start time, advancing the earlier one alone.
fn advance_to_common_start<R: Rng + ?Sized>(b: f64, l0: Start, r0: Start, rng: &mut R) -> (f64, f64) {
    let ts = l0.t.max(r0.t);
    let mut step = |x: f64, t: f64, drift: f64| {
        let h = ts - t;
        if h > 0.0 {
            x + drift * h + h.sqrt() * rng.sample::<f64, _>(StandardNormal)
        } else {
            x
        }
    };
    let l = step(l0.x, l0.t, -b);
    let r = step(r0.x, r0.t, b);
    (l, r)
}

/// Internal refinement of the output grid used by the exact samplers. The
/// output is read off every `SUBSTEPS`-th point of the fine grid.
pub const SUBSTEPS: usize = 16;

/// Exact-construction sampler for the sticky pair with drift `b`, `l`
/// started from `l0` and `r` from `r0`, observed on the grid of step `dt`
/// from the later start time up to `t_max`.
///
/// Until the first time with `l <= r` on the internal grid (step
/// `dt / SUBSTEPS`) the coordinates are independent Brownian motions with
/// drifts `-b` and `+b`. If they cross between grid times, both restart from
/// the midpoint. `tau` is reported at the internal resolution.
pub fn sample_sticky_pair_exact<R: Rng + ?Sized>(b: f64, l0: Start, r0: Start, t_max: f64, dt: f64, rng: &mut R) -> Result<StickyPairSample> {
    let n = check_pair_args(b, dt, l0, r0, t_max)?;
    let ts = l0.t.max(r0.t);
    let nf = n * SUBSTEPS;
    let dtf = dt / SUBSTEPS as f64;
    let sq = dtf.sqrt();
    let (mut l, mut r) = advance_to_common_start(b, l0, r0, rng);
    let mut lv = Vec::with_capacity(n + 1);
    let mut rv = Vec::with_capacity(n + 1);
    let mut meet = None;
    for j in 0..=nf {
        if l <= r {
            meet = Some(j);
            break;
        }
        if j % SUBSTEPS == 0 {
            lv.push(l);
            rv.push(r);
        }
        if j < nf {
            l += -b * dtf + sq * rng.sample::<f64, _>(StandardNormal);
            r += b * dtf + sq * rng.sample::<f64, _>(StandardNormal);
        }
    }
    if let Some(j) = meet {
        let m = (l + r) / 2.0;
        let z0 = if j == 0 { (r - l) / 2.0 } else { 0.0 };
        let (zs, ss) = sticky_core(b, z0, nf - j, dtf, rng);
        let mut bp = 0.0;
        let mut s_prev = 0.0;
        let first = (SUBSTEPS - j % SUBSTEPS) % SUBSTEPS;
        for i in (first..zs.len()).step_by(SUBSTEPS) {
            let ds = ss[i] - s_prev;
            if ds > 0.0 {
                bp += ds.sqrt() * rng.sample::<f64, _>(StandardNormal);
            }
            s_prev = ss[i];
            lv.push(m + bp - zs[i]);
            rv.push(m + bp + zs[i]);
        }
    }
    let tau = meet.map(|j| ts + j as f64 * dtf);
    Ok(StickyPairSample { l: ContinuumPath::new(ts, dt, lv)?, r: ContinuumPath::new(ts, dt, rv)?, tau, b })
}

/// Sticky gap `w = (r - l) / √2` started from `w0 >= 0`, on `[0, t_max]`.
pub fn sample_sticky_gap<R: Rng + ?Sized>(b: f64, w0: f64, t_max: f64, dt: f64, rng: &mut R) -> Result<ContinuumPath> {
    if w0 < 0.0 {
        return Err(Error::NegativeStart(w0));
    }
    let n = check_pair_args(b, dt, Start::new(0.0, 0.0), Start::new(0.0, 0.0), t_max)?;
    let (zs, _) = sticky_core(b, w0 / std::f64::consts::SQRT_2, n * SUBSTEPS, dt / SUBSTEPS as f64, rng);
    ContinuumPath::new(0.0, dt, zs.into_iter().step_by(SUBSTEPS).map(|z| z * std::f64::consts::SQRT_2).collect())
}

/// Euler scheme for the pair: independent noises while `|r - l| > threshold`,
/// a shared noise otherwise. No ordering is enforced. This is a rough
/// cross-check, not a sampler of the exact law.
pub fn sample_sticky_pair_em<R: Rng + ?Sized>(b: f64, threshold: f64, l0: Start, r0: Start, t_max: f64, dt: f64, rng: &mut R) -> Result<StickyPairSample> {
    if threshold < 0.0 {
        return Err(Error::InvalidArgument("threshold must be nonnegative".into()));
    }
    let n = check_pair_args(b, dt, l0, r0, t_max)?;
    let ts = l0.t.max(r0.t);
    let (mut l, mut r) = advance_to_common_start(b, l0, r0, rng);
    let sq = dt.sqrt();
    let mut lv = Vec::with_capacity(n + 1);
    let mut rv = Vec::with_capacity(n + 1);
    let mut tau = None;
    for j in 0..=n {
        if tau.is_none() && l <= r {
            tau = Some(ts + j as f64 * dt);
        }
        lv.push(l);
        rv.push(r);
        if j == n {
            break;
        }
        let gl: f64 = rng.sample(StandardNormal);
        let gr: f64 = if (r - l).abs() <= threshold { gl } else { rng.sample(StandardNormal) };
        l += -b * dt + sq * gl;
        r += b * dt + sq * gr;
    }
    Ok(StickyPairSample { l: ContinuumPath::new(ts, dt, lv)?, r: ContinuumPath::new(ts, dt, rv)?, tau, b })
}
