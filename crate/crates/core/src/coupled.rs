//! Pairs of `ρ` paths traced in the two coupled configurations, the
//! diffusive scaling map, and the pair functionals compared against the
//! continuum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{coupled_configs, NoiseField, Site};
use crate::paths::{trace_rho, LatticePath};
use crate::sticky::{ContinuumPath, StickyPairSample};

/// `S(x, t) = ((eps / scale) (x - velocity t), eps² t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingMap {
    pub velocity: f64,
    pub scale: f64,
    pub eps: f64,
}

impl ScalingMap {
    pub fn new(velocity: f64, scale: f64, eps: f64) -> Result<Self> {
        if !(scale > 0.0) || !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("scaling needs scale > 0 and eps > 0, got {scale}, {eps}")));
        }
        Ok(Self { velocity, scale, eps })
    }

    pub fn apply(&self, x: f64, t: f64) -> (f64, f64) {
        (self.eps / self.scale * (x - self.velocity * t), self.eps * self.eps * t)
    }

    pub fn unapply(&self, u: f64, s: f64) -> (f64, f64) {
        let t = s / (self.eps * self.eps);
        (u * self.scale / self.eps + self.velocity * t, t)
    }
}

/// Image of a lattice path under `map`, on the grid `eps² (start.t + k)`.
pub fn apply_scaling(path: &LatticePath, map: &ScalingMap) -> ContinuumPath {
    let values = path
        .positions
        .iter()
        .enumerate()
        .map(|(k, &x)| map.apply(x as f64, (path.start.t + k as i64) as f64).0)
        .collect();
    ContinuumPath { t0: map.eps * map.eps * path.start.t as f64, dt: map.eps * map.eps, values }
}

/// `ρ` traced from `start_minus` at `p - eps` and from `start_plus` at
/// `p + eps` on one noise field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSample {
    pub minus: LatticePath,
    pub plus: LatticePath,
    pub start_minus: Site,
    pub start_plus: Site,
    /// Steps after the later start until the first time with `plus >= minus`.
    pub meeting_index: Option<usize>,
    /// Times after meeting with `plus < minus`.
    pub violations: usize,
    /// Either trace touched its band boundary or died out.
    pub invalid: bool,
}

impl PairSample {
    /// Later of the two start times.
    pub fn common_start(&self) -> i64 {
        self.start_minus.t.max(self.start_plus.t)
    }

    /// `(minus, plus)` at `common_start() + k`.
    pub fn at(&self, k: usize) -> Option<(i64, i64)> {
        let t = self.common_start() + k as i64;
        Some((self.minus.at_time(t)?, self.plus.at_time(t)?))
    }
}

/// Traces both paths up to `common_start + n_steps`. The earlier path is
/// traced alone until the later one starts.
pub fn trace_pair(noise: NoiseField, p: f64, eps: f64, start_minus: Site, start_plus: Site, n_steps: usize, window: usize) -> Result<PairSample> {
    let (lo, hi) = coupled_configs(noise, p, eps)?;
    let t_common = start_minus.t.max(start_plus.t);
    let end = t_common + n_steps as i64;
    let steps = |z: Site| (end - z.t) as usize;
    let minus = trace_rho(&lo, start_minus, steps(start_minus), window);
    let plus = trace_rho(&hi, start_plus, steps(start_plus), window);
    let (minus, plus, invalid) = match (minus, plus) {
        (Ok(m), Ok(p)) => {
            let invalid = !m.trusted() || !p.trusted();
            (m.path, p.path, invalid)
        }
        (Err(Error::EmptyReachable { .. }), _) | (_, Err(Error::EmptyReachable { .. })) => {
            let empty = |z: Site| LatticePath { start: z, positions: vec![z.x] };
            return Ok(PairSample {
                minus: empty(start_minus),
                plus: empty(start_plus),
                start_minus,
                start_plus,
                meeting_index: None,
                violations: 0,
                invalid: true,
            });
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let mut sample = PairSample { minus, plus, start_minus, start_plus, meeting_index: None, violations: 0, invalid };
    for k in 0..=n_steps {
        let (m, p) = sample.at(k).expect("both paths cover the common range");
        match sample.meeting_index {
            None if p >= m => sample.meeting_index = Some(k),
            Some(_) if p < m => sample.violations += 1,
            _ => {}
        }
    }
    Ok(sample)
}

/// Rescaled `(l, r) = (S ρ⁻, S ρ⁺)` on a common grid starting at the later
/// start time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledPair {
    pub l: ContinuumPath,
    pub r: ContinuumPath,
    pub meeting_time: Option<f64>,
}

impl RescaledPair {
    pub fn from_lattice(pair: &PairSample, map: &ScalingMap) -> Self {
        let t0 = pair.common_start();
        let clip = |path: &LatticePath| {
            let skip = (t0 - path.start.t) as usize;
            LatticePath { start: Site { x: path.positions[skip], t: t0 }, positions: path.positions[skip..].to_vec() }
        };
        let l = apply_scaling(&clip(&pair.minus), map);
        let r = apply_scaling(&clip(&pair.plus), map);
        let meeting_time = pair.meeting_index.map(|k| l.time(k));
        Self { l, r, meeting_time }
    }
}

/// The meeting time is moved to the first grid time at or after `tau`, the
/// resolution at which a lattice pair observes its own meeting.
impl From<StickyPairSample> for RescaledPair {
    fn from(s: StickyPairSample) -> Self {
        let meeting_time = s.tau.map(|tau| s.l.time(s.l.index_at_or_after(tau)));
        Self { l: s.l, r: s.r, meeting_time }
    }
}

/// Default together/apart thresholds in rescaled units.
pub const DELTAS: [f64; 3] = [0.025, 0.05, 0.1];

/// Statistics of one rescaled pair at one threshold `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairFunctionals {
    pub delta: f64,
    /// Meeting time, `+inf` if the pair never met.
    pub meeting_time: f64,
    /// Fraction of `[τ, τ + 1]` (clipped to the path) with `|r - l| <= delta`;
    /// zero if the pair never met.
    pub together_fraction: f64,
    /// `Σ Δl Δr` over steps starting apart, and their total duration.
    pub apart_covariation: f64,
    pub apart_time: f64,
    /// Same over steps starting together.
    pub together_covariation: f64,
    pub together_time: f64,
    /// `Σ Δl²` and `Σ Δr²` over steps starting together.
    pub together_ql: f64,
    pub together_qr: f64,
    /// `r - l` at the requested time.
    pub terminal_gap: f64,
    /// Grid times after the meeting with `r < l`.
    pub violations: usize,
}

impl PairFunctionals {
    /// `Σ Δl Δr / sqrt(Σ Δl² Σ Δr²)` over together steps.
    pub fn together_correlation(&self) -> f64 {
        self.together_covariation / (self.together_ql * self.together_qr).sqrt()
    }
}

/// Functionals of `pair` at threshold `delta`, with the gap read at time
/// `terminal` (clamped to the end of the path).
pub fn pair_functionals(pair: &RescaledPair, delta: f64, terminal: f64) -> PairFunctionals {
    pair_functionals_at(pair, delta, terminal, 0.0)
}

/// [`pair_functionals`] with every gap `r - l` first rounded to the nearest
/// multiple of `resolution` (no rounding when `resolution` is 0). Rescaled
/// lattice pairs have gaps on such a grid, so applying the same rounding to
/// continuum pairs makes the two sources comparable.
pub fn pair_functionals_at(pair: &RescaledPair, delta: f64, terminal: f64, resolution: f64) -> PairFunctionals {
    let (l, r) = (&pair.l.values, &pair.r.values);
    let n = l.len().min(r.len());
    let dt = pair.l.dt;
    let snap = |g: f64| if resolution > 0.0 { (g / resolution).round() * resolution } else { g };
    let together = |k: usize| snap(r[k] - l[k]).abs() <= delta;
    let mut out = PairFunctionals {
        delta,
        meeting_time: pair.meeting_time.unwrap_or(f64::INFINITY),
        together_fraction: 0.0,
        apart_covariation: 0.0,
        apart_time: 0.0,
        together_covariation: 0.0,
        together_time: 0.0,
        together_ql: 0.0,
        together_qr: 0.0,
        terminal_gap: 0.0,
        violations: 0,
    };
    for k in 1..n {
        let (dl, dr) = (l[k] - l[k - 1], r[k] - r[k - 1]);
        if together(k - 1) {
            out.together_covariation += dl * dr;
            out.together_ql += dl * dl;
            out.together_qr += dr * dr;
            out.together_time += dt;
        } else {
            out.apart_covariation += dl * dr;
            out.apart_time += dt;
        }
    }
    if let Some(tau) = pair.meeting_time {
        let k0 = pair.l.index_at_or_after(tau);
        let k1 = pair.l.index_at_or_after(tau + 1.0).min(n);
        if k1 > k0 {
            let hits = (k0..k1).filter(|&k| together(k)).count();
            out.together_fraction = hits as f64 / (k1 - k0) as f64;
        }
        out.violations = (k0..n).filter(|&k| r[k] < l[k]).count();
    }
    let t = terminal.min(pair.l.end_time());
    out.terminal_gap = snap(pair.r.at(t).unwrap_or(f64::NAN) - pair.l.at(t).unwrap_or(f64::NAN));
    out
}
