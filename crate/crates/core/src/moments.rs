//! Regeneration-increment estimators: mixed moments `f_ij`, the speed `α`,
//! the diffusivity `σ²`, the derivative `α′`, and the tail of finite
//! clusters.
//!
//! Replicates are split into [`BATCHES`] contiguous groups; every standard
//! error is the spread of the per-group estimates. Because the groups are
//! formed from replicate indices, estimators that share noise across
//! parameters (common random numbers) see their correlation reflected in the
//! error bars.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{NoiseField, PercConfig, Site};
use crate::paths::{cluster_depth, find_break_points, trace_rho};
use crate::stats::{batch_estimate, linear_fit, Estimate};

pub const BATCHES: usize = 32;

/// Maximum tolerated fraction of invalidated replicates.
pub const MAX_INVALID_RATE: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct MomentParams {
    pub p: f64,
    pub seed: u64,
    pub replicates: usize,
    /// Length of each traced `ρ` path.
    pub n_steps: usize,
    pub window: usize,
    pub horizon: usize,
    pub i_max: u32,
    pub j_max: u32,
    /// Minimum number of steady increments required.
    pub n_increments: usize,
}

impl MomentParams {
    pub fn new(p: f64, seed: u64) -> Self {
        Self { p, seed, replicates: 256, n_steps: 2000, window: 64, horizon: 60, i_max: 2, j_max: 2, n_increments: 100 }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidProbability(self.p));
        }
        if self.replicates == 0 || self.n_steps == 0 || self.horizon == 0 {
            return Err(Error::InvalidArgument("replicates, n_steps and horizon must be positive".into()));
        }
        if self.n_increments < 100 {
            return Err(Error::InvalidArgument("n_increments must be at least 100".into()));
        }
        Ok(())
    }
}

/// Outcome of one replicate of the increment collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicateIncrements {
    pub index: u64,
    /// Steady increments `(X_i, τ_i)`, `i >= 2`.
    pub increments: Vec<(i64, i64)>,
    /// `(X_1, τ_1)` when at least one break point was found.
    pub first: Option<(i64, i64)>,
    pub invalid: bool,
}

/// Traces `ρ` from the origin on replicate `index` of `noise` at parameter `p`
/// and splits it at its break points.
pub fn replicate_increments(noise: NoiseField, p: f64, index: u64, n_steps: usize, window: usize, horizon: usize) -> Result<ReplicateIncrements> {
    let cfg = PercConfig::new(noise.replicate(index), p)?;
    let rho = match trace_rho(&cfg, Site::origin(), n_steps, window) {
        Ok(r) if r.trusted() => r,
        Ok(_) | Err(Error::EmptyReachable { .. }) => {
            return Ok(ReplicateIncrements { index, increments: Vec::new(), first: None, invalid: true });
        }
        Err(e) => return Err(e),
    };
    let seq = find_break_points(&cfg, &rho, horizon)?;
    Ok(ReplicateIncrements { index, increments: seq.steady().to_vec(), first: seq.increments.first().copied(), invalid: false })
}

/// Runs [`replicate_increments`] over `0..replicates` in parallel; results are
/// in replicate order. Fails if more than 1% of the replicates are invalid.
pub fn collect_increments(noise: NoiseField, p: f64, replicates: usize, n_steps: usize, window: usize, horizon: usize) -> Result<Vec<ReplicateIncrements>> {
    let out: Vec<ReplicateIncrements> = (0..replicates as u64)
        .into_par_iter()
        .map(|i| replicate_increments(noise, p, i, n_steps, window, horizon))
        .collect::<Result<_>>()?;
    check_invalid_rate(out.iter().filter(|r| r.invalid).count(), replicates)?;
    Ok(out)
}

pub(crate) fn check_invalid_rate(invalid: usize, total: usize) -> Result<()> {
    let rate = invalid as f64 / total.max(1) as f64;
    if rate > MAX_INVALID_RATE {
        return Err(Error::TooManyInvalid { rate, max: MAX_INVALID_RATE });
    }
    Ok(())
}

/// Batch index of replicate `r` among `n` replicates.
pub fn batch_of(r: usize, n: usize) -> usize {
    r * BATCHES / n.max(1)
}

/// Power sums `Σ X^i τ^j` over a set of increments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSums {
    pub count: usize,
    i_max: u32,
    j_max: u32,
    sums: Vec<f64>,
}

impl MomentSums {
    pub fn new(i_max: u32, j_max: u32) -> Self {
        let (i_max, j_max) = (i_max.max(2), j_max.max(2));
        Self { count: 0, i_max, j_max, sums: vec![0.0; ((i_max + 1) * (j_max + 1)) as usize] }
    }

    fn slot(&self, i: u32, j: u32) -> usize {
        (i * (self.j_max + 1) + j) as usize
    }

    pub fn push(&mut self, x: i64, tau: i64) {
        self.count += 1;
        let (x, tau) = (x as f64, tau as f64);
        let mut xi = 1.0;
        for i in 0..=self.i_max {
            let mut tj = 1.0;
            for j in 0..=self.j_max {
                let s = self.slot(i, j);
                self.sums[s] += xi * tj;
                tj *= tau;
            }
            xi *= x;
        }
    }

    pub fn merge(&mut self, other: &MomentSums) {
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
    }

    /// Sample mean of `X^i τ^j`.
    pub fn f(&self, i: u32, j: u32) -> f64 {
        self.sums[self.slot(i, j)] / self.count as f64
    }

    pub fn alpha(&self) -> f64 {
        self.f(1, 0) / self.f(0, 1)
    }

    /// `E[(X - ατ)²] / E[τ]` with `α` from the same sums.
    pub fn sigma2(&self) -> f64 {
        let a = self.alpha();
        ((self.f(2, 0) - 2.0 * a * self.f(1, 1) + a * a * self.f(0, 2)) / self.f(0, 1)).max(0.0)
    }
}

/// Power sums per batch, plus their total.
#[derive(Debug, Clone)]
pub struct BatchedSums {
    pub total: MomentSums,
    pub batches: Vec<MomentSums>,
}

impl BatchedSums {
    pub fn from_replicates(reps: &[ReplicateIncrements], i_max: u32, j_max: u32) -> Self {
        let mut batches = vec![MomentSums::new(i_max, j_max); BATCHES];
        for (r, rep) in reps.iter().enumerate() {
            let b = &mut batches[batch_of(r, reps.len())];
            for &(x, tau) in &rep.increments {
                b.push(x, tau);
            }
        }
        let mut total = MomentSums::new(i_max, j_max);
        for b in &batches {
            total.merge(b);
        }
        Self { total, batches }
    }

    /// Full-sample statistic with its batch-means standard error. Empty
    /// batches are skipped.
    pub fn estimate(&self, stat: impl Fn(&MomentSums) -> f64) -> Estimate {
        let per: Vec<f64> = self.batches.iter().filter(|b| b.count > 0).map(&stat).collect();
        batch_estimate(stat(&self.total), &per)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentEstimates {
    pub p: f64,
    pub f_ij: BTreeMap<(u32, u32), Estimate>,
    pub alpha: Estimate,
    pub sigma2: Estimate,
    pub alpha_prime: Option<Estimate>,
    pub n_samples: usize,
}

impl MomentEstimates {
    pub fn from_sums(p: f64, sums: &BatchedSums, i_max: u32, j_max: u32) -> Self {
        let mut f_ij = BTreeMap::new();
        for i in 0..=i_max {
            for j in 0..=j_max {
                if i + j > 0 {
                    f_ij.insert((i, j), sums.estimate(|s| s.f(i, j)));
                }
            }
        }
        Self {
            p,
            f_ij,
            alpha: sums.estimate(MomentSums::alpha),
            sigma2: sums.estimate(MomentSums::sigma2),
            alpha_prime: None,
            n_samples: sums.total.count,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.value.sqrt()
    }

    /// `α′ / σ`, when `α′` is available.
    pub fn drift(&self) -> Option<f64> {
        self.alpha_prime.map(|a| a.value / self.sigma())
    }
}

/// Moment estimates at a single parameter.
pub fn estimate_moments(params: &MomentParams) -> Result<MomentEstimates> {
    moments_with_replicates(params).map(|(_, m)| m)
}

/// [`estimate_moments`], also returning the traced replicates.
pub fn moments_with_replicates(params: &MomentParams) -> Result<(Vec<ReplicateIncrements>, MomentEstimates)> {
    params.validate()?;
    let noise = NoiseField::new(params.seed);
    let reps = collect_increments(noise, params.p, params.replicates, params.n_steps, params.window, params.horizon)?;
    let sums = BatchedSums::from_replicates(&reps, params.i_max, params.j_max);
    if sums.total.count < params.n_increments {
        return Err(Error::InsufficientSamples { got: sums.total.count, needed: params.n_increments });
    }
    let est = MomentEstimates::from_sums(params.p, &sums, params.i_max, params.j_max);
    Ok((reps, est))
}

/// A statistic evaluated on the full sample and on each batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batched {
    pub full: f64,
    pub batches: Vec<f64>,
}

impl Batched {
    pub fn constant(v: f64) -> Self {
        Self { full: v, batches: vec![v; BATCHES] }
    }
}

/// Central difference `(g(p + h) - g(p - h)) / 2h`, applied batch by batch so
/// that correlation between the two evaluations carries into the error.
pub fn central_difference(p: f64, h: f64, mut g: impl FnMut(f64) -> Result<Batched>) -> Result<Estimate> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let hi = g(p + h)?;
    let lo = g(p - h)?;
    symmetric_difference(&hi, &lo, h)
}

fn symmetric_difference(hi: &Batched, lo: &Batched, h: f64) -> Result<Estimate> {
    if hi.batches.len() != lo.batches.len() {
        return Err(Error::InvalidArgument("batch counts differ".into()));
    }
    let d = |a: f64, b: f64| (a - b) / (2.0 * h);
    let per: Vec<f64> = hi.batches.iter().zip(&lo.batches).map(|(&a, &b)| d(a, b)).collect();
    Ok(batch_estimate(d(hi.full, lo.full), &per))
}

/// The two estimates of `α′(p)` and whether they are consistent.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaPrime {
    pub p: f64,
    pub h: f64,
    pub central: Estimate,
    pub coupled: Estimate,
    /// Distance in combined standard errors.
    pub z: f64,
    pub warn: bool,
    pub center: MomentEstimates,
}

fn batched_alpha(sums: &BatchedSums) -> Batched {
    Batched { full: sums.total.alpha(), batches: sums.batches.iter().map(MomentSums::alpha).collect() }
}

/// Estimates `α′(p)` by central differences with common random numbers, and
/// cross-checks it with the coupled-increment estimator
/// `mean(X⁺ - α̂ τ⁺) / (E[τ⁺] h)`, where `(X⁺, τ⁺)` are increments of the
/// `p + h` path and `α̂` is measured at `p` on the same noise.
pub fn estimate_alpha_prime(params: &MomentParams, h: f64) -> Result<AlphaPrime> {
    alpha_prime_with_replicates(params, h).map(|(_, a)| a)
}

/// [`estimate_alpha_prime`], also returning the replicates traced at `p`.
pub fn alpha_prime_with_replicates(params: &MomentParams, h: f64) -> Result<(Vec<ReplicateIncrements>, AlphaPrime)> {
    params.validate()?;
    if !(h > 0.0) || params.p - h < 0.0 || params.p + h > 1.0 {
        return Err(Error::InvalidCoupling { p: params.p, eps: h });
    }
    let noise = NoiseField::new(params.seed);
    let collect = |p: f64| -> Result<(Vec<ReplicateIncrements>, BatchedSums)> {
        let reps = collect_increments(noise, p, params.replicates, params.n_steps, params.window, params.horizon)?;
        let sums = BatchedSums::from_replicates(&reps, params.i_max, params.j_max);
        if sums.total.count < params.n_increments {
            return Err(Error::InsufficientSamples { got: sums.total.count, needed: params.n_increments });
        }
        Ok((reps, sums))
    };
    let (reps, center) = collect(params.p)?;
    let (_, plus) = collect(params.p + h)?;
    let (_, minus) = collect(params.p - h)?;

    let central = symmetric_difference(&batched_alpha(&plus), &batched_alpha(&minus), h)?;

    let coupled_stat = |c: &MomentSums, pl: &MomentSums| (pl.f(1, 0) - c.alpha() * pl.f(0, 1)) / (pl.f(0, 1) * h);
    let coupled = batch_estimate(
        coupled_stat(&center.total, &plus.total),
        &center.batches.iter().zip(&plus.batches).map(|(c, pl)| coupled_stat(c, pl)).collect::<Vec<_>>(),
    );

    let z = central.z_distance(&coupled);
    let warn = z > 3.0;
    if warn {
        log::warn!("α′ estimators disagree: central {:.4} ± {:.4}, coupled {:.4} ± {:.4}", central.value, central.stderr, coupled.value, coupled.stderr);
    }
    let mut est = MomentEstimates::from_sums(params.p, &center, params.i_max, params.j_max);
    est.alpha_prime = Some(central);
    Ok((reps, AlphaPrime { p: params.p, h, central, coupled, z, warn, center: est }))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayParams {
    pub p: f64,
    pub seed: u64,
    pub replicates: usize,
    pub n_max: usize,
    pub horizon: usize,
    /// Inclusive range of `n` used in the fit.
    pub fit_from: usize,
    pub fit_to: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayEstimate {
    /// `q[n]` for `n = 0..=n_max`.
    pub q: Vec<f64>,
    /// Levels used in the fit.
    pub fit_levels: Vec<usize>,
    pub log_c1: Estimate,
    pub c2: Estimate,
    pub r_squared: f64,
    pub replicates: usize,
}

/// `(q, levels, log c1, c2, R²)`.
type DecayFit = (Vec<f64>, Vec<usize>, f64, f64, f64);

fn decay_fit(depths: &[usize], n_max: usize, cap: usize, from: usize, to: usize, min_q: f64) -> Result<DecayFit> {
    let total = depths.len() as f64;
    let q: Vec<f64> = (0..=n_max).map(|n| depths.iter().filter(|&&d| d >= n && d < cap).count() as f64 / total).collect();
    if q.iter().all(|&v| v == 0.0) {
        return Err(Error::NoDecayEvents);
    }
    let levels: Vec<usize> = (from..=to.min(n_max)).filter(|&n| q[n] > min_q).collect();
    if levels.len() < 4 {
        return Err(Error::DegenerateFit { usable: levels.len(), needed: 4 });
    }
    let xs: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = levels.iter().map(|&n| q[n].ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok((q, levels, fit.intercept, -fit.slope, fit.r_squared))
}

/// Tail of finite clusters: `q(n) = P(n <= depth < n_max + horizon)` for the
/// cluster of the origin, with a log-linear fit over the levels in
/// `fit_from..=fit_to` where `q(n) > 10 / replicates`. Errors come from a
/// grouped jackknife over the replicate batches, refitting on the same levels.
pub fn estimate_decay(params: &DecayParams) -> Result<DecayEstimate> {
    if params.replicates < BATCHES || params.n_max == 0 {
        return Err(Error::InvalidArgument(format!("decay needs at least {BATCHES} replicates and n_max >= 1")));
    }
    let cap = params.n_max + params.horizon;
    let noise = NoiseField::new(params.seed);
    let p = params.p;
    let depths: Vec<usize> = (0..params.replicates as u64)
        .into_par_iter()
        .map(|i| PercConfig::new(noise.replicate(i), p).map(|c| cluster_depth(&c, Site::origin(), cap)))
        .collect::<Result<_>>()?;
    let min_q = 10.0 / params.replicates as f64;
    let (q, levels, log_c1, c2, r_squared) = decay_fit(&depths, params.n_max, cap, params.fit_from, params.fit_to, min_q)?;

    // Delete-one-batch jackknife on the fixed set of levels.
    let n = depths.len();
    let mut jack = Vec::with_capacity(BATCHES);
    for b in 0..BATCHES {
        let kept: Vec<usize> = depths.iter().enumerate().filter(|&(r, _)| batch_of(r, n) != b).map(|(_, &d)| d).collect();
        let total = kept.len() as f64;
        let pts: Vec<(f64, f64)> = levels
            .iter()
            .map(|&l| (l as f64, kept.iter().filter(|&&d| d >= l && d < cap).count() as f64 / total))
            .filter(|&(_, v)| v > 0.0)
            .map(|(x, v)| (x, v.ln()))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        if let Ok(f) = linear_fit(&xs, &ys) {
            jack.push((f.intercept, -f.slope));
        }
    }
    let jk_se = |vals: Vec<f64>| {
        let k = vals.len() as f64;
        let m = vals.iter().sum::<f64>() / k;
        ((k - 1.0) / k * vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>()).sqrt()
    };
    let se_c1 = jk_se(jack.iter().map(|j| j.0).collect());
    let se_c2 = jk_se(jack.iter().map(|j| j.1).collect());
    Ok(DecayEstimate {
        q,
        fit_levels: levels,
        log_c1: Estimate::new(log_c1, se_c1),
        c2: Estimate::new(c2, se_c2),
        r_squared,
        replicates: params.replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_match_direct_means() {
        let incs = [(1i64, 1i64), (-1, 3), (2, 4), (0, 2)];
        let mut s = MomentSums::new(2, 2);
        for &(x, t) in &incs {
            s.push(x, t);
        }
        let n = incs.len() as f64;
        let direct = |i: i32, j: i32| incs.iter().map(|&(x, t)| (x as f64).powi(i) * (t as f64).powi(j)).sum::<f64>() / n;
        for i in 0..=2 {
            for j in 0..=2 {
                assert!((s.f(i, j) - direct(i as i32, j as i32)).abs() < 1e-12);
            }
        }
        let a = direct(1, 0) / direct(0, 1);
        let s2 = incs.iter().map(|&(x, t)| (x as f64 - a * t as f64).powi(2)).sum::<f64>() / n / direct(0, 1);
        assert!((s.sigma2() - s2).abs() < 1e-12);
    }

    #[test]
    fn p_one_is_deterministic() {
        let mut params = MomentParams::new(1.0, 5);
        params.replicates = 64;
        params.n_steps = 50;
        let est = estimate_moments(&params).unwrap();
        assert_eq!(est.alpha.value, 1.0);
        assert_eq!(est.sigma2.value, 0.0);
        assert_eq!(est.n_samples, 64 * 49);
    }

    #[test]
    fn linear_oracle_derivative() {
        let est = central_difference(0.8, 0.01, |p| Ok(Batched::constant(p))).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        assert!(est.stderr < 1e-12);
    }

    #[test]
    fn too_few_increments() {
        let mut params = MomentParams::new(1.0, 5);
        params.replicates = 1;
        params.n_steps = 20;
        assert!(matches!(estimate_moments(&params), Err(Error::InsufficientSamples { got: 19, needed: 100 })));
    }

    #[test]
    fn decay_at_p_one_has_no_events() {
        let params = DecayParams { p: 1.0, seed: 1, replicates: 64, n_max: 10, horizon: 10, fit_from: 1, fit_to: 10 };
        assert!(matches!(estimate_decay(&params), Err(Error::NoDecayEvents)));
    }

    #[test]
    fn batches_cover_range() {
        for n in [32, 33, 100, 1000] {
            assert_eq!(batch_of(0, n), 0);
            assert_eq!(batch_of(n - 1, n), BATCHES - 1);
        }
    }
}
