//! Experiment runner: JSON configuration, the six named experiments, and the
//! `ensemble.csv` / `report.csv` / `summary.txt` outputs.
//!
//! Every experiment produces an [`ExperimentOutput`] in memory; nothing is
//! written until [`ExperimentOutput::write`] is called. Outputs depend only on
//! the resolved configuration, never on the number of worker threads.
//!
//! # Configuration
//!
//! A flat JSON object. Every key is optional; missing keys take the defaults
//! of [`ExperimentConfig::default`] or the per-experiment defaults noted on
//! each field.
//!
//! ```json
//! { "experiment": "pair-sticky", "p": 0.8, "eps": 0.05, "seed": 20240611,
//!   "scaling": "estimated", "moments_from": "runs/moments" }
//! ```
//!
//! # Report schema
//!
//! `experiment,statistic,value,stderr,p_value,n,flag,seed,config_hash`, where
//! `flag` is `pass` or `fail` for asserted checks, `info` for reported values
//! and `warn` for diagnostics that do not affect the exit status.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coupled::{apply_scaling, pair_functionals_at, trace_pair, PairFunctionals, PairSample, RescaledPair, ScalingMap, DELTAS};
use crate::error::{Error, Result};
use crate::lattice::{derive_seed, unit_f64, Dir, EdgeSource, NoiseField, PercConfig, Site};
use crate::moments::{alpha_prime_with_replicates, estimate_decay, moments_with_replicates, DecayParams, MomentParams, ReplicateIncrements, BATCHES, MAX_INVALID_RATE};
use crate::paths::{trace_rho, LatticePath};
use crate::stats::{batch_estimate, ks_one_sample, ks_two_sample, mean, normal_cdf, std_err, variance, Estimate, KsResult};
use crate::sticky::{sample_sticky_pair_exact, Start};
use crate::web::{trace_extremal, trace_walk, ArrowField, DynamicalArrowField, DynamicalPercolation, Side};

/// Stream tags separating the independent ensembles of one experiment.
const STREAM_CONTINUUM: u64 = 0xC0_0001;
const STREAM_STATIC: u64 = 0xC0_0002;
const STREAM_FLIPS: u64 = 0xC0_0003;
const STREAM_JITTER: u64 = 0xC0_0004;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    #[default]
    Moments,
    SinglePathClt,
    PairSticky,
    DiscreteWeb,
    Dynamical,
    Decay,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [Self::Moments, Self::SinglePathClt, Self::PairSticky, Self::DiscreteWeb, Self::Dynamical, Self::Decay];

    pub fn name(self) -> &'static str {
        match self {
            Self::Moments => "moments",
            Self::SinglePathClt => "single-path-clt",
            Self::PairSticky => "pair-sticky",
            Self::DiscreteWeb => "discrete-web",
            Self::Dynamical => "dynamical",
            Self::Decay => "decay",
        }
    }

    fn default_replicates(self) -> usize {
        match self {
            Self::Moments => 256,
            Self::SinglePathClt | Self::PairSticky | Self::DiscreteWeb => 2000,
            Self::Dynamical | Self::Decay => 100_000,
        }
    }

    fn needs_scaling(self) -> bool {
        matches!(self, Self::SinglePathClt | Self::PairSticky)
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where `α`, `σ` and `α′` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalingSource {
    /// Read from the `report.csv` of the moments run named by `moments_from`.
    #[default]
    Estimated,
    /// Taken from the `alpha`, `sigma` and `alpha_prime` keys.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub p: f64,
    /// Coupling width and spatial scale. For `moments` it is the difference
    /// step of `α′`; for `dynamical` the flip-rate scale.
    pub eps: f64,
    pub seed: u64,
    /// Default: 256 for moments, 2000 for path experiments, 10⁵ for
    /// dynamical edges and decay.
    pub replicates: Option<usize>,
    /// Lattice path length. Default: `terminal_time / eps²` for
    /// single-path-clt and dynamical snapshots, `t_max / eps²` for pairs,
    /// 2000 for moments.
    pub n_steps: Option<usize>,
    pub window: usize,
    pub horizon: usize,
    /// Continuum output grid. Default `eps²`.
    pub dt: Option<f64>,
    pub deltas: Vec<f64>,
    /// Threshold used by the asserted pair tests; must be listed in `deltas`.
    pub delta: f64,
    /// KS level.
    pub level: f64,
    pub scaling: ScalingSource,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha_prime: Option<f64>,
    pub alpha_stderr: Option<f64>,
    pub sigma_stderr: Option<f64>,
    pub alpha_prime_stderr: Option<f64>,
    /// Output directory of a prior moments run.
    pub moments_from: Option<PathBuf>,
    pub continuum_replicates: usize,
    /// Initial rescaled distance between the two paths of a pair.
    pub gap: f64,
    /// Rescaled length of a pair run.
    pub t_max: f64,
    /// Rescaled time at which terminal values are read.
    pub terminal_time: f64,
    pub s_list: Vec<f64>,
    /// Dynamical-time separations of the exploratory two-time pairs.
    pub spacings: Vec<f64>,
    pub snapshot_replicates: usize,
    pub n_max: usize,
    pub fit_from: usize,
    pub fit_to: usize,
    pub min_r_squared: f64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Moments,
            p: 0.8,
            eps: 0.05,
            seed: 1,
            replicates: None,
            n_steps: None,
            window: 64,
            horizon: 60,
            dt: None,
            deltas: DELTAS.to_vec(),
            delta: 0.05,
            level: 0.01,
            scaling: ScalingSource::Estimated,
            alpha: None,
            sigma: None,
            alpha_prime: None,
            alpha_stderr: None,
            sigma_stderr: None,
            alpha_prime_stderr: None,
            moments_from: None,
            continuum_replicates: 5000,
            gap: 0.5,
            t_max: 2.0,
            terminal_time: 1.0,
            s_list: vec![0.0, 2.0, 10.0, 20.0, 40.0],
            spacings: vec![1.0, 4.0, 16.0],
            snapshot_replicates: 1000,
            n_max: 30,
            fit_from: 5,
            fit_to: 30,
            min_r_squared: 0.98,
            out: PathBuf::from("out"),
        }
    }
}

fn check(ok: bool, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

impl ExperimentConfig {
    pub fn for_experiment(experiment: Experiment) -> Self {
        Self { experiment, ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn replicates(&self) -> usize {
        self.replicates.unwrap_or_else(|| self.experiment.default_replicates())
    }

    pub fn n_steps(&self) -> usize {
        if let Some(n) = self.n_steps {
            return n;
        }
        let steps = |t: f64| if self.eps > 0.0 { (t / (self.eps * self.eps)).round() as usize } else { 400 };
        match self.experiment {
            Experiment::Moments => 2000,
            Experiment::PairSticky | Experiment::DiscreteWeb => steps(self.t_max),
            _ => steps(self.terminal_time),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(self.eps * self.eps)
    }

    fn validate(&self) -> Result<()> {
        check((0.0..=1.0).contains(&self.p), format!("p = {} outside [0, 1]", self.p))?;
        check(self.eps >= 0.0 && self.eps.is_finite(), "eps must be finite and nonnegative")?;
        check(self.replicates() >= 1 && self.n_steps() >= 1, "replicates and n_steps must be positive")?;
        check(self.window >= 1 && self.horizon >= 1, "window and horizon must be positive")?;
        check(self.level > 0.0 && self.level < 1.0, "level must lie in (0, 1)")?;
        check(self.deltas.iter().all(|&d| d > 0.0), "deltas must be positive")?;
        check(self.deltas.contains(&self.delta), format!("delta {} is not listed in deltas", self.delta))?;
        check(self.gap >= 0.0 && self.t_max > 0.0 && self.terminal_time > 0.0, "gap must be nonnegative, t_max and terminal_time positive")?;
        check(self.terminal_time <= self.t_max || !matches!(self.experiment, Experiment::PairSticky | Experiment::DiscreteWeb), "terminal_time exceeds t_max")?;
        check(self.dt() > 0.0 || self.eps == 0.0, "dt must be positive")?;
        check(self.s_list.iter().all(|&s| s >= 0.0), "s_list must be nonnegative")?;
        check(self.spacings.iter().all(|&s| s > 0.0), "spacings must be positive")?;
        check(self.fit_from <= self.fit_to, "fit_from exceeds fit_to")?;
        check(self.continuum_replicates >= 1 && self.snapshot_replicates >= 1, "ensemble sizes must be positive")?;
        match self.experiment {
            Experiment::Moments if self.eps > 0.0 => {
                check(self.p - self.eps >= 0.0 && self.p + self.eps <= 1.0, format!("p ± eps leaves [0, 1]: p = {}, eps = {}", self.p, self.eps))?;
            }
            Experiment::PairSticky => {
                check(self.p - self.eps >= 0.0 && self.p + self.eps <= 1.0, format!("p ± eps leaves [0, 1]: p = {}, eps = {}", self.p, self.eps))?;
            }
            Experiment::SinglePathClt | Experiment::DiscreteWeb => check(self.eps > 0.0, "eps must be positive")?,
            Experiment::Dynamical => {
                check(self.p > 0.0 && self.p < 1.0 && self.eps > 0.0, "dynamical needs 0 < p < 1 and eps > 0")?;
                check(!self.s_list.is_empty(), "s_list is empty")?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Fills the scaling constants and validates. The result is what gets
    /// hashed and recorded.
    pub fn resolve(&self) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.replicates = Some(self.replicates());
        cfg.n_steps = Some(self.n_steps());
        cfg.dt = Some(self.dt());
        if cfg.experiment.needs_scaling() {
            if cfg.scaling == ScalingSource::Estimated {
                if let Some(dir) = &cfg.moments_from {
                    let s = load_moments_scaling(dir, cfg.p)?;
                    if (s.h - cfg.eps).abs() > 1e-12 {
                        log::warn!("moments run used h = {}, this run uses eps = {}", s.h, cfg.eps);
                    }
                    cfg.alpha = Some(s.alpha.value);
                    cfg.sigma = Some(s.sigma.value);
                    cfg.alpha_stderr = Some(s.alpha.stderr);
                    cfg.sigma_stderr = Some(s.sigma.stderr);
                    cfg.alpha_prime = s.alpha_prime.map(|e| e.value);
                    cfg.alpha_prime_stderr = s.alpha_prime.map(|e| e.stderr);
                    cfg.moments_from = None;
                }
            }
            let needs_prime = cfg.experiment == Experiment::PairSticky && cfg.eps > 0.0;
            if cfg.alpha.is_none() || cfg.sigma.is_none() || (needs_prime && cfg.alpha_prime.is_none()) {
                return Err(Error::Config(match cfg.scaling {
                    ScalingSource::Estimated => format!("{} needs moments_from pointing at a prior moments run", cfg.experiment),
                    ScalingSource::Fixed => format!("{} with fixed scaling needs alpha, sigma and alpha_prime", cfg.experiment),
                }));
            }
            check(cfg.sigma.is_some_and(|s| s > 0.0) || cfg.eps == 0.0, "sigma must be positive")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// First 16 hex digits of the SHA-256 of the resolved configuration with
    /// the output directory blanked.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.moments_from = None;
        let json = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&json).iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Scaling constants read back from a moments run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentsScaling {
    pub p: f64,
    pub h: f64,
    pub alpha: Estimate,
    pub sigma: Estimate,
    pub alpha_prime: Option<Estimate>,
}

pub fn load_moments_scaling(dir: impl AsRef<Path>, p: f64) -> Result<MomentsScaling> {
    let path = dir.as_ref().join("report.csv");
    let mut rdr = csv::Reader::from_path(&path)?;
    let rows: Vec<ReportRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    let get = |name: &str| rows.iter().find(|r| r.experiment == Experiment::Moments && r.statistic == name);
    let need = |name: &str| get(name).ok_or_else(|| Error::Config(format!("{} has no {name} row", path.display())));
    let estimate = |r: &ReportRow| Estimate::new(r.value, r.stderr.unwrap_or(f64::NAN));
    let run_p = need("p")?.value;
    if (run_p - p).abs() > 1e-12 {
        return Err(Error::Config(format!("moments run is at p = {run_p}, experiment at p = {p}")));
    }
    Ok(MomentsScaling {
        p: run_p,
        h: need("eps")?.value,
        alpha: estimate(need("alpha")?),
        sigma: estimate(need("sigma")?),
        alpha_prime: get("alpha_prime_central").map(|r| Estimate::new(r.value, r.stderr.unwrap_or(f64::NAN))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Pass,
    Fail,
    Info,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: Experiment,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
    pub flag: Flag,
    pub seed: u64,
    pub config_hash: String,
}

/// A CSV table with string cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn f(v: f64) -> String {
    format!("{v}")
}

fn u(v: impl std::fmt::Display) -> String {
    v.to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// The resolved configuration.
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub ensemble: Table,
    pub report: Vec<ReportRow>,
}

impl ExperimentOutput {
    /// All asserted checks passed.
    pub fn passed(&self) -> bool {
        self.report.iter().all(|r| r.flag != Flag::Fail)
    }

    pub fn row(&self, statistic: &str) -> Option<&ReportRow> {
        self.report.iter().find(|r| r.statistic == statistic)
    }

    pub fn value(&self, statistic: &str) -> Option<f64> {
        self.row(statistic).map(|r| r.value)
    }

    pub fn report_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.report {
            w.serialize(r)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment   {}", self.config.experiment);
        let _ = writeln!(s, "seed         {}", self.config.seed);
        let _ = writeln!(s, "config hash  {}", self.config_hash);
        let _ = writeln!(s, "config       {}", serde_json::to_string(&self.config).unwrap_or_default());
        let _ = writeln!(s);
        for r in &self.report {
            let mut line = format!("{:<6} {:<36} {:>14.6}", format!("[{}]", flag_name(r.flag)), r.statistic, r.value);
            if let Some(se) = r.stderr {
                let _ = write!(line, " ± {se:.6}");
            }
            if let Some(pv) = r.p_value {
                let _ = write!(line, "  p = {pv:.4}");
            }
            let _ = write!(line, "  n = {}", r.n);
            let _ = writeln!(s, "{}", line.trim_end());
        }
        let fails = self.report.iter().filter(|r| r.flag == Flag::Fail).count();
        let asserted = self.report.iter().filter(|r| matches!(r.flag, Flag::Pass | Flag::Fail)).count();
        let _ = writeln!(s);
        let _ = writeln!(s, "result       {} ({} of {asserted} asserted checks failed)", if fails == 0 { "PASS" } else { "FAIL" }, fails);
        s
    }

    /// Writes `ensemble.csv`, `report.csv` and `summary.txt` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("ensemble.csv"), self.ensemble.to_csv()?)?;
        std::fs::write(dir.join("report.csv"), self.report_csv()?)?;
        std::fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}

fn flag_name(f: Flag) -> &'static str {
    match f {
        Flag::Pass => "pass",
        Flag::Fail => "fail",
        Flag::Info => "info",
        Flag::Warn => "warn",
    }
}

struct Report {
    experiment: Experiment,
    seed: u64,
    hash: String,
    rows: Vec<ReportRow>,
}

impl Report {
    fn add(&mut self, statistic: impl Into<String>, value: f64, stderr: Option<f64>, p_value: Option<f64>, n: usize, flag: Flag) {
        self.rows.push(ReportRow {
            experiment: self.experiment,
            statistic: statistic.into(),
            value,
            stderr,
            p_value,
            n,
            flag,
            seed: self.seed,
            config_hash: self.hash.clone(),
        });
    }

    fn info(&mut self, statistic: impl Into<String>, value: f64, n: usize) {
        self.add(statistic, value, None, None, n, Flag::Info);
    }

    fn estimate(&mut self, statistic: impl Into<String>, e: Estimate, n: usize) {
        self.add(statistic, e.value, Some(e.stderr), None, n, Flag::Info);
    }

    fn assert(&mut self, statistic: impl Into<String>, value: f64, stderr: Option<f64>, n: usize, ok: bool) {
        self.add(statistic, value, stderr, None, n, if ok { Flag::Pass } else { Flag::Fail });
    }

    fn ks(&mut self, statistic: impl Into<String>, ks: &KsResult, level: f64, asserted: bool) {
        let flag = match (asserted, ks.passes(level)) {
            (false, _) => Flag::Info,
            (true, true) => Flag::Pass,
            (true, false) => Flag::Fail,
        };
        self.add(statistic, ks.statistic, None, Some(ks.p_value), ks.n1 + ks.n2, flag);
    }
}

/// Resolves `cfg` and runs the experiment it names. Nothing is written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let cfg = cfg.resolve()?;
    let hash = cfg.hash();
    let mut report = Report { experiment: cfg.experiment, seed: cfg.seed, hash: hash.clone(), rows: Vec::new() };
    let ensemble = match cfg.experiment {
        Experiment::Moments => run_moments(&cfg, &mut report)?,
        Experiment::SinglePathClt => run_single_path(&cfg, &mut report)?,
        Experiment::PairSticky => run_pair_sticky(&cfg, &mut report)?,
        Experiment::DiscreteWeb => run_discrete_web(&cfg, &mut report)?,
        Experiment::Dynamical => run_dynamical(&cfg, &mut report)?,
        Experiment::Decay => run_decay(&cfg, &mut report)?,
    };
    Ok(ExperimentOutput { config: cfg, config_hash: hash, ensemble, report: report.rows })
}

/// [`run_experiment`] followed by [`ExperimentOutput::write`] into `cfg.out`.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let out = run_experiment(cfg)?;
    out.write(&out.config.out)?;
    Ok(out)
}

fn run_moments(cfg: &ExperimentConfig, rep: &mut Report) -> Result<Table> {
    let params = MomentParams {
        p: cfg.p,
        seed: cfg.seed,
        replicates: cfg.replicates(),
        n_steps: cfg.n_steps(),
        window: cfg.window,
        horizon: cfg.horizon,
        i_max: 2,
        j_max: 2,
        n_increments: 100,
    };
    let (reps, est, prime) = if cfg.eps > 0.0 {
        let (reps, ap) = alpha_prime_with_replicates(&params, cfg.eps)?;
        (reps, ap.center.clone(), Some(ap))
    } else {
        let (reps, est) = moments_with_replicates(&params)?;
        (reps, est, None)
    };
    let n = est.n_samples;
    rep.info("p", cfg.p, n);
    rep.info("eps", cfg.eps, n);
    rep.info("n_increments", n as f64, n);
    rep.info("invalid_replicates", reps.iter().filter(|r| r.invalid).count() as f64, reps.len());
    for (&(i, j), &e) in &est.f_ij {
        rep.estimate(format!("f_{i}_{j}"), e, n);
    }
    rep.estimate("alpha", est.alpha, n);
    rep.estimate("sigma2", est.sigma2, n);
    let sigma = est.sigma();
    let sigma_se = if sigma > 0.0 { est.sigma2.stderr / (2.0 * sigma) } else { 0.0 };
    rep.estimate("sigma", Estimate::new(sigma, sigma_se), n);
    if let Some(ap) = prime {
        rep.estimate("alpha_prime_central", ap.central, n);
        rep.estimate("alpha_prime_coupled", ap.coupled, n);
        rep.add("alpha_prime_agreement_z", ap.z, None, None, n, if ap.warn { Flag::Warn } else { Flag::Info });
        if sigma > 0.0 {
            rep.estimate("drift_b", Estimate::new(ap.central.value / sigma, ap.central.stderr / sigma), n);
        }
    }

    let noise = NoiseField::new(cfg.seed);
    let mut t = Table::new(&["replicate", "seed", "p", "eps", "n_steps", "invalid", "n_increments", "first_x", "first_tau", "increments"]);
    for r in &reps {
        t.push(replicate_row(r, noise, cfg));
    }
    Ok(t)
}

fn replicate_row(r: &ReplicateIncrements, noise: NoiseField, cfg: &ExperimentConfig) -> Vec<String> {
    let incs = r.increments.iter().map(|(x, tau)| format!("{x}:{tau}")).collect::<Vec<_>>().join(";");
    let (fx, ft) = r.first.map(|(x, t)| (u(x), u(t))).unwrap_or_default();
    vec![u(r.index), u(noise.replicate(r.index).seed()), f(cfg.p), f(cfg.eps), u(cfg.n_steps()), u(r.invalid), u(r.increments.len()), fx, ft, incs]
}

fn check_invalid(invalid: usize, total: usize) -> Result<()> {
    let rate = invalid as f64 / total.max(1) as f64;
    if rate > MAX_INVALID_RATE {
        return Err(Error::TooManyInvalid { rate, max: MAX_INVALID_RATE });
    }
    Ok(())
}

/// Rescaled centered terminal value `(eps / σ)(ρ(n) - α n)` of one replicate.
fn rho_terminal<E: EdgeSource>(cfg: &E, n: usize, window: usize) -> Result<Option<i64>> {
    match trace_rho(cfg, Site::origin(), n, window) {
        Ok(r) if r.trusted() => Ok(r.path.positions.last().copied()),
        Ok(_) | Err(Error::EmptyReachable { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Uniform offset on `(-1, 1)` lattice units for replicate `i`. Lattice
/// positions at a fixed time share one parity, so adding it spreads each
/// atom over its cell before a comparison with a continuous law.
fn cell_jitter(seed: u64, i: u64) -> f64 {
    2.0 * unit_f64(derive_seed(derive_seed(seed, STREAM_JITTER), i)) - 1.0
}

fn run_single_path(cfg: &ExperimentConfig, rep: &mut Report) -> Result<Table> {
    let (alpha, sigma) = (cfg.alpha.unwrap(), cfg.sigma.unwrap());
    let n = cfg.n_steps();
    let noise = NoiseField::new(cfg.seed);
    let ends: Vec<Option<i64>> = (0..cfg.replicates() as u64)
        .into_par_iter()
        .map(|i| PercConfig::new(noise.replicate(i), cfg.p).and_then(|c| rho_terminal(&c, n, cfg.window)))
        .collect::<Result<_>>()?;
    check_invalid(ends.iter().filter(|e| e.is_none()).count(), ends.len())?;
    let scale = |x: i64, i: usize| cfg.eps / sigma * (x as f64 + cell_jitter(cfg.seed, i as u64) - alpha * n as f64);
    let z: Vec<f64> = ends.iter().enumerate().filter_map(|(i, e)| e.map(|x| scale(x, i))).collect();
    let ks = ks_one_sample(&z, normal_cdf)?;
    rep.info("alpha", alpha, z.len());
    rep.info("sigma", sigma, z.len());
    rep.estimate("terminal_mean", Estimate::new(mean(&z), std_err(&z)), z.len());
    rep.info("terminal_variance", variance(&z), z.len());
    rep.ks("ks_normal", &ks, cfg.level, true);

    let mut t = Table::new(&["replicate", "seed", "p", "eps", "n_steps", "invalid", "rho_end", "terminal"]);
    for (i, e) in ends.iter().enumerate() {
        let (x, v) = e.map(|x| (u(x), f(scale(x, i)))).unwrap_or_default();
        t.push(vec![u(i), u(noise.replicate(i as u64).seed()), f(cfg.p), f(cfg.eps), u(n), u(e.is_none()), x, v]);
    }
    Ok(t)
}

/// Nearest even integer to `x`, at least 2 when `x > 0`.
fn even_gap(x: f64) -> i64 {
    if x <= 0.0 {
        return 0;
    }
    (2 * (x / 2.0).round() as i64).max(2)
}

const PAIR_COLUMNS: [&str; 16] = [
    "source", "replicate", "seed", "p", "eps", "n_steps", "invalid", "delta", "meeting_time", "together_fraction", "apart_covariation", "apart_time",
    "together_covariation", "together_time", "terminal_gap", "violations",
];

type Functional = fn(&PairFunctionals) -> f64;

fn pair_row(source: &str, i: usize, seed: u64, cfg: &ExperimentConfig, invalid: bool, fx: &PairFunctionals) -> Vec<String> {
    vec![
        source.into(),
        u(i),
        u(seed),
        f(cfg.p),
        f(cfg.eps),
        u(cfg.n_steps()),
        u(invalid),
        f(fx.delta),
        f(fx.meeting_time),
        f(fx.together_fraction),
        f(fx.apart_covariation),
        f(fx.apart_time),
        f(fx.together_covariation),
        f(fx.together_time),
        f(fx.terminal_gap),
        u(fx.violations),
    ]
}

/// Pooled cross-variation summaries of an ensemble at one threshold.
struct CrossVariation {
    apart_rate: f64,
    together_correlation: f64,
}

fn cross_variation(fx: &[&PairFunctionals]) -> CrossVariation {
    let sum = |g: fn(&PairFunctionals) -> f64| fx.iter().map(|x| g(x)).sum::<f64>();
    let apart_time = sum(|x| x.apart_time);
    CrossVariation {
        apart_rate: if apart_time > 0.0 { sum(|x| x.apart_covariation) / apart_time } else { 0.0 },
        together_correlation: sum(|x| x.together_covariation) / (sum(|x| x.together_ql) * sum(|x| x.together_qr)).sqrt(),
    }
}

/// The three asserted two-sample comparisons plus ordering and cross-variation
/// at every threshold.
fn compare_pairs(cfg: &ExperimentConfig, rep: &mut Report, lattice: &[Vec<PairFunctionals>], continuum: &[Vec<PairFunctionals>], assert_cross: bool) -> Result<()> {
    for (k, &delta) in cfg.deltas.iter().enumerate() {
        let asserted = delta == cfg.delta;
        let tag = format!("d{delta}");
        let (a, b) = (&lattice[k], &continuum[k]);
        let sample = |s: &[PairFunctionals], g: fn(&PairFunctionals) -> f64| s.iter().map(g).collect::<Vec<f64>>();
        let named: [(&str, Functional); 3] =
            [("terminal_gap", |x| x.terminal_gap), ("meeting_time", |x| x.meeting_time), ("together_fraction", |x| x.together_fraction)];
        for (name, g) in named {
            let ks = ks_two_sample(&sample(a, g), &sample(b, g))?;
            rep.ks(format!("ks_{name}_{tag}"), &ks, cfg.level, asserted);
        }
        for (source, s) in [("lattice", a), ("continuum", b)] {
            let refs: Vec<&PairFunctionals> = s.iter().collect();
            let cv = cross_variation(&refs);
            let finite: Vec<f64> = s.iter().map(|x| x.meeting_time).filter(|t| t.is_finite()).collect();
            if asserted {
                rep.info(format!("{source}_mean_terminal_gap"), mean(&sample(s, |x| x.terminal_gap)), s.len());
                rep.info(format!("{source}_met_fraction"), finite.len() as f64 / s.len() as f64, s.len());
                rep.info(format!("{source}_mean_together_fraction"), mean(&sample(s, |x| x.together_fraction)), s.len());
                let violations: usize = s.iter().map(|x| x.violations).sum();
                rep.assert(format!("{source}_ordering_violations"), violations as f64, None, s.len(), violations == 0);
            }
            let (ar, tc) = (format!("{source}_apart_covariation_rate_{tag}"), format!("{source}_together_correlation_{tag}"));
            if asserted && assert_cross {
                rep.assert(ar, cv.apart_rate, None, s.len(), cv.apart_rate.abs() <= 0.05);
                rep.assert(tc, cv.together_correlation, None, s.len(), cv.together_correlation >= 0.95);
            } else {
                rep.info(ar, cv.apart_rate, s.len());
                rep.info(tc, cv.together_correlation, s.len());
            }
        }
    }
    Ok(())
}

fn continuum_ensemble(cfg: &ExperimentConfig, b: f64, gap: f64) -> Result<Vec<RescaledPair>> {
    let base = derive_seed(cfg.seed, STREAM_CONTINUUM);
    (0..cfg.continuum_replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base, i));
            sample_sticky_pair_exact(b, Start::new(gap, 0.0), Start::new(0.0, 0.0), cfg.t_max, cfg.dt(), &mut rng).map(RescaledPair::from)
        })
        .collect()
}

fn functionals_by_delta(cfg: &ExperimentConfig, pairs: &[RescaledPair], resolution: f64) -> Vec<Vec<PairFunctionals>> {
    cfg.deltas.iter().map(|&d| pairs.par_iter().map(|p| pair_functionals_at(p, d, cfg.terminal_time, resolution)).collect()).collect()
}

fn push_pairs(t: &mut Table, cfg: &ExperimentConfig, source: &str, seeds: &[u64], invalid: &[bool], fx: &[Vec<PairFunctionals>]) {
    for i in 0..seeds.len() {
        for per_delta in fx {
            t.push(pair_row(source, i, seeds[i], cfg, invalid[i], &per_delta[i]));
        }
    }
}

fn run_pair_sticky(cfg: &ExperimentConfig, rep: &mut Report) -> Result<Table> {
    let (alpha, sigma) = (cfg.alpha.unwrap(), cfg.sigma.unwrap());
    let n = cfg.n_steps();
    let noise = NoiseField::new(cfg.seed);
    if cfg.eps == 0.0 {
        return run_pair_degenerate(cfg, rep, noise, alpha, sigma);
    }
    let g = even_gap(cfg.gap * sigma / cfg.eps);
    let gap = cfg.eps * g as f64 / sigma;
    let b = cfg.alpha_prime.unwrap() / sigma;
    let map = ScalingMap::new(alpha, sigma, cfg.eps)?;
    rep.info("alpha", alpha, 0);
    rep.info("sigma", sigma, 0);
    rep.info("alpha_prime", cfg.alpha_prime.unwrap(), 0);
    rep.info("drift_b", b, 0);
    rep.info("lattice_gap", g as f64, 0);
    rep.info("rescaled_gap", gap, 0);

    let pairs: Vec<PairSample> = (0..cfg.replicates() as u64)
        .into_par_iter()
        .map(|i| trace_pair(noise.replicate(i), cfg.p, cfg.eps, Site::new(g, 0), Site::origin(), n, cfg.window))
        .collect::<Result<_>>()?;
    let invalid: Vec<bool> = pairs.iter().map(|p| p.invalid).collect();
    check_invalid(invalid.iter().filter(|&&v| v).count(), pairs.len())?;
    rep.info("invalid_pairs", invalid.iter().filter(|&&v| v).count() as f64, pairs.len());
    let kept: Vec<usize> = (0..pairs.len()).filter(|&i| !pairs[i].invalid).collect();
    let valid: Vec<&PairSample> = kept.iter().map(|&i| &pairs[i]).collect();
    let lattice_violations: usize = valid.iter().map(|p| p.violations).sum();
    rep.assert("lattice_step_violations", lattice_violations as f64, None, valid.len(), lattice_violations == 0);

    let rescaled: Vec<RescaledPair> = valid.par_iter().map(|p| RescaledPair::from_lattice(p, &map)).collect();
    let continuum = continuum_ensemble(cfg, b, gap)?;
    let resolution = 2.0 * cfg.eps / sigma;
    rep.info("gap_resolution", resolution, 0);
    let lat_fx = functionals_by_delta(cfg, &rescaled, resolution);
    let con_fx = functionals_by_delta(cfg, &continuum, resolution);
    compare_pairs(cfg, rep, &lat_fx, &con_fx, true)?;

    // Marginal drift of each coordinate between terminal_time / 2 and terminal_time.
    let (t1, t0) = (cfg.terminal_time, cfg.terminal_time / 2.0);
    let se = |s: Option<f64>| s.filter(|s| s.is_finite()).unwrap_or(0.0);
    let b_se = se(cfg.alpha_prime_stderr) / sigma;
    // Error in the frozen centring and scale shifts every rescaled slope.
    let centring_se = se(cfg.alpha_stderr) / (cfg.eps * sigma);
    let scale_rel_se = se(cfg.sigma_stderr) / sigma;
    for (name, sign, side) in [("drift_plus", 1.0, true), ("drift_minus", -1.0, false)] {
        let slopes: Vec<f64> = valid
            .iter()
            .map(|p| {
                let c = apply_scaling(if side { &p.plus } else { &p.minus }, &map);
                (c.at(t1).unwrap() - c.at(t0).unwrap()) / (t1 - t0)
            })
            .collect();
        let est = Estimate::new(mean(&slopes), std_err(&slopes));
        let frozen_se = centring_se.hypot(est.value * scale_rel_se);
        let z = est.z_distance(&Estimate::new(sign * b, b_se.hypot(frozen_se)));
        rep.assert(name, est.value, Some(est.stderr), slopes.len(), z <= 3.0);
        rep.info(format!("{name}_combined_stderr"), est.stderr.hypot(b_se).hypot(frozen_se), slopes.len());
        let ends: Vec<f64> = valid.iter().map(|p| apply_scaling(if side { &p.plus } else { &p.minus }, &map).at(t1).unwrap()).collect();
        rep.info(format!("{name}_terminal_variance"), variance(&ends), ends.len());
    }

    let mut t = Table::new(&PAIR_COLUMNS);
    let seeds: Vec<u64> = kept.iter().map(|&i| noise.replicate(i as u64).seed()).collect();
    push_pairs(&mut t, cfg, "lattice", &seeds, &vec![false; valid.len()], &lat_fx);
    let base = derive_seed(cfg.seed, STREAM_CONTINUUM);
    let cseeds: Vec<u64> = (0..continuum.len() as u64).map(|i| derive_seed(base, i)).collect();
    push_pairs(&mut t, cfg, "continuum", &cseeds, &vec![false; continuum.len()], &con_fx);
    Ok(t)
}

/// `eps = 0`: both configurations coincide, so both paths start at the origin
/// and must agree at every time. Paths are rescaled with `eps = n^{-1/2}`.
fn run_pair_degenerate(cfg: &ExperimentConfig, rep: &mut Report, noise: NoiseField, alpha: f64, sigma: f64) -> Result<Table> {
    let n = cfg.n_steps();
    let map = ScalingMap::new(alpha, sigma, 1.0 / (n as f64).sqrt())?;
    let pairs: Vec<PairSample> = (0..cfg.replicates() as u64)
        .into_par_iter()
        .map(|i| trace_pair(noise.replicate(i), cfg.p, 0.0, Site::origin(), Site::origin(), n, cfg.window))
        .collect::<Result<_>>()?;
    check_invalid(pairs.iter().filter(|p| p.invalid).count(), pairs.len())?;
    let rescaled: Vec<RescaledPair> = pairs.iter().map(|p| RescaledPair::from_lattice(p, &map)).collect();
    let fx = functionals_by_delta(cfg, &rescaled, 0.0);
    let k = cfg.deltas.iter().position(|&d| d == cfg.delta).unwrap();
    let max_gap = fx[k].iter().map(|x| x.terminal_gap.abs()).fold(0.0, f64::max);
    rep.assert("max_abs_terminal_gap", max_gap, None, pairs.len(), max_gap == 0.0);
    let violations: usize = pairs.iter().map(|p| p.violations).sum();
    rep.assert("lattice_step_violations", violations as f64, None, pairs.len(), violations == 0);
    let mut t = Table::new(&PAIR_COLUMNS);
    let seeds: Vec<u64> = (0..pairs.len() as u64).map(|i| noise.replicate(i).seed()).collect();
    let invalid: Vec<bool> = pairs.iter().map(|p| p.invalid).collect();
    push_pairs(&mut t, cfg, "lattice", &seeds, &invalid, &fx);
    Ok(t)
}

fn run_discrete_web(cfg: &ExperimentConfig, rep: &mut Report) -> Result<Table> {
    let n = cfg.n_steps();
    let eps = cfg.eps;
    let g = even_gap(cfg.gap / eps);
    let gap = eps * g as f64;
    let map = ScalingMap::new(0.0, 1.0, eps)?;
    let field = ArrowField::new(cfg.seed, eps)?;
    rep.info("lattice_gap", g as f64, 0);
    rep.info("rescaled_gap", gap, 0);

    let n_walk = ((cfg.terminal_time / (eps * eps)).round() as usize).min(n);
    let walks: Vec<f64> = (0..cfg.replicates() as u64)
        .into_par_iter()
        .map(|i| {
            let w = trace_walk(&field.replicate(i), Site::origin(), n_walk);
            let x = *w.positions.last().unwrap() as f64 + cell_jitter(cfg.seed, i);
            eps * x / (eps * eps * n_walk as f64).sqrt()
        })
        .collect();
    rep.ks("ks_walk_normal", &ks_one_sample(&walks, normal_cdf)?, cfg.level, true);

    let rescaled: Vec<RescaledPair> = (0..cfg.replicates() as u64)
        .into_par_iter()
        .map(|i| {
            let fld = field.replicate(i);
            let l = trace_extremal(&fld, Site::new(g, 0), n, Side::Left).as_lattice_path();
            let r = trace_extremal(&fld, Site::origin(), n, Side::Right).as_lattice_path();
            extremal_pair(&l, &r, &map)
        })
        .collect();
    let continuum = continuum_ensemble(cfg, 1.0, gap)?;
    let resolution = 2.0 * eps;
    rep.info("gap_resolution", resolution, 0);
    let lat_fx = functionals_by_delta(cfg, &rescaled, resolution);
    let con_fx = functionals_by_delta(cfg, &continuum, resolution);
    compare_pairs(cfg, rep, &lat_fx, &con_fx, false)?;

    let mut t = Table::new(&PAIR_COLUMNS);
    let seeds: Vec<u64> = (0..rescaled.len() as u64).map(|i| derive_seed(cfg.seed, i)).collect();
    push_pairs(&mut t, cfg, "lattice", &seeds, &vec![false; rescaled.len()], &lat_fx);
    let base = derive_seed(cfg.seed, STREAM_CONTINUUM);
    let cseeds: Vec<u64> = (0..continuum.len() as u64).map(|i| derive_seed(base, i)).collect();
    push_pairs(&mut t, cfg, "continuum", &cseeds, &vec![false; continuum.len()], &con_fx);
    Ok(t)
}

fn extremal_pair(l: &LatticePath, r: &LatticePath, map: &ScalingMap) -> RescaledPair {
    let l = apply_scaling(l, map);
    let r = apply_scaling(r, map);
    let meet = (0..l.len()).find(|&k| r.values[k] >= l.values[k]).map(|k| l.time(k));
    RescaledPair { l, r, meeting_time: meet }
}

/// Site of the `i`-th sampled edge: rows of 512 sites, one row per level.
fn sampled_edge(i: usize) -> (i64, i64, Dir) {
    let t = (i / 512) as i64;
    let x = 2 * (i % 512) as i64 - 512 + t.rem_euclid(2);
    (x, t, if i.is_multiple_of(2) { Dir::Right } else { Dir::Left })
}

/// Replicates `r` with `batch_of(r, m) == b`.
fn batch_range(b: usize, m: usize) -> std::ops::Range<usize> {
    (b * m).div_ceil(BATCHES)..((b + 1) * m).div_ceil(BATCHES)
}

fn run_dynamical(cfg: &ExperimentConfig, rep: &mut Report) -> Result<Table> {
    let (p, eps) = (cfg.p, cfg.eps);
    let m = cfg.replicates();
    let noise = NoiseField::new(cfg.seed);
    let dynamics = DynamicalPercolation::new(noise, p, eps)?;
    let stat = PercConfig::new(noise, p)?;
    let mut t = Table::new(&["s", "n_edges", "open_fraction", "open_fraction_stderr", "autocovariance", "autocovariance_stderr", "exact"]);

    let initial: Vec<bool> = (0..m).into_par_iter().map(|i| {
        let (x, tt, d) = sampled_edge(i);
        stat.is_open_at(x, tt, d)
    }).collect();
    for &s in &cfg.s_list {
        let now: Vec<bool> = (0..m).into_par_iter().map(|i| {
            let (x, tt, d) = sampled_edge(i);
            dynamics.is_open_at_time(x, tt, d, s)
        }).collect();
        if s == 0.0 {
            let same = initial.iter().zip(&now).filter(|(a, b)| a == b).count();
            rep.assert("s0_matches_static", same as f64, None, m, same == m);
        }
        let batch = |g: &dyn Fn(&[bool], &[bool]) -> f64| {
            let full = g(&initial, &now);
            let per: Vec<f64> = (0..BATCHES)
                .map(|b| {
                    let r = batch_range(b, m);
                    g(&initial[r.clone()], &now[r])
                })
                .collect();
            batch_estimate(full, &per)
        };
        let frac = |v: &[bool]| v.iter().filter(|&&o| o).count() as f64 / v.len() as f64;
        let marginal = batch(&|_, b| frac(b));
        let cov = batch(&|a, b| {
            let both = a.iter().zip(b).filter(|(x, y)| **x && **y).count() as f64 / a.len() as f64;
            both - frac(a) * frac(b)
        });
        let exact = p * (1.0 - p) * (-eps * s).exp();
        let z_m = (marginal.value - p).abs() / marginal.stderr;
        let z_c = (cov.value - exact).abs() / cov.stderr;
        rep.assert(format!("open_fraction_s{s}"), marginal.value, Some(marginal.stderr), m, z_m <= 3.0 || marginal.stderr == 0.0);
        rep.assert(format!("autocovariance_s{s}"), cov.value, Some(cov.stderr), m, z_c <= 3.0);
        rep.info(format!("autocovariance_exact_s{s}"), exact, m);
        t.push(vec![f(s), u(m), f(marginal.value), f(marginal.stderr), f(cov.value), f(cov.stderr), f(exact)]);
    }

    // Snapshot at the largest s against fresh static fields.
    let s_max = cfg.s_list.iter().copied().fold(0.0, f64::max);
    let n = cfg.n_steps();
    let k = cfg.snapshot_replicates as u64;
    let fresh = NoiseField::new(derive_seed(cfg.seed, STREAM_STATIC));
    let snap: Vec<Option<i64>> = (0..k)
        .into_par_iter()
        .map(|i| DynamicalPercolation::new(noise.replicate(i), p, eps).and_then(|d| rho_terminal(&d.at(s_max), n, cfg.window)))
        .collect::<Result<_>>()?;
    let stat_ends: Vec<Option<i64>> = (0..k)
        .into_par_iter()
        .map(|i| PercConfig::new(fresh.replicate(i), p).and_then(|c| rho_terminal(&c, n, cfg.window)))
        .collect::<Result<_>>()?;
    check_invalid(snap.iter().chain(&stat_ends).filter(|e| e.is_none()).count(), 2 * k as usize)?;
    let as_f = |v: &[Option<i64>]| v.iter().flatten().map(|&x| x as f64).collect::<Vec<f64>>();
    rep.ks(format!("ks_snapshot_vs_static_s{s_max}"), &ks_two_sample(&as_f(&snap), &as_f(&stat_ends))?, cfg.level, true);

    // Flip counts of the dynamical arrow field.
    let arrows = DynamicalArrowField::new(derive_seed(cfg.seed, STREAM_FLIPS), eps)?;
    let counts: Vec<f64> = (0..m).into_par_iter().map(|i| {
        let (x, tt, _) = sampled_edge(i);
        arrows.flips(x, tt, s_max) as f64
    }).collect();
    let lam = eps * s_max;
    let cm = Estimate::new(mean(&counts), (lam / m as f64).sqrt());
    rep.assert(format!("flip_count_mean_s{s_max}"), cm.value, Some(cm.stderr), m, (lam == 0.0 && cm.value == 0.0) || (cm.value - lam).abs() <= 3.0 * cm.stderr);
    let p0 = counts.iter().filter(|&&c| c == 0.0).count() as f64 / m as f64;
    let e0 = (-lam).exp();
    let se0 = (e0 * (1.0 - e0) / m as f64).sqrt();
    rep.assert(format!("flip_count_zero_fraction_s{s_max}"), p0, Some(se0), m, (se0 == 0.0 && p0 == 1.0) || (p0 - e0).abs() <= 3.0 * se0);
    rep.info(format!("flip_count_dispersion_s{s_max}"), if lam > 0.0 { variance(&counts) / mean(&counts) } else { 0.0 }, m);

    // Exploratory two-time walks: fraction of levels within delta at s = 0 and s = spacing.
    let n_walk = n;
    let mut fractions = Vec::new();
    for &ds in &cfg.spacings {
        let fr: Vec<f64> = (0..k)
            .into_par_iter()
            .map(|i| {
                let fld = arrows.replicate(i);
                let a = trace_walk(&fld.at(0.0), Site::origin(), n_walk);
                let b = trace_walk(&fld.at(ds), Site::origin(), n_walk);
                let close = a.positions.iter().zip(&b.positions).filter(|(x, y)| eps * (**x - **y).abs() as f64 <= cfg.delta).count();
                close as f64 / a.positions.len() as f64
            })
            .collect();
        let e = Estimate::new(mean(&fr), std_err(&fr));
        rep.estimate(format!("two_time_together_fraction_ds{ds}"), e, fr.len());
        fractions.push(e.value);
    }
    let decreasing = fractions.windows(2).all(|w| w[1] < w[0]);
    rep.add("two_time_fraction_decreasing", f64::from(u8::from(decreasing)), None, None, k as usize, if decreasing { Flag::Info } else { Flag::Warn });
    Ok(t)
}

fn run_decay(cfg: &ExperimentConfig, rep: &mut Report) -> Result<Table> {
    let params = DecayParams {
        p: cfg.p,
        seed: cfg.seed,
        replicates: cfg.replicates(),
        n_max: cfg.n_max,
        horizon: cfg.horizon,
        fit_from: cfg.fit_from,
        fit_to: cfg.fit_to,
    };
    let mut t = Table::new(&["n", "q", "in_fit"]);
    match estimate_decay(&params) {
        Ok(d) => {
            let k = d.fit_levels.len();
            rep.estimate("log_c1", d.log_c1, k);
            rep.estimate("c2", d.c2, k);
            rep.info("first_fit_level", d.fit_levels[0] as f64, k);
            rep.info("last_fit_level", d.fit_levels[k - 1] as f64, k);
            rep.assert("r_squared", d.r_squared, None, k, d.r_squared >= cfg.min_r_squared);
            for (n, q) in d.q.iter().enumerate() {
                t.push(vec![u(n), f(*q), u(d.fit_levels.contains(&n))]);
            }
        }
        Err(Error::NoDecayEvents) => rep.info("no_decay_events", 1.0, params.replicates),
        Err(e) => return Err(e),
    }
    Ok(t)
}
