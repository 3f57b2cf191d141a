//! End-to-end experiment runner: phantom, simulated acquisition, seed and
//! parameter sweeps, metric and trajectory emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_volume, write_volume};
use crate::metrics::{evaluate, Axis, MetricReport, DEFAULT_DATA_RANGE};
use crate::noise::{NoiseKind, NoiseStrategy};
use crate::operators::{measure, DownsampleZ, LinearOperator, ParallelBeam, TomoGeometry};
use crate::phantom::{generate_phantom, PhantomKind, PhantomSpec};
use crate::prior::GaussianPrior;
use crate::rng::{stream_id, RngState};
use crate::schedule::NoiseSchedule;
use crate::solvers::{reconstruct, FidelityUpdate, SolverConfig, TrajectoryRecord, DEFAULT_CG_ITERS, DEFAULT_SIRT_ITERS, DEFAULT_TV_ITERS};
use crate::volume::Volume;

/// Schema version written in the first column of every metrics row.
pub const CSV_VERSION: u32 = 1;
pub const METRICS_HEADER: &str =
    "version,experiment,task,solver,strategy,eta,anchor_angle_deg,seed,axis,psnr,ssim,sdiff_recon,sdiff_gt,delta,abs_delta";
pub const TRAJECTORY_HEADER: &str = "t,psnr_vs_gt,sdiff,residual";

/// Substream keys under the per-seed experiment stream.
const MEASURE_KEY: u64 = 0;
const RECON_KEY: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Svct,
    Lact,
    Sr,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Svct => "svct",
            Task::Lact => "lact",
            Task::Sr => "sr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Dds,
    Ddnm,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Dds => "dds",
            SolverKind::Ddnm => "ddnm",
        }
    }
}

/// A scalar or a list of values to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    fn is_sweep(&self) -> bool {
        matches!(self, OneOrMany::Many(v) if v.len() > 1)
    }
}

/// Gaussian prior source: two IVF1 files, or a per-pixel fit to the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    #[serde(default)]
    pub mu: Option<PathBuf>,
    #[serde(default)]
    pub var: Option<PathBuf>,
    #[serde(default = "default_var_floor")]
    pub var_floor: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { mu: None, var: None, var_floor: default_var_floor() }
    }
}

fn default_var_floor() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment")]
    pub experiment: String,
    pub task: Task,
    #[serde(default)]
    pub views: Option<usize>,
    #[serde(default)]
    pub angle_range_deg: Option<f64>,
    #[serde(default)]
    pub detector_bins: Option<usize>,
    #[serde(default = "default_sr_factor")]
    pub sr_factor: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_cg_iters")]
    pub cg_iters: usize,
    #[serde(default = "default_sirt_iters")]
    pub sirt_iters: usize,
    #[serde(default)]
    pub tv_lambda: Option<f64>,
    #[serde(default = "default_tv_iters")]
    pub tv_iters: usize,
    #[serde(default = "default_strategy")]
    pub noise_strategy: OneOrMany<NoiseKind>,
    #[serde(default)]
    pub anchor_angle_deg: Option<OneOrMany<f64>>,
    #[serde(default = "default_eta")]
    pub eta: OneOrMany<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub iscs_init: bool,
    #[serde(default)]
    pub freeze_anchors: bool,
    #[serde(default = "default_timesteps")]
    pub timesteps: usize,
    #[serde(default = "default_beta_start")]
    pub beta_start: f64,
    #[serde(default = "default_beta_end")]
    pub beta_end: f64,
    #[serde(default = "default_phantom")]
    pub phantom: PhantomSpec,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default = "default_data_range")]
    pub data_range: f64,
    #[serde(default)]
    pub outdir: Option<PathBuf>,
}

fn default_experiment() -> String {
    "experiment".into()
}
fn default_sr_factor() -> usize {
    4
}
fn default_solver() -> SolverKind {
    SolverKind::Dds
}
fn default_gamma() -> f64 {
    1.0
}
fn default_cg_iters() -> usize {
    DEFAULT_CG_ITERS
}
fn default_sirt_iters() -> usize {
    DEFAULT_SIRT_ITERS
}
fn default_tv_iters() -> usize {
    DEFAULT_TV_ITERS
}
fn default_strategy() -> OneOrMany<NoiseKind> {
    OneOrMany::One(NoiseKind::Slerp)
}
fn default_eta() -> OneOrMany<f64> {
    OneOrMany::One(1.0)
}
fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}
fn default_timesteps() -> usize {
    30
}
fn default_beta_start() -> f64 {
    1e-4
}
fn default_beta_end() -> f64 {
    0.3
}
fn default_phantom() -> PhantomSpec {
    PhantomSpec { kind: PhantomKind::VaryingEllipses, slices: 48, height: 64, width: 64, ellipses: None, lesion: None }
}
fn default_data_range() -> f64 {
    DEFAULT_DATA_RANGE
}

/// One point of the sweep, shared by all seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub kind: NoiseKind,
    pub eta: f64,
    pub anchor_angle_deg: Option<f64>,
    /// Directory name under `<task>/<solver>/`.
    pub label: String,
}

impl Variant {
    pub fn strategy(&self) -> Result<NoiseStrategy> {
        NoiseStrategy::new(self.kind, self.anchor_angle_deg.map(f64::to_radians))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn views(&self) -> usize {
        self.views.unwrap_or(match self.task {
            Task::Lact => 100,
            _ => 30,
        })
    }

    pub fn angle_range_deg(&self) -> f64 {
        self.angle_range_deg.unwrap_or(match self.task {
            Task::Lact => 100.0,
            _ => 360.0,
        })
    }

    pub fn fidelity(&self) -> FidelityUpdate {
        match self.solver {
            SolverKind::Dds => FidelityUpdate::Dds { gamma: self.gamma, cg_iters: self.cg_iters },
            SolverKind::Ddnm => FidelityUpdate::Ddnm { sirt_iters: self.sirt_iters },
        }
    }

    /// Every (strategy, η, anchor angle) combination in a fixed order.
    pub fn variants(&self) -> Vec<Variant> {
        let etas = self.eta.values();
        let angles: Vec<Option<f64>> = match &self.anchor_angle_deg {
            Some(a) => a.values().into_iter().map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for kind in self.noise_strategy.values() {
            for &eta in &etas {
                for &angle in &angles {
                    // anchor angles only shape slerp noise
                    let angle = if kind == NoiseKind::Slerp { angle } else { None };
                    let mut label = kind.name().to_string();
                    if self.eta.is_sweep() {
                        label.push_str(&format!("-eta{eta}"));
                    }
                    if let Some(a) = angle {
                        label.push_str(&format!("-angle{a}"));
                    }
                    let v = Variant { kind, eta, anchor_angle_deg: angle, label };
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    /// Checks the whole configuration before any compute happens.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.experiment.is_empty() {
            return bad("experiment name must not be empty".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.noise_strategy.values().is_empty() || self.eta.values().is_empty() {
            return bad("noise_strategy and eta lists must not be empty".into());
        }
        if matches!(&self.anchor_angle_deg, Some(a) if a.values().is_empty()) {
            return bad("anchor_angle_deg list must not be empty".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma {} must be >= 0", self.noise_sigma));
        }
        if !(self.data_range > 0.0 && self.data_range.is_finite()) {
            return bad(format!("data_range {} must be > 0", self.data_range));
        }
        if !(self.prior.var_floor > 0.0 && self.prior.var_floor.is_finite()) {
            return bad(format!("prior var_floor {} must be > 0", self.prior.var_floor));
        }
        if self.prior.mu.is_some() != self.prior.var.is_some() {
            return bad("prior needs both mu and var files, or neither".into());
        }
        self.phantom.validate().map_err(|e| Error::Config(format!("phantom: {e}")))?;
        let dims = self.phantom.dims();
        if dims.slices < 2 {
            return bad("phantom needs at least 2 slices".into());
        }
        match self.task {
            Task::Svct | Task::Lact => {
                if dims.height != dims.width {
                    return bad(format!("tomography tasks need square slices, got {}x{}", dims.height, dims.width));
                }
                self.geometry()?;
            }
            Task::Sr => {
                if self.sr_factor == 0 || !dims.slices.is_multiple_of(self.sr_factor) {
                    return bad(format!("sr_factor {} must divide {} slices", self.sr_factor, dims.slices));
                }
            }
        }
        NoiseSchedule::linear(self.timesteps, self.beta_start, self.beta_end, 0.0).map_err(|e| Error::Config(e.to_string()))?;
        for v in self.variants() {
            NoiseSchedule::linear(self.timesteps, self.beta_start, self.beta_end, v.eta).map_err(|e| Error::Config(e.to_string()))?;
            v.strategy().map_err(|e| Error::Config(e.to_string()))?;
        }
        let probe = SolverConfig {
            tv_lambda: self.tv_lambda,
            tv_iters: self.tv_iters,
            ..SolverConfig::new(
                NoiseSchedule::linear(self.timesteps, self.beta_start, self.beta_end, 0.0)?,
                NoiseStrategy::independent(),
                self.fidelity(),
                RngState::new(0, 0),
            )
        };
        probe.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn geometry(&self) -> Result<TomoGeometry> {
        let size = self.phantom.height;
        let g = match self.task {
            Task::Svct => TomoGeometry::sparse_view_range(self.views(), self.angle_range_deg(), size),
            Task::Lact => TomoGeometry::limited_angle(self.views(), self.angle_range_deg(), size),
            Task::Sr => return Err(Error::Config("the sr task has no tomographic geometry".into())),
        }
        .map_err(|e| Error::Config(e.to_string()))?;
        match self.detector_bins {
            Some(b) => g.with_detector_bins(b).map_err(|e| Error::Config(e.to_string())),
            None => Ok(g),
        }
    }

    pub fn operator(&self) -> Result<Box<dyn LinearOperator>> {
        let dims = self.phantom.dims();
        Ok(match self.task {
            Task::Svct | Task::Lact => Box::new(ParallelBeam::new(self.geometry()?, dims.slices)?),
            Task::Sr => Box::new(DownsampleZ::new(dims, self.sr_factor)?),
        })
    }

    pub fn prior(&self, gt: &Volume) -> Result<GaussianPrior> {
        match (&self.prior.mu, &self.prior.var) {
            (Some(mu), Some(var)) => {
                let prior = GaussianPrior::from_volumes(&read_volume(mu)?, &read_volume(var)?)?;
                let d = prior.dims();
                if (d.height, d.width) != (gt.height(), gt.width()) {
                    return Err(Error::Config(format!(
                        "prior is {}x{}, phantom slices are {}x{}",
                        d.height,
                        d.width,
                        gt.height(),
                        gt.width()
                    )));
                }
                Ok(prior)
            }
            _ => GaussianPrior::fit(gt, self.prior.var_floor),
        }
    }

    /// Per-seed root stream, keyed by experiment name and seed.
    pub fn seed_rng(&self, seed: u64) -> RngState {
        RngState::new(seed, stream_id(&self.experiment))
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub variant: Variant,
    pub seed: u64,
    pub recon: Volume,
    pub report: MetricReport,
    pub trajectory: TrajectoryRecord,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub ground_truth: Volume,
    /// Ordered by variant, then by seed as listed in the config.
    pub runs: Vec<RunResult>,
}

/// Runs every (variant, seed) reconstruction in memory. Seeds run on
/// worker threads; results are ordered deterministically.
pub fn run_in_memory(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let gt = generate_phantom(&config.phantom)?;
    let op = config.operator()?;
    let prior = config.prior(&gt)?;
    let variants = config.variants();
    let measurements = config
        .seeds
        .iter()
        .map(|&s| measure(op.as_ref(), &gt, config.noise_sigma, config.seed_rng(s).substream(MEASURE_KEY)).map(|m| m.data))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..variants.len()).flat_map(|v| (0..config.seeds.len()).map(move |s| (v, s))).collect();
    let results: Mutex<Vec<Option<Result<RunResult>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(jobs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let (vi, si) = jobs[i];
                let r = run_one(config, &variants[vi], config.seeds[si], op.as_ref(), &prior, &measurements[si], &gt);
                results.lock().expect("result lock")[i] = Some(r);
            });
        }
    });
    let runs = results.into_inner().expect("result lock").into_iter().map(|r| r.expect("every job ran")).collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutcome { config: config.clone(), ground_truth: gt, runs })
}

fn run_one(
    config: &ExperimentConfig,
    variant: &Variant,
    seed: u64,
    op: &dyn LinearOperator,
    prior: &GaussianPrior,
    y: &Volume,
    gt: &Volume,
) -> Result<RunResult> {
    let schedule = NoiseSchedule::linear(config.timesteps, config.beta_start, config.beta_end, variant.eta)?;
    let mut solver = SolverConfig::new(schedule, variant.strategy()?, config.fidelity(), config.seed_rng(seed).substream(RECON_KEY));
    solver.tv_lambda = config.tv_lambda;
    solver.tv_iters = config.tv_iters;
    solver.iscs_init = config.iscs_init;
    solver.freeze_anchors = config.freeze_anchors;
    let rec = reconstruct(&solver, prior, op, y, Some(gt))?;
    let report = evaluate(&rec.volume, gt, config.data_range)?;
    Ok(RunResult { variant: variant.clone(), seed, recon: rec.volume, report, trajectory: rec.trajectory })
}

fn metric_row(out: &mut String, cfg: &ExperimentConfig, v: &Variant, seed: &str, axis: Axis, vals: [f64; 6]) {
    let angle = v.anchor_angle_deg.map(|a| a.to_string()).unwrap_or_default();
    let _ = write!(
        out,
        "{CSV_VERSION},{},{},{},{},{},{angle},{seed},{axis}",
        cfg.experiment,
        cfg.task.name(),
        cfg.solver.name(),
        v.label,
        v.eta
    );
    for x in vals {
        let _ = write!(out, ",{x}");
    }
    out.push('\n');
}

fn report_values(r: &MetricReport, axis: Axis) -> [f64; 6] {
    let a = r.axis(axis).expect("all axes evaluated");
    [a.psnr, a.ssim, r.sdiff_recon, r.sdiff_gt, r.delta, r.abs_delta]
}

/// Per-run metrics CSV: one row per axis.
pub fn run_metrics_csv(cfg: &ExperimentConfig, run: &RunResult) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for axis in Axis::ALL {
        metric_row(&mut out, cfg, &run.variant, &run.seed.to_string(), axis, report_values(&run.report, axis));
    }
    out
}

pub fn trajectory_csv(t: &TrajectoryRecord) -> String {
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    for s in &t.steps {
        let p = s.psnr_vs_gt.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{p},{},{}", s.t, s.sdiff, s.residual);
    }
    out
}

/// Sample mean and standard deviation (`n − 1` denominator, 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregate CSV: every per-run row, then `mean` and `std` rows per variant and axis.
pub fn summary_csv(outcome: &ExperimentOutcome) -> String {
    let cfg = &outcome.config;
    let mut out = format!("{METRICS_HEADER}\n");
    for run in &outcome.runs {
        for axis in Axis::ALL {
            metric_row(&mut out, cfg, &run.variant, &run.seed.to_string(), axis, report_values(&run.report, axis));
        }
    }
    for variant in cfg.variants() {
        let group: Vec<&RunResult> = outcome.runs.iter().filter(|r| r.variant == variant).collect();
        for axis in Axis::ALL {
            let cols: Vec<Vec<f64>> = (0..6).map(|c| group.iter().map(|r| report_values(&r.report, axis)[c]).collect()).collect();
            let stats: Vec<(f64, f64)> = cols.iter().map(|c| mean_std(c)).collect();
            metric_row(&mut out, cfg, &variant, "mean", axis, std::array::from_fn(|c| stats[c].0));
            metric_row(&mut out, cfg, &variant, "std", axis, std::array::from_fn(|c| stats[c].1));
        }
    }
    out
}

/// `<outdir>/<task>/<solver>/<label>/seed<k>`.
pub fn run_dir(outdir: &Path, cfg: &ExperimentConfig, run: &RunResult) -> PathBuf {
    outdir.join(cfg.task.name()).join(cfg.solver.name()).join(&run.variant.label).join(format!("seed{}", run.seed))
}

/// Writes all outputs of a finished experiment; on failure removes whatever
/// it had created.
pub fn write_outputs(outcome: &ExperimentOutcome, outdir: &Path) -> Result<Vec<PathBuf>> {
    let mut created: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        let task_dir = outdir.join(outcome.config.task.name());
        if !task_dir.exists() {
            created.push(task_dir.clone());
        }
        fs::create_dir_all(&task_dir)?;
        let gt_path = task_dir.join("ground_truth.ivf");
        created.push(gt_path.clone());
        write_volume(&outcome.ground_truth, &gt_path)?;
        for run in &outcome.runs {
            let dir = run_dir(outdir, &outcome.config, run);
            created.push(dir.clone());
            fs::create_dir_all(&dir)?;
            write_volume(&run.recon, dir.join("recon.ivf"))?;
            fs::write(dir.join("metrics.csv"), run_metrics_csv(&outcome.config, run))?;
            fs::write(dir.join("trajectory.csv"), trajectory_csv(&run.trajectory))?;
        }
        let summary = outdir.join("metrics.csv");
        created.push(summary.clone());
        fs::write(&summary, summary_csv(outcome))?;
        Ok(())
    })();
    match result {
        Ok(()) => Ok(created),
        Err(e) => {
            for p in created.iter().rev() {
                let _ = if p.is_dir() { fs::remove_dir_all(p) } else { fs::remove_file(p) };
            }
            Err(e)
        }
    }
}

/// Validates, computes every run, then writes outputs under `outdir`.
pub fn run_experiment(config: &ExperimentConfig, outdir: &Path) -> Result<ExperimentOutcome> {
    let outcome = run_in_memory(config)?;
    write_outputs(&outcome, outdir)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> &'static str {
        r#"{
            "experiment": "unit",
            "task": "sr",
            "sr_factor": 2,
            "timesteps": 5,
            "seeds": [1, 2],
            "eta": [0.0, 1.0],
            "noise_strategy": ["independent", "slerp"],
            "phantom": {"kind": "varying_ellipses", "slices": 8, "height": 12, "width": 12}
        }"#
    }

    #[test]
    fn parses_and_expands_sweeps() {
        let cfg = ExperimentConfig::from_json(small()).unwrap();
        let labels: Vec<String> = cfg.variants().into_iter().map(|v| v.label).collect();
        assert_eq!(labels, ["independent-eta0", "independent-eta1", "slerp-eta0", "slerp-eta1"]);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(matches!(ExperimentConfig::from_json(r#"{"task": "svct", "bogus": 1}"#), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_json(r#"{"task": "sr", "sr_factor": 5}"#), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_json(r#"{"task": "svct", "gamma": -1}"#), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_json(r#"{"task": "svct", "seeds": []}"#), Err(Error::Config(_))));
    }

    #[test]
    fn in_memory_runs_are_deterministic() {
        let cfg = ExperimentConfig::from_json(small()).unwrap();
        let a = run_in_memory(&cfg).unwrap();
        let b = run_in_memory(&cfg).unwrap();
        assert_eq!(a.runs.len(), 8);
        assert_eq!(summary_csv(&a), summary_csv(&b));
        let csv = summary_csv(&a);
        assert!(csv.starts_with(METRICS_HEADER));
        // 8 runs x 3 axes + 4 variants x 3 axes x (mean, std)
        assert_eq!(csv.lines().count(), 1 + 24 + 24);
    }

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
