//! The reverse-diffusion reconstruction loop: denoise, enforce data
//! fidelity, re-noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::metrics::{psnr, sdiff, DEFAULT_DATA_RANGE};
use crate::noise::{make_noise_volume, NoiseStrategy};
use crate::operators::LinearOperator;
use crate::prior::{slicewise_denoise, Denoiser};
use crate::rng::RngState;
use crate::schedule::{renoise_step, tweedie_denoise, NoiseSchedule};
use crate::solvers::fidelity::{ddnm_update, dds_update};
use crate::solvers::tv::tv3d_prox;
use crate::volume::Volume;

pub const DEFAULT_CG_ITERS: usize = 10;
pub const DEFAULT_SIRT_ITERS: usize = 20;
pub const DEFAULT_TV_ITERS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FidelityUpdate {
    Dds { gamma: f64, cg_iters: usize },
    Ddnm { sirt_iters: usize },
}

impl FidelityUpdate {
    pub fn name(&self) -> &'static str {
        match self {
            FidelityUpdate::Dds { .. } => "dds",
            FidelityUpdate::Ddnm { .. } => "ddnm",
        }
    }

    pub fn update(&self, x0_pred: &Volume, y: &Volume, op: &dyn LinearOperator) -> Result<Volume> {
        match *self {
            FidelityUpdate::Dds { gamma, cg_iters } => dds_update(x0_pred, y, op, gamma, cg_iters),
            FidelityUpdate::Ddnm { sirt_iters } => ddnm_update(x0_pred, y, op, sirt_iters),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub schedule: NoiseSchedule,
    pub strategy: NoiseStrategy,
    pub fidelity: FidelityUpdate,
    /// Weight of the optional TV prox applied after every fidelity step.
    pub tv_lambda: Option<f64>,
    pub tv_iters: usize,
    pub rng: RngState,
    /// Draw `x_T` with the configured strategy instead of i.i.d. noise.
    pub iscs_init: bool,
    /// Reuse one noise volume (and so one anchor pair) at every step.
    pub freeze_anchors: bool,
}

impl SolverConfig {
    pub fn new(schedule: NoiseSchedule, strategy: NoiseStrategy, fidelity: FidelityUpdate, rng: RngState) -> Self {
        Self { schedule, strategy, fidelity, tv_lambda: None, tv_iters: DEFAULT_TV_ITERS, rng, iscs_init: false, freeze_anchors: false }
    }

    pub fn with_iscs_init(mut self) -> Self {
        self.iscs_init = true;
        self
    }

    pub fn with_frozen_anchors(mut self) -> Self {
        self.freeze_anchors = true;
        self
    }

    pub fn with_tv(mut self, lambda: f64, iters: usize) -> Self {
        self.tv_lambda = Some(lambda);
        self.tv_iters = iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.fidelity {
            FidelityUpdate::Dds { gamma, cg_iters } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Parameter(format!("gamma {gamma} must be > 0")));
                }
                if cg_iters == 0 {
                    return Err(Error::Parameter("cg_iters must be >= 1".into()));
                }
            }
            FidelityUpdate::Ddnm { sirt_iters } => {
                if sirt_iters == 0 {
                    return Err(Error::Parameter("sirt_iters must be >= 1".into()));
                }
            }
        }
        if let Some(l) = self.tv_lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Parameter(format!("tv_lambda {l} must be >= 0")));
            }
            if self.tv_iters == 0 {
                return Err(Error::Parameter("tv_iters must be >= 1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub psnr_vs_gt: Option<f64>,
    /// SDiff of the step's clean estimate (0 for single-slice volumes).
    pub sdiff: f64,
    /// `‖y − A x̂₀‖` after the fidelity step.
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub volume: Volume,
    pub trajectory: TrajectoryRecord,
}

/// Substream keys of the reconstruction's random draws.
const INIT_KEY: u64 = 0;
const FROZEN_KEY: u64 = 1;
const STEP_KEY_BASE: u64 = 2;

/// Initial latent `x_T`: i.i.d. normal, or strategy-shaped with `iscs_init`.
pub fn initial_latent(config: &SolverConfig, dims: crate::volume::Dims) -> Result<Volume> {
    let rng = config.rng.substream(INIT_KEY);
    if config.iscs_init {
        make_noise_volume(&config.strategy, rng, dims)
    } else {
        make_noise_volume(&NoiseStrategy::independent(), rng, dims)
    }
}

pub fn reconstruct(
    config: &SolverConfig,
    denoiser: &dyn Denoiser,
    op: &dyn LinearOperator,
    y: &Volume,
    gt: Option<&Volume>,
) -> Result<Reconstruction> {
    reconstruct_observed(config, denoiser, op, y, gt, &mut |_, _| {})
}

/// [`reconstruct`] that reports every stage it enters to `observer`.
pub fn reconstruct_observed(
    config: &SolverConfig,
    denoiser: &dyn Denoiser,
    op: &dyn LinearOperator,
    y: &Volume,
    gt: Option<&Volume>,
    observer: &mut dyn FnMut(usize, Stage),
) -> Result<Reconstruction> {
    config.validate()?;
    op.check_range(y)?;
    let dims = op.domain();
    if let Some(g) = gt {
        if g.dims() != dims {
            return Err(Error::Dimension(format!("ground truth {} does not match operator domain {dims}", g.dims())));
        }
    }
    let schedule = &config.schedule;
    let mut x = initial_latent(config, dims)?;
    let frozen =
        if config.freeze_anchors { Some(make_noise_volume(&config.strategy, config.rng.substream(FROZEN_KEY), dims)?) } else { None };
    let mut trajectory = TrajectoryRecord::default();
    for t in (0..schedule.len()).rev() {
        let ab = schedule.alpha_bar()[t];

        observer(t, Stage::Denoise);
        let (eps, x0) = (|| {
            let eps = slicewise_denoise(denoiser, &x, t, ab)?;
            let x0 = tweedie_denoise(&x, &eps, ab)?;
            Ok((eps, x0))
        })()
        .map_err(|e: Error| e.at_step(t, Stage::Denoise))?;

        observer(t, Stage::Fidelity);
        let x0 = (|| {
            let mut x0 = config.fidelity.update(&x0, y, op)?;
            if let Some(lambda) = config.tv_lambda {
                x0 = tv3d_prox(&x0, lambda, config.tv_iters)?;
            }
            x0.ensure_finite("clean estimate")?;
            Ok(x0)
        })()
        .map_err(|e: Error| e.at_step(t, Stage::Fidelity))?;

        let residual = y.sub(&op.apply(&x0)?)?.norm();
        let psnr_vs_gt = gt.map(|g| psnr(&x0, g, DEFAULT_DATA_RANGE)).transpose()?;
        let sd = if dims.slices >= 2 { sdiff(&x0)? } else { 0.0 };
        trajectory.steps.push(StepRecord { t, psnr_vs_gt, sdiff: sd, residual });

        observer(t, Stage::Renoise);
        x = (|| {
            let coeffs = schedule.coefficients(t);
            let noise = if coeffs.c == 0.0 {
                x0.zeros_like()
            } else if let Some(f) = &frozen {
                f.clone()
            } else {
                make_noise_volume(&config.strategy, config.rng.substream(STEP_KEY_BASE + t as u64), dims)?
            };
            let next = renoise_step(&x0, &eps, &noise, &coeffs)?;
            next.ensure_finite("re-noised iterate")?;
            Ok(next)
        })()
        .map_err(|e: Error| e.at_step(t, Stage::Renoise))?;
    }
    Ok(Reconstruction { volume: x, trajectory })
}
