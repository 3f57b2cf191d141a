//! Variance-preserving noise schedule and the DDIM-style update step.
//!
//! Timesteps are zero-based: `alpha_bar[t]` for `t ∈ [0, T)`. A reverse step at
//! index `t` denoises a state at level `ᾱ_t` and re-noises it to level
//! `ᾱ_{t−1}`, where `ᾱ_{−1} := 1` (the clean endpoint). The step at `t = 0` is
//! therefore the terminal step and is always deterministic.

use crate::error::{Error, Result};
use crate::volume::Volume;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    beta: Vec<f64>,
    alpha: Vec<f64>,
    alpha_bar: Vec<f64>,
    tilde_beta: Vec<f64>,
    eta: f64,
}

/// Coefficients of `x_{t−1} = a·x̂₀ + b·ε̂ + c·ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub t: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl StepCoefficients {
    pub fn new(t: usize, a: f64, b: f64, c: f64) -> Self {
        Self { t, a, b, c }
    }
}

impl NoiseSchedule {
    /// Linearly spaced `β` from `beta_start` to `beta_end` inclusive.
    pub fn linear(timesteps: usize, beta_start: f64, beta_end: f64, eta: f64) -> Result<Self> {
        if timesteps == 0 {
            return Err(Error::Schedule("need at least one timestep".into()));
        }
        if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
            return Err(Error::Schedule(format!("need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}")));
        }
        let beta = if timesteps == 1 {
            vec![beta_start]
        } else {
            let step = (beta_end - beta_start) / (timesteps - 1) as f64;
            (0..timesteps).map(|i| beta_start + step * i as f64).collect()
        };
        Self::from_betas(beta, eta)
    }

    pub fn from_betas(beta: Vec<f64>, eta: f64) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::Schedule("need at least one timestep".into()));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Schedule(format!("eta {eta} outside [0, 1]")));
        }
        if let Some(b) = beta.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
            return Err(Error::Schedule(format!("beta {b} outside (0, 1)")));
        }
        let alpha: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
        let alpha_bar: Vec<f64> = alpha
            .iter()
            .scan(1.0, |acc, a| {
                *acc *= a;
                Some(*acc)
            })
            .collect();
        if alpha_bar.windows(2).any(|w| w[1] >= w[0]) || alpha_bar.iter().any(|&a| a <= 0.0) {
            return Err(Error::Schedule("alpha_bar must be strictly decreasing and positive".into()));
        }
        let tilde_beta: Vec<f64> = (0..beta.len())
            .map(|t| if t == 0 { beta[0].sqrt() } else { ((1.0 - alpha_bar[t - 1]) / (1.0 - alpha_bar[t])).sqrt() * beta[t].sqrt() })
            .collect();
        let schedule = Self { beta, alpha, alpha_bar, tilde_beta, eta };
        for t in 1..schedule.len() {
            let c = eta * schedule.tilde_beta[t];
            let rest = 1.0 - schedule.alpha_bar[t - 1] - c * c;
            if rest < 0.0 {
                return Err(Error::Schedule(format!("1 - alpha_bar[{}] - (eta*tilde_beta[{t}])^2 = {rest} < 0", t - 1)));
            }
        }
        Ok(schedule)
    }

    /// Same β sequence with a different η.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::from_betas(self.beta.clone(), eta)
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_bar(&self) -> &[f64] {
        &self.alpha_bar
    }

    pub fn tilde_beta(&self) -> &[f64] {
        &self.tilde_beta
    }

    /// `ᾱ_{t−1}`, with the clean endpoint `ᾱ_{−1} = 1`.
    pub fn alpha_bar_prev(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bar[t - 1]
        }
    }

    /// `σ_t = η·β̃_t`, zero at the terminal step.
    pub fn sigma(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.eta * self.tilde_beta[t]
        }
    }

    pub fn coefficients(&self, t: usize) -> StepCoefficients {
        assert!(t < self.len(), "timestep {t} out of range");
        let prev = self.alpha_bar_prev(t);
        let c = self.sigma(t);
        let b = (1.0 - prev - c * c).max(0.0).sqrt();
        StepCoefficients { t, a: prev.sqrt(), b, c }
    }
}

/// Clean-image estimate `(x_t − √(1−ᾱ_t)·ε̂)/√ᾱ_t`.
pub fn tweedie_denoise(x_t: &Volume, eps_pred: &Volume, alpha_bar_t: f64) -> Result<Volume> {
    if !(alpha_bar_t > 0.0 && alpha_bar_t <= 1.0) {
        return Err(Error::Parameter(format!("alpha_bar {alpha_bar_t} outside (0, 1]")));
    }
    x_t.ensure_same_dims(eps_pred)?;
    if alpha_bar_t == 1.0 {
        return Ok(x_t.clone());
    }
    let sa = alpha_bar_t.sqrt();
    let sn = (1.0 - alpha_bar_t).sqrt();
    x_t.zip_with(eps_pred, |x, e| (x - sn * e) / sa)
}

/// `a·x̂₀ + b·ε̂ + c·noise`; terms with a zero coefficient are skipped so that
/// the result does not depend on their argument at all.
pub fn renoise_step(x0_hat: &Volume, eps_pred: &Volume, noise: &Volume, coeffs: &StepCoefficients) -> Result<Volume> {
    x0_hat.ensure_same_dims(eps_pred)?;
    x0_hat.ensure_same_dims(noise)?;
    let mut out = x0_hat.scaled(coeffs.a);
    if coeffs.b != 0.0 {
        out.axpy(coeffs.b, eps_pred);
    }
    if coeffs.c != 0.0 {
        out.axpy(coeffs.c, noise);
    }
    Ok(out)
}
