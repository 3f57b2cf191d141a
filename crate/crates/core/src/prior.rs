//! Noise-prediction denoisers applied slice by slice.

use crate::error::{Error, Result};
use crate::volume::{Dims, Volume};

/// An ε-predictor for single 2D slices.
pub trait Denoiser: Send + Sync {
    /// Predicts the noise in `slice` (row-major, `height × width`) at timestep
    /// `t` with cumulative signal level `alpha_bar_t`.
    fn predict_eps(&self, slice: &[f64], height: usize, width: usize, t: usize, alpha_bar_t: f64) -> Result<Vec<f64>>;
}

/// Returns its input as the noise prediction. Only useful for plumbing tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassThrough;

impl Denoiser for PassThrough {
    fn predict_eps(&self, slice: &[f64], _h: usize, _w: usize, _t: usize, _ab: f64) -> Result<Vec<f64>> {
        Ok(slice.to_vec())
    }
}

/// Per-pixel independent Gaussian prior `x0 ~ N(mu, diag(var))`.
///
/// Its posterior mean under `x_t = √ᾱ·x0 + √(1−ᾱ)·ε` is available in closed
/// form, which makes it an exact stand-in for a trained noise predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPrior {
    height: usize,
    width: usize,
    mu: Vec<f64>,
    var: Vec<f64>,
}

impl GaussianPrior {
    pub fn new(height: usize, width: usize, mu: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        let n = height * width;
        if n == 0 || mu.len() != n || var.len() != n {
            return Err(Error::Dimension(format!("prior of {height}x{width} with {} means and {} variances", mu.len(), var.len())));
        }
        if let Some(v) = var.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Parameter(format!("prior variance {v} is not strictly positive")));
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::Parameter("prior mean is not finite".into()));
        }
        Ok(Self { height, width, mu, var })
    }

    /// Builds the prior from single-slice `mu` and `var` volumes.
    pub fn from_volumes(mu: &Volume, var: &Volume) -> Result<Self> {
        if mu.slices() != 1 || var.dims() != mu.dims() {
            return Err(Error::Dimension(format!("prior volumes {} and {} must be 1xHxW", mu.dims(), var.dims())));
        }
        Self::new(mu.height(), mu.width(), mu.data().to_vec(), var.data().to_vec())
    }

    /// Moment fit over the slices of `reference`: per-pixel mean and
    /// variance, with the variance floored at `var_floor`.
    pub fn fit(reference: &Volume, var_floor: f64) -> Result<Self> {
        if var_floor.is_nan() || var_floor <= 0.0 {
            return Err(Error::Parameter(format!("variance floor {var_floor} must be positive")));
        }
        let n = reference.dims().slice_len();
        let s = reference.slices() as f64;
        let mut mu = vec![0.0; n];
        for sl in reference.slices_iter() {
            mu.iter_mut().zip(sl).for_each(|(m, v)| *m += v);
        }
        mu.iter_mut().for_each(|m| *m /= s);
        let mut var = vec![0.0; n];
        for sl in reference.slices_iter() {
            var.iter_mut().zip(sl.iter().zip(&mu)).for_each(|(acc, (v, m))| *acc += (v - m).powi(2));
        }
        var.iter_mut().for_each(|v| *v = (*v / s).max(var_floor));
        Self::new(reference.height(), reference.width(), mu, var)
    }

    pub fn dims(&self) -> Dims {
        Dims::new(1, self.height, self.width)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    /// `E[x0 | x_t]` per pixel.
    pub fn posterior_mean(&self, x_t: &[f64], alpha_bar_t: f64) -> Result<Vec<f64>> {
        if x_t.len() != self.mu.len() {
            return Err(Error::Dimension(format!("slice of {} values for a {}x{} prior", x_t.len(), self.height, self.width)));
        }
        if !(alpha_bar_t > 0.0 && alpha_bar_t <= 1.0) {
            return Err(Error::Parameter(format!("alpha_bar {alpha_bar_t} outside (0, 1]")));
        }
        let sa = alpha_bar_t.sqrt();
        let noise_var = 1.0 - alpha_bar_t;
        Ok(x_t
            .iter()
            .zip(self.mu.iter().zip(&self.var))
            .map(|(&x, (&m, &v))| m + sa * v / (alpha_bar_t * v + noise_var) * (x - sa * m))
            .collect())
    }
}

/// Noise prediction implied by the Gaussian posterior mean:
/// `ε̂ = (x_t − √ᾱ·E[x0|x_t]) / √(1−ᾱ)`.
pub fn gaussian_denoiser_predict(prior: &GaussianPrior, x_t: &[f64], alpha_bar_t: f64) -> Result<Vec<f64>> {
    if !(alpha_bar_t > 0.0 && alpha_bar_t < 1.0) {
        return Err(Error::Parameter(format!("alpha_bar {alpha_bar_t} outside (0, 1)")));
    }
    let mean = prior.posterior_mean(x_t, alpha_bar_t)?;
    let sa = alpha_bar_t.sqrt();
    let sn = (1.0 - alpha_bar_t).sqrt();
    Ok(x_t.iter().zip(&mean).map(|(x, m)| (x - sa * m) / sn).collect())
}

impl Denoiser for GaussianPrior {
    fn predict_eps(&self, slice: &[f64], height: usize, width: usize, _t: usize, alpha_bar_t: f64) -> Result<Vec<f64>> {
        if height != self.height || width != self.width {
            return Err(Error::Dimension(format!("{height}x{width} slice for a {}x{} prior", self.height, self.width)));
        }
        gaussian_denoiser_predict(self, slice, alpha_bar_t)
    }
}

/// Applies `denoiser` to every slice independently and stacks the results.
pub fn slicewise_denoise(denoiser: &dyn Denoiser, x_t: &Volume, t: usize, alpha_bar_t: f64) -> Result<Volume> {
    let (h, w) = (x_t.height(), x_t.width());
    let mut out = x_t.zeros_like();
    for (i, (src, dst)) in x_t.slices_iter().zip(out.slices_iter_mut()).enumerate() {
        let eps = denoiser.predict_eps(src, h, w, t, alpha_bar_t)?;
        if eps.len() != dst.len() {
            return Err(Error::Contract(format!("denoiser returned {} values for slice {i} of {} pixels", eps.len(), dst.len())));
        }
        dst.copy_from_slice(&eps);
    }
    Ok(out)
}
