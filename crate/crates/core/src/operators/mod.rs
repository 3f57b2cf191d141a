//! Linear forward models `y = A x + n`.

mod downsample;
mod fbp;
mod radon;
mod sirt;

pub use downsample::{downsample_z, DownsampleZ};
pub use fbp::{fbp, ramp_kernel};
pub use radon::{radon_adjoint, radon_apply, GeometryMode, ParallelBeam, TomoGeometry};
pub use sirt::{sirt_pinv, sirt_pinv_traced, SIRT_CLAMP};

use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::volume::{Dims, Volume};

/// A linear map between volumes with an exact adjoint.
pub trait LinearOperator: Send + Sync {
    fn domain(&self) -> Dims;
    fn range(&self) -> Dims;
    fn layout(&self) -> Layout;
    fn apply(&self, x: &Volume) -> Result<Volume>;
    fn adjoint(&self, y: &Volume) -> Result<Volume>;

    /// Exact Moore–Penrose pseudo-inverse when it has a cheap closed form.
    fn exact_pinv(&self, _y: &Volume) -> Option<Result<Volume>> {
        None
    }

    fn check_domain(&self, x: &Volume) -> Result<()> {
        if x.dims() != self.domain() {
            return Err(Error::Dimension(format!("operator domain is {}, got {}", self.domain(), x.dims())));
        }
        Ok(())
    }

    fn check_range(&self, y: &Volume) -> Result<()> {
        if y.dims() != self.range() {
            return Err(Error::Dimension(format!("operator range is {}, got {}", self.range(), y.dims())));
        }
        Ok(())
    }
}

/// How measurement data is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `S × views × detector_bins`.
    Sinogram { views: usize, bins: usize },
    /// A (possibly lower-resolution) volume.
    Volume,
}

/// Acquired data together with its layout and the additive noise level used.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub layout: Layout,
    pub data: Volume,
    pub noise_sigma: f64,
}

/// Simulates `y = A x + σ n` with i.i.d. standard-normal `n`.
pub fn measure(op: &dyn LinearOperator, x: &Volume, noise_sigma: f64, rng: RngState) -> Result<Measurement> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::Parameter(format!("noise sigma {noise_sigma} must be >= 0")));
    }
    let mut data = op.apply(x)?;
    if noise_sigma > 0.0 {
        let mut g = rng.generator();
        data.data_mut().iter_mut().for_each(|v| *v += noise_sigma * g.next_normal());
    }
    data.ensure_finite("measurement")?;
    Ok(Measurement { layout: op.layout(), data, noise_sigma })
}

#[derive(Debug, Clone, Copy)]
pub struct Identity {
    dims: Dims,
}

impl Identity {
    pub fn new(dims: Dims) -> Self {
        Self { dims }
    }
}

impl LinearOperator for Identity {
    fn domain(&self) -> Dims {
        self.dims
    }

    fn range(&self) -> Dims {
        self.dims
    }

    fn layout(&self) -> Layout {
        Layout::Volume
    }

    fn apply(&self, x: &Volume) -> Result<Volume> {
        self.check_domain(x)?;
        Ok(x.clone())
    }

    fn adjoint(&self, y: &Volume) -> Result<Volume> {
        self.check_range(y)?;
        Ok(y.clone())
    }

    fn exact_pinv(&self, y: &Volume) -> Option<Result<Volume>> {
        Some(self.adjoint(y))
    }
}

/// `|⟨A x, y⟩ − ⟨x, Aᵀ y⟩| / |⟨A x, y⟩|`.
pub fn adjoint_mismatch(op: &dyn LinearOperator, x: &Volume, y: &Volume) -> Result<f64> {
    let lhs = op.apply(x)?.dot(y);
    let rhs = x.dot(&op.adjoint(y)?);
    Ok((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE))
}
