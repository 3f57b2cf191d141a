use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::{LinearOperator, ParallelBeam, TomoGeometry};
use crate::volume::Volume;

/// Band-limited ramp (Ram-Lak) kernel for unit bin spacing, indexed by offset
/// `n ∈ [−(len−1), len−1]` at position `n + len − 1`.
pub fn ramp_kernel(len: usize) -> Vec<f64> {
    let half = len as i64 - 1;
    (-half..=half)
        .map(|n| match n {
            0 => 0.25,
            n if n % 2 == 0 => 0.0,
            n => -1.0 / (PI * PI * (n * n) as f64),
        })
        .collect()
}

/// Filtered backprojection: ramp-filter every detector row, then backproject
/// with the projector's adjoint scaled by `π / views`.
pub fn fbp(geometry: &TomoGeometry, y: &Volume) -> Result<Volume> {
    let bins = geometry.detector_bins;
    if y.height() != geometry.views() || y.width() != bins {
        return Err(Error::Dimension(format!(
            "sinogram {}x{} does not match {} views x {bins} bins",
            y.height(),
            y.width(),
            geometry.views()
        )));
    }
    let kernel = ramp_kernel(bins);
    let mut filtered = y.zeros_like();
    for (src, dst) in y.data().chunks_exact(bins).zip(filtered.data_mut().chunks_exact_mut(bins)) {
        for (i, out) in dst.iter_mut().enumerate() {
            *out = src.iter().enumerate().map(|(k, p)| kernel[i + bins - 1 - k] * p).sum();
        }
    }
    let op = ParallelBeam::new(geometry.clone(), y.slices())?;
    let scale = PI / geometry.views() as f64;
    Ok(op.adjoint(&filtered)?.scaled(scale))
}
