//! Image quality and inter-slice consistency metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, Volume};

/// Side length of the uniform SSIM window.
pub const SSIM_WINDOW: usize = 7;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const DEFAULT_DATA_RANGE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Axial,
    Coronal,
    Sagittal,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Axial, Axis::Coronal, Axis::Sagittal];

    pub fn name(&self) -> &'static str {
        match self {
            Axis::Axial => "axial",
            Axis::Coronal => "coronal",
            Axis::Sagittal => "sagittal",
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Mean absolute difference between adjacent slices along the native z-axis.
pub fn sdiff(x: &Volume) -> Result<f64> {
    let s = x.slices();
    if s < 2 {
        return Err(Error::Dimension(format!("sdiff needs at least 2 slices, got {s}")));
    }
    let n = x.dims().slice_len() as f64;
    let total: f64 = (1..s)
        .map(|i| {
            let sum: f64 = x.slice_data(i).iter().zip(x.slice_data(i - 1)).map(|(a, b)| (a - b).abs()).sum();
            sum / n
        })
        .sum();
    Ok(total / (s - 1) as f64)
}

/// `10·log10(range²/MSE)`; identical inputs give `+∞`.
pub fn psnr(x: &Volume, reference: &Volume, data_range: f64) -> Result<f64> {
    x.ensure_same_dims(reference)?;
    if !(data_range > 0.0 && data_range.is_finite()) {
        return Err(Error::Parameter(format!("data_range {data_range} must be > 0")));
    }
    let mse = x.data().iter().zip(reference.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (data_range * data_range / mse).log10())
}

/// Mean SSIM over all fully contained 7×7 windows of one `h×w` image, using
/// population statistics within each window.
pub fn ssim_slice(x: &[f64], reference: &[f64], height: usize, width: usize, data_range: f64) -> Result<f64> {
    if height < SSIM_WINDOW || width < SSIM_WINDOW {
        return Err(Error::Dimension(format!("{height}x{width} slice is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")));
    }
    if x.len() != height * width || reference.len() != height * width {
        return Err(Error::Dimension("SSIM inputs do not match the slice size".into()));
    }
    let c1 = (SSIM_K1 * data_range).powi(2);
    let c2 = (SSIM_K2 * data_range).powi(2);
    let n = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..=height - SSIM_WINDOW {
        for j in 0..=width - SSIM_WINDOW {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for a in i..i + SSIM_WINDOW {
                for b in j..j + SSIM_WINDOW {
                    let (u, v) = (x[a * width + b], reference[a * width + b]);
                    sx += u;
                    sy += v;
                    sxx += u * u;
                    syy += v * v;
                    sxy += u * v;
                }
            }
            let (mx, my) = (sx / n, sy / n);
            let vx = sxx / n - mx * mx;
            let vy = syy / n - my * my;
            let cxy = sxy / n - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Windowed SSIM averaged over the axial slices.
pub fn ssim(x: &Volume, reference: &Volume, data_range: f64) -> Result<f64> {
    x.ensure_same_dims(reference)?;
    if !(data_range > 0.0 && data_range.is_finite()) {
        return Err(Error::Parameter(format!("data_range {data_range} must be > 0")));
    }
    let (h, w) = (x.height(), x.width());
    let mut total = 0.0;
    for (a, b) in x.slices_iter().zip(reference.slices_iter()) {
        total += ssim_slice(a, b, h, w, data_range)?;
    }
    Ok(total / x.slices() as f64)
}

/// Reorders a volume so the requested anatomical plane becomes the slice axis:
/// axial keeps (S,H,W), coronal gives (H,S,W), sagittal gives (W,S,H).
pub fn reslice(x: &Volume, axis: Axis) -> Volume {
    let Dims { slices: s, height: h, width: w } = x.dims();
    match axis {
        Axis::Axial => x.clone(),
        Axis::Coronal => Volume::from_fn(Dims::new(h, s, w), |i, k, j| x.get(k, i, j)).expect("permuted dims are valid"),
        Axis::Sagittal => Volume::from_fn(Dims::new(w, s, h), |j, k, i| x.get(k, i, j)).expect("permuted dims are valid"),
    }
}

/// Inverse of [`reslice`].
pub fn unreslice(y: &Volume, axis: Axis) -> Volume {
    let Dims { slices: a, height: b, width: c } = y.dims();
    match axis {
        Axis::Axial => y.clone(),
        // y is (H,S,W)
        Axis::Coronal => Volume::from_fn(Dims::new(b, a, c), |k, i, j| y.get(i, k, j)).expect("permuted dims are valid"),
        // y is (W,S,H)
        Axis::Sagittal => Volume::from_fn(Dims::new(b, c, a), |k, i, j| y.get(j, k, i)).expect("permuted dims are valid"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisMetrics {
    pub axis: Axis,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub axes: Vec<AxisMetrics>,
    pub sdiff_recon: f64,
    pub sdiff_gt: f64,
    pub delta: f64,
    pub abs_delta: f64,
}

impl MetricReport {
    pub fn axis(&self, axis: Axis) -> Option<&AxisMetrics> {
        self.axes.iter().find(|m| m.axis == axis)
    }
}

/// PSNR and SSIM along all three planes, SDiff along the native z-axis.
pub fn evaluate(recon: &Volume, gt: &Volume, data_range: f64) -> Result<MetricReport> {
    recon.ensure_same_dims(gt)?;
    let mut axes = Vec::with_capacity(3);
    for axis in Axis::ALL {
        let (r, g) = (reslice(recon, axis), reslice(gt, axis));
        axes.push(AxisMetrics { axis, psnr: psnr(&r, &g, data_range)?, ssim: ssim(&r, &g, data_range)? });
    }
    let sdiff_recon = sdiff(recon)?;
    let sdiff_gt = sdiff(gt)?;
    let delta = sdiff_recon - sdiff_gt;
    Ok(MetricReport { axes, sdiff_recon, sdiff_gt, delta, abs_delta: delta.abs() })
}

/// Mean absolute error between the forward z-differences of two volumes.
pub fn z_gradient_mae(x: &Volume, reference: &Volume) -> Result<f64> {
    x.ensure_same_dims(reference)?;
    let s = x.slices();
    if s < 2 {
        return Err(Error::Dimension(format!("z-gradient needs at least 2 slices, got {s}")));
    }
    let mut total = 0.0;
    for i in 1..s {
        let (x1, x0) = (x.slice_data(i), x.slice_data(i - 1));
        let (r1, r0) = (reference.slice_data(i), reference.slice_data(i - 1));
        for k in 0..x1.len() {
            total += ((x1[k] - x0[k]) - (r1[k] - r0[k])).abs();
        }
    }
    Ok(total / ((s - 1) * x.dims().slice_len()) as f64)
}
