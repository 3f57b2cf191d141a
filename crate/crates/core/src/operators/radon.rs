//! Stacked 2D parallel-beam projector.
//!
//! Each pixel centre is projected onto the detector and its value split
//! between the two nearest bins with linear-interpolation weights, so every
//! view preserves the total mass of the slice exactly. The adjoint walks the
//! same weight table in reverse (linear-interpolating backprojection), which
//! makes the pair an exact transpose.

use crate::error::{Error, Result};
use crate::operators::{Layout, LinearOperator};
use crate::volume::{Dims, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryMode {
    SparseView,
    LimitedAngle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomoGeometry {
    pub angles_deg: Vec<f64>,
    pub detector_bins: usize,
    /// Image side; slices are `size × size`.
    pub size: usize,
    pub mode: GeometryMode,
}

/// Default detector width for an `size × size` image: `ceil(√2·size)`.
pub fn default_bins(size: usize) -> usize {
    (std::f64::consts::SQRT_2 * size as f64).ceil() as usize
}

impl TomoGeometry {
    /// `views` angles uniform on `[0°, 360°)`.
    pub fn sparse_view(views: usize, size: usize) -> Result<Self> {
        Self::sparse_view_range(views, 360.0, size)
    }

    /// `views` angles uniform on `[0°, range)`.
    pub fn sparse_view_range(views: usize, range_deg: f64, size: usize) -> Result<Self> {
        let angles = (0..views).map(|i| range_deg * i as f64 / views as f64).collect();
        Self::new(angles, default_bins(size), size, GeometryMode::SparseView)
    }

    /// `views` angles uniform on `[0°, range_deg]`, both ends included.
    pub fn limited_angle(views: usize, range_deg: f64, size: usize) -> Result<Self> {
        let angles = if views == 1 { vec![0.0] } else { (0..views).map(|i| range_deg * i as f64 / (views - 1) as f64).collect() };
        Self::new(angles, default_bins(size), size, GeometryMode::LimitedAngle)
    }

    pub fn new(angles_deg: Vec<f64>, detector_bins: usize, size: usize, mode: GeometryMode) -> Result<Self> {
        if angles_deg.is_empty() {
            return Err(Error::Geometry("no projection angles".into()));
        }
        if angles_deg.iter().any(|a| !a.is_finite()) {
            return Err(Error::Geometry("non-finite projection angle".into()));
        }
        if size == 0 {
            return Err(Error::Geometry("image size must be positive".into()));
        }
        if detector_bins < size {
            return Err(Error::Geometry(format!("{detector_bins} detector bins for a {size}-pixel image")));
        }
        Ok(Self { angles_deg, detector_bins, size, mode })
    }

    pub fn with_detector_bins(mut self, bins: usize) -> Result<Self> {
        if bins < self.size {
            return Err(Error::Geometry(format!("{bins} detector bins for a {}-pixel image", self.size)));
        }
        self.detector_bins = bins;
        Ok(self)
    }

    pub fn views(&self) -> usize {
        self.angles_deg.len()
    }
}

#[derive(Debug, Clone, Copy)]
struct Tap {
    bin: u32,
    frac: f64,
}

/// Projector over all slices of an `S × size × size` volume.
#[derive(Debug, Clone)]
pub struct ParallelBeam {
    geometry: TomoGeometry,
    slices: usize,
    /// `taps[v * npix + p]` is the lower detector bin and upper weight of pixel `p` in view `v`.
    taps: Vec<Tap>,
}

impl ParallelBeam {
    pub fn new(geometry: TomoGeometry, slices: usize) -> Result<Self> {
        if slices == 0 {
            return Err(Error::Dimension("projector needs at least one slice".into()));
        }
        let n = geometry.size;
        let bins = geometry.detector_bins;
        let c_img = (n as f64 - 1.0) / 2.0;
        let c_det = (bins as f64 - 1.0) / 2.0;
        let mut taps = Vec::with_capacity(geometry.views() * n * n);
        for &deg in &geometry.angles_deg {
            let (s, c) = deg.to_radians().sin_cos();
            for h in 0..n {
                let y = c_img - h as f64;
                for w in 0..n {
                    let x = w as f64 - c_img;
                    let u = x * c + y * s + c_det;
                    let lo = u.floor();
                    // taps that fall off the detector are dropped
                    let (bin, frac) = if lo < 0.0 { (u32::MAX, 0.0) } else { (lo as u32, u - lo) };
                    taps.push(Tap { bin, frac });
                }
            }
        }
        Ok(Self { geometry, slices, taps })
    }

    pub fn geometry(&self) -> &TomoGeometry {
        &self.geometry
    }

    fn project_slice(&self, img: &[f64], sino: &mut [f64]) {
        let npix = img.len();
        let bins = self.geometry.detector_bins;
        for (v, row) in sino.chunks_exact_mut(bins).enumerate() {
            let taps = &self.taps[v * npix..(v + 1) * npix];
            for (tap, &val) in taps.iter().zip(img) {
                let b = tap.bin as usize;
                if b < bins {
                    row[b] += (1.0 - tap.frac) * val;
                }
                if b + 1 < bins && tap.frac != 0.0 {
                    row[b + 1] += tap.frac * val;
                }
            }
        }
    }

    fn backproject_slice(&self, sino: &[f64], img: &mut [f64]) {
        let npix = img.len();
        let bins = self.geometry.detector_bins;
        for (v, row) in sino.chunks_exact(bins).enumerate() {
            let taps = &self.taps[v * npix..(v + 1) * npix];
            for (tap, out) in taps.iter().zip(img.iter_mut()) {
                let b = tap.bin as usize;
                let mut acc = 0.0;
                if b < bins {
                    acc += (1.0 - tap.frac) * row[b];
                }
                if b + 1 < bins && tap.frac != 0.0 {
                    acc += tap.frac * row[b + 1];
                }
                *out += acc;
            }
        }
    }
}

impl LinearOperator for ParallelBeam {
    fn domain(&self) -> Dims {
        Dims::new(self.slices, self.geometry.size, self.geometry.size)
    }

    fn range(&self) -> Dims {
        Dims::new(self.slices, self.geometry.views(), self.geometry.detector_bins)
    }

    fn layout(&self) -> Layout {
        Layout::Sinogram { views: self.geometry.views(), bins: self.geometry.detector_bins }
    }

    fn apply(&self, x: &Volume) -> Result<Volume> {
        if x.height() != x.width() {
            return Err(Error::Geometry(format!("slices must be square, got {}x{}", x.height(), x.width())));
        }
        self.check_domain(x)?;
        let mut out = Volume::zeros(self.range())?;
        for (img, sino) in x.slices_iter().zip(out.slices_iter_mut()) {
            self.project_slice(img, sino);
        }
        Ok(out)
    }

    fn adjoint(&self, y: &Volume) -> Result<Volume> {
        self.check_range(y)?;
        let mut out = Volume::zeros(self.domain())?;
        for (sino, img) in y.slices_iter().zip(out.slices_iter_mut()) {
            self.backproject_slice(sino, img);
        }
        Ok(out)
    }
}

pub fn radon_apply(geometry: &TomoGeometry, x: &Volume) -> Result<Volume> {
    if x.height() != x.width() {
        return Err(Error::Geometry(format!("slices must be square, got {}x{}", x.height(), x.width())));
    }
    ParallelBeam::new(geometry.clone(), x.slices())?.apply(x)
}

/// Unfiltered backprojection.
pub fn radon_adjoint(geometry: &TomoGeometry, y: &Volume) -> Result<Volume> {
    ParallelBeam::new(geometry.clone(), y.slices())?.adjoint(y)
}
