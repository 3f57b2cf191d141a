//! Synthetic ellipse phantoms in normalized `[−1, 1]²` slice coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, Volume};

/// Sub-samples per pixel side used when rasterizing ellipse edges.
pub const SUPERSAMPLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomKind {
    ExtrudedEllipses,
    VaryingEllipses,
    StepLesion,
}

/// One additive ellipse. `center` is `(x, y)` with `x` to the right and `y`
/// up; drifts are added once per slice index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub axes: [f64; 2],
    pub intensity: f64,
    #[serde(default)]
    pub angle_deg: f64,
    #[serde(default)]
    pub center_drift: [f64; 2],
    #[serde(default)]
    pub axes_drift: [f64; 2],
}

impl Ellipse {
    pub fn new(center: [f64; 2], axes: [f64; 2], intensity: f64, angle_deg: f64) -> Self {
        Self { center, axes, intensity, angle_deg, center_drift: [0.0; 2], axes_drift: [0.0; 2] }
    }

    pub fn with_drift(mut self, center_drift: [f64; 2], axes_drift: [f64; 2]) -> Self {
        self.center_drift = center_drift;
        self.axes_drift = axes_drift;
        self
    }

    /// Geometry at slice `k` as `(center, axes)`.
    pub fn at_slice(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        let k = k as f64;
        (
            [self.center[0] + k * self.center_drift[0], self.center[1] + k * self.center_drift[1]],
            [self.axes[0] + k * self.axes_drift[0], self.axes[1] + k * self.axes_drift[1]],
        )
    }

    fn contains(&self, center: [f64; 2], axes: [f64; 2], x: f64, y: f64) -> bool {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let (dx, dy) = (x - center[0], y - center[1]);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u / axes[0]).powi(2) + (v / axes[1]).powi(2) <= 1.0
    }
}

/// A square lesion of `size_px × size_px` pixels centred in-plane, present in
/// `slices` consecutive central slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lesion {
    pub size_px: usize,
    pub slices: usize,
    pub intensity: f64,
}

impl Default for Lesion {
    fn default() -> Self {
        Self { size_px: 3, slices: 2, intensity: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    #[serde(default = "default_slices")]
    pub slices: usize,
    #[serde(default = "default_size")]
    pub height: usize,
    #[serde(default = "default_size")]
    pub width: usize,
    /// Overrides the kind's default ellipse set.
    #[serde(default)]
    pub ellipses: Option<Vec<Ellipse>>,
    /// Only used by `step_lesion`.
    #[serde(default)]
    pub lesion: Option<Lesion>,
}

fn default_slices() -> usize {
    48
}

fn default_size() -> usize {
    64
}

impl PhantomSpec {
    pub fn new(kind: PhantomKind, dims: Dims) -> Self {
        Self { kind, slices: dims.slices, height: dims.height, width: dims.width, ellipses: None, lesion: None }
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.slices, self.height, self.width)
    }

    /// The ellipses actually rasterized: the explicit list or the kind's default.
    pub fn resolved_ellipses(&self) -> Vec<Ellipse> {
        if let Some(e) = &self.ellipses {
            return e.clone();
        }
        match self.kind {
            PhantomKind::ExtrudedEllipses | PhantomKind::StepLesion => base_ellipses(),
            PhantomKind::VaryingEllipses => drifting_ellipses(self.slices),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        if d.is_empty() {
            return Err(Error::Spec(format!("phantom dims {d} must be positive")));
        }
        for (i, e) in self.resolved_ellipses().iter().enumerate() {
            let finite = e.center.iter().chain(&e.axes).chain(&e.center_drift).chain(&e.axes_drift).all(|v| v.is_finite());
            if !finite || !e.intensity.is_finite() || !e.angle_deg.is_finite() {
                return Err(Error::Spec(format!("ellipse {i} has non-finite parameters")));
            }
            // drift is linear in k, so the extremes sit at the first and last slice
            for k in [0, d.slices - 1] {
                let (c, a) = e.at_slice(k);
                if a[0] <= 0.0 || a[1] <= 0.0 {
                    return Err(Error::Spec(format!("ellipse {i} has non-positive semi-axes at slice {k}")));
                }
                let (s, co) = e.angle_deg.to_radians().sin_cos();
                let half_x = ((a[0] * co).powi(2) + (a[1] * s).powi(2)).sqrt();
                let half_y = ((a[0] * s).powi(2) + (a[1] * co).powi(2)).sqrt();
                if c[0] - half_x < -1.0 || c[0] + half_x > 1.0 || c[1] - half_y < -1.0 || c[1] + half_y > 1.0 {
                    return Err(Error::Spec(format!("ellipse {i} leaves the image at slice {k}")));
                }
            }
        }
        if self.kind == PhantomKind::StepLesion {
            let l = self.lesion.clone().unwrap_or_default();
            if l.size_px == 0 || l.size_px > d.height.min(d.width) || l.slices == 0 || l.slices > d.slices {
                return Err(Error::Spec(format!("lesion {}px x {} slices does not fit {d}", l.size_px, l.slices)));
            }
            if !(0.0..=1.0).contains(&l.intensity) {
                return Err(Error::Spec(format!("lesion intensity {} outside [0, 1]", l.intensity)));
            }
        }
        Ok(())
    }

    /// Voxel mask of the lesion as `(slice range, row range, column range)`.
    pub fn lesion_extent(&self) -> Option<(std::ops::Range<usize>, std::ops::Range<usize>, std::ops::Range<usize>)> {
        if self.kind != PhantomKind::StepLesion {
            return None;
        }
        let l = self.lesion.clone().unwrap_or_default();
        let s0 = (self.slices - l.slices) / 2;
        let h0 = (self.height - l.size_px) / 2;
        let w0 = (self.width - l.size_px) / 2;
        Some((s0..s0 + l.slices, h0..h0 + l.size_px, w0..w0 + l.size_px))
    }
}

/// Head-like ellipse set with no slice dependence.
pub fn base_ellipses() -> Vec<Ellipse> {
    vec![
        Ellipse::new([0.0, 0.0], [0.70, 0.85], 0.6, 0.0),
        Ellipse::new([-0.25, 0.15], [0.18, 0.28], 0.3, 18.0),
        Ellipse::new([0.28, -0.10], [0.14, 0.20], -0.3, -25.0),
        Ellipse::new([0.05, 0.50], [0.10, 0.08], 0.35, 0.0),
        Ellipse::new([0.0, -0.50], [0.15, 0.10], 0.2, 0.0),
    ]
}

/// [`base_ellipses`] with the inner structures drifting linearly so the whole
/// stack of `slices` spans a fixed total displacement.
pub fn drifting_ellipses(slices: usize) -> Vec<Ellipse> {
    let per = 1.0 / (slices.max(2) - 1) as f64;
    let mut e = base_ellipses();
    e[1] = e[1].clone().with_drift([0.20 * per, 0.0], [0.06 * per, 0.0]);
    e[2] = e[2].clone().with_drift([0.0, 0.15 * per], [0.0, -0.06 * per]);
    e[3] = e[3].clone().with_drift([-0.10 * per, 0.0], [0.0, 0.04 * per]);
    e[4] = e[4].clone().with_drift([0.10 * per, 0.10 * per], [0.0, 0.0]);
    e
}

/// Rasterizes the phantom with `SUPERSAMPLE²` coverage sampling per pixel;
/// intensities add and are clamped to `[0, 1]`.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<Volume> {
    spec.validate()?;
    let d = spec.dims();
    let ellipses = spec.resolved_ellipses();
    let (ch, cw) = ((d.height as f64 - 1.0) / 2.0, (d.width as f64 - 1.0) / 2.0);
    let (sh, sw) = (ch.max(0.5), cw.max(0.5));
    let n = SUPERSAMPLE as f64;
    let mut out = Volume::zeros(d)?;
    for k in 0..d.slices {
        let geo: Vec<_> = ellipses.iter().map(|e| e.at_slice(k)).collect();
        let slice = out.slice_data_mut(k);
        for h in 0..d.height {
            for w in 0..d.width {
                let mut acc = 0.0;
                for a in 0..SUPERSAMPLE {
                    let y = (ch - (h as f64 + (a as f64 + 0.5) / n - 0.5)) / sh;
                    for b in 0..SUPERSAMPLE {
                        let x = (w as f64 + (b as f64 + 0.5) / n - 0.5 - cw) / sw;
                        acc += ellipses
                            .iter()
                            .zip(&geo)
                            .filter(|(e, (c, ax))| e.contains(*c, *ax, x, y))
                            .map(|(e, _)| e.intensity)
                            .sum::<f64>();
                    }
                }
                slice[h * d.width + w] = (acc / (n * n)).clamp(0.0, 1.0);
            }
        }
    }
    if let Some((ss, hs, ws)) = spec.lesion_extent() {
        let l = spec.lesion.clone().unwrap_or_default();
        for k in ss {
            for h in hs.clone() {
                for w in ws.clone() {
                    out.set(k, h, w, l.intensity);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::sdiff;

    #[test]
    fn extruded_has_zero_sdiff() {
        let v = generate_phantom(&PhantomSpec::new(PhantomKind::ExtrudedEllipses, Dims::new(4, 32, 32))).unwrap();
        assert_eq!(sdiff(&v).unwrap(), 0.0);
        assert!(v.data().iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(v.data().iter().any(|&x| x > 0.5));
    }

    #[test]
    fn varying_has_positive_sdiff() {
        let v = generate_phantom(&PhantomSpec::new(PhantomKind::VaryingEllipses, Dims::new(8, 32, 32))).unwrap();
        assert!(sdiff(&v).unwrap() > 0.0);
    }

    #[test]
    fn lesion_voxel_count() {
        let mut spec = PhantomSpec::new(PhantomKind::StepLesion, Dims::new(6, 32, 32));
        spec.lesion = Some(Lesion { size_px: 3, slices: 2, intensity: 1.0 });
        let with = generate_phantom(&spec).unwrap();
        let base = generate_phantom(&PhantomSpec::new(PhantomKind::ExtrudedEllipses, Dims::new(6, 32, 32))).unwrap();
        let changed = with.data().iter().zip(base.data()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 18);
        let (ss, _, _) = spec.lesion_extent().unwrap();
        assert_eq!(ss, 2..4);
    }

    #[test]
    fn out_of_bounds_is_rejected() {
        let mut spec = PhantomSpec::new(PhantomKind::ExtrudedEllipses, Dims::new(2, 16, 16));
        spec.ellipses = Some(vec![Ellipse::new([0.5, 0.0], [0.6, 0.2], 0.5, 0.0)]);
        assert!(matches!(generate_phantom(&spec), Err(Error::Spec(_))));
        spec.ellipses = Some(vec![Ellipse::new([0.0, 0.0], [0.3, 0.2], 0.5, 0.0).with_drift([0.8, 0.0], [0.0, 0.0])]);
        assert!(matches!(generate_phantom(&spec), Err(Error::Spec(_))));
    }

    #[test]
    fn deterministic_and_parses() {
        let json = r#"{"kind": "varying_ellipses", "slices": 5, "height": 16, "width": 16}"#;
        let spec: PhantomSpec = serde_json::from_str(json).unwrap();
        assert!(generate_phantom(&spec).unwrap().bit_eq(&generate_phantom(&spec).unwrap()));
        assert!(serde_json::from_str::<PhantomSpec>(r#"{"kind": "extruded_ellipses", "bogus": 1}"#).is_err());
    }
}
