//! Noise volumes for the re-noising step.
//!
//! Three policies decide how the stochastic term is shared across slices:
//!
//! * [`NoiseKind::Independent`]: every slice draws its own standard normal field.
//! * [`NoiseKind::Identical`]: one field, copied into every slice.
//! * [`NoiseKind::Slerp`]: two anchor fields `z1`, `zS`; slice `i` is the
//!   spherical interpolation at `α_i = i / (S − 1)`, so neighbouring slices
//!   receive strongly correlated noise and the correlation decays with slice
//!   distance while each slice stays on the Gaussian shell.
//!
//! The module also carries the statistical validators used to check the
//! high-dimensional behaviour the Slerp policy relies on (norm concentration
//! and near-orthogonality of independent draws).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{NormalStream, RngState};
use crate::volume::{dot, norm, Dims, Volume};

/// Anchors with `|sin Ω|` below this are treated as collinear.
pub const DEGENERATE_SIN: f64 = 1e-9;
/// Number of `zS` redraws before a degenerate pair becomes an error.
pub const ANCHOR_REDRAWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Independent,
    Identical,
    Slerp,
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Independent => "independent",
            NoiseKind::Identical => "identical",
            NoiseKind::Slerp => "slerp",
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStrategy {
    kind: NoiseKind,
    anchor_angle: Option<f64>,
}

impl NoiseStrategy {
    pub fn independent() -> Self {
        Self { kind: NoiseKind::Independent, anchor_angle: None }
    }

    pub fn identical() -> Self {
        Self { kind: NoiseKind::Identical, anchor_angle: None }
    }

    /// Slerp with i.i.d. anchors.
    pub fn slerp() -> Self {
        Self { kind: NoiseKind::Slerp, anchor_angle: None }
    }

    /// Slerp with anchors separated by a fixed angle (radians).
    pub fn slerp_with_angle(theta: f64) -> Result<Self> {
        check_angle(theta)?;
        Ok(Self { kind: NoiseKind::Slerp, anchor_angle: Some(theta) })
    }

    pub fn new(kind: NoiseKind, anchor_angle: Option<f64>) -> Result<Self> {
        match (kind, anchor_angle) {
            (NoiseKind::Slerp, Some(theta)) => Self::slerp_with_angle(theta),
            (_, None) => Ok(Self { kind, anchor_angle: None }),
            (k, Some(_)) => Err(Error::Parameter(format!("anchor angle is only valid for slerp, not {k}"))),
        }
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn anchor_angle(&self) -> Option<f64> {
        self.anchor_angle
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::Parameter(format!("anchor angle {theta} rad outside (0, π)")))
    }
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos()
}

/// Two anchor fields and the angle between them.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorPair {
    z1: Vec<f64>,
    zs: Vec<f64>,
    omega: f64,
}

impl AnchorPair {
    pub fn new(z1: Vec<f64>, zs: Vec<f64>) -> Result<Self> {
        if z1.len() != zs.len() || z1.is_empty() {
            return Err(Error::Dimension(format!("anchor lengths {} and {}", z1.len(), zs.len())));
        }
        let omega = angle_between(&z1, &zs);
        if !omega.is_finite() || omega.sin().abs() < DEGENERATE_SIN {
            return Err(Error::DegenerateAnchor { sin_omega: omega.sin() });
        }
        Ok(Self { z1, zs, omega })
    }

    pub fn z1(&self) -> &[f64] {
        &self.z1
    }

    pub fn zs(&self) -> &[f64] {
        &self.zs
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn interpolate(&self, alpha: f64) -> Vec<f64> {
        let s = self.omega.sin();
        let w1 = ((1.0 - alpha) * self.omega).sin() / s;
        let ws = (alpha * self.omega).sin() / s;
        self.z1.iter().zip(&self.zs).map(|(a, b)| w1 * a + ws * b).collect()
    }

    /// Noise volume whose slice `i` is the interpolation at `i / (S − 1)`.
    pub fn noise_volume(&self, dims: Dims) -> Result<Volume> {
        if dims.slices < 2 {
            return Err(Error::Dimension("slerp noise needs at least 2 slices".into()));
        }
        if dims.slice_len() != self.z1.len() {
            return Err(Error::Dimension(format!("anchors of length {} for {dims} slices", self.z1.len())));
        }
        let last = (dims.slices - 1) as f64;
        let mut v = Volume::zeros(dims)?;
        for (i, sl) in v.slices_iter_mut().enumerate() {
            sl.copy_from_slice(&self.interpolate(i as f64 / last));
        }
        Ok(v)
    }
}

/// Spherical linear interpolation between `z1` (α = 0) and `zs` (α = 1).
pub fn slerp(z1: &[f64], zs: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if z1.len() != zs.len() {
        return Err(Error::Dimension(format!("slerp of lengths {} and {}", z1.len(), zs.len())));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha {alpha} outside [0, 1]")));
    }
    let omega = angle_between(z1, zs);
    let s = omega.sin();
    if !s.is_finite() || s.abs() < DEGENERATE_SIN {
        return Err(Error::DegenerateAnchor { sin_omega: s });
    }
    let w1 = ((1.0 - alpha) * omega).sin() / s;
    let ws = (alpha * omega).sin() / s;
    Ok(z1.iter().zip(zs).map(|(a, b)| w1 * a + ws * b).collect())
}

fn iid_anchors(gen: &mut NormalStream, n: usize) -> Result<AnchorPair> {
    let z1 = gen.normal_vec(n);
    let mut last = Error::DegenerateAnchor { sin_omega: 0.0 };
    for _ in 0..=ANCHOR_REDRAWS {
        match AnchorPair::new(z1.clone(), gen.normal_vec(n)) {
            Ok(pair) => return Ok(pair),
            Err(e @ Error::DegenerateAnchor { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Anchors whose angle is fixed to `theta`; `zS` keeps an annulus-typical norm
/// taken from an independent standard-normal draw.
pub fn angle_constrained_anchors(rng: RngState, height: usize, width: usize, theta: f64) -> Result<AnchorPair> {
    check_angle(theta)?;
    let n = height * width;
    if n < 2 {
        return Err(Error::Dimension("angle-constrained anchors need at least 2 pixels".into()));
    }
    let mut gen = rng.generator();
    let z1 = gen.normal_vec(n);
    let n1 = norm(&z1);
    let e1: Vec<f64> = z1.iter().map(|v| v / n1).collect();

    let mut perp = Vec::new();
    for _ in 0..=ANCHOR_REDRAWS {
        let mut u = gen.normal_vec(n);
        let proj = dot(&u, &e1);
        u.iter_mut().zip(&e1).for_each(|(a, b)| *a -= proj * b);
        // second pass removes residual parallel component left by round-off
        let proj = dot(&u, &e1);
        u.iter_mut().zip(&e1).for_each(|(a, b)| *a -= proj * b);
        let nu = norm(&u);
        if nu > 1e-6 {
            perp = u.iter().map(|v| v / nu).collect();
            break;
        }
    }
    if perp.is_empty() {
        return Err(Error::DegenerateAnchor { sin_omega: 0.0 });
    }
    let radius = norm(&gen.normal_vec(n));
    let (s, c) = theta.sin_cos();
    let zs: Vec<f64> = e1.iter().zip(&perp).map(|(a, b)| radius * (c * a + s * b)).collect();
    Ok(AnchorPair { z1, zs, omega: theta })
}

/// Draws the anchor pair a Slerp strategy would use for one noise volume.
pub fn draw_anchors(strategy: &NoiseStrategy, rng: RngState, height: usize, width: usize) -> Result<AnchorPair> {
    match strategy.anchor_angle {
        Some(theta) => angle_constrained_anchors(rng, height, width, theta),
        None => iid_anchors(&mut rng.generator(), height * width),
    }
}

pub fn make_noise_volume(strategy: &NoiseStrategy, rng: RngState, dims: Dims) -> Result<Volume> {
    match strategy.kind {
        NoiseKind::Independent => {
            let mut v = Volume::zeros(dims)?;
            rng.generator().fill_normal(v.data_mut());
            Ok(v)
        }
        NoiseKind::Identical => {
            let mut v = Volume::zeros(dims)?;
            let first = rng.generator().normal_vec(dims.slice_len());
            for sl in v.slices_iter_mut() {
                sl.copy_from_slice(&first);
            }
            Ok(v)
        }
        NoiseKind::Slerp => {
            if dims.slices < 2 {
                return Err(Error::Dimension("slerp noise needs at least 2 slices".into()));
            }
            draw_anchors(strategy, rng, dims.height, dims.width)?.noise_volume(dims)
        }
    }
}

/// Cosine similarity of every slice with the first slice.
pub fn correlation_profile(noise: &Volume) -> Result<Vec<f64>> {
    if noise.slices() < 2 {
        return Err(Error::Dimension("correlation profile needs at least 2 slices".into()));
    }
    let first = noise.slice_data(0);
    let n1 = norm(first);
    noise
        .slices_iter()
        .enumerate()
        .map(|(i, sl)| {
            let ni = norm(sl);
            if ni == 0.0 || n1 == 0.0 {
                return Err(Error::DegenerateInput(format!("slice {i} has zero norm")));
            }
            Ok(dot(first, sl) / (n1 * ni))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleStats {
    /// Mean pairwise angle, radians.
    pub mean: f64,
    /// Sample standard deviation of the angle, radians.
    pub std: f64,
}

impl AngleStats {
    pub fn mean_deg(&self) -> f64 {
        self.mean.to_degrees()
    }

    pub fn std_deg(&self) -> f64 {
        self.std.to_degrees()
    }
}

/// Empirical distribution of the angle between independent standard-normal
/// vectors in dimension `d`.
pub fn angle_concentration_test(rng: RngState, d: usize, trials: usize) -> Result<AngleStats> {
    if d < 2 || trials < 2 {
        return Err(Error::Parameter(format!("need d >= 2 and trials >= 2, got d={d}, trials={trials}")));
    }
    let mut gen = rng.generator();
    let angles: Vec<f64> = (0..trials)
        .map(|_| {
            let a = gen.normal_vec(d);
            let b = gen.normal_vec(d);
            angle_between(&a, &b)
        })
        .collect();
    let mean = angles.iter().sum::<f64>() / trials as f64;
    let var = angles.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    Ok(AngleStats { mean, std: var.sqrt() })
}

/// Fraction of `draws` standard-normal vectors in dimension `d` whose norm
/// deviates from `√d` by at least `beta`.
pub fn annulus_violation_fraction(rng: RngState, d: usize, draws: usize, beta: f64) -> Result<f64> {
    if d == 0 || draws == 0 {
        return Err(Error::Parameter("annulus test needs d >= 1 and draws >= 1".into()));
    }
    let mut gen = rng.generator();
    let radius = (d as f64).sqrt();
    let violations = (0..draws).filter(|_| (norm(&gen.normal_vec(d)) - radius).abs() >= beta).count();
    Ok(violations as f64 / draws as f64)
}
