//! Slice-major scalar volumes.
//!
//! The value at `(s, h, w)` lives at linear index `s·H·W + h·W + w`. Slice
//! indices are zero-based throughout the crate.

use crate::error::{Error, Result};
use crate::rng::RngState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub slices: usize,
    pub height: usize,
    pub width: usize,
}

impl Dims {
    pub fn new(slices: usize, height: usize, width: usize) -> Self {
        Self { slices, height, width }
    }

    pub fn len(&self) -> usize {
        self.slices * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice_len(&self) -> usize {
        self.height * self.width
    }

    fn validate(&self) -> Result<()> {
        if self.slices == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::Dimension(format!("zero dimension in {self}")));
        }
        self.slices
            .checked_mul(self.height)
            .and_then(|n| n.checked_mul(self.width))
            .ok_or_else(|| Error::Dimension(format!("{self} overflows")))?;
        Ok(())
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.slices, self.height, self.width)
    }
}

/// An `S×H×W` grid of `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    data: Vec<f64>,
}

impl Volume {
    pub fn new(slices: usize, height: usize, width: usize, fill: f64) -> Result<Self> {
        let dims = Dims::new(slices, height, width);
        dims.validate()?;
        Ok(Self { dims, data: vec![fill; dims.len()] })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::new(dims.slices, dims.height, dims.width, 0.0)
    }

    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.len() {
            return Err(Error::Dimension(format!("{} values for a {dims} volume", data.len())));
        }
        Ok(Self { dims, data })
    }

    /// Builds a volume from a function of `(s, h, w)`.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        dims.validate()?;
        let mut data = Vec::with_capacity(dims.len());
        for s in 0..dims.slices {
            for h in 0..dims.height {
                for w in 0..dims.width {
                    data.push(f(s, h, w));
                }
            }
        }
        Ok(Self { dims, data })
    }

    /// Stacks equally sized slices.
    pub fn from_slices(height: usize, width: usize, slices: &[Vec<f64>]) -> Result<Self> {
        let dims = Dims::new(slices.len(), height, width);
        dims.validate()?;
        let mut data = Vec::with_capacity(dims.len());
        for (i, sl) in slices.iter().enumerate() {
            if sl.len() != dims.slice_len() {
                return Err(Error::Dimension(format!("slice {i} has {} values, expected {}", sl.len(), dims.slice_len())));
            }
            data.extend_from_slice(sl);
        }
        Ok(Self { dims, data })
    }

    pub fn zeros_like(&self) -> Self {
        Self { dims: self.dims, data: vec![0.0; self.data.len()] }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn slices(&self) -> usize {
        self.dims.slices
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, s: usize, h: usize, w: usize) -> usize {
        (s * self.dims.height + h) * self.dims.width + w
    }

    pub fn get(&self, s: usize, h: usize, w: usize) -> f64 {
        self.data[self.index(s, h, w)]
    }

    pub fn set(&mut self, s: usize, h: usize, w: usize, v: f64) {
        let i = self.index(s, h, w);
        self.data[i] = v;
    }

    pub fn slice(&self, index: usize) -> SliceView<'_> {
        assert!(index < self.dims.slices, "slice {index} out of range for {}", self.dims);
        SliceView { parent: self, index }
    }

    pub fn slice_data(&self, index: usize) -> &[f64] {
        let n = self.dims.slice_len();
        &self.data[index * n..(index + 1) * n]
    }

    pub fn slice_data_mut(&mut self, index: usize) -> &mut [f64] {
        let n = self.dims.slice_len();
        &mut self.data[index * n..(index + 1) * n]
    }

    pub fn slices_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dims.slice_len())
    }

    pub fn slices_iter_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        let n = self.dims.slice_len();
        self.data.chunks_exact_mut(n)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Numerical(format!("{what} contains non-finite values")))
        }
    }

    pub fn ensure_same_dims(&self, other: &Volume) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!("shape {} vs {}", self.dims, other.dims)));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn dot(&self, other: &Volume) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, a: f64) -> Volume {
        self.map(|v| a * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Volume {
        Volume { dims: self.dims, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// `self += a · other`
    pub fn axpy(&mut self, a: f64, other: &Volume) {
        debug_assert_eq!(self.dims, other.dims);
        for (y, x) in self.data.iter_mut().zip(&other.data) {
            *y += a * x;
        }
    }

    pub fn sub(&self, other: &Volume) -> Result<Volume> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Volume) -> Result<Volume> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn zip_with(&self, other: &Volume, f: impl Fn(f64, f64) -> f64) -> Result<Volume> {
        self.ensure_same_dims(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Volume { dims: self.dims, data })
    }

    /// Bit-level equality, distinguishing `0.0` from `-0.0`.
    pub fn bit_eq(&self, other: &Volume) -> bool {
        self.dims == other.dims && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn max_abs_diff(&self, other: &Volume) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Read-only view of one slice of a volume.
#[derive(Debug, Clone, Copy)]
pub struct SliceView<'a> {
    parent: &'a Volume,
    index: usize,
}

impl<'a> SliceView<'a> {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn height(&self) -> usize {
        self.parent.dims.height
    }

    pub fn width(&self) -> usize {
        self.parent.dims.width
    }

    pub fn data(&self) -> &'a [f64] {
        self.parent.slice_data(self.index)
    }

    pub fn get(&self, h: usize, w: usize) -> f64 {
        self.parent.get(self.index, h, w)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// I.i.d. standard-normal volume drawn from `rng`, filled in linear order.
pub fn sample_standard_normal(rng: RngState, slices: usize, height: usize, width: usize) -> Result<Volume> {
    let mut v = Volume::new(slices, height, width, 0.0)?;
    rng.generator().fill_normal(v.data_mut());
    Ok(v)
}
