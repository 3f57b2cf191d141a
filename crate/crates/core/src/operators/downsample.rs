use crate::error::{Error, Result};
use crate::operators::{Layout, LinearOperator};
use crate::volume::{Dims, Volume};

/// Block average of `factor` consecutive slices along z.
///
/// The adjoint replicates each low-resolution slice `factor` times scaled by
/// `1/factor`; since `A Aᵀ = I/factor`, the exact pseudo-inverse is plain
/// replication.
#[derive(Debug, Clone, Copy)]
pub struct DownsampleZ {
    dims: Dims,
    factor: usize,
}

impl DownsampleZ {
    pub fn new(dims: Dims, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::Parameter("downsampling factor must be >= 1".into()));
        }
        if !dims.slices.is_multiple_of(factor) {
            return Err(Error::Dimension(format!("{} slices not divisible by factor {factor}", dims.slices)));
        }
        Ok(Self { dims, factor })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    fn replicate(&self, y: &Volume, scale: f64) -> Result<Volume> {
        self.check_range(y)?;
        let mut out = Volume::zeros(self.dims)?;
        for (j, dst) in out.slices_iter_mut().enumerate() {
            let src = y.slice_data(j / self.factor);
            dst.iter_mut().zip(src).for_each(|(d, s)| *d = scale * s);
        }
        Ok(out)
    }
}

impl LinearOperator for DownsampleZ {
    fn domain(&self) -> Dims {
        self.dims
    }

    fn range(&self) -> Dims {
        Dims::new(self.dims.slices / self.factor, self.dims.height, self.dims.width)
    }

    fn layout(&self) -> Layout {
        Layout::Volume
    }

    fn apply(&self, x: &Volume) -> Result<Volume> {
        self.check_domain(x)?;
        let mut out = Volume::zeros(self.range())?;
        let k = self.factor as f64;
        for (j, dst) in out.slices_iter_mut().enumerate() {
            for i in 0..self.factor {
                let src = x.slice_data(j * self.factor + i);
                dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
            }
            dst.iter_mut().for_each(|d| *d /= k);
        }
        Ok(out)
    }

    fn adjoint(&self, y: &Volume) -> Result<Volume> {
        self.replicate(y, 1.0 / self.factor as f64)
    }

    fn exact_pinv(&self, y: &Volume) -> Option<Result<Volume>> {
        Some(self.replicate(y, 1.0))
    }
}

pub fn downsample_z(x: &Volume, factor: usize) -> Result<Volume> {
    DownsampleZ::new(x.dims(), factor)?.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::adjoint_mismatch;
    use crate::rng::RngState;
    use crate::volume::sample_standard_normal;

    #[test]
    fn factor_one_is_identity() {
        let x = sample_standard_normal(RngState::new(1, 0), 4, 3, 3).unwrap();
        assert!(downsample_z(&x, 1).unwrap().bit_eq(&x));
    }

    #[test]
    fn block_means() {
        let x = Volume::from_fn(Dims::new(10, 2, 3), |s, _, _| s as f64).unwrap();
        let y = downsample_z(&x, 5).unwrap();
        assert_eq!(y.slices(), 2);
        assert!(y.slice_data(0).iter().all(|&v| v == 2.0));
        assert!(y.slice_data(1).iter().all(|&v| v == 7.0));
    }

    #[test]
    fn constants_preserved() {
        let x = Volume::new(6, 2, 2, 0.3).unwrap();
        let y = downsample_z(&x, 3).unwrap();
        assert!(y.data().iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn indivisible_rejected() {
        assert!(matches!(DownsampleZ::new(Dims::new(7, 2, 2), 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn dot_test_and_coupling() {
        let op = DownsampleZ::new(Dims::new(10, 8, 8), 5).unwrap();
        let x = sample_standard_normal(RngState::new(2, 0), 10, 8, 8).unwrap();
        let y = sample_standard_normal(RngState::new(3, 0), 2, 8, 8).unwrap();
        assert!(adjoint_mismatch(&op, &x, &y).unwrap() <= 1e-12);

        // perturbing slice 3 changes only output slice 0
        let mut x2 = x.clone();
        x2.slice_data_mut(3)[0] += 1.0;
        let (a, b) = (op.apply(&x).unwrap(), op.apply(&x2).unwrap());
        assert_ne!(a.slice_data(0), b.slice_data(0));
        assert_eq!(a.slice_data(1), b.slice_data(1));
    }

    #[test]
    fn replication_is_right_inverse() {
        let op = DownsampleZ::new(Dims::new(10, 4, 4), 5).unwrap();
        let y = sample_standard_normal(RngState::new(4, 0), 2, 4, 4).unwrap();
        let x = op.exact_pinv(&y).unwrap().unwrap();
        assert!(op.apply(&x).unwrap().max_abs_diff(&y) < 1e-15);
    }
}
