use crate::error::{Error, Result};
use crate::operators::LinearOperator;
use crate::volume::Volume;

/// Lower clamp applied to row and column sums before inverting them.
pub const SIRT_CLAMP: f64 = 1e-12;

/// SIRT from a zero start: `x ← x + C·Aᵀ·R·(y − A x)` with `R = 1/(A·1)` and
/// `C = 1/(Aᵀ·1)`, sums clamped at [`SIRT_CLAMP`].
pub fn sirt_pinv(op: &dyn LinearOperator, y: &Volume, iters: usize) -> Result<Volume> {
    sirt_pinv_traced(op, y, iters).map(|(x, _)| x)
}

/// Like [`sirt_pinv`], also returning `‖y − A x_k‖` for `k = 0..=iters`.
pub fn sirt_pinv_traced(op: &dyn LinearOperator, y: &Volume, iters: usize) -> Result<(Volume, Vec<f64>)> {
    if iters == 0 {
        return Err(Error::Parameter("SIRT needs at least one iteration".into()));
    }
    op.check_range(y)?;
    let ones_x = Volume::new(op.domain().slices, op.domain().height, op.domain().width, 1.0)?;
    let ones_y = Volume::new(op.range().slices, op.range().height, op.range().width, 1.0)?;
    let row = op.apply(&ones_x)?.map(|s| 1.0 / s.max(SIRT_CLAMP));
    let col = op.adjoint(&ones_y)?.map(|s| 1.0 / s.max(SIRT_CLAMP));

    let mut x = Volume::zeros(op.domain())?;
    let mut resid = y.clone();
    let mut trace = vec![resid.norm()];
    for _ in 0..iters {
        let weighted = resid.zip_with(&row, |r, w| r * w)?;
        let step = op.adjoint(&weighted)?;
        x.data_mut().iter_mut().zip(step.data().iter().zip(col.data())).for_each(|(xi, (s, c))| *xi += c * s);
        resid = y.sub(&op.apply(&x)?)?;
        trace.push(resid.norm());
    }
    x.ensure_finite("SIRT iterate")?;
    Ok((x, trace))
}
