//! Data-fidelity updates applied to the denoised estimate.

use crate::error::{Error, Result};
use crate::operators::{sirt_pinv, LinearOperator};
use crate::solvers::cg::cg_solve_from;
use crate::volume::Volume;

/// Relative residual at which the DDS inner solve stops early.
pub const DDS_CG_TOL: f64 = 1e-12;

/// Proximal (DDS) update: solves `(γAᵀA + I)x = γAᵀy + x0_pred` by CG started
/// at `x0_pred`, i.e. a few steps towards
/// `argmin γ/2‖y − A x‖² + 1/2‖x − x0_pred‖²`.
pub fn dds_update(x0_pred: &Volume, y: &Volume, op: &dyn LinearOperator, gamma: f64, cg_iters: usize) -> Result<Volume> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("gamma {gamma} must be > 0")));
    }
    if cg_iters == 0 {
        return Err(Error::Parameter("cg_iters must be >= 1".into()));
    }
    op.check_domain(x0_pred)?;
    op.check_range(y)?;
    let mut rhs = op.adjoint(y)?.scaled(gamma);
    rhs.axpy(1.0, x0_pred);
    let normal = |v: &Volume| -> Result<Volume> {
        let mut out = op.adjoint(&op.apply(v)?)?.scaled(gamma);
        out.axpy(1.0, v);
        Ok(out)
    };
    let out = cg_solve_from(normal, &rhs, Some(x0_pred), cg_iters, DDS_CG_TOL)?;
    out.x.ensure_finite("DDS update")?;
    Ok(out.x)
}

/// The proximal objective `γ/2‖y − A x‖² + 1/2‖x − x0_pred‖²`.
pub fn dds_objective(x: &Volume, x0_pred: &Volume, y: &Volume, op: &dyn LinearOperator, gamma: f64) -> Result<f64> {
    let data = y.sub(&op.apply(x)?)?.norm().powi(2);
    let prox = x.sub(x0_pred)?.norm().powi(2);
    Ok(0.5 * gamma * data + 0.5 * prox)
}

/// Range–null-space (DDNM) update `(I − A†A)·x0_pred + A†y`.
///
/// `A†` is the operator's exact pseudo-inverse when it has one, otherwise
/// `sirt_iters` SIRT iterations.
pub fn ddnm_update(x0_pred: &Volume, y: &Volume, op: &dyn LinearOperator, sirt_iters: usize) -> Result<Volume> {
    op.check_domain(x0_pred)?;
    op.check_range(y)?;
    let pinv = |v: &Volume| -> Result<Volume> {
        match op.exact_pinv(v) {
            Some(r) => r,
            None => sirt_pinv(op, v, sirt_iters),
        }
    };
    let back = pinv(&op.apply(x0_pred)?)?;
    let data = pinv(y)?;
    let mut out = x0_pred.sub(&back)?;
    out.axpy(1.0, &data);
    out.ensure_finite("DDNM update")?;
    Ok(out)
}
