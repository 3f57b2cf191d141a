//! ADMM for `min ½‖Ax − y‖² + λ‖D x‖_{2,1}` with the split `z = D x`.

use crate::error::{Error, Result};
use crate::operators::LinearOperator;
use crate::solvers::cg::cg_solve_from;
use crate::solvers::tv::{gradient, gradient_adjoint, Gradient};
use crate::volume::Volume;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    pub lambda: f64,
    /// Penalty weight of the split constraint.
    pub rho: f64,
    pub admm_iters: usize,
    pub cg_iters: usize,
}

impl AdmmConfig {
    /// Default penalty as a multiple of `λ`, keeping the shrinkage threshold
    /// `λ/ρ` fixed whatever the regularization weight. The dual step raises
    /// the augmented Lagrangian by `ρ‖Dx − z‖²`, which shrinks as ρ grows;
    /// at `10λ` small increases show up, at `100λ` none were observed.
    pub const RHO_PER_LAMBDA: f64 = 100.0;

    pub fn new(lambda: f64, admm_iters: usize, cg_iters: usize) -> Self {
        Self { lambda, rho: Self::RHO_PER_LAMBDA * lambda, admm_iters, cg_iters }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Parameter(format!("ADMM lambda {} must be > 0", self.lambda)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Parameter(format!("ADMM rho {} must be > 0", self.rho)));
        }
        if self.admm_iters == 0 || self.cg_iters == 0 {
            return Err(Error::Parameter("ADMM and CG iteration counts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub x: Volume,
    /// Augmented Lagrangian at the start and after every outer iteration.
    pub lagrangian: Vec<f64>,
}

pub fn admm_tv(op: &dyn LinearOperator, y: &Volume, lambda: f64, admm_iters: usize, cg_iters: usize) -> Result<Volume> {
    admm_tv_with(op, y, &AdmmConfig::new(lambda, admm_iters, cg_iters)).map(|o| o.x)
}

/// `L = ½‖Ax − y‖² + λ‖z‖_{2,1} + ρ/2‖Dx − z + u‖² − ρ/2‖u‖²` (scaled dual `u`).
pub fn augmented_lagrangian(op: &dyn LinearOperator, y: &Volume, cfg: &AdmmConfig, x: &Volume, z: &Gradient, u: &Gradient) -> Result<f64> {
    let data = 0.5 * y.sub(&op.apply(x)?)?.norm().powi(2);
    let mut r = gradient(x);
    r.axpy(-1.0, z);
    r.axpy(1.0, u);
    Ok(data + cfg.lambda * z.group_l1() + 0.5 * cfg.rho * (r.norm_sq() - u.norm_sq()))
}

/// ADMM from `x = 0, z = 0, u = 0`. The x-update runs `cg_iters` CG steps on
/// `(AᵀA + ρDᵀD)x = Aᵀy + ρDᵀ(z − u)` warm-started at the previous x; the
/// z-update is isotropic group soft-thresholding at `λ/ρ`.
pub fn admm_tv_with(op: &dyn LinearOperator, y: &Volume, cfg: &AdmmConfig) -> Result<AdmmOutcome> {
    cfg.validate()?;
    op.check_range(y)?;
    let dims = op.domain();
    let aty = op.adjoint(y)?;
    let mut x = Volume::zeros(dims)?;
    let mut z = Gradient::zeros(dims);
    let mut u = Gradient::zeros(dims);
    let mut lagrangian = vec![augmented_lagrangian(op, y, cfg, &x, &z, &u)?];
    let rho = cfg.rho;
    let normal = |v: &Volume| -> Result<Volume> {
        let mut out = op.adjoint(&op.apply(v)?)?;
        out.axpy(rho, &gradient_adjoint(&gradient(v)));
        Ok(out)
    };
    let thresh = cfg.lambda / rho;
    for _ in 0..cfg.admm_iters {
        let mut zu = z.clone();
        zu.axpy(-1.0, &u);
        let mut rhs = gradient_adjoint(&zu).scaled(rho);
        rhs.axpy(1.0, &aty);
        x = cg_solve_from(normal, &rhs, Some(&x), cfg.cg_iters, 0.0)?.x;

        let dx = gradient(&x);
        let mut v = dx.clone();
        v.axpy(1.0, &u);
        for i in 0..v.dz.len() {
            let n = (v.dz[i].powi(2) + v.dy[i].powi(2) + v.dx[i].powi(2)).sqrt();
            let scale = if n > thresh { 1.0 - thresh / n } else { 0.0 };
            z.dz[i] = scale * v.dz[i];
            z.dy[i] = scale * v.dy[i];
            z.dx[i] = scale * v.dx[i];
        }
        u.axpy(1.0, &dx);
        u.axpy(-1.0, &z);

        let l = augmented_lagrangian(op, y, cfg, &x, &z, &u)?;
        if !l.is_finite() {
            return Err(Error::Numerical("non-finite ADMM objective".into()));
        }
        lagrangian.push(l);
    }
    x.ensure_finite("ADMM-TV output")?;
    Ok(AdmmOutcome { x, lagrangian })
}
