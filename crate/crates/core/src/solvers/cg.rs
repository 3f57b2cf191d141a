use crate::error::{Error, Result};
use crate::volume::Volume;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Volume,
    /// `‖b − M x_k‖` for the start and every completed iteration.
    pub residuals: Vec<f64>,
}

/// Conjugate gradients for `M x = b` from a zero start.
///
/// `apply` must be symmetric positive definite; that is the caller's
/// responsibility. Stops when `‖r‖/‖b‖ ≤ tol` or after `iters` iterations.
pub fn cg_solve<F>(apply: F, b: &Volume, iters: usize, tol: f64) -> Result<Volume>
where
    F: Fn(&Volume) -> Result<Volume>,
{
    cg_solve_from(apply, b, None, iters, tol).map(|o| o.x)
}

/// Conjugate gradients started from `x_init` (zero when `None`).
pub fn cg_solve_from<F>(apply: F, b: &Volume, x_init: Option<&Volume>, iters: usize, tol: f64) -> Result<CgOutcome>
where
    F: Fn(&Volume) -> Result<Volume>,
{
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(CgOutcome { x: b.zeros_like(), residuals: vec![0.0] });
    }
    if !b_norm.is_finite() {
        return Err(Error::Numerical("CG right-hand side is not finite".into()));
    }
    let mut x = match x_init {
        Some(x0) => {
            x0.ensure_same_dims(b)?;
            x0.clone()
        }
        None => b.zeros_like(),
    };
    let mut r = match x_init {
        Some(_) => b.sub(&apply(&x)?)?,
        None => b.clone(),
    };
    let mut rr = r.dot(&r);
    let mut residuals = vec![rr.sqrt()];
    let mut p = r.clone();
    for _ in 0..iters {
        if rr.sqrt() <= tol * b_norm {
            break;
        }
        let mp = apply(&p)?;
        mp.ensure_same_dims(b)?;
        let pmp = p.dot(&mp);
        if !pmp.is_finite() {
            return Err(Error::Numerical("non-finite curvature in CG".into()));
        }
        if pmp <= 0.0 {
            // exact convergence leaves p = 0; anything else means M is not SPD
            if rr == 0.0 {
                break;
            }
            return Err(Error::Numerical(format!("CG curvature {pmp} <= 0; operator is not positive definite")));
        }
        let alpha = rr / pmp;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &mp);
        let rr_new = r.dot(&r);
        if !rr_new.is_finite() {
            return Err(Error::Numerical("non-finite residual in CG".into()));
        }
        residuals.push(rr_new.sqrt());
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.data_mut().iter_mut().zip(r.data()) {
            *pi = ri + beta * *pi;
        }
    }
    Ok(CgOutcome { x, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Dims;

    fn vector(v: &[f64]) -> Volume {
        Volume::from_vec(Dims::new(1, 1, v.len()), v.to_vec()).unwrap()
    }

    #[test]
    fn scaled_identity() {
        let b = vector(&[2.0, 6.0]);
        let x = cg_solve(|v| Ok(v.scaled(2.0)), &b, 10, 1e-14).unwrap();
        assert!((x.data()[0] - 1.0).abs() < 1e-10 && (x.data()[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn zero_rhs() {
        let b = vector(&[0.0, 0.0, 0.0]);
        let x = cg_solve(|_| panic!("must not be called"), &b, 10, 1e-10).unwrap();
        assert!(x.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_indefinite() {
        let b = vector(&[1.0, 1.0]);
        let r = cg_solve(|v| Ok(v.scaled(-1.0)), &b, 5, 1e-12);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn non_finite_detected() {
        let b = vector(&[1.0, 1.0]);
        let r = cg_solve(|v| Ok(v.map(|_| f64::NAN)), &b, 5, 1e-12);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn warm_start_at_solution_stops() {
        let b = vector(&[3.0, -1.0]);
        let x0 = vector(&[1.0, -1.0 / 3.0]);
        let out = cg_solve_from(|v| Ok(v.scaled(3.0)), &b, Some(&x0), 10, 1e-12).unwrap();
        assert_eq!(out.residuals.len(), 1);
        assert!(out.x.max_abs_diff(&x0) < 1e-15);
    }
}
