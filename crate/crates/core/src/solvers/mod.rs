//! Linear solvers, data-fidelity updates, TV baselines and the reconstruction loop.

pub mod admm;
pub mod cg;
pub mod fidelity;
pub mod reconstruct;
pub mod tv;

pub use admm::{admm_tv, admm_tv_with, augmented_lagrangian, AdmmConfig, AdmmOutcome};
pub use cg::{cg_solve, cg_solve_from, CgOutcome};
pub use fidelity::{ddnm_update, dds_objective, dds_update};
pub use reconstruct::{
    initial_latent, reconstruct, reconstruct_observed, FidelityUpdate, Reconstruction, SolverConfig, StepRecord, TrajectoryRecord,
    DEFAULT_CG_ITERS, DEFAULT_SIRT_ITERS, DEFAULT_TV_ITERS,
};
pub use tv::{gradient, gradient_adjoint, tv3d, tv3d_prox, tv3d_prox_traced, Gradient};
