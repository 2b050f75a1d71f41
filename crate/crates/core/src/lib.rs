//! Barrier-preconditioned primal–dual splitting for saddle-point problems
//! whose dual variable lives on a product of second-order cones.
//!
//! - [`jordan`]: the spin-factor Jordan algebra `E_{1+m}` and block products.
//! - [`barrier`]: log-det barrier, closed-form central path, diagnostics.
//! - [`solver`]: the PEDI iteration with its two step-size rules.
//! - [`baselines`]: accelerated Chambolle–Pock and dual forward–backward.
//! - [`imaging`]: TV and H¹ denoising problems, noise, metrics.

pub mod barrier;
pub mod baselines;
pub mod imaging;
pub mod jordan;
pub mod solver;

/// Crate version, recorded in run sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use barrier::{BarrierError, CentralPathPoint, RankOneConstraint, SclpSolution};
pub use baselines::{dual_fb_run, pdhgm_run, BaselineConfig, BaselineOutcome};
pub use imaging::{
    build_problem, DenoiseProblem, ImageGrid, ImagingError, IterationRecord, Target, Variant,
};
pub use jordan::{BlockConeVector, JordanError, SpinElement};
pub use solver::{
    pedi_run, PediConfig, PediOutcome, SaddleProblem, SolverError, StepParams, StepRule, StepState,
};
