//! Comparison solvers on the unlifted denoising problem
//! `min_x ½‖z − x‖² + α R(x)` with dual variable `p` in a ball of radius `α`
//! (per pixel for TV, global for H¹).
//!
//! - [`pdhgm_run`]: Chambolle–Pock with γ-acceleration,
//!   `θ_i = 1/√(1 + 2γτ_i)`, `τ_{i+1} = θ_iτ_i`, `σ_{i+1} = σ_i/θ_i`.
//! - [`dual_fb_run`]: projected gradient on the dual
//!   `max_p ½‖z‖² − ½‖z − Dᵀp‖²`, with primal recovery `x = z − Dᵀp`.

use std::ops::ControlFlow;

use crate::imaging::DenoiseProblem;
use crate::solver::{DualView, IterateView, Observer, SaddleProblem, SolverError};

/// `√8`, the classical bound on the norm of the discrete gradient.
pub const GRADIENT_NORM_BOUND: f64 = 2.828_427_124_746_190_3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub tau0: f64,
    pub sigma0: f64,
    pub gamma: f64,
    pub max_iters: usize,
}

impl BaselineConfig {
    /// `τ0 = 0.52/L`, `σ0 = 1.9/L`, `γ = 0.9` with `L = √8`.
    pub fn pdhgm(max_iters: usize) -> Self {
        Self {
            tau0: 0.52 / GRADIENT_NORM_BOUND,
            sigma0: 1.9 / GRADIENT_NORM_BOUND,
            gamma: 0.9,
            max_iters,
        }
    }

    /// Dual FB with the basic step `τ = 1/L²`. Only `tau0` and
    /// `max_iters` are used.
    pub fn dual_fb(max_iters: usize) -> Self {
        Self {
            tau0: 1.0 / (GRADIENT_NORM_BOUND * GRADIENT_NORM_BOUND),
            sigma0: 0.0,
            gamma: 0.0,
            max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub iterations: usize,
}

/// Accelerated primal–dual hybrid gradient from `x⁰ = 0`, `p⁰ = 0`.
pub fn pdhgm_run<O: Observer + ?Sized>(
    problem: &DenoiseProblem,
    config: &BaselineConfig,
    observer: &mut O,
) -> Result<BaselineOutcome, SolverError> {
    let BaselineConfig {
        tau0: mut tau,
        sigma0: mut sigma,
        gamma,
        max_iters,
    } = *config;
    if !(tau > 0.0 && sigma > 0.0) {
        return Err(SolverError::Config(format!(
            "steps must be positive, got τ0 = {tau}, σ0 = {sigma}"
        )));
    }
    let norm_d = problem.opnorm_d();
    if tau * sigma * norm_d * norm_d > 1.0 {
        return Err(SolverError::Config(format!(
            "τ0·σ0·‖D‖² = {} exceeds 1",
            tau * sigma * norm_d * norm_d
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(SolverError::Config(format!(
            "gamma = {gamma} outside [0, 1]"
        )));
    }
    let n = problem.pixels();
    let mut x = vec![0.0; n];
    let mut x_bar = vec![0.0; n];
    let mut x_old = vec![0.0; n];
    let mut p = vec![0.0; problem.field_len()];
    let mut g = vec![0.0; problem.field_len()];
    let mut dtp = vec![0.0; n];
    let mut iterations = 0;
    for i in 0..max_iters {
        problem.gradient(&x_bar, &mut g);
        p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi += sigma * gi);
        problem.project_dual(&mut p);
        problem.gradient_adjoint(&p, &mut dtp);
        x_old.copy_from_slice(&x);
        let v: Vec<f64> = x.iter().zip(&dtp).map(|(xi, di)| xi - tau * di).collect();
        problem.prox_g(&v, tau, &mut x);
        if !x.iter().all(|t| t.is_finite()) {
            return Err(SolverError::NonFinite {
                iter: i,
                what: "primal iterate",
            });
        }
        let theta = 1.0 / (1.0 + 2.0 * gamma * tau).sqrt();
        tau *= theta;
        sigma /= theta;
        for ((b, xi), xo) in x_bar.iter_mut().zip(&x).zip(&x_old) {
            *b = xi + theta * (xi - xo);
        }
        iterations = i + 1;
        let view = IterateView {
            iter: iterations,
            x: &x,
            dual: DualView::Field(&p),
            step: None,
        };
        if observer.observe(&view).is_break() {
            break;
        }
    }
    Ok(BaselineOutcome { x, p, iterations })
}

/// Projected gradient ascent on the dual from `p⁰ = 0` with step `config.tau0`.
pub fn dual_fb_run<O: Observer + ?Sized>(
    problem: &DenoiseProblem,
    config: &BaselineConfig,
    observer: &mut O,
) -> Result<BaselineOutcome, SolverError> {
    let tau = config.tau0;
    let norm_d = problem.opnorm_d();
    if !(tau > 0.0 && tau * norm_d * norm_d <= 2.0) {
        return Err(SolverError::Config(format!(
            "step τ = {tau} outside (0, 2/‖D‖²]"
        )));
    }
    let mut p = vec![0.0; problem.field_len()];
    let mut g = vec![0.0; problem.field_len()];
    let mut x = problem.z().values().to_vec();
    let mut iterations = 0;
    for i in 0..config.max_iters {
        problem.gradient(&x, &mut g);
        p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi += tau * gi);
        problem.project_dual(&mut p);
        x = problem.primal_from_dual(&p);
        if !x.iter().all(|t| t.is_finite()) {
            return Err(SolverError::NonFinite {
                iter: i,
                what: "primal iterate",
            });
        }
        iterations = i + 1;
        let view = IterateView {
            iter: iterations,
            x: &x,
            dual: DualView::Field(&p),
            step: None,
        };
        if observer.observe(&view).is_break() {
            break;
        }
    }
    Ok(BaselineOutcome { x, p, iterations })
}

/// Observer that stops once `‖x^i − x^{i−1}‖ ≤ tol·(1 + ‖x^i‖)`.
pub fn stop_when_stalled(tol: f64) -> impl FnMut(&IterateView<'_>) -> ControlFlow<()> {
    let mut prev: Option<Vec<f64>> = None;
    move |view| {
        let stalled = prev.as_ref().is_some_and(|p| {
            let d: f64 = p.iter().zip(view.x).map(|(a, b)| (a - b) * (a - b)).sum();
            let n: f64 = view.x.iter().map(|t| t * t).sum();
            d.sqrt() <= tol * (1.0 + n.sqrt())
        });
        prev = Some(view.x.to_vec());
        if stalled {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{build_problem, ImageGrid, Variant};
    use crate::solver::no_observer;

    #[test]
    fn zero_data_stays_zero() {
        let z = ImageGrid::from_fn(4, 4, |_, _| 0.0).unwrap();
        let p = build_problem(z, 1.0, Variant::Tv).unwrap();
        let out = dual_fb_run(&p, &BaselineConfig::dual_fb(20), &mut no_observer).unwrap();
        assert!(out.x.iter().chain(&out.p).all(|t| *t == 0.0));
    }

    #[test]
    fn pdhgm_keeps_dual_in_ball() {
        let z = ImageGrid::from_fn(6, 5, |r, c| ((r * 7 + c * 3) % 5) as f64 * 10.0).unwrap();
        let p = build_problem(z, 2.0, Variant::Tv).unwrap();
        let mut worst: f64 = 0.0;
        let mut obs = |v: &IterateView<'_>| {
            if let DualView::Field(f) = v.dual {
                worst = worst.max(p.dual_radius(f));
            }
            ControlFlow::Continue(())
        };
        pdhgm_run(&p, &BaselineConfig::pdhgm(50), &mut obs).unwrap();
        assert!(worst <= 2.0 * (1.0 + 1e-15));
    }

    #[test]
    fn step_condition_enforced() {
        let z = ImageGrid::from_fn(4, 4, |r, _| r as f64).unwrap();
        let p = build_problem(z, 1.0, Variant::H1).unwrap();
        let cfg = BaselineConfig {
            tau0: 1.0,
            sigma0: 1.0,
            gamma: 0.9,
            max_iters: 1,
        };
        assert!(matches!(
            pdhgm_run(&p, &cfg, &mut no_observer),
            Err(SolverError::Config(_))
        ));
    }
}
