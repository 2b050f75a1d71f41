//! The barrier-preconditioned primal–dual method (PEDI).
//!
//! For `min_x max_y G(x) + ⟨Kx, y⟩ − δ_{K ∩ A⁻¹b}(y)` each iteration solves
//! the dual step exactly on the central path with weight `μ_{i+1}`, block by
//! block, and then takes a proximal primal step:
//!
//! ```text
//! y^{i+1} : ⟨a, y⟩ = b0,  z·a − Kx^i = d,  y ∘ d = μ_{i+1} e
//! x^{i+1} = prox_{τ_i G}(x^i − τ_i K* y^{i+1})
//! ```
//!
//! The scalars follow one of two rules. [`StepRule::General`] uses
//! `μ_{i+1} = θ φ_i^{-1/2}`, `ω̲_{i+1} = ζ λ_min(a) μ_{i+1}`.
//! [`StepRule::Soc`] enlarges `ω̲` by `2^{-1/2} b0⁻¹ ‖Kx^i‖_{Q_a⁻¹} λ_min(a)`.
//! Both set `τ_i = 2ω̲_{i+1}/‖K‖²` and `φ_{i+1} = φ_i(1 + 2γτ_i)`.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::barrier::{central_path_y, BarrierError, RankOneConstraint};
use crate::jordan::BlockConeVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dual sub-problem failed at iteration {iter}, block {block}: {source}")]
    Subproblem {
        iter: usize,
        block: usize,
        #[source]
        source: BarrierError,
    },
    #[error("non-finite {what} at iteration {iter}")]
    NonFinite { iter: usize, what: &'static str },
}

/// A saddle-point problem `min_x max_y G(x) + ⟨Kx, y⟩ − F*(y)` whose dual
/// feasible set is `{y ∈ K : ⟨a_j, y_j⟩ = b0_j}` over a product of spin cones.
pub trait SaddleProblem {
    fn primal_dim(&self) -> usize;

    /// Tail dimension `m` of each cone block.
    fn block_dims(&self) -> Vec<usize>;

    /// `Kx`. Implementations must satisfy `⟨a_j⁻¹, [Kx]_j⟩ = 0` per block.
    fn apply_k(&self, x: &[f64]) -> BlockConeVector;

    /// `K*y` with respect to the trace inner product on the dual side.
    fn apply_k_adjoint(&self, y: &BlockConeVector, out: &mut [f64]);

    /// `prox_{τG}(v)`.
    fn prox_g(&self, v: &[f64], tau: f64, out: &mut [f64]);

    /// Strong-convexity factor of `G`.
    fn gamma(&self) -> f64;

    fn constraint(&self, block: usize) -> &RankOneConstraint;

    /// `‖K‖` in the trace-inner-product operator norm.
    fn opnorm_k(&self) -> f64;

    /// Reference magnitude of the primal variable, used by the divergence
    /// watchdog.
    fn data_scale(&self) -> f64;
}

/// Power iteration for `‖K‖ = √λ_max(K*K)`.
///
/// Starts from a fixed pseudo-random vector so the estimate is
/// deterministic, and stops after `max_iters` or once the relative change of
/// the estimate drops below `rtol`.
pub fn estimate_opnorm<F>(dim: usize, mut apply_ktk: F, max_iters: usize, rtol: f64) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut w = vec![0.0; dim];
    let normalise = |v: &mut [f64]| {
        let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if n > 0.0 {
            v.iter_mut().for_each(|t| *t /= n);
        }
        n
    };
    normalise(&mut v);
    let mut estimate = 0.0;
    for _ in 0..max_iters {
        apply_ktk(&v, &mut w);
        let lambda = normalise(&mut w);
        std::mem::swap(&mut v, &mut w);
        let next = lambda.sqrt();
        let done = (next - estimate).abs() <= rtol * next;
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Default power-iteration budget for [`estimate_opnorm`].
pub const OPNORM_ITERS: usize = 30;
pub const OPNORM_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Any symmetric cone: `O(1/N)` for `‖x^N − x̂‖²`.
    General,
    /// Second-order cone with `Kx̂ ≠ 0`: linear convergence.
    Soc,
}

/// Per-iteration scalars. `phi` is `φ_i`, `tau` is `τ_i`, `mu` is `μ_{i+1}`,
/// `omega_lb` is `ω̲_{i+1}` and `phi_next` is `φ_{i+1}`.
///
/// Under the second-order-cone rule `φ` grows geometrically and would
/// overflow after a few hundred iterations; it saturates at `f64::MAX`, which
/// keeps `μ ≥ θ/√f64::MAX > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepState {
    pub iter: usize,
    pub phi: f64,
    pub tau: f64,
    pub mu: f64,
    pub omega_lb: f64,
    pub phi_next: f64,
}

/// Validated constants of the step rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub rule: StepRule,
    pub gamma: f64,
    pub zeta: f64,
    pub theta: f64,
    pub lambda_min_a: f64,
    pub b0: f64,
    pub opnorm: f64,
}

impl StepParams {
    pub fn new(
        rule: StepRule,
        gamma: f64,
        zeta: f64,
        theta: f64,
        lambda_min_a: f64,
        b0: f64,
        opnorm: f64,
    ) -> Result<Self, SolverError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(SolverError::Config(format!(
                "gamma = {gamma} must be non-negative"
            )));
        }
        for (name, v) in [
            ("theta", theta),
            ("lambda_min(a)", lambda_min_a),
            ("b0", b0),
            ("‖K‖", opnorm),
        ] {
            if !positive(v) {
                return Err(SolverError::Config(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        let bound = 1.0 / (b0 * b0);
        let ok = match rule {
            StepRule::General => zeta > 0.0 && zeta < bound,
            StepRule::Soc => zeta > 0.0 && zeta <= 2.0 * bound,
        };
        if !ok {
            let range = match rule {
                StepRule::General => format!("(0, {bound})"),
                StepRule::Soc => format!("(0, {}]", 2.0 * bound),
            };
            return Err(SolverError::Config(format!(
                "zeta = {zeta} outside {range} for {rule:?}"
            )));
        }
        Ok(Self {
            rule,
            gamma,
            zeta,
            theta,
            lambda_min_a,
            b0,
            opnorm,
        })
    }

    /// `θ` that makes the first step length equal `tau0` when `Kx⁰ = 0`.
    pub fn theta_for_tau0(tau0: f64, zeta: f64, lambda_min_a: f64, opnorm: f64, phi0: f64) -> f64 {
        tau0 * opnorm * opnorm * phi0.sqrt() / (2.0 * zeta * lambda_min_a)
    }

    /// Step scalars from `φ_i`; `kx_norm` is `‖Kx^i‖_{Q_a⁻¹}` and only
    /// affects [`StepRule::Soc`].
    pub fn step(&self, iter: usize, phi: f64, kx_norm: f64) -> StepState {
        let mu = self.theta / phi.sqrt();
        let omega_lb = match self.rule {
            StepRule::General => self.zeta * self.lambda_min_a * mu,
            StepRule::Soc => {
                (mu * self.zeta + std::f64::consts::FRAC_1_SQRT_2 * kx_norm / self.b0)
                    * self.lambda_min_a
            }
        };
        let tau = 2.0 * omega_lb / (self.opnorm * self.opnorm);
        StepState {
            iter,
            phi,
            tau,
            mu,
            omega_lb,
            phi_next: (phi * (1.0 + 2.0 * self.gamma * tau)).min(f64::MAX),
        }
    }
}

/// Next state of the general rule from the previous one.
pub fn step_rule_general(state: &StepState, params: &StepParams) -> StepState {
    StepParams {
        rule: StepRule::General,
        ..*params
    }
    .step(state.iter + 1, state.phi_next, 0.0)
}

/// Next state of the second-order-cone rule from the previous one.
pub fn step_rule_soc(state: &StepState, current_kx_norm: f64, params: &StepParams) -> StepState {
    StepParams {
        rule: StepRule::Soc,
        ..*params
    }
    .step(state.iter + 1, state.phi_next, current_kx_norm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PediConfig {
    pub rule: StepRule,
    /// Acceleration factor; must not exceed the problem's strong convexity.
    pub gamma: f64,
    /// Defaults to `0.9/b0²`.
    pub zeta: Option<f64>,
    /// Defaults to `1/ζ`. Ignored when `tau0` is set.
    pub theta: Option<f64>,
    /// Picks `θ` so that the first step is `τ_0 = tau0`.
    pub tau0: Option<f64>,
    /// Replaces the problem's `‖K‖`.
    pub opnorm: Option<f64>,
    pub phi0: f64,
    pub max_iters: usize,
}

impl Default for PediConfig {
    fn default() -> Self {
        Self {
            rule: StepRule::General,
            gamma: 0.9,
            zeta: None,
            theta: None,
            tau0: None,
            opnorm: None,
            phi0: 1.0,
            max_iters: 1000,
        }
    }
}

impl PediConfig {
    /// Resolves defaults against a problem. Every block must share `b0` and
    /// `λ_min(a)`, since the step scalars are global.
    pub fn params<P: SaddleProblem + ?Sized>(
        &self,
        problem: &P,
    ) -> Result<StepParams, SolverError> {
        let nblocks = problem.block_dims().len();
        if nblocks == 0 {
            return Err(SolverError::Config("problem has no cone blocks".into()));
        }
        let first = problem.constraint(0);
        let (b0, lambda_min_a) = (first.b0(), first.lambda_min_a());
        for j in 1..nblocks {
            let k = problem.constraint(j);
            let same = |u: f64, v: f64| (u - v).abs() <= 1e-12 * u.abs().max(v.abs());
            if !same(k.b0(), b0) || !same(k.lambda_min_a(), lambda_min_a) {
                return Err(SolverError::Config(format!(
                    "block {j} has b0 = {}, λ_min(a) = {}; block 0 has {b0}, {lambda_min_a}",
                    k.b0(),
                    k.lambda_min_a()
                )));
            }
        }
        if self.gamma > problem.gamma() {
            return Err(SolverError::Config(format!(
                "gamma = {} exceeds the strong convexity {} of G",
                self.gamma,
                problem.gamma()
            )));
        }
        if !(self.phi0 > 0.0 && self.phi0.is_finite()) {
            return Err(SolverError::Config(format!(
                "phi0 = {} must be positive",
                self.phi0
            )));
        }
        let opnorm = self.opnorm.unwrap_or_else(|| problem.opnorm_k());
        let zeta = self.zeta.unwrap_or(0.9 / (b0 * b0));
        let theta = match self.tau0 {
            Some(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(SolverError::Config(format!("tau0 = {t} must be positive")));
            }
            Some(t) => StepParams::theta_for_tau0(t, zeta, lambda_min_a, opnorm, self.phi0),
            None => self.theta.unwrap_or(1.0 / zeta),
        };
        StepParams::new(self.rule, self.gamma, zeta, theta, lambda_min_a, b0, opnorm)
    }
}

/// Dual iterate handed to observers.
#[derive(Debug, Clone, Copy)]
pub enum DualView<'a> {
    Cone(&'a BlockConeVector),
    Field(&'a [f64]),
}

/// State after `iter` completed iterations.
#[derive(Debug, Clone, Copy)]
pub struct IterateView<'a> {
    pub iter: usize,
    pub x: &'a [f64],
    pub dual: DualView<'a>,
    pub step: Option<&'a StepState>,
}

/// Per-iteration callback; returning `Break` stops the run early.
pub trait Observer {
    fn observe(&mut self, view: &IterateView<'_>) -> ControlFlow<()>;
}

impl<F> Observer for F
where
    F: FnMut(&IterateView<'_>) -> ControlFlow<()>,
{
    fn observe(&mut self, view: &IterateView<'_>) -> ControlFlow<()> {
        self(view)
    }
}

/// Observer that ignores every iterate.
pub fn no_observer(_: &IterateView<'_>) -> ControlFlow<()> {
    ControlFlow::Continue(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PediOutcome {
    pub x: Vec<f64>,
    pub y: BlockConeVector,
    pub last_step: Option<StepState>,
    pub iterations: usize,
    pub params: StepParams,
}

/// Runs the method from `x0` (zero when `None`).
pub fn pedi_run<P, O>(
    problem: &P,
    config: &PediConfig,
    x0: Option<&[f64]>,
    observer: &mut O,
) -> Result<PediOutcome, SolverError>
where
    P: SaddleProblem + ?Sized,
    O: Observer + ?Sized,
{
    let params = config.params(problem)?;
    let n = problem.primal_dim();
    let mut x = match x0 {
        Some(v) if v.len() != n => {
            return Err(SolverError::Config(format!(
                "x0 has length {}, expected {n}",
                v.len()
            )));
        }
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let mut y = BlockConeVector::zeros(&problem.block_dims())
        .map_err(|e| SolverError::Config(e.to_string()))?;
    let mut kty = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut phi = config.phi0;
    let mut last_step = None;
    let mut warned = false;
    let limit = 1e3 * problem.data_scale();

    let mut iterations = 0;
    for i in 0..config.max_iters {
        let kx = problem.apply_k(&x);
        let kx_norm = match params.rule {
            StepRule::General => 0.0,
            StepRule::Soc => soc_kx_norm(problem, &kx, i)?,
        };
        let step = params.step(i, phi, kx_norm);
        for (j, (block, kxj)) in y.blocks_mut().iter_mut().zip(kx.blocks()).enumerate() {
            *block = central_path_y(problem.constraint(j), kxj, step.mu).map_err(|source| {
                SolverError::Subproblem {
                    iter: i,
                    block: j,
                    source,
                }
            })?;
        }
        problem.apply_k_adjoint(&y, &mut kty);
        for ((vi, xi), ki) in v.iter_mut().zip(&x).zip(&kty) {
            *vi = xi - step.tau * ki;
        }
        problem.prox_g(&v, step.tau, &mut x);
        if !x.iter().all(|t| t.is_finite()) {
            return Err(SolverError::NonFinite {
                iter: i,
                what: "primal iterate",
            });
        }
        if !warned && limit > 0.0 {
            let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm > limit {
                log::warn!("iteration {i}: ‖x‖ = {norm:e} exceeds 1e3 times the data scale");
                warned = true;
            }
        }
        phi = step.phi_next;
        last_step = Some(step);
        iterations = i + 1;
        let view = IterateView {
            iter: iterations,
            x: &x,
            dual: DualView::Cone(&y),
            step: Some(&step),
        };
        if observer.observe(&view).is_break() {
            break;
        }
    }
    Ok(PediOutcome {
        x,
        y,
        last_step,
        iterations,
        params,
    })
}

/// `min_j ‖[Kx]_j‖_{Q_{a_j}⁻¹}`. Over a product of cones the enlargement of
/// `ω̲` must hold in every block, so the smallest block decides.
fn soc_kx_norm<P: SaddleProblem + ?Sized>(
    problem: &P,
    kx: &BlockConeVector,
    iter: usize,
) -> Result<f64, SolverError> {
    let mut out = f64::INFINITY;
    for (j, b) in kx.blocks().iter().enumerate() {
        let v = problem
            .constraint(j)
            .norm_qa_inv(b)
            .map_err(|source| SolverError::Subproblem {
                iter,
                block: j,
                source,
            })?;
        out = out.min(v);
    }
    Ok(out)
}

/// Records `½ φ_N ‖x^N − x̂‖²` for `N = 0, 1, …`.
#[derive(Debug, Clone)]
pub struct CertificateRecorder {
    target: Vec<f64>,
    values: Vec<f64>,
}

impl CertificateRecorder {
    /// Seeds the series with the `N = 0` term from `x0` and `φ_0`.
    pub fn new(target: Vec<f64>, x0: &[f64], phi0: f64) -> Self {
        let first = 0.5 * phi0 * sq_dist(x0, &target);
        Self {
            target,
            values: vec![first],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Observer for CertificateRecorder {
    fn observe(&mut self, view: &IterateView<'_>) -> ControlFlow<()> {
        if let Some(step) = view.step {
            self.values
                .push(0.5 * step.phi_next * sq_dist(view.x, &self.target));
        }
        ControlFlow::Continue(())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// `½ φ_N ‖x^N − x̂‖²` from a sequence of iterates paired with `φ_N`.
pub fn descent_certificate<'a, I>(trajectory: I, target_x: &[f64]) -> Vec<f64>
where
    I: IntoIterator<Item = (f64, &'a [f64])>,
{
    trajectory
        .into_iter()
        .map(|(phi, x)| 0.5 * phi * sq_dist(x, target_x))
        .collect()
}

/// Convenience for one-block problems and tests: `⟨Kx, y⟩ − x·K*y`.
pub fn adjoint_mismatch<P: SaddleProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    y: &BlockConeVector,
) -> f64 {
    let lhs = problem.apply_k(x).inner(y).expect("same block structure");
    let mut kty = vec![0.0; problem.primal_dim()];
    problem.apply_k_adjoint(y, &mut kty);
    let rhs: f64 = x.iter().zip(&kty).map(|(a, b)| a * b).sum();
    lhs - rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rule: StepRule, gamma: f64) -> StepParams {
        let b0 = 2.0;
        let zeta = 0.9 / (b0 * b0);
        StepParams::new(rule, gamma, zeta, 1.0 / zeta, 1.0, b0, 2.0).unwrap()
    }

    #[test]
    fn first_step_hand_arithmetic() {
        let p = params(StepRule::General, 0.9);
        let s = p.step(0, 1.0, 0.0);
        assert_eq!(s.mu, p.theta);
        assert!((s.omega_lb - 1.0).abs() < 1e-15);
        assert!((s.tau - 2.0 / 4.0).abs() < 1e-15);
        assert_eq!(s.phi_next, 1.0 * (1.0 + 2.0 * 0.9 * s.tau));
    }

    #[test]
    fn zero_gamma_keeps_phi() {
        let p = params(StepRule::General, 0.0);
        let mut s = p.step(0, 1.0, 0.0);
        for _ in 0..100 {
            s = step_rule_general(&s, &p);
            assert_eq!(s.phi, 1.0);
        }
    }

    #[test]
    fn soc_rule_reduces_to_general_without_kx() {
        let g = params(StepRule::General, 0.9);
        let s = params(StepRule::Soc, 0.9);
        let a = g.step(0, 3.0, 0.0);
        let b = s.step(0, 3.0, 0.0);
        assert_eq!(a, b);
    }

    #[test]
    fn zeta_ranges_enforced() {
        let b0 = 2.0;
        let general = |z| StepParams::new(StepRule::General, 0.9, z, 1.0, 1.0, b0, 1.0);
        let soc = |z| StepParams::new(StepRule::Soc, 0.9, z, 1.0, 1.0, b0, 1.0);
        assert!(general(0.25).is_err());
        assert!(general(0.2499).is_ok());
        assert!(soc(0.5).is_ok());
        assert!(soc(0.5001).is_err());
        assert!(general(0.0).is_err());
    }

    #[test]
    fn tau0_override_hits_requested_step() {
        let theta = StepParams::theta_for_tau0(0.3, 0.2, 1.0, 2.5, 1.0);
        let p = StepParams::new(StepRule::General, 0.9, 0.2, theta, 1.0, 2.0, 2.5).unwrap();
        assert!((p.step(0, 1.0, 0.0).tau - 0.3).abs() < 1e-15);
    }

    #[test]
    fn values_are_thread_safe() {
        fn check<T: Send + Sync>() {}
        check::<crate::jordan::SpinElement>();
        check::<BlockConeVector>();
        check::<StepState>();
    }

    #[test]
    fn opnorm_of_diagonal() {
        let d = [1.0, 3.0, 2.0];
        let est = estimate_opnorm(
            3,
            |v, out| {
                for i in 0..3 {
                    out[i] = d[i] * d[i] * v[i];
                }
            },
            200,
            1e-12,
        );
        assert!((est - 3.0).abs() < 1e-6);
    }
}
