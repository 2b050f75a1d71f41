//! Log-determinant barrier, closed-form central path for a single linear
//! constraint `⟨a, y⟩ = b0`, Nesterov–Todd scaling, and numeric validators
//! for the strong-monotonicity estimates of the barrier gradient.
//!
//! The central path is the family of solutions to
//!
//! ```text
//! ⟨a, y⟩ = b0,   z·a + c = d,   y ∘ d = μ e,   y, d ∈ int K
//! ```
//!
//! and its `μ → 0` limit (the cone linear program) is solved by
//! [`sclp_solve`]. Every validator returns a [`Residual`]: the difference
//! `LHS − RHS` of the inequality, plus the scale `1 + Σ‖·‖²` of the inputs so
//! callers can apply a scale-aware tolerance.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::jordan::{scaled_tail, JordanError, SpinElement, RANK};

/// Largest `1 + m` for which [`assemble_m`] will materialise a dense matrix.
pub const MAX_DENSE_DIM: usize = 64;

/// Relative slack allowed on the range condition `⟨a⁻¹, c⟩ = 0`.
pub const RANGE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BarrierError {
    #[error(transparent)]
    Jordan(#[from] JordanError),
    #[error("{what} is not in the interior of the cone (λ_min = {lambda_min:e})")]
    NotInterior { what: &'static str, lambda_min: f64 },
    #[error("barrier weight must be positive and finite, got {0}")]
    InvalidMu(f64),
    #[error("constraint right-hand side must be positive and finite, got {0}")]
    InvalidRhs(f64),
    #[error("range condition violated: ⟨a⁻¹, c⟩ = {value:e} exceeds {tol:e}")]
    RangeCondition { value: f64, tol: f64 },
    #[error("inputs do not satisfy the required optimality system: {0}")]
    Infeasible(String),
    #[error("optimal pair is degenerate (λ_min(M) = {0:e})")]
    Degenerate(f64),
    #[error("dense operator of dimension {0} exceeds the diagnostic limit")]
    TooLarge(usize),
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
}

fn require_interior(what: &'static str, x: &SpinElement) -> Result<(), BarrierError> {
    let lambda_min = x.lambda_min();
    if lambda_min > 0.0 {
        Ok(())
    } else {
        Err(BarrierError::NotInterior { what, lambda_min })
    }
}

/// `A y = ⟨a, y⟩ = b0` with `a` in the cone interior.
///
/// The square roots `a^{±1/2}` and the inverse are computed once here since
/// every central-path solve scales by them.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneConstraint {
    a: SpinElement,
    b0: f64,
    a_inv: SpinElement,
    a_sqrt: SpinElement,
    a_inv_sqrt: SpinElement,
    identity: bool,
}

impl RankOneConstraint {
    pub fn new(a: SpinElement, b0: f64) -> Result<Self, BarrierError> {
        require_interior("constraint direction a", &a)?;
        if !(b0 > 0.0 && b0.is_finite()) {
            return Err(BarrierError::InvalidRhs(b0));
        }
        let identity = a.head() == 1.0 && a.tail().iter().all(|t| *t == 0.0);
        Ok(Self {
            identity,
            a_inv: a.inverse()?,
            a_sqrt: a.power(0.5)?,
            a_inv_sqrt: a.power(-0.5)?,
            a,
            b0,
        })
    }

    /// `⟨e, y⟩ = b0`, i.e. `y0 = b0 / 2`.
    pub fn unit(m: usize, b0: f64) -> Result<Self, BarrierError> {
        Self::new(SpinElement::identity(m), b0)
    }

    pub fn a(&self) -> &SpinElement {
        &self.a
    }

    pub fn a_inv(&self) -> &SpinElement {
        &self.a_inv
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn lambda_min_a(&self) -> f64 {
        self.a.lambda_min()
    }

    pub fn apply(&self, y: &SpinElement) -> Result<f64, BarrierError> {
        Ok(self.a.inner(y)?)
    }

    /// `‖v‖_{Q_a} = ‖Q_{a^{1/2}} v‖`.
    pub fn norm_qa(&self, v: &SpinElement) -> Result<f64, BarrierError> {
        Ok(self.a_sqrt.quad_rep(v)?.norm())
    }

    /// `‖c‖_{Q_a⁻¹} = ‖Q_{a^{-1/2}} c‖`.
    pub fn norm_qa_inv(&self, c: &SpinElement) -> Result<f64, BarrierError> {
        if self.identity {
            if c.dim() != self.a.dim() {
                return Err(JordanError::DimensionMismatch {
                    left: self.a.dim(),
                    right: c.dim(),
                }
                .into());
            }
            return Ok(c.norm());
        }
        Ok(self.a_inv_sqrt.quad_rep(c)?.norm())
    }

    /// The feasible point `b0·a⁻¹/2`, which is interior and satisfies `⟨a, y⟩ = b0`.
    pub fn analytic_center(&self) -> SpinElement {
        self.a_inv.scale(self.b0 / RANK as f64)
    }

    fn check_range(&self, c: &SpinElement) -> Result<(), BarrierError> {
        let value = self.a_inv.inner(c)?;
        let tol = RANGE_RTOL * c.norm();
        if value.abs() > tol {
            return Err(BarrierError::RangeCondition { value, tol });
        }
        Ok(())
    }
}

/// `B(x) = −log det x`.
pub fn barrier_value(x: &SpinElement) -> Result<f64, BarrierError> {
    require_interior("barrier argument", x)?;
    Ok(-x.det().ln())
}

/// `∇B(x) = −x⁻¹` with respect to the trace inner product.
pub fn barrier_gradient(x: &SpinElement) -> Result<SpinElement, BarrierError> {
    require_interior("barrier argument", x)?;
    Ok(-&x.inverse()?)
}

/// `∇²B(x) v = Q_{x⁻¹} v`.
pub fn barrier_hessian_apply(
    x: &SpinElement,
    v: &SpinElement,
) -> Result<SpinElement, BarrierError> {
    require_interior("barrier argument", x)?;
    Ok(x.inverse()?.quad_rep(v)?)
}

/// A solution `(y, d, z)` of the central-path system at weight `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralPathPoint {
    y: SpinElement,
    d: SpinElement,
    z: f64,
    mu: f64,
    det_d: f64,
}

impl CentralPathPoint {
    pub fn y(&self) -> &SpinElement {
        &self.y
    }

    pub fn d(&self) -> &SpinElement {
        &self.d
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `det d`, evaluated from the closed form rather than from the
    /// coordinates of `d`, which cancel badly as `μ → 0`.
    pub fn det_d(&self) -> f64 {
        self.det_d
    }

    pub fn into_y(self) -> SpinElement {
        self.y
    }

    /// `‖y ∘ d − μ e‖`.
    pub fn complementarity_residual(&self) -> f64 {
        let yd = self.y.product(&self.d).expect("same dims");
        yd.axpy(-self.mu, &SpinElement::identity(yd.dim()))
            .expect("same dims")
            .norm()
    }
}

/// Solves the central-path system in closed form.
///
/// In coordinates scaled by `Q_{a^{1/2}}` the constraint becomes `ỹ0 = b0/2`,
/// the tail of `d̃` is fixed by the scaled `c`, and the head is
/// `d̃0 = (μ + √(μ² + b0²‖c̄‖²)) / b0`. Then `ỹ = μ d̃⁻¹` and both are
/// mapped back.
pub fn central_path_solve(
    constraint: &RankOneConstraint,
    c: &SpinElement,
    mu: f64,
) -> Result<CentralPathPoint, BarrierError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(BarrierError::InvalidMu(mu));
    }
    constraint.check_range(c)?;
    let b0 = constraint.b0;
    let owned;
    let c_scaled = if constraint.identity {
        c
    } else {
        owned = constraint.a_inv_sqrt.quad_rep(c)?;
        &owned
    };
    let cbar_norm = c_scaled.tail_norm();
    let root = scaled_hypot(mu, b0 * cbar_norm);
    let d0 = (mu + root) / b0;
    let det_d_scaled = 2.0 * mu * (mu + root) / (b0 * b0);
    // ỹ = μ R d̃ / det d̃, whose head simplifies to exactly b0/2.
    let tail_factor = -b0 * b0 / (2.0 * (mu + root));
    let y_scaled = SpinElement::from_parts(0.5 * b0, scaled_tail(c_scaled.tail(), tail_factor));
    let z = d0 - c_scaled.head();
    let y = if constraint.identity {
        y_scaled
    } else {
        constraint.a_inv_sqrt.quad_rep_unchecked(&y_scaled)
    };
    let d = c.axpy(z, &constraint.a)?;
    Ok(CentralPathPoint {
        y,
        d,
        z,
        mu,
        det_d: constraint.a.det() * det_d_scaled,
    })
}

/// The `y` part of `central_path_solve(constraint, −kx, μ)`, without
/// forming `d`. This is the dual update of the solver.
pub fn central_path_y(
    constraint: &RankOneConstraint,
    kx: &SpinElement,
    mu: f64,
) -> Result<SpinElement, BarrierError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(BarrierError::InvalidMu(mu));
    }
    constraint.check_range(kx)?;
    let b0 = constraint.b0;
    let owned;
    let k_scaled = if constraint.identity {
        kx
    } else {
        owned = constraint.a_inv_sqrt.quad_rep(kx)?;
        &owned
    };
    let root = scaled_hypot(mu, b0 * k_scaled.tail_norm());
    let y_scaled = SpinElement::from_parts(
        0.5 * b0,
        scaled_tail(k_scaled.tail(), b0 * b0 / (2.0 * (mu + root))),
    );
    Ok(if constraint.identity {
        y_scaled
    } else {
        constraint.a_inv_sqrt.quad_rep_unchecked(&y_scaled)
    })
}

/// `√(p² + q²)` for `p > 0`, `q ≥ 0` without overflow; within a few ulps
/// of `f64::hypot` and several times cheaper.
fn scaled_hypot(p: f64, q: f64) -> f64 {
    let (big, small) = if p >= q { (p, q) } else { (q, p) };
    let r = small / big;
    big * (1.0 + r * r).sqrt()
}

/// A solution `(ŷ, d̂, ẑ)` of the cone linear program
/// `⟨a, y⟩ = b0, ẑ·a + c = d, y ∘ d = 0, y, d ∈ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SclpSolution {
    pub y: SpinElement,
    pub d: SpinElement,
    pub z: f64,
}

/// The `μ → 0` limit of [`central_path_solve`].
///
/// When the scaled `c` has no tail the program is degenerate in `y`; the
/// analytic centre `b0·a⁻¹/2` is returned, which is the limit of the
/// central path.
pub fn sclp_solve(
    constraint: &RankOneConstraint,
    c: &SpinElement,
) -> Result<SclpSolution, BarrierError> {
    constraint.check_range(c)?;
    let b0 = constraint.b0;
    let c_scaled = constraint.a_inv_sqrt.quad_rep(c)?;
    let n = c_scaled.tail_norm();
    let (y, dhead) = if n == 0.0 {
        (constraint.analytic_center(), 0.0)
    } else {
        let y_scaled = SpinElement::from_parts(
            0.5 * b0,
            c_scaled.tail().iter().map(|t| -0.5 * b0 * t / n).collect(),
        );
        (constraint.a_inv_sqrt.quad_rep_unchecked(&y_scaled), n)
    };
    let z = dhead - c_scaled.head();
    let d = c.axpy(z, &constraint.a)?;
    Ok(SclpSolution { y, d, z })
}

/// Short-step neighbourhood distance `D_F(w, d) = ‖Q_{w^{1/2}} d − μ_{w,d} e‖`
/// with `μ_{w,d} = ⟨w, d⟩ / r`.
pub fn df_distance(w: &SpinElement, d: &SpinElement) -> Result<f64, BarrierError> {
    require_interior("scaling point w", w)?;
    let mu_wd = w.inner(d)? / RANK as f64;
    let scaled = w.power(0.5)?.quad_rep(d)?;
    Ok(scaled.axpy(-mu_wd, &SpinElement::identity(d.dim()))?.norm())
}

/// Nesterov–Todd scaling point `w = (Q_{y^{-1/2}} (Q_{y^{1/2}} d′)^{1/2})⁻¹`,
/// characterised by `Q_w⁻¹ y = d′`.
pub fn nt_scaling_point(
    y: &SpinElement,
    dprime: &SpinElement,
) -> Result<SpinElement, BarrierError> {
    require_interior("y", y)?;
    require_interior("d'", dprime)?;
    let inner = y.power(0.5)?.quad_rep(dprime)?.power(0.5)?;
    Ok(y.power(-0.5)?.quad_rep(&inner)?.inverse()?)
}

/// Dense matrix of `M_{y,d}(ξ + η) = L(y)ξ + L(d)η`, `ξ ∈ range(A*)`,
/// `η ∈ null(A)`, in a basis orthonormal for the trace inner product whose
/// first vector spans `range(A*) = span{a}`.
pub fn assemble_m(
    y: &SpinElement,
    d: &SpinElement,
    constraint: &RankOneConstraint,
) -> Result<DMatrix<f64>, BarrierError> {
    let n = 1 + y.dim();
    if n > MAX_DENSE_DIM {
        return Err(BarrierError::TooLarge(n));
    }
    if d.dim() != y.dim() || constraint.dim() != y.dim() {
        return Err(JordanError::DimensionMismatch {
            left: y.dim(),
            right: d.dim(),
        }
        .into());
    }
    let basis = adapted_basis(constraint.a());
    let images: Vec<SpinElement> = basis
        .iter()
        .enumerate()
        .map(|(j, b)| {
            if j == 0 {
                y.product_unchecked(b)
            } else {
                d.product_unchecked(b)
            }
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        basis[i].inner_unchecked(&images[j])
    }))
}

/// Smallest eigenvalue of the symmetric part of [`assemble_m`].
///
/// A positive value `λ` gives `‖M ζ‖ ≥ λ ‖ζ‖`, which is how it enters the
/// central-path rate bound.
pub fn min_eig_m(
    y: &SpinElement,
    d: &SpinElement,
    constraint: &RankOneConstraint,
) -> Result<f64, BarrierError> {
    let m = assemble_m(y, d, constraint)?;
    let sym = (&m + m.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym).eigenvalues.min())
}

/// Orthonormal basis (trace inner product) of `E_{1+m}` starting with `a/‖a‖`,
/// by modified Gram–Schmidt over the coordinate axes.
fn adapted_basis(a: &SpinElement) -> Vec<SpinElement> {
    let n = 1 + a.dim();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n);
    let push = |mut v: Vec<f64>, out: &mut Vec<Vec<f64>>| {
        for q in out.iter() {
            let p: f64 = v.iter().zip(q).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    };
    push(a.coords(), &mut out);
    for k in 0..n {
        if out.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        push(v, &mut out);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    out.into_iter()
        .map(|v| SpinElement::from_coords(&v).expect("n >= 2").scale(s))
        .collect()
}

/// `2μ√r / λ_min(M)`, the bound on `‖y_μ − ŷ‖` along the central path.
pub fn central_path_rate_bound(mu: f64, lambda_min_m: f64) -> f64 {
    2.0 * mu * (RANK as f64).sqrt() / lambda_min_m
}

/// `LHS − RHS` of a validated inequality, with the scale `1 + Σ‖·‖²` of the
/// quantities involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn passes(&self, rtol: f64) -> bool {
        self.value >= -rtol * self.scale
    }
}

fn sq_norms(xs: &[&SpinElement]) -> f64 {
    1.0 + xs.iter().map(|x| x.inner_unchecked(x)).sum::<f64>()
}

/// Strong monotonicity of the barrier gradient in the interior:
/// `−⟨d′ − d, y′ − y⟩ ≥ ‖y′ − y‖² / (λ_max(y′) λ_max(y))` with `d = y⁻¹`.
pub fn check_interior_monotonicity(
    y: &SpinElement,
    yprime: &SpinElement,
) -> Result<Residual, BarrierError> {
    require_interior("y", y)?;
    require_interior("y'", yprime)?;
    let d = y.inverse()?;
    let dp = yprime.inverse()?;
    let dy = yprime - y;
    let lhs = -(&dp - &d).inner(&dy)?;
    let rhs = dy.inner_unchecked(&dy) / (y.lambda_max() * yprime.lambda_max());
    Ok(Residual {
        value: lhs - rhs,
        scale: sq_norms(&[y, yprime]),
    })
}

/// Second-order-cone estimate for two central-path points with equal `μ`:
/// `−⟨d − d′, y − y′⟩ ≥ ((det d + det d′)/μ)·(‖ȳ − ȳ′‖² − (y0 − y0′)²)`.
pub fn check_soc_pair_monotonicity(
    p: &CentralPathPoint,
    q: &CentralPathPoint,
) -> Result<Residual, BarrierError> {
    let mu = p.mu;
    if (p.mu - q.mu).abs() > 1e-12 * mu {
        return Err(BarrierError::Infeasible(format!(
            "points have different barrier weights {} and {}",
            p.mu, q.mu
        )));
    }
    let dy = &p.y - &q.y;
    let lhs = -(&p.d - &q.d).inner(&dy)?;
    let rhs = (p.det_d + q.det_d) / mu * (-dy.det());
    Ok(Residual {
        value: lhs - rhs,
        scale: sq_norms(&[&p.y, &p.d, &q.y, &q.d]),
    })
}

/// Bounds `(lower, det d, upper)` on the determinant of a central-path dual:
/// `det a·(2μ² + √2 b0 D μ)/b0² ≤ det d ≤ det a·(4μ² + √2 b0 D μ)/b0²`
/// with `D = D_F(a⁻¹, d)`.
///
/// The factor `det a` multiplies: `det(Q_{a^{-1/2}} d) = det d / det a`.
pub fn det_sandwich(
    point: &CentralPathPoint,
    constraint: &RankOneConstraint,
) -> Result<(f64, f64, f64), BarrierError> {
    let mu = point.mu;
    let b0 = constraint.b0;
    let df = df_distance(constraint.a_inv(), &point.d)?;
    let factor = constraint.a.det() / (b0 * b0);
    let cross = std::f64::consts::SQRT_2 * b0 * df * mu;
    Ok((
        factor * (2.0 * mu * mu + cross),
        point.det_d,
        factor * (4.0 * mu * mu + cross),
    ))
}

fn check_point(
    point: &CentralPathPoint,
    constraint: &RankOneConstraint,
    c: &SpinElement,
) -> Result<(), BarrierError> {
    let tol = 1e-8;
    let scale = 1.0 + point.y.norm() + point.d.norm() + c.norm();
    let feas = (constraint.apply(&point.y)? - constraint.b0).abs();
    let dual = point.d.axpy(-point.z, &constraint.a)?.axpy(-1.0, c)?.norm();
    if feas > tol * scale || dual > tol * scale {
        return Err(BarrierError::Infeasible(format!(
            "central-path point does not match c (primal {feas:e}, dual {dual:e})"
        )));
    }
    Ok(())
}

fn check_optimum(
    opt: &SclpSolution,
    constraint: &RankOneConstraint,
    opt_c: &SpinElement,
) -> Result<(), BarrierError> {
    let tol = 1e-8;
    let scale = 1.0 + opt.y.norm() * (1.0 + opt.d.norm()) + opt_c.norm();
    let feas = (constraint.apply(&opt.y)? - constraint.b0).abs();
    let dual = opt.d.axpy(-opt.z, &constraint.a)?.axpy(-1.0, opt_c)?.norm();
    let comp = opt.y.product(&opt.d)?.norm();
    let cone = opt.y.is_in_cone(tol * scale) && opt.d.is_in_cone(tol * scale);
    if feas > tol * scale || dual > tol * scale || comp > tol * scale || !cone {
        return Err(BarrierError::Infeasible(format!(
            "optimal triple does not solve the cone program \
             (primal {feas:e}, dual {dual:e}, complementarity {comp:e}, in cone {cone})"
        )));
    }
    Ok(())
}

/// Boundary extension of the second-order-cone estimate for `A = ⟨a, ·⟩`.
///
/// With `ν = (μ + b0(‖c‖_{Q_a⁻¹} + ‖ĉ‖_{Q_a⁻¹})/√2) / (b0²/2)` this checks
/// `−⟨d − d̂, y − ŷ⟩ ≥ ν·½‖y − ŷ‖²_{Q_a} − μ` when `ĉ ≠ 0`, and the same
/// without the `−μ` penalty when `ĉ = 0` (then `ŷ = b0 a⁻¹/2`).
///
/// The squared distance carries the factor ½: it is the coordinate norm of
/// `Q_{a^{1/2}}(y − ŷ)`, not the trace-form norm. With the trace-form norm
/// the inequality fails by up to a factor of two.
pub fn check_soc_extension_bound(
    point: &CentralPathPoint,
    opt: &SclpSolution,
    constraint: &RankOneConstraint,
    c: &SpinElement,
    opt_c: &SpinElement,
) -> Result<Residual, BarrierError> {
    check_point(point, constraint, c)?;
    check_optimum(opt, constraint, opt_c)?;
    let mu = point.mu;
    let b0 = constraint.b0;
    let c_norm = constraint.norm_qa_inv(c)?;
    let opt_c_norm = constraint.norm_qa_inv(opt_c)?;
    let dy = &point.y - &opt.y;
    let lhs = -(&point.d - &opt.d).inner(&dy)?;
    let coef = (mu + (c_norm + opt_c_norm) / std::f64::consts::SQRT_2 * b0) / (0.5 * b0 * b0);
    let dist_sq = 0.5 * constraint.norm_qa(&dy)?.powi(2);
    let penalty = if opt_c_norm == 0.0 { 0.0 } else { mu };
    Ok(Residual {
        value: lhs - (coef * dist_sq - penalty),
        scale: sq_norms(&[&point.y, &point.d, &opt.y, &opt.d]),
    })
}

/// `C_{c,μ} C_{ĉ,μ} r μ / (α λ_min(M)²)` with
/// `C_{c,μ} = (μ r + 2 b0 ‖c‖_{Q_a⁻¹}) / λ_min(y*)`.
pub fn general_cone_penalty(
    mu: f64,
    c_norm: f64,
    opt_c_norm: f64,
    b0: f64,
    lambda_min_ystar: f64,
    lambda_min_m: f64,
    alpha: f64,
) -> f64 {
    let r = RANK as f64;
    let cc = (mu * r + 2.0 * b0 * c_norm) / lambda_min_ystar;
    let cc_opt = (mu * r + 2.0 * b0 * opt_c_norm) / lambda_min_ystar;
    cc * cc_opt * r * mu / (alpha * lambda_min_m * lambda_min_m)
}

/// General symmetric-cone estimate with penalty:
/// `−⟨d − d̂, y − ŷ⟩ ≥ (1−α)μ/b0² ‖y − ŷ‖²_{Q_a} − penalty(μ)`.
///
/// `y_star` is the strictly feasible reference point in the penalty
/// constants; it defaults to `b0·a⁻¹/2`. The optimal pair must be
/// non-degenerate, checked through `λ_min(M_{ŷ,d̂}) > 1e-10`.
pub fn check_general_cone_bound(
    point: &CentralPathPoint,
    opt: &SclpSolution,
    constraint: &RankOneConstraint,
    c: &SpinElement,
    opt_c: &SpinElement,
    alpha: f64,
    y_star: Option<&SpinElement>,
) -> Result<Residual, BarrierError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(BarrierError::InvalidParameter(format!(
            "alpha = {alpha} not in (0, 1)"
        )));
    }
    check_point(point, constraint, c)?;
    check_optimum(opt, constraint, opt_c)?;
    let lambda_m = min_eig_m(&opt.y, &opt.d, constraint)?;
    if lambda_m <= 1e-10 {
        return Err(BarrierError::Degenerate(lambda_m));
    }
    let default_star;
    let y_star = match y_star {
        Some(s) => s,
        None => {
            default_star = constraint.analytic_center();
            &default_star
        }
    };
    require_interior("reference point y*", y_star)?;
    let mu = point.mu;
    let b0 = constraint.b0;
    let dy = &point.y - &opt.y;
    let lhs = -(&point.d - &opt.d).inner(&dy)?;
    let penalty = general_cone_penalty(
        mu,
        constraint.norm_qa_inv(c)?,
        constraint.norm_qa_inv(opt_c)?,
        b0,
        y_star.lambda_min(),
        lambda_m,
        alpha,
    );
    let rhs = (1.0 - alpha) * mu / (b0 * b0) * constraint.norm_qa(&dy)?.powi(2) - penalty;
    Ok(Residual {
        value: lhs - rhs,
        scale: sq_norms(&[&point.y, &point.d, &opt.y, &opt.d]),
    })
}
