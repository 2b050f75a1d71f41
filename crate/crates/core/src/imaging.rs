//! TV and H¹ denoising, `min_x ½‖z − x‖² + α R(x)`, in the cone form used by
//! the PEDI solver and the unlifted form used by the baselines.
//!
//! Images are row-major with `n1` rows and `n2` columns. The gradient field
//! stacks all horizontal differences first, then all vertical ones:
//! `[gx_0, …, gx_{N−1}, gy_0, …, gy_{N−1}]`. TV uses one `E_{1+2}` block per
//! pixel with tail `(gx_i, gy_i)`; H¹ uses one `E_{1+2N}` block whose tail is
//! the whole field.
//!
//! The lifted operator is `K = ½·lift∘D`. Under the trace inner product
//! `⟨Kx, y⟩ = Dx·ȳ`, so with `y0 = α` (that is `b0 = 2α`) the dual
//! feasible tails are exactly the balls of radius `α` and the cone problem
//! has the same solution as the unlifted one.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::barrier::RankOneConstraint;
use crate::jordan::{scaled_tail, BlockConeVector, SpinElement, Tail};
use crate::solver::{estimate_opnorm, SaddleProblem, OPNORM_ITERS, OPNORM_RTOL};

/// Lower clamp for every decibel metric.
pub const DB_FLOOR: f64 = -320.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImagingError {
    #[error("image of {n1}x{n2} pixels needs {expected} values, got {got}")]
    Size {
        n1: usize,
        n2: usize,
        expected: usize,
        got: usize,
    },
    #[error("image dimensions must be positive, got {0}x{1}")]
    EmptyImage(usize, usize),
    #[error("image contains non-finite values")]
    NonFinite,
    #[error("field of length {got} does not match {expected}")]
    FieldLength { expected: usize, got: usize },
    #[error("cone vector does not have the {0} block layout")]
    Layout(Variant),
    #[error("regularisation weight must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("noise level must be non-negative and finite, got {0}")]
    InvalidSigma(f64),
    #[error("reference solution is degenerate: {0}")]
    DegenerateTarget(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    n1: usize,
    n2: usize,
    values: Vec<f64>,
}

impl ImageGrid {
    pub fn new(n1: usize, n2: usize, values: Vec<f64>) -> Result<Self, ImagingError> {
        if n1 == 0 || n2 == 0 {
            return Err(ImagingError::EmptyImage(n1, n2));
        }
        if values.len() != n1 * n2 {
            return Err(ImagingError::Size {
                n1,
                n2,
                expected: n1 * n2,
                got: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(ImagingError::NonFinite);
        }
        Ok(Self { n1, n2, values })
    }

    pub fn from_fn(
        n1: usize,
        n2: usize,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, ImagingError> {
        let values = (0..n1 * n2)
            .map(|k| f(k / n2.max(1), k % n2.max(1)))
            .collect();
        Self::new(n1, n2, values)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n2 + col]
    }

    /// Top-left `rows × cols` sub-image.
    pub fn crop(&self, rows: usize, cols: usize) -> Result<Self, ImagingError> {
        let (rows, cols) = (rows.min(self.n1), cols.min(self.n2));
        Self::from_fn(rows, cols, |r, c| self.get(r, c))
    }
}

/// Deterministic test image in `[0, 255]`: a horizontal ramp with a bright
/// disc and a dark square.
pub fn synthetic_image(n1: usize, n2: usize) -> Result<ImageGrid, ImagingError> {
    let (h, w) = (n1 as f64, n2 as f64);
    ImageGrid::from_fn(n1, n2, |r, c| {
        let (y, x) = (r as f64 + 0.5, c as f64 + 0.5);
        let (dy, dx) = (y - 0.4 * h, x - 0.6 * w);
        if dy * dy + dx * dx <= (0.25 * h.min(w)).powi(2) {
            220.0
        } else if (0.6 * h..0.9 * h).contains(&y) && (0.1 * w..0.4 * w).contains(&x) {
            30.0
        } else {
            60.0 + 120.0 * x / w
        }
    })
}

/// Forward differences with Neumann boundary into `out` (length `2·n1·n2`).
pub fn gradient(n1: usize, n2: usize, u: &[f64], out: &mut [f64]) {
    let n = n1 * n2;
    debug_assert!(u.len() == n && out.len() == 2 * n);
    let (gx, gy) = out.split_at_mut(n);
    for r in 0..n1 {
        let row = r * n2;
        for c in 0..n2 {
            let k = row + c;
            gx[k] = if c + 1 < n2 { u[k + 1] - u[k] } else { 0.0 };
            gy[k] = if r + 1 < n1 { u[k + n2] - u[k] } else { 0.0 };
        }
    }
}

/// Exact adjoint of [`gradient`] (the negative divergence).
pub fn gradient_adjoint(n1: usize, n2: usize, g: &[f64], out: &mut [f64]) {
    let n = n1 * n2;
    debug_assert!(g.len() == 2 * n && out.len() == n);
    out.fill(0.0);
    let (gx, gy) = g.split_at(n);
    for r in 0..n1 {
        let row = r * n2;
        for c in 0..n2 {
            let k = row + c;
            if c + 1 < n2 {
                out[k] -= gx[k];
                out[k + 1] += gx[k];
            }
            if r + 1 < n1 {
                out[k] -= gy[k];
                out[k + n2] += gy[k];
            }
        }
    }
}

pub fn gradient_apply(img: &ImageGrid) -> Vec<f64> {
    let mut out = vec![0.0; 2 * img.len()];
    gradient(img.n1, img.n2, &img.values, &mut out);
    out
}

pub fn gradient_adjoint_apply(
    n1: usize,
    n2: usize,
    field: &[f64],
) -> Result<ImageGrid, ImagingError> {
    if field.len() != 2 * n1 * n2 {
        return Err(ImagingError::FieldLength {
            expected: 2 * n1 * n2,
            got: field.len(),
        });
    }
    let mut out = vec![0.0; n1 * n2];
    gradient_adjoint(n1, n2, field, &mut out);
    ImageGrid::new(n1, n2, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Tv,
    H1,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Tv => "tv",
            Variant::H1 => "h1",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tv" => Ok(Variant::Tv),
            "h1" => Ok(Variant::H1),
            other => Err(format!("unknown variant {other:?}, expected tv or h1")),
        }
    }
}

impl Variant {
    pub fn block_dims(self, pixels: usize) -> Vec<usize> {
        match self {
            Variant::Tv => vec![2; pixels],
            Variant::H1 => vec![2 * pixels],
        }
    }
}

/// Places a gradient field into zero-head cone tails.
pub fn lift(field: &[f64], variant: Variant) -> Result<BlockConeVector, ImagingError> {
    if field.is_empty() || !field.len().is_multiple_of(2) {
        let expected = (field.len() / 2).max(1) * 2;
        return Err(ImagingError::FieldLength {
            expected,
            got: field.len(),
        });
    }
    Ok(lift_scaled(field, variant, 1.0))
}

fn lift_scaled(field: &[f64], variant: Variant, s: f64) -> BlockConeVector {
    let n = field.len() / 2;
    let blocks = match variant {
        Variant::Tv => (0..n)
            .map(|i| SpinElement::from_parts(0.0, Tail::from_buf([s * field[i], s * field[n + i]])))
            .collect(),
        Variant::H1 => vec![SpinElement::from_parts(0.0, scaled_tail(field, s))],
    };
    BlockConeVector::new(blocks).expect("at least one block")
}

/// Collects the tails of a cone vector back into a gradient field.
pub fn unlift(y: &BlockConeVector, variant: Variant) -> Result<Vec<f64>, ImagingError> {
    let blocks = y.blocks();
    match variant {
        Variant::Tv => {
            if blocks.iter().any(|b| b.dim() != 2) {
                return Err(ImagingError::Layout(variant));
            }
            let n = blocks.len();
            let mut out = vec![0.0; 2 * n];
            for (i, b) in blocks.iter().enumerate() {
                out[i] = b.tail()[0];
                out[n + i] = b.tail()[1];
            }
            Ok(out)
        }
        Variant::H1 => match blocks {
            [b] if b.dim() % 2 == 0 => Ok(b.tail().to_vec()),
            _ => Err(ImagingError::Layout(variant)),
        },
    }
}

/// The denoising problem with data `z`, weight `α` and regulariser variant.
#[derive(Debug, Clone)]
pub struct DenoiseProblem {
    z: ImageGrid,
    alpha: f64,
    variant: Variant,
    constraint: RankOneConstraint,
    opnorm_k: f64,
    z_norm: f64,
}

/// Builds the problem and estimates `‖K‖` by power iteration.
pub fn build_problem(
    z: ImageGrid,
    alpha: f64,
    variant: Variant,
) -> Result<DenoiseProblem, ImagingError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ImagingError::InvalidAlpha(alpha));
    }
    let pixels = z.len();
    let constraint = RankOneConstraint::unit(variant.block_dims(pixels)[0], 2.0 * alpha)
        .map_err(|_| ImagingError::InvalidAlpha(alpha))?;
    let (n1, n2) = (z.n1, z.n2);
    let mut field = vec![0.0; 2 * pixels];
    // K*K = ½ DᵀD
    let opnorm_k = estimate_opnorm(
        pixels,
        |v, out| {
            gradient(n1, n2, v, &mut field);
            gradient_adjoint(n1, n2, &field, out);
            out.iter_mut().for_each(|t| *t *= 0.5);
        },
        OPNORM_ITERS,
        OPNORM_RTOL,
    );
    let z_norm = norm(z.values());
    Ok(DenoiseProblem {
        z,
        alpha,
        variant,
        constraint,
        opnorm_k,
        z_norm,
    })
}

impl DenoiseProblem {
    pub fn z(&self) -> &ImageGrid {
        &self.z
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n1(&self) -> usize {
        self.z.n1
    }

    pub fn n2(&self) -> usize {
        self.z.n2
    }

    pub fn pixels(&self) -> usize {
        self.z.len()
    }

    pub fn field_len(&self) -> usize {
        2 * self.z.len()
    }

    /// Estimated `‖D‖` (Euclidean), equal to `√2·‖K‖`.
    pub fn opnorm_d(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.opnorm_k
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        gradient(self.z.n1, self.z.n2, x, out);
    }

    pub fn gradient_adjoint(&self, g: &[f64], out: &mut [f64]) {
        gradient_adjoint(self.z.n1, self.z.n2, g, out);
    }

    /// `R(x)`: `Σ_i ‖(Dx)_i‖` for TV, `‖Dx‖` for H¹.
    pub fn regulariser(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.field_len()];
        self.gradient(x, &mut g);
        self.field_norm(&g)
    }

    fn field_norm(&self, g: &[f64]) -> f64 {
        let n = self.pixels();
        match self.variant {
            Variant::Tv => (0..n).map(|i| g[i].hypot(g[n + i])).sum(),
            Variant::H1 => norm(g),
        }
    }

    /// `½‖x − z‖² + αR(x)`.
    pub fn primal_value(&self, x: &[f64]) -> f64 {
        0.5 * sq_dist(x, self.z.values()) + self.alpha * self.regulariser(x)
    }

    /// `½‖z‖² − ½‖z − Dᵀp‖²` for a feasible dual field `p`.
    pub fn dual_value(&self, p: &[f64]) -> f64 {
        let x = self.primal_from_dual(p);
        0.5 * sq_norm(self.z.values()) - 0.5 * sq_norm(&x)
    }

    /// `x = z − Dᵀp`, the primal point paired with a dual field.
    pub fn primal_from_dual(&self, p: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.pixels()];
        self.gradient_adjoint(p, &mut x);
        x.iter_mut()
            .zip(self.z.values())
            .for_each(|(t, zi)| *t = zi - *t);
        x
    }

    pub fn gap(&self, x: &[f64], p: &[f64]) -> f64 {
        self.primal_value(x) - self.dual_value(p)
    }

    /// Gap at `x⁰ = 0`, `p⁰ = 0`: `½‖z‖²`.
    pub fn initial_gap(&self) -> f64 {
        0.5 * sq_norm(self.z.values())
    }

    /// Projects `p` onto `{‖p_i‖ ≤ α}` per pixel (TV) or `{‖p‖ ≤ α}` (H¹).
    pub fn project_dual(&self, p: &mut [f64]) {
        let n = self.pixels();
        let alpha = self.alpha;
        match self.variant {
            Variant::Tv => {
                for i in 0..n {
                    let r = p[i].hypot(p[n + i]);
                    if r > alpha {
                        let s = alpha / r;
                        p[i] *= s;
                        p[n + i] *= s;
                    }
                }
            }
            Variant::H1 => {
                let r = norm(p);
                if r > alpha {
                    let s = alpha / r;
                    p.iter_mut().for_each(|t| *t *= s);
                }
            }
        }
    }

    /// Largest ball norm of `p`, per pixel for TV.
    pub fn dual_radius(&self, p: &[f64]) -> f64 {
        let n = self.pixels();
        match self.variant {
            Variant::Tv => (0..n).map(|i| p[i].hypot(p[n + i])).fold(0.0, f64::max),
            Variant::H1 => norm(p),
        }
    }
}

impl SaddleProblem for DenoiseProblem {
    fn primal_dim(&self) -> usize {
        self.pixels()
    }

    fn block_dims(&self) -> Vec<usize> {
        self.variant.block_dims(self.pixels())
    }

    fn apply_k(&self, x: &[f64]) -> BlockConeVector {
        let mut g = vec![0.0; self.field_len()];
        self.gradient(x, &mut g);
        lift_scaled(&g, self.variant, 0.5)
    }

    fn apply_k_adjoint(&self, y: &BlockConeVector, out: &mut [f64]) {
        let field = unlift(y, self.variant).expect("dual iterate has the problem's block layout");
        self.gradient_adjoint(&field, out);
    }

    fn prox_g(&self, v: &[f64], tau: f64, out: &mut [f64]) {
        let s = 1.0 / (1.0 + tau);
        for ((o, vi), zi) in out.iter_mut().zip(v).zip(self.z.values()) {
            *o = (vi + tau * zi) * s;
        }
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn constraint(&self, _block: usize) -> &RankOneConstraint {
        &self.constraint
    }

    fn opnorm_k(&self) -> f64 {
        self.opnorm_k
    }

    fn data_scale(&self) -> f64 {
        self.z_norm
    }
}

/// Adds i.i.d. `N(0, σ²)` noise.
///
/// The generator is ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`).
/// Each pair of pixels consumes two `u64` words `w1, w2`, mapped to
/// `u1 = ((w1 >> 11) + 1)·2⁻⁵³ ∈ (0, 1]` and `u2 = (w2 >> 11)·2⁻⁵³ ∈ [0, 1)`,
/// and receives the Box–Muller pair
/// `σ√(−2 ln u1)·(cos 2πu2, sin 2πu2)` in row-major order.
pub fn add_gaussian_noise(
    img: &ImageGrid,
    sigma: f64,
    seed: u64,
) -> Result<ImageGrid, ImagingError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(ImagingError::InvalidSigma(sigma));
    }
    let noise = gaussian_samples(img.len(), seed);
    let values = img
        .values
        .iter()
        .zip(noise)
        .map(|(v, e)| v + sigma * e)
        .collect();
    ImageGrid::new(img.n1, img.n2, values)
}

/// `n` standard normal samples from the stream described in
/// [`add_gaussian_noise`].
pub fn gaussian_samples(n: usize, seed: u64) -> Vec<f64> {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
        let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(n);
    out
}

/// Logged quantities for one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub wall_seconds: f64,
    pub gap_db: f64,
    pub target_db: f64,
    pub value_db: f64,
}

/// Reference solution `x̂` with the quantities the metrics divide by.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    x: Vec<f64>,
    value: f64,
    sq_norm: f64,
}

impl Target {
    pub fn new(problem: &DenoiseProblem, x: Vec<f64>) -> Result<Self, ImagingError> {
        if x.len() != problem.pixels() {
            return Err(ImagingError::FieldLength {
                expected: problem.pixels(),
                got: x.len(),
            });
        }
        let sq = sq_norm(&x);
        if sq == 0.0 {
            return Err(ImagingError::DegenerateTarget("‖x̂‖ = 0"));
        }
        let value = problem.primal_value(&x);
        if value == 0.0 {
            return Err(ImagingError::DegenerateTarget("val(x̂) = 0"));
        }
        Ok(Self {
            x,
            value,
            sq_norm: sq,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn into_x(self) -> Vec<f64> {
        self.x
    }
}

/// `10 log10(ratio)`, clamped below at [`DB_FLOOR`].
pub fn to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (10.0 * ratio.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Gap, target distance and objective value in decibels. `p` is the
/// unlifted dual field (ball-feasible). `wall_seconds` is left at zero.
pub fn metrics(
    x: &[f64],
    p: &[f64],
    problem: &DenoiseProblem,
    target: &Target,
    gap0: f64,
) -> IterationRecord {
    let gap = problem.gap(x, p);
    let val = problem.primal_value(x);
    IterationRecord {
        iter: 0,
        wall_seconds: 0.0,
        gap_db: to_db(gap * gap / (gap0 * gap0)),
        target_db: to_db(sq_dist(x, &target.x) / target.sq_norm),
        value_db: to_db((val - target.value).powi(2) / (target.value * target.value)),
    }
}

pub(crate) fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    sq_norm(v).sqrt()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}
