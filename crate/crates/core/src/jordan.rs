//! The spin-factor Euclidean Jordan algebra `E_{1+m}` and finite products of it.
//!
//! An element is a pair `(x0, x̄)` with scalar head `x0` and tail `x̄ ∈ R^m`.
//! The product is `x ∘ y = (xᵀy, x0·ȳ + y0·x̄)`, the unit is `e = (1, 0)`, the
//! rank is 2 and the cone of squares is the second-order cone
//! `{ x : x0 ≥ ‖x̄‖ }`.
//!
//! The inner product used throughout the crate is the trace form
//! `⟨x, y⟩ = tr(x ∘ y) = 2·xᵀy`. Norms, adjoints and gradients elsewhere in
//! the crate are all taken with respect to it.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;
use thiserror::Error;

/// Rank of every spin factor.
pub const RANK: usize = 2;

/// Relative threshold below which `|det x|` is treated as zero.
const SINGULAR_RTOL: f64 = 1e-14;

pub(crate) type Tail = SmallVec<[f64; 2]>;

/// `s·a`, built by copying then scaling in place; much cheaper than
/// collecting a mapped iterator into a `SmallVec`.
pub(crate) fn scaled_tail(a: &[f64], s: f64) -> Tail {
    let mut t = Tail::from_slice(a);
    t.iter_mut().for_each(|v| *v *= s);
    t
}

/// `sa·a + sb·b` for slices of equal length.
fn combined_tail(a: &[f64], sa: f64, b: &[f64], sb: f64) -> Tail {
    let mut t = Tail::from_slice(a);
    t.iter_mut().zip(b).for_each(|(v, w)| *v = sa * *v + sb * w);
    t
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JordanError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("spin element needs a tail of dimension at least 1")]
    EmptyTail,
    #[error("block vector needs at least one block")]
    NoBlocks,
    #[error("element is singular (det = {det:e})")]
    Singular { det: f64 },
    #[error("eigenvalue {lambda:e} outside the domain of x^{alpha}")]
    Domain { lambda: f64, alpha: f64 },
}

/// An element `(x0, x̄)` of `E_{1+m}`.
#[derive(Clone, PartialEq)]
pub struct SpinElement {
    head: f64,
    tail: Tail,
}

/// Eigenvalues `λ± = x0 ± ‖x̄‖` together with the Jordan frame `c±`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectral {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub c_plus: SpinElement,
    pub c_minus: SpinElement,
}

impl fmt::Debug for SpinElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.head, self.tail.as_slice())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SpinElement {
    pub fn new(head: f64, tail: impl Into<Vec<f64>>) -> Result<Self, JordanError> {
        let tail: Vec<f64> = tail.into();
        if tail.is_empty() {
            return Err(JordanError::EmptyTail);
        }
        Ok(Self {
            head,
            tail: Tail::from_vec(tail),
        })
    }

    /// Builds an element from its `1 + m` coordinates `[x0, x̄...]`.
    pub fn from_coords(coords: &[f64]) -> Result<Self, JordanError> {
        match coords.split_first() {
            Some((&head, tail)) if !tail.is_empty() => Ok(Self {
                head,
                tail: Tail::from_slice(tail),
            }),
            _ => Err(JordanError::EmptyTail),
        }
    }

    pub(crate) fn from_parts(head: f64, tail: Tail) -> Self {
        debug_assert!(!tail.is_empty());
        Self { head, tail }
    }

    /// The unit `e = (1, 0)` of `E_{1+m}`.
    pub fn identity(m: usize) -> Self {
        assert!(m >= 1, "spin factor needs m >= 1");
        Self {
            head: 1.0,
            tail: smallvec::smallvec![0.0; m],
        }
    }

    pub fn zero(m: usize) -> Self {
        assert!(m >= 1, "spin factor needs m >= 1");
        Self {
            head: 0.0,
            tail: smallvec::smallvec![0.0; m],
        }
    }

    #[inline]
    pub fn head(&self) -> f64 {
        self.head
    }

    #[inline]
    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    /// Tail dimension `m`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.tail.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.dim());
        v.push(self.head);
        v.extend_from_slice(&self.tail);
        v
    }

    pub fn tail_norm(&self) -> f64 {
        dot(&self.tail, &self.tail).sqrt()
    }

    fn check_dim(&self, other: &Self) -> Result<(), JordanError> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(JordanError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            })
        }
    }

    /// Plain coordinate dot product `xᵀy` on `R^{1+m}`.
    pub fn coord_dot(&self, other: &Self) -> Result<f64, JordanError> {
        self.check_dim(other)?;
        Ok(self.coord_dot_unchecked(other))
    }

    #[inline]
    fn coord_dot_unchecked(&self, other: &Self) -> f64 {
        self.head * other.head + dot(&self.tail, &other.tail)
    }

    /// Jordan product `x ∘ y = (xᵀy, x0·ȳ + y0·x̄)`.
    pub fn product(&self, other: &Self) -> Result<Self, JordanError> {
        self.check_dim(other)?;
        Ok(self.product_unchecked(other))
    }

    pub(crate) fn product_unchecked(&self, other: &Self) -> Self {
        let head = self.coord_dot_unchecked(other);
        let tail = combined_tail(&self.tail, other.head, &other.tail, self.head);
        Self { head, tail }
    }

    pub fn square(&self) -> Self {
        self.product_unchecked(self)
    }

    /// Trace-form inner product `⟨x, y⟩ = 2·xᵀy`.
    pub fn inner(&self, other: &Self) -> Result<f64, JordanError> {
        self.check_dim(other)?;
        Ok(2.0 * self.coord_dot_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> f64 {
        2.0 * self.coord_dot_unchecked(other)
    }

    /// Frobenius norm `‖x‖ = √⟨x, x⟩ = √(λ₊² + λ₋²)`.
    pub fn norm(&self) -> f64 {
        self.inner_unchecked(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.head
    }

    /// `det x = x0² − ‖x̄‖²`.
    pub fn det(&self) -> f64 {
        self.head * self.head - dot(&self.tail, &self.tail)
    }

    pub fn lambda_max(&self) -> f64 {
        self.head + self.tail_norm()
    }

    pub fn lambda_min(&self) -> f64 {
        self.head - self.tail_norm()
    }

    /// Spectral decomposition `x = λ₊c₊ + λ₋c₋`.
    ///
    /// For `x̄ = 0` the frame is built on the first coordinate axis; the frame
    /// is not unique there.
    pub fn spectral(&self) -> Spectral {
        let n = self.tail_norm();
        let mut dir: Tail = smallvec::smallvec![0.0; self.dim()];
        if n > 0.0 {
            for (d, t) in dir.iter_mut().zip(&self.tail) {
                *d = t / n;
            }
        } else {
            dir[0] = 1.0;
        }
        let c_plus = Self::from_parts(0.5, dir.iter().map(|u| 0.5 * u).collect());
        let c_minus = Self::from_parts(0.5, dir.iter().map(|u| -0.5 * u).collect());
        Spectral {
            lambda_plus: self.head + n,
            lambda_minus: self.head - n,
            c_plus,
            c_minus,
        }
    }

    /// Diagonal mirror `R x = (x0, −x̄)`.
    pub fn mirror(&self) -> Self {
        Self {
            head: self.head,
            tail: scaled_tail(&self.tail, -1.0),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            head: s * self.head,
            tail: scaled_tail(&self.tail, s),
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self, JordanError> {
        self.check_dim(other)?;
        Ok(Self {
            head: self.head + s * other.head,
            tail: combined_tail(&self.tail, 1.0, &other.tail, s),
        })
    }

    fn is_singular_det(&self, det: f64) -> bool {
        let scale = self.head * self.head + dot(&self.tail, &self.tail);
        det.abs() <= SINGULAR_RTOL * scale
    }

    /// `x⁻¹ = R x / det x`.
    pub fn inverse(&self) -> Result<Self, JordanError> {
        let det = self.det();
        if self.is_singular_det(det) {
            return Err(JordanError::Singular { det });
        }
        Ok(self.mirror().scale(1.0 / det))
    }

    /// Spectral power `x^α = λ₊^α c₊ + λ₋^α c₋`.
    ///
    /// Integer exponents accept any sign of eigenvalue; non-integer exponents
    /// reject negative eigenvalues. Negative exponents reject zero eigenvalues.
    pub fn power(&self, alpha: f64) -> Result<Self, JordanError> {
        let s = self.spectral();
        let integer = alpha.fract() == 0.0;
        for &lambda in &[s.lambda_plus, s.lambda_minus] {
            if !integer && lambda < 0.0 {
                return Err(JordanError::Domain { lambda, alpha });
            }
        }
        if alpha < 0.0 && self.is_singular_det(self.det()) {
            return Err(JordanError::Singular { det: self.det() });
        }
        let fp = s.lambda_plus.powf(alpha);
        let fm = s.lambda_minus.powf(alpha);
        Ok(s.c_plus.scale(fp).axpy(fm, &s.c_minus).expect("frame dims"))
    }

    /// Quadratic representation `Q_p y = 2 p∘(p∘y) − p²∘y`, evaluated in the
    /// equivalent closed form `2(pᵀy)·p − det(p)·R y`.
    pub fn quad_rep(&self, y: &Self) -> Result<Self, JordanError> {
        self.check_dim(y)?;
        Ok(self.quad_rep_unchecked(y))
    }

    pub(crate) fn quad_rep_unchecked(&self, y: &Self) -> Self {
        let s = 2.0 * self.coord_dot_unchecked(y);
        let det = self.det();
        Self {
            head: s * self.head - det * y.head,
            tail: combined_tail(&self.tail, s, &y.tail, det),
        }
    }

    pub fn is_in_cone(&self, tol: f64) -> bool {
        self.lambda_min() >= -tol
    }

    pub fn is_interior(&self, tol: f64) -> bool {
        self.lambda_min() > tol
    }
}

impl Add for &SpinElement {
    type Output = SpinElement;
    /// Panics on mismatched tail dimensions.
    fn add(self, rhs: &SpinElement) -> SpinElement {
        self.axpy(1.0, rhs)
            .expect("spin element dimension mismatch")
    }
}

impl Sub for &SpinElement {
    type Output = SpinElement;
    fn sub(self, rhs: &SpinElement) -> SpinElement {
        self.axpy(-1.0, rhs)
            .expect("spin element dimension mismatch")
    }
}

impl Mul<&SpinElement> for f64 {
    type Output = SpinElement;
    fn mul(self, rhs: &SpinElement) -> SpinElement {
        rhs.scale(self)
    }
}

impl Neg for &SpinElement {
    type Output = SpinElement;
    fn neg(self) -> SpinElement {
        self.scale(-1.0)
    }
}

/// An element of a product `E_{1+m₁} × … × E_{1+m_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockConeVector {
    blocks: Vec<SpinElement>,
}

impl BlockConeVector {
    pub fn new(blocks: Vec<SpinElement>) -> Result<Self, JordanError> {
        if blocks.is_empty() {
            return Err(JordanError::NoBlocks);
        }
        Ok(Self { blocks })
    }

    pub fn single(block: SpinElement) -> Self {
        Self {
            blocks: vec![block],
        }
    }

    pub fn zeros(block_dims: &[usize]) -> Result<Self, JordanError> {
        Self::new(block_dims.iter().map(|&m| SpinElement::zero(m)).collect())
    }

    pub fn identity(block_dims: &[usize]) -> Result<Self, JordanError> {
        Self::new(
            block_dims
                .iter()
                .map(|&m| SpinElement::identity(m))
                .collect(),
        )
    }

    pub fn blocks(&self) -> &[SpinElement] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [SpinElement] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<SpinElement> {
        self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(SpinElement::dim).collect()
    }

    fn check_dims(&self, other: &Self) -> Result<(), JordanError> {
        if self.blocks.len() != other.blocks.len() {
            return Err(JordanError::DimensionMismatch {
                left: self.blocks.len(),
                right: other.blocks.len(),
            });
        }
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            a.check_dim(b)?;
        }
        Ok(())
    }

    fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(&SpinElement, &SpinElement) -> SpinElement,
    ) -> Result<Self, JordanError> {
        self.check_dims(other)?;
        Ok(Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn product(&self, other: &Self) -> Result<Self, JordanError> {
        self.zip_map(other, SpinElement::product_unchecked)
    }

    pub fn quad_rep(&self, y: &Self) -> Result<Self, JordanError> {
        self.zip_map(y, SpinElement::quad_rep_unchecked)
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self, JordanError> {
        self.zip_map(other, |a, b| a.axpy(s, b).expect("checked"))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.scale(s)).collect(),
        }
    }

    /// Sum of blockwise trace-form inner products.
    pub fn inner(&self, other: &Self) -> Result<f64, JordanError> {
        self.check_dims(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.inner_unchecked(b))
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.inner_unchecked(b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(SpinElement::trace).sum()
    }

    pub fn det(&self) -> f64 {
        self.blocks.iter().map(SpinElement::det).product()
    }

    pub fn lambda_min(&self) -> f64 {
        self.blocks
            .iter()
            .map(SpinElement::lambda_min)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.blocks
            .iter()
            .map(SpinElement::lambda_max)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inverse(&self) -> Result<Self, JordanError> {
        Ok(Self {
            blocks: self
                .blocks
                .iter()
                .map(SpinElement::inverse)
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn power(&self, alpha: f64) -> Result<Self, JordanError> {
        Ok(Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| b.power(alpha))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn is_in_cone(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| b.is_in_cone(tol))
    }

    pub fn is_interior(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| b.is_interior(tol))
    }
}
