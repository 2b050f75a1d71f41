#![allow(dead_code)]

use pedi_core::{RankOneConstraint, SpinElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn element(rng: &mut impl Rng, m: usize) -> SpinElement {
    let tail = vector(rng, m);
    SpinElement::new(rng.random_range(-2.0..2.0), tail).unwrap()
}

/// Interior element with λ_min drawn log-uniformly from [1e-2, 1].
pub fn interior(rng: &mut impl Rng, m: usize) -> SpinElement {
    let tail = vector(rng, m);
    let n = tail.iter().map(|t| t * t).sum::<f64>().sqrt();
    let gap = 10f64.powf(rng.random_range(-2.0..0.0));
    SpinElement::new(n + gap, tail).unwrap()
}

pub fn constraint(rng: &mut impl Rng, m: usize) -> RankOneConstraint {
    let b0 = rng.random_range(0.2..4.0);
    RankOneConstraint::new(interior(rng, m), b0).unwrap()
}

/// Random `c` with `⟨a⁻¹, c⟩ = 0`.
pub fn admissible(rng: &mut impl Rng, k: &RankOneConstraint) -> SpinElement {
    let v = element(rng, k.dim());
    let ai = k.a_inv();
    v.axpy(-ai.inner(&v).unwrap() / ai.inner(ai).unwrap(), ai)
        .unwrap()
}

pub fn rel_err(a: &SpinElement, b: &SpinElement) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}
