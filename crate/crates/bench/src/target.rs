//! Cached reference solutions `x̂`.
//!
//! A target file is little-endian binary:
//!
//! ```text
//! magic      8 bytes  "PEDITGT1"
//! key       32 bytes  SHA-256 of problem and target settings
//! problem   32 bytes  SHA-256 of the problem alone
//! n1, n2     u64 each
//! gap_ratio  f64      gap/gap0 of the stored pair
//! x          n1·n2 f64, row-major
//! ```
//!
//! `make-target` refuses to overwrite a file whose key differs, and `run`
//! refuses a target whose problem hash differs from the run's problem.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pedi_core::solver::no_observer;
use pedi_core::{dual_fb_run, pdhgm_run, BaselineConfig, DenoiseProblem};
use sha2::{Digest, Sha256};

use crate::logs::write_atomic;
use crate::BenchError;

pub const TARGET_MAGIC: &[u8; 8] = b"PEDITGT1";
/// The stored pair must satisfy `gap ≤ QUALITY_RTOL·gap0`.
pub const QUALITY_RTOL: f64 = 1e-8;
pub const DEFAULT_TARGET_ITERS: usize = 100_000;

const HEADER_LEN: usize = 8 + 32 + 32 + 8 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSolver {
    Pdhgm,
    DualFb,
}

impl fmt::Display for TargetSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetSolver::Pdhgm => "pdhgm",
            TargetSolver::DualFb => "dual-fb",
        })
    }
}

impl FromStr for TargetSolver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pdhgm" => Ok(TargetSolver::Pdhgm),
            "dual-fb" => Ok(TargetSolver::DualFb),
            other => Err(format!(
                "unknown target solver {other:?}, expected pdhgm or dual-fb"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetSpec {
    pub solver: TargetSolver,
    pub iters: usize,
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self {
            solver: TargetSolver::Pdhgm,
            iters: DEFAULT_TARGET_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetFile {
    pub key: [u8; 32],
    pub problem: [u8; 32],
    pub n1: usize,
    pub n2: usize,
    pub gap_ratio: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Computed,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the variant, `α`, dimensions and the exact noisy data.
pub fn problem_hash(problem: &DenoiseProblem) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pedi-problem-v1\0");
    h.update(problem.variant().to_string().as_bytes());
    h.update(problem.alpha().to_le_bytes());
    h.update((problem.n1() as u64).to_le_bytes());
    h.update((problem.n2() as u64).to_le_bytes());
    for v in problem.z().values() {
        h.update(v.to_le_bytes());
    }
    h.finalize().into()
}

pub fn target_key(problem: &DenoiseProblem, spec: &TargetSpec) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pedi-target-v1\0");
    h.update(problem_hash(problem));
    h.update(spec.solver.to_string().as_bytes());
    h.update((spec.iters as u64).to_le_bytes());
    h.finalize().into()
}

pub fn default_target_path(
    cache_dir: &Path,
    problem: &DenoiseProblem,
    spec: &TargetSpec,
) -> PathBuf {
    cache_dir.join(format!("{}.target", hex(&target_key(problem, spec))))
}

/// Runs the reference solver and applies the quality gate.
pub fn compute_target(
    problem: &DenoiseProblem,
    spec: &TargetSpec,
) -> Result<(Vec<f64>, f64), BenchError> {
    let out = match spec.solver {
        TargetSolver::Pdhgm => pdhgm_run(
            problem,
            &BaselineConfig::pdhgm(spec.iters),
            &mut no_observer,
        )?,
        TargetSolver::DualFb => dual_fb_run(
            problem,
            &BaselineConfig::dual_fb(spec.iters),
            &mut no_observer,
        )?,
    };
    let ratio = problem.gap(&out.x, &out.p) / problem.initial_gap();
    if ratio.is_nan() || ratio > QUALITY_RTOL {
        return Err(BenchError::QualityGate {
            ratio,
            limit: QUALITY_RTOL,
            iters: spec.iters,
            solver: spec.solver,
        });
    }
    Ok((out.x, ratio))
}

/// Returns the target at `path`, computing and writing it if absent.
pub fn make_target(
    problem: &DenoiseProblem,
    spec: &TargetSpec,
    path: &Path,
) -> Result<(TargetFile, CacheStatus), BenchError> {
    let key = target_key(problem, spec);
    if path.exists() {
        let file = read_target(path)?;
        if file.key != key {
            return Err(BenchError::CacheMismatch {
                path: path.to_path_buf(),
                found: hex(&file.key),
                expected: hex(&key),
            });
        }
        log::info!("target cache hit: {}", path.display());
        return Ok((file, CacheStatus::Hit));
    }
    let (x, gap_ratio) = compute_target(problem, spec)?;
    let file = TargetFile {
        key,
        problem: problem_hash(problem),
        n1: problem.n1(),
        n2: problem.n2(),
        gap_ratio,
        x,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    write_atomic(path, &encode_target(&file))?;
    log::info!(
        "target written: {} (gap/gap0 = {gap_ratio:e})",
        path.display()
    );
    Ok((file, CacheStatus::Computed))
}

/// Loads a target for `problem`, refusing files made for another problem.
pub fn load_target(problem: &DenoiseProblem, path: &Path) -> Result<TargetFile, BenchError> {
    let file = read_target(path)?;
    let expected = problem_hash(problem);
    if file.problem != expected {
        return Err(BenchError::TargetMismatch {
            path: path.to_path_buf(),
            found: hex(&file.problem),
            expected: hex(&expected),
        });
    }
    Ok(file)
}

pub fn encode_target(file: &TargetFile) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * file.x.len());
    out.extend_from_slice(TARGET_MAGIC);
    out.extend_from_slice(&file.key);
    out.extend_from_slice(&file.problem);
    out.extend_from_slice(&(file.n1 as u64).to_le_bytes());
    out.extend_from_slice(&(file.n2 as u64).to_le_bytes());
    out.extend_from_slice(&file.gap_ratio.to_le_bytes());
    for v in &file.x {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_target(path: &Path) -> Result<TargetFile, BenchError> {
    let bytes = std::fs::read(path).map_err(|e| BenchError::io(path, e))?;
    decode_target(&bytes).map_err(|msg| BenchError::Format(format!("{}: {msg}", path.display())))
}

pub fn decode_target(bytes: &[u8]) -> Result<TargetFile, String> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != TARGET_MAGIC {
        return Err("not a target file (bad magic or truncated header)".into());
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8 bytes") };
    let key: [u8; 32] = bytes[8..40].try_into().expect("32 bytes");
    let problem: [u8; 32] = bytes[40..72].try_into().expect("32 bytes");
    let n1 = u64::from_le_bytes(word(72)) as usize;
    let n2 = u64::from_le_bytes(word(80)) as usize;
    let gap_ratio = f64::from_le_bytes(word(88));
    let n = n1.checked_mul(n2).ok_or("dimensions overflow")?;
    if bytes.len() != HEADER_LEN + 8 * n {
        return Err(format!(
            "expected {} bytes for a {n1}x{n2} target, found {}",
            HEADER_LEN + 8 * n,
            bytes.len()
        ));
    }
    let x = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(TargetFile {
        key,
        problem,
        n1,
        n2,
        gap_ratio,
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode() {
        let file = TargetFile {
            key: [7; 32],
            problem: [9; 32],
            n1: 2,
            n2: 3,
            gap_ratio: 1e-12,
            x: vec![1.5; 6],
        };
        let bytes = encode_target(&file);
        assert_eq!(decode_target(&bytes).unwrap(), file);
        assert!(decode_target(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_target(b"PEDITGT0").is_err());
    }

    #[test]
    fn solver_names() {
        for s in [TargetSolver::Pdhgm, TargetSolver::DualFb] {
            assert_eq!(s.to_string().parse::<TargetSolver>().unwrap(), s);
        }
        assert!("fista".parse::<TargetSolver>().is_err());
    }
}
