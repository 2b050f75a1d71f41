//! The `run` pipeline: load image, add noise, build the problem, obtain a
//! target, run each solver and write its log plus a `run.json` sidecar.

use std::fmt;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use pedi_core::imaging::{add_gaussian_noise, metrics, synthetic_image, unlift};
use pedi_core::solver::{DualView, IterateView};
use pedi_core::{
    build_problem, dual_fb_run, pdhgm_run, pedi_run, BaselineConfig, DenoiseProblem, ImageGrid,
    IterationRecord, PediConfig, StepRule, Target, Variant,
};
use serde_json::{json, Value};

use crate::logs::{write_atomic, write_log_atomic};
use crate::pgm::read_pgm;
use crate::target::{default_target_path, hex, load_target, make_target, TargetFile, TargetSpec};
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    PediGeneral,
    PediSoc,
    Pdhgm,
    DualFb,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::PediGeneral,
        SolverKind::PediSoc,
        SolverKind::Pdhgm,
        SolverKind::DualFb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::PediGeneral => "pedi-general",
            SolverKind::PediSoc => "pedi-soc",
            SolverKind::Pdhgm => "pdhgm",
            SolverKind::DualFb => "dual-fb",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a comma-separated solver list. `pedi` stands for PEDI with
/// `default_rule`; `all` expands to every solver.
pub fn parse_solvers(list: &str, default_rule: StepRule) -> Result<Vec<SolverKind>, String> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kinds: &[SolverKind] = match item {
            "all" => &SolverKind::ALL,
            "pedi" => match default_rule {
                StepRule::General => &[SolverKind::PediGeneral],
                StepRule::Soc => &[SolverKind::PediSoc],
            },
            "pedi-general" => &[SolverKind::PediGeneral],
            "pedi-soc" => &[SolverKind::PediSoc],
            "pdhgm" => &[SolverKind::Pdhgm],
            "dual-fb" | "fb" => &[SolverKind::DualFb],
            other => return Err(format!("unknown solver {other:?}")),
        };
        for k in kinds {
            if !out.contains(k) {
                out.push(*k);
            }
        }
    }
    if out.is_empty() {
        return Err("solver list is empty".into());
    }
    Ok(out)
}

/// A PGM file or `synthetic:N1xN2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageSource {
    File(PathBuf),
    Synthetic { n1: usize, n2: usize },
}

impl FromStr for ImageSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix("synthetic:") {
            Some(dims) => {
                let (a, b) = parse_dims(dims)?;
                Ok(ImageSource::Synthetic { n1: a, n2: b })
            }
            None => Ok(ImageSource::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for ImageSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageSource::File(p) => write!(f, "{}", p.display()),
            ImageSource::Synthetic { n1, n2 } => write!(f, "synthetic:{n1}x{n2}"),
        }
    }
}

/// `RxC` or a single `N` for a square.
pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().ok().filter(|v| *v > 0);
    let dims = match s.split_once(['x', 'X']) {
        Some((a, b)) => parse(a).zip(parse(b)),
        None => parse(s).map(|v| (v, v)),
    };
    dims.ok_or_else(|| format!("bad dimensions {s:?}, expected ROWSxCOLS"))
}

/// Noisy data and model settings shared by `run` and `make-target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub image: ImageSource,
    pub crop: Option<(usize, usize)>,
    pub variant: Variant,
    pub alpha: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if let ImageSource::File(p) = &self.image {
            if !p.is_file() {
                return Err(BenchError::Usage(format!(
                    "image {} does not exist",
                    p.display()
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(BenchError::Usage(format!(
                "--alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(BenchError::Usage(format!(
                "--sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn load_image(&self) -> Result<ImageGrid, BenchError> {
        let img = match &self.image {
            ImageSource::File(p) => read_pgm(p)?,
            ImageSource::Synthetic { n1, n2 } => synthetic_image(*n1, *n2)?,
        };
        Ok(match self.crop {
            Some((r, c)) => img.crop(r, c)?,
            None => img,
        })
    }

    pub fn build(&self) -> Result<DenoiseProblem, BenchError> {
        self.validate()?;
        let clean = self.load_image()?;
        let noisy = add_gaussian_noise(&clean, self.sigma, self.seed)?;
        Ok(build_problem(noisy, self.alpha, self.variant)?)
    }

    fn to_json(&self) -> Value {
        json!({
            "image": self.image.to_string(),
            "crop": self.crop.map(|(r, c)| [r, c]),
            "variant": self.variant.to_string(),
            "alpha": self.alpha,
            "sigma": self.sigma,
            "seed": self.seed,
        })
    }
}

/// Overrides for the PEDI step parameters; `None` keeps the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PediOptions {
    pub gamma: Option<f64>,
    pub zeta: Option<f64>,
    pub theta: Option<f64>,
    pub tau0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetPolicy {
    Load(PathBuf),
    Compute {
        spec: TargetSpec,
        cache_dir: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverKind>,
    pub iters: usize,
    pub pedi: PediOptions,
    pub target: TargetPolicy,
    pub out: PathBuf,
}

/// Outcome of one solver run as recorded in the sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub solver: SolverKind,
    pub csv: PathBuf,
    pub iterations: usize,
    pub params: Value,
}

fn pedi_config(kind: SolverKind, opts: &PediOptions, iters: usize) -> PediConfig {
    let rule = if kind == SolverKind::PediSoc {
        StepRule::Soc
    } else {
        StepRule::General
    };
    let mut config = PediConfig {
        rule,
        zeta: opts.zeta,
        theta: opts.theta,
        tau0: opts.tau0,
        max_iters: iters,
        ..Default::default()
    };
    if let Some(g) = opts.gamma {
        config.gamma = g;
    }
    config
}

/// Runs one solver, logging metrics against `target` every iteration.
/// Wall time accumulates solver work only, not the metric evaluation.
pub fn run_solver(
    problem: &DenoiseProblem,
    kind: SolverKind,
    iters: usize,
    opts: &PediOptions,
    target: &Target,
) -> Result<(Vec<IterationRecord>, Value), BenchError> {
    let gap0 = problem.initial_gap();
    let variant = problem.variant();
    let mut records = Vec::with_capacity(iters);
    let mut busy = Duration::ZERO;
    let mut mark = Instant::now();
    let mut observer = |v: &IterateView<'_>| {
        busy += mark.elapsed();
        let field;
        let p = match v.dual {
            DualView::Field(f) => f,
            DualView::Cone(y) => {
                field = unlift(y, variant).expect("problem layout");
                &field[..]
            }
        };
        let mut rec = metrics(v.x, p, problem, target, gap0);
        rec.iter = v.iter;
        rec.wall_seconds = busy.as_secs_f64();
        records.push(rec);
        mark = Instant::now();
        ControlFlow::Continue(())
    };
    let params = match kind {
        SolverKind::PediGeneral | SolverKind::PediSoc => {
            let config = pedi_config(kind, opts, iters);
            let out = pedi_run(problem, &config, None, &mut observer)?;
            let p = out.params;
            json!({
                "rule": format!("{:?}", p.rule).to_lowercase(),
                "gamma": p.gamma,
                "zeta": p.zeta,
                "theta": p.theta,
                "tau0": p.step(0, config.phi0, 0.0).tau,
                "phi0": config.phi0,
                "b0": p.b0,
                "lambda_min_a": p.lambda_min_a,
                "opnorm_k": p.opnorm,
            })
        }
        SolverKind::Pdhgm => {
            let c = BaselineConfig::pdhgm(iters);
            pdhgm_run(problem, &c, &mut observer)?;
            json!({ "tau0": c.tau0, "sigma0": c.sigma0, "gamma": c.gamma })
        }
        SolverKind::DualFb => {
            let c = BaselineConfig::dual_fb(iters);
            dual_fb_run(problem, &c, &mut observer)?;
            json!({ "tau": c.tau0 })
        }
    };
    Ok((records, params))
}

/// Loads or computes the target named by `policy`.
pub fn resolve_target(
    problem: &DenoiseProblem,
    policy: &TargetPolicy,
) -> Result<(TargetFile, PathBuf, Value), BenchError> {
    match policy {
        TargetPolicy::Load(path) => {
            let file = load_target(problem, path)?;
            let info = json!({ "policy": "load" });
            Ok((file, path.clone(), info))
        }
        TargetPolicy::Compute { spec, cache_dir } => {
            let path = default_target_path(cache_dir, problem, spec);
            let (file, status) = make_target(problem, spec, &path)?;
            let info = json!({
                "policy": "compute",
                "solver": spec.solver.to_string(),
                "iters": spec.iters,
                "cache": format!("{status:?}").to_lowercase(),
            });
            Ok((file, path, info))
        }
    }
}

pub fn cmd_run(spec: &RunSpec) -> Result<Vec<SolverReport>, BenchError> {
    if spec.solvers.is_empty() {
        return Err(BenchError::Usage("solver list is empty".into()));
    }
    let problem = spec.problem.build()?;
    let (file, target_path, mut target_info) = resolve_target(&problem, &spec.target)?;
    let target = Target::new(&problem, file.x.clone())?;
    std::fs::create_dir_all(&spec.out).map_err(|e| BenchError::io(&spec.out, e))?;

    let mut reports = Vec::new();
    for &kind in &spec.solvers {
        log::info!("running {kind} for {} iterations", spec.iters);
        let (records, params) = match run_solver(&problem, kind, spec.iters, &spec.pedi, &target) {
            Ok(r) => r,
            Err(BenchError::Solver(e)) => {
                return Err(BenchError::SolverRun {
                    solver: kind.name(),
                    source: e,
                })
            }
            Err(e) => return Err(e),
        };
        let csv = spec.out.join(format!("{kind}.csv"));
        write_log_atomic(&csv, &records)?;
        reports.push(SolverReport {
            solver: kind,
            csv,
            iterations: records.len(),
            params,
        });
    }

    let info = target_info.as_object_mut().expect("object");
    info.insert("path".into(), json!(target_path.display().to_string()));
    info.insert("key".into(), json!(hex(&file.key)));
    info.insert("problem_hash".into(), json!(hex(&file.problem)));
    info.insert("gap_ratio".into(), json!(file.gap_ratio));
    let sidecar = json!({
        "version": pedi_core::VERSION,
        "problem": spec.problem.to_json(),
        "n1": problem.n1(),
        "n2": problem.n2(),
        "iters": spec.iters,
        "opnorm_k": pedi_core::SaddleProblem::opnorm_k(&problem),
        "opnorm_d": problem.opnorm_d(),
        "target": target_info,
        "solvers": reports.iter().map(|r| json!({
            "name": r.solver.name(),
            "csv": r.csv.file_name().map(|f| f.to_string_lossy().into_owned()),
            "iterations": r.iterations,
            "params": r.params,
        })).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    write_atomic(&spec.out.join("run.json"), text.as_bytes())?;
    Ok(reports)
}

/// Reads `run.json` and every solver log it lists from `dir`.
pub fn read_run_dir(dir: &Path) -> Result<(Variant, Vec<crate::table::SolverLog>), BenchError> {
    let path = dir.join("run.json");
    let text = std::fs::read_to_string(&path).map_err(|e| BenchError::io(&path, e))?;
    let sidecar: Value = serde_json::from_str(&text)?;
    let bad =
        |what: &str| BenchError::Format(format!("{}: missing or invalid {what}", path.display()));
    let variant: Variant = sidecar["problem"]["variant"]
        .as_str()
        .ok_or_else(|| bad("problem.variant"))?
        .parse()
        .map_err(|_| bad("problem.variant"))?;
    let mut logs = Vec::new();
    for s in sidecar["solvers"]
        .as_array()
        .ok_or_else(|| bad("solvers"))?
    {
        let name = s["name"].as_str().ok_or_else(|| bad("solvers[].name"))?;
        let csv = s["csv"].as_str().ok_or_else(|| bad("solvers[].csv"))?;
        let records = crate::logs::read_log(&dir.join(csv))?;
        logs.push(crate::table::SolverLog {
            solver: name.to_string(),
            records,
        });
    }
    Ok((variant, logs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_lists() {
        assert_eq!(
            parse_solvers("all", StepRule::General).unwrap(),
            SolverKind::ALL.to_vec()
        );
        assert_eq!(
            parse_solvers("pedi", StepRule::Soc).unwrap(),
            vec![SolverKind::PediSoc]
        );
        assert_eq!(
            parse_solvers("pdhgm, pedi-general,pdhgm", StepRule::General).unwrap(),
            vec![SolverKind::Pdhgm, SolverKind::PediGeneral]
        );
        assert!(parse_solvers("", StepRule::General).is_err());
        assert!(parse_solvers("admm", StepRule::General).is_err());
    }

    #[test]
    fn image_sources() {
        assert_eq!(
            "synthetic:16x8".parse::<ImageSource>().unwrap(),
            ImageSource::Synthetic { n1: 16, n2: 8 }
        );
        assert_eq!(
            "synthetic:5".parse::<ImageSource>().unwrap(),
            ImageSource::Synthetic { n1: 5, n2: 5 }
        );
        assert!("synthetic:0x3".parse::<ImageSource>().is_err());
        assert_eq!(
            "a.pgm".parse::<ImageSource>().unwrap(),
            ImageSource::File("a.pgm".into())
        );
    }
}
