use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pedi_bench::run::{
    cmd_run, parse_dims, parse_solvers, read_run_dir, ImageSource, PediOptions, ProblemSpec,
    RunSpec, TargetPolicy,
};
use pedi_bench::table::{default_thresholds, render_table, Threshold};
use pedi_bench::target::{
    default_target_path, hex, make_target, CacheStatus, TargetSolver, TargetSpec,
    DEFAULT_TARGET_ITERS,
};
use pedi_bench::BenchError;
use pedi_core::{StepRule, Variant};

#[derive(Parser)]
#[command(
    name = "pedi-bench",
    version,
    about = "Denoising benchmarks for PEDI, PDHGM and dual FB"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run solvers and write one CSV log per solver plus run.json.
    Run(RunArgs),
    /// Print iteration/time thresholds from a run directory.
    Table(TableArgs),
    /// Compute (or find in the cache) the reference solution.
    MakeTarget(MakeTargetArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Tv,
    H1,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    General,
    Soc,
}

#[derive(Args)]
struct ProblemArgs {
    /// PGM image (P2/P5, 8-bit) or synthetic:ROWSxCOLS.
    #[arg(long)]
    image: ImageSource,
    /// Keep the top-left ROWSxCOLS block.
    #[arg(long, value_parser = parse_dims)]
    crop: Option<(usize, usize)>,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long)]
    alpha: f64,
    /// Noise standard deviation in grey levels.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ProblemArgs {
    fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            image: self.image.clone(),
            crop: self.crop,
            variant: match self.variant {
                VariantArg::Tv => Variant::Tv,
                VariantArg::H1 => Variant::H1,
            },
            alpha: self.alpha,
            sigma: self.sigma,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct TargetArgs {
    /// Iterations of the reference solver.
    #[arg(long, default_value_t = DEFAULT_TARGET_ITERS)]
    target_iters: usize,
    #[arg(long, default_value = "pdhgm")]
    target_solver: TargetSolver,
    #[arg(long, default_value = ".pedi-cache")]
    cache_dir: PathBuf,
}

impl TargetArgs {
    fn spec(&self) -> TargetSpec {
        TargetSpec {
            solver: self.target_solver,
            iters: self.target_iters,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated: pedi-general, pedi-soc, pdhgm, dual-fb, pedi, all.
    #[arg(long, default_value = "all")]
    solvers: String,
    #[arg(long)]
    iters: usize,
    /// Rule used for the `pedi` shorthand in --solvers.
    #[arg(long, value_enum, default_value = "general")]
    step_rule: RuleArg,
    /// Rescale θ so the first PEDI step equals this τ0.
    #[arg(long)]
    tau0_override: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Load this target file instead of computing one.
    #[arg(long, conflicts_with_all = ["target_iters", "target_solver"])]
    target: Option<PathBuf>,
    #[command(flatten)]
    target_args: TargetArgs,
}

#[derive(Args)]
struct TableArgs {
    /// Directory written by `run`.
    #[arg(long)]
    logs: PathBuf,
    /// Comma-separated metric:dB pairs (gap, tgt, val); defaults depend on the variant.
    #[arg(long)]
    thresholds: Option<String>,
    /// Print iteration counts only.
    #[arg(long)]
    no_time: bool,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MakeTargetArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    target_args: TargetArgs,
    /// Explicit target path; defaults to CACHE_DIR/<key>.target.
    #[arg(long)]
    target: Option<PathBuf>,
}

fn run(args: RunArgs) -> Result<(), BenchError> {
    let rule = match args.step_rule {
        RuleArg::General => StepRule::General,
        RuleArg::Soc => StepRule::Soc,
    };
    let solvers = parse_solvers(&args.solvers, rule).map_err(BenchError::Usage)?;
    let target = match args.target {
        Some(p) if !p.is_file() => {
            return Err(BenchError::Usage(format!(
                "target {} does not exist",
                p.display()
            )))
        }
        Some(p) => TargetPolicy::Load(p),
        None => TargetPolicy::Compute {
            spec: args.target_args.spec(),
            cache_dir: args.target_args.cache_dir,
        },
    };
    let problem = args.problem.spec();
    problem.validate()?;
    let spec = RunSpec {
        problem,
        solvers,
        iters: args.iters,
        pedi: PediOptions {
            gamma: args.gamma,
            zeta: args.zeta,
            theta: args.theta,
            tau0: args.tau0_override,
        },
        target,
        out: args.out,
    };
    for r in cmd_run(&spec)? {
        println!(
            "{}: {} iterations -> {}",
            r.solver,
            r.iterations,
            r.csv.display()
        );
    }
    Ok(())
}

fn table(args: TableArgs) -> Result<(), BenchError> {
    let (variant, logs) = read_run_dir(&args.logs)?;
    let thresholds = match &args.thresholds {
        None => default_thresholds(variant),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse::<Threshold>)
            .collect::<Result<_, _>>()
            .map_err(BenchError::Usage)?,
    };
    let text = render_table(&logs, &thresholds, !args.no_time);
    match args.out {
        Some(path) => std::fs::write(&path, text).map_err(|e| BenchError::Io { path, source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn make(args: MakeTargetArgs) -> Result<(), BenchError> {
    let problem = args.problem.spec().build()?;
    let spec = args.target_args.spec();
    let path = args
        .target
        .unwrap_or_else(|| default_target_path(&args.target_args.cache_dir, &problem, &spec));
    let (file, status) = make_target(&problem, &spec, &path)?;
    let what = match status {
        CacheStatus::Hit => "cache hit",
        CacheStatus::Computed => "computed",
    };
    println!(
        "{what}: {} key {} gap/gap0 {:e}",
        path.display(),
        hex(&file.key),
        file.gap_ratio
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Table(a) => table(a),
        Command::MakeTarget(a) => make(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
