use std::path::Path;
use std::process::{Command, Output};

use pedi_bench::logs::read_log;
use pedi_bench::target::{read_target, TargetSolver, TargetSpec};
use pedi_core::imaging::{add_gaussian_noise, synthetic_image};
use pedi_core::solver::no_observer;
use pedi_core::{build_problem, dual_fb_run, BaselineConfig, Variant};

const SOLVERS: [&str; 4] = ["pedi-general", "pedi-soc", "pdhgm", "dual-fb"];

fn bench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pedi-bench"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = bench(args, dir);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str], dir: &Path) -> String {
    let out = bench(args, dir);
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

const H1_16: [&str; 10] = [
    "--image",
    "synthetic:16x16",
    "--variant",
    "h1",
    "--alpha",
    "5",
    "--sigma",
    "6.15",
    "--seed",
    "1",
];

fn without_time(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(1);
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn run_writes_one_full_log_per_solver_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        ok(
            &[&["run"][..], &H1_16, &["--iters", "500", "--out", out]].concat(),
            d,
        );
    }

    for s in SOLVERS {
        let log = read_log(&d.join("a").join(format!("{s}.csv"))).unwrap();
        assert_eq!(log.len(), 500, "{s}");
        assert!(log.iter().enumerate().all(|(i, r)| r.iter == i + 1));
        let first = std::fs::read_to_string(d.join("a").join(format!("{s}.csv"))).unwrap();
        let second = std::fs::read_to_string(d.join("b").join(format!("{s}.csv"))).unwrap();
        assert_eq!(without_time(&first), without_time(&second), "{s}");
    }

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a/run.json")).unwrap()).unwrap();
    assert_eq!(meta["version"], pedi_core::VERSION);
    assert_eq!(meta["problem"]["variant"], "h1");
    assert!(
        (meta["opnorm_k"].as_f64().unwrap() * 2f64.sqrt() - meta["opnorm_d"].as_f64().unwrap())
            .abs()
            < 1e-12
    );
    assert_eq!(meta["solvers"].as_array().unwrap().len(), 4);
    assert_eq!(meta["target"]["cache"], "computed");
    let meta_b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("b/run.json")).unwrap()).unwrap();
    assert_eq!(meta_b["target"]["cache"], "hit");
}

#[test]
fn table_rounds_to_checkpoints_and_marks_misses() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = [
        &["run"][..],
        &H1_16,
        &[
            "--iters",
            "200",
            "--out",
            "r",
            "--target-solver",
            "dual-fb",
            "--target-iters",
            "20000",
        ],
    ]
    .concat();
    ok(&run, d);
    let table = ok(&["table", "--logs", "r", "--no-time"], d);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0].split_whitespace().collect::<Vec<_>>(),
        ["solver", "gap<=-150dB", "tgt<=-100dB", "val<=-100dB"]
    );
    assert_eq!(lines.len(), 5);
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split_whitespace().collect();
        for c in &cells[1..] {
            assert!(
                *c == "--" || c.parse::<usize>().unwrap() % 10 == 0,
                "{line}"
            );
        }
    }
    let pdhgm = lines.iter().find(|l| l.starts_with("pdhgm")).unwrap();
    assert_eq!(pdhgm.split_whitespace().nth(1), Some("--"));
    assert_eq!(ok(&["table", "--logs", "r", "--no-time"], d), table);

    let timed = ok(&["table", "--logs", "r", "--thresholds", "gap:-20"], d);
    assert!(timed.lines().skip(1).all(|l| l.ends_with("s)")), "{timed}");
    assert_eq!(
        ok(&["table", "--logs", "r", "--thresholds", ""], d)
            .lines()
            .next(),
        Some("solver")
    );
    assert!(fails(&["table", "--logs", "r", "--thresholds", "gap"], d).contains("metric:dB"));
}

#[test]
fn malformed_log_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = [
        &["run"][..],
        &H1_16,
        &[
            "--iters",
            "20",
            "--solvers",
            "dual-fb",
            "--out",
            "r",
            "--target-solver",
            "dual-fb",
            "--target-iters",
            "20000",
        ],
    ]
    .concat();
    ok(&run, d);
    let csv = d.join("r/dual-fb.csv");
    let mut text = std::fs::read_to_string(&csv).unwrap();
    text = text.replacen("\n5,", "\n5,oops,", 1);
    std::fs::write(&csv, text).unwrap();
    let err = fails(&["table", "--logs", "r"], d);
    assert!(
        err.contains("dual-fb.csv") && err.contains("line 6"),
        "{err}"
    );
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = [&["run"][..], &H1_16, &["--iters", "5", "--out", "r"]].concat();
    for extra in [
        &["--solvers", "fista"][..],
        &["--solvers", ""],
        &["--target", "missing.target"],
    ] {
        let out = bench(&[&base[..], extra].concat(), d);
        assert_eq!(out.status.code(), Some(2), "{extra:?}");
    }
    let out = bench(
        &[
            "run",
            "--image",
            "missing.pgm",
            "--variant",
            "tv",
            "--alpha",
            "1",
            "--iters",
            "5",
            "--out",
            "r",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.pgm"));
    assert!(!d.join("r").exists());
}

#[test]
fn make_target_caches_and_refuses_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let make = [&["make-target"][..], &H1_16, &["--target", "t.target"]].concat();
    assert!(ok(&make, d).starts_with("computed"));
    let stamp = std::fs::metadata(d.join("t.target"))
        .unwrap()
        .modified()
        .unwrap();
    assert!(ok(&make, d).starts_with("cache hit"));
    assert_eq!(
        std::fs::metadata(d.join("t.target"))
            .unwrap()
            .modified()
            .unwrap(),
        stamp
    );

    let file = read_target(&d.join("t.target")).unwrap();
    assert!(file.gap_ratio <= 1e-8);
    assert_eq!((file.n1, file.n2, file.x.len()), (16, 16, 256));

    let other = [&make[..], &["--target-solver", "dual-fb"]].concat();
    assert!(fails(&other, d).contains("t.target"));
    let mut alpha = make.clone();
    alpha[6] = "4";
    assert!(fails(&alpha, d).contains("t.target"));

    let mut run = [
        &["run"][..],
        &H1_16,
        &["--iters", "5", "--out", "r", "--target", "t.target"],
    ]
    .concat();
    ok(&run, d);
    run[6] = "4";
    assert!(fails(&run, d).contains("t.target"));
}

#[test]
fn quality_gate_rejects_undersolved_targets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let make = [&["make-target"][..], &H1_16, &["--target-iters", "10"]].concat();
    let err = fails(&make, d);
    assert!(err.contains("gap"), "{err}");
    assert!(std::fs::read_dir(d.join(".pedi-cache")).map_or(true, |mut r| r.next().is_none()));
}

#[test]
fn tv_pedi_target_distance_keeps_falling() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = [
        "run",
        "--image",
        "synthetic:16x16",
        "--variant",
        "tv",
        "--alpha",
        "0.5",
        "--sigma",
        "6.15",
        "--solvers",
        "pedi",
        "--iters",
        "3000",
        "--out",
        "r",
        "--target-solver",
        "dual-fb",
        "--target-iters",
        "100000",
    ];
    ok(&run, d);
    let log = read_log(&d.join("r/pedi-general.csv")).unwrap();
    let mut best = f64::INFINITY;
    let envelope: Vec<f64> = log
        .iter()
        .map(|r| {
            best = best.min(r.target_db);
            best
        })
        .collect();
    for (lo, hi) in [(100, 300), (300, 1000), (1000, 3000)] {
        assert!(
            envelope[hi - 1] < envelope[lo - 1] - 3.0,
            "{} -> {}",
            envelope[lo - 1],
            envelope[hi - 1]
        );
    }
}

#[test]
fn dual_fb_target_matches_a_longer_run() {
    for (variant, alpha) in [(Variant::H1, 5.0), (Variant::Tv, 0.5)] {
        let z = add_gaussian_noise(&synthetic_image(16, 16).unwrap(), 6.15, 1).unwrap();
        let p = build_problem(z, alpha, variant).unwrap();
        let spec = TargetSpec {
            solver: TargetSolver::DualFb,
            iters: 100_000,
        };
        let (x, _) = pedi_bench::target::compute_target(&p, &spec).unwrap();
        let long = dual_fb_run(&p, &BaselineConfig::dual_fb(1_000_000), &mut no_observer)
            .unwrap()
            .x;
        let num: f64 = x.iter().zip(&long).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = long.iter().map(|b| b * b).sum();
        assert!(
            (num / den).sqrt() <= 1e-7,
            "{variant}: {:e}",
            (num / den).sqrt()
        );
    }
}
