//! Threshold tables: the first iteration (at a resolution of 10) and wall
//! time at which each solver's log reaches a dB level.

use std::fmt::Write as _;
use std::str::FromStr;

use pedi_core::{IterationRecord, Variant};

/// Iteration counts are reported at this resolution.
pub const RESOLUTION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Gap,
    Target,
    Value,
}

impl Metric {
    fn of(self, r: &IterationRecord) -> f64 {
        match self {
            Metric::Gap => r.gap_db,
            Metric::Target => r.target_db,
            Metric::Value => r.value_db,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Metric::Gap => "gap",
            Metric::Target => "tgt",
            Metric::Value => "val",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub metric: Metric,
    pub db: f64,
}

impl Threshold {
    pub fn new(metric: Metric, db: f64) -> Self {
        Self { metric, db }
    }

    pub fn label(&self) -> String {
        format!("{}<={}dB", self.metric.label(), self.db)
    }
}

impl FromStr for Threshold {
    type Err = String;

    /// `gap:-50`, `tgt:-100`, `val:-100` (also `target`, `value`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, v) = s
            .split_once(':')
            .ok_or_else(|| format!("threshold {s:?} is not metric:dB"))?;
        let metric = match m.trim() {
            "gap" => Metric::Gap,
            "tgt" | "target" => Metric::Target,
            "val" | "value" => Metric::Value,
            other => {
                return Err(format!(
                    "unknown metric {other:?}, expected gap, tgt or val"
                ))
            }
        };
        let db: f64 = v
            .trim()
            .parse()
            .map_err(|_| format!("threshold level {v:?} is not a number"))?;
        if !db.is_finite() {
            return Err(format!("threshold level {db} is not finite"));
        }
        Ok(Self { metric, db })
    }
}

/// `gap ≤ −50 dB` for TV; `gap ≤ −150 dB`, `tgt ≤ −100 dB`, `val ≤ −100 dB` for H¹.
pub fn default_thresholds(variant: Variant) -> Vec<Threshold> {
    match variant {
        Variant::Tv => vec![Threshold::new(Metric::Gap, -50.0)],
        Variant::H1 => vec![
            Threshold::new(Metric::Gap, -150.0),
            Threshold::new(Metric::Target, -100.0),
            Threshold::new(Metric::Value, -100.0),
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverLog {
    pub solver: String,
    pub records: Vec<IterationRecord>,
}

/// Where a log first reaches a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// First logged multiple of [`RESOLUTION`] at or after the crossing.
    pub iter: usize,
    pub wall_seconds: f64,
}

/// Rounds the first crossing up to the next checkpoint. The time is read at
/// that checkpoint, or at the crossing when the log ends before it.
pub fn crossing(records: &[IterationRecord], threshold: &Threshold) -> Option<Crossing> {
    let at = records
        .iter()
        .position(|r| threshold.metric.of(r) <= threshold.db)?;
    let iter = records[at].iter.div_ceil(RESOLUTION) * RESOLUTION;
    let wall_seconds = records[at..]
        .iter()
        .find(|r| r.iter >= iter)
        .unwrap_or(&records[at])
        .wall_seconds;
    Some(Crossing { iter, wall_seconds })
}

/// Renders one row per solver and one column per threshold. Cells are
/// `iters` or `iters (seconds)`; `--` marks thresholds never reached.
pub fn render_table(logs: &[SolverLog], thresholds: &[Threshold], with_time: bool) -> String {
    let mut rows = vec![std::iter::once("solver".to_string())
        .chain(thresholds.iter().map(Threshold::label))
        .collect::<Vec<_>>()];
    for log in logs {
        let mut row = vec![log.solver.clone()];
        for t in thresholds {
            row.push(match crossing(&log.records, t) {
                None => "--".to_string(),
                Some(c) if with_time => format!("{} ({:.3}s)", c.iter, c.wall_seconds),
                Some(c) => c.iter.to_string(),
            });
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}
