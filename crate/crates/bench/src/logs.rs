//! Per-solver iteration logs: CSV with header
//! `iter,wall_seconds,gap_db,target_db,value_db`.

use std::io::Write;
use std::path::Path;

use pedi_core::IterationRecord;
use serde::{Deserialize, Serialize};

use crate::BenchError;

pub const LOG_HEADER: [&str; 5] = ["iter", "wall_seconds", "gap_db", "target_db", "value_db"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Row {
    iter: usize,
    wall_seconds: f64,
    gap_db: f64,
    target_db: f64,
    value_db: f64,
}

impl From<&IterationRecord> for Row {
    fn from(r: &IterationRecord) -> Self {
        Self {
            iter: r.iter,
            wall_seconds: r.wall_seconds,
            gap_db: r.gap_db,
            target_db: r.target_db,
            value_db: r.value_db,
        }
    }
}

impl From<Row> for IterationRecord {
    fn from(r: Row) -> Self {
        Self {
            iter: r.iter,
            wall_seconds: r.wall_seconds,
            gap_db: r.gap_db,
            target_db: r.target_db,
            value_db: r.value_db,
        }
    }
}

pub fn encode_log(records: &[IterationRecord]) -> Result<Vec<u8>, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(LOG_HEADER)?;
    }
    for r in records {
        w.serialize(Row::from(r))?;
    }
    w.into_inner()
        .map_err(|e| BenchError::Format(e.to_string()))
}

/// Writes the whole log through a temporary file in the same directory and
/// renames it into place, so readers never see a partial file.
pub fn write_log_atomic(path: &Path, records: &[IterationRecord]) -> Result<(), BenchError> {
    write_atomic(path, &encode_log(records)?)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BenchError::io(dir, e))?;
    tmp.write_all(bytes)
        .map_err(|e| BenchError::io(tmp.path(), e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| BenchError::io(tmp.path(), e))?;
    tmp.persist(path)
        .map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}

pub fn read_log(path: &Path) -> Result<Vec<IterationRecord>, BenchError> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    parse_log(file, &path.display().to_string())
}

/// Parses a log, naming `source` and the line of the first malformed row.
pub fn parse_log<R: std::io::Read>(
    reader: R,
    source: &str,
) -> Result<Vec<IterationRecord>, BenchError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(|e| BenchError::Parse {
        source_name: source.into(),
        line: 1,
        msg: e.to_string(),
    })?;
    if header.iter().ne(LOG_HEADER) {
        return Err(BenchError::Parse {
            source_name: source.into(),
            line: 1,
            msg: format!("expected header {:?}", LOG_HEADER.join(",")),
        });
    }
    let mut out: Vec<IterationRecord> = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| BenchError::Parse {
            source_name: source.into(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = out.len() as u64 + 2;
        if out.last().is_some_and(|prev| row.iter <= prev.iter) {
            return Err(BenchError::Parse {
                source_name: source.into(),
                line,
                msg: format!("iteration {} does not increase", row.iter),
            });
        }
        if [row.wall_seconds, row.gap_db, row.target_db, row.value_db]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(BenchError::Parse {
                source_name: source.into(),
                line,
                msg: "non-finite value".into(),
            });
        }
        out.push(row.into());
    }
    Ok(out)
}
