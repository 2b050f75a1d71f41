//! 8-bit grayscale Netpbm images: P2 (plain) and P5 (raw).
//!
//! Pixel values map to reals in `[0, 255]` unchanged. Writing clamps to that
//! range and rounds half to even, so 8-bit data round-trips exactly.

use std::fs;
use std::path::Path;

use pedi_core::ImageGrid;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P2`, whitespace-separated decimal samples.
    Plain,
    /// `P5`, one byte per sample.
    Raw,
}

pub fn read_pgm(path: &Path) -> Result<ImageGrid, BenchError> {
    let bytes = fs::read(path).map_err(|e| BenchError::io(path, e))?;
    parse_pgm(&bytes).map_err(|msg| BenchError::Format(format!("{}: {msg}", path.display())))
}

pub fn write_pgm(grid: &ImageGrid, path: &Path, format: PgmFormat) -> Result<(), BenchError> {
    fs::write(path, encode_pgm(grid, format)).map_err(|e| BenchError::io(path, e))
}

/// Quantises a sample to a byte: clamp to `[0, 255]`, round half to even.
pub fn to_byte(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.clamp(0.0, 255.0).round_ties_even() as u8
}

pub fn encode_pgm(grid: &ImageGrid, format: PgmFormat) -> Vec<u8> {
    let (w, h) = (grid.n2(), grid.n1());
    let bytes = grid.values().iter().map(|&v| to_byte(v));
    match format {
        PgmFormat::Raw => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend(bytes);
            out
        }
        PgmFormat::Plain => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            let samples: Vec<u8> = bytes.collect();
            for row in samples.chunks(w) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self
                    .data
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("expected {what} at byte {start}"));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| format!("{what} out of range at byte {start}"))
    }
}

pub fn parse_pgm(data: &[u8]) -> Result<ImageGrid, String> {
    let raw = match data.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err("not a P2/P5 graymap (bad magic number)".into()),
    };
    let mut cur = Cursor { data, pos: 2 };
    let w = cur.number("width")?;
    let h = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(format!(
            "unsupported maxval {maxval}, only 8-bit (255) graymaps are read"
        ));
    }
    if w == 0 || h == 0 {
        return Err(format!("empty image {w}x{h}"));
    }
    let n = w.checked_mul(h).ok_or("image dimensions overflow")?;
    let values = if raw {
        // exactly one whitespace byte separates the header from the raster
        match data.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err("missing whitespace after maxval".into()),
        }
        let raster = data.get(cur.pos..cur.pos + n).ok_or_else(|| {
            format!(
                "raster truncated: need {n} bytes, have {}",
                data.len() - cur.pos
            )
        })?;
        raster.iter().map(|&b| f64::from(b)).collect()
    } else {
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let s = cur
                .number("sample")
                .map_err(|e| format!("{e} (sample {i} of {n})"))?;
            if s > 255 {
                return Err(format!("sample {s} exceeds maxval at index {i}"));
            }
            v.push(s as f64);
        }
        v
    };
    ImageGrid::new(h, w, values).map_err(|e| e.to_string())
}
