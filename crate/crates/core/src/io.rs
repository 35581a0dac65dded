//! Field checkpoints and CSV output.
//!
//! A field file is a header line
//! `DNLSFIELD v1 L=<real> N=<int> t=<real> gauge=<u|v|w>` followed by `N`
//! lines `re im`. Reals are written in shortest round-trip form, so reading
//! a file back reproduces every sample bit for bit.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::functionals::Gauge;
use crate::grid::{make_grid, ComplexField, Grid, C64};

pub const FIELD_MAGIC: &str = "DNLSFIELD";
pub const FIELD_VERSION: &str = "v1";

/// A field together with the time and gauge it was stored at.
#[derive(Clone, Debug)]
pub struct FieldSnapshot {
    pub field: ComplexField,
    pub t: f64,
    pub gauge: Gauge,
}

pub fn field_header(grid: &Grid, t: f64, gauge: Gauge) -> String {
    format!(
        "{FIELD_MAGIC} {FIELD_VERSION} L={} N={} t={t} gauge={gauge}",
        grid.length(),
        grid.len()
    )
}

pub fn write_field(path: &Path, field: &ComplexField, t: f64, gauge: Gauge) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", field_header(field.grid(), t, gauge))?;
    for z in field.values() {
        writeln!(out, "{} {}", z.re, z.im)?;
    }
    out.flush()?;
    Ok(())
}

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::FieldFormat { path: path.to_path_buf(), reason: reason.into() }
}

pub fn parse_field(path: &Path, text: &str) -> Result<FieldSnapshot> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| format_error(path, "empty file"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(FIELD_MAGIC) {
        return Err(format_error(path, format!("header must start with {FIELD_MAGIC}")));
    }
    if parts.next() != Some(FIELD_VERSION) {
        return Err(format_error(path, format!("unsupported version, expected {FIELD_VERSION}")));
    }
    let (mut length, mut n, mut t, mut gauge) = (None, None, None, None);
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format_error(path, format!("malformed header entry `{part}`")))?;
        let bad = |what: &str| format_error(path, format!("bad {what} `{value}`"));
        match key {
            "L" => length = Some(value.parse::<f64>().map_err(|_| bad("length"))?),
            "N" => n = Some(value.parse::<usize>().map_err(|_| bad("point count"))?),
            "t" => t = Some(value.parse::<f64>().map_err(|_| bad("time"))?),
            "gauge" => gauge = Some(value.parse::<Gauge>().map_err(|_| bad("gauge"))?),
            other => return Err(format_error(path, format!("unknown header key `{other}`"))),
        }
    }
    let missing = |k: &str| format_error(path, format!("header is missing `{k}`"));
    let length = length.ok_or_else(|| missing("L"))?;
    let n = n.ok_or_else(|| missing("N"))?;
    let t = t.ok_or_else(|| missing("t"))?;
    let gauge = gauge.ok_or_else(|| missing("gauge"))?;
    let grid = make_grid(length, n).map_err(|e| format_error(path, e.to_string()))?;

    let mut values = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut nums = line.split_whitespace();
        let mut next = || -> Result<f64> {
            nums.next()
                .ok_or_else(|| format_error(path, format!("line {} needs two numbers", i + 2)))?
                .parse::<f64>()
                .map_err(|_| format_error(path, format!("line {} is not numeric", i + 2)))
        };
        let (re, im) = (next()?, next()?);
        if nums.next().is_some() {
            return Err(format_error(path, format!("line {} has extra columns", i + 2)));
        }
        values.push(C64::new(re, im));
    }
    if values.len() != n {
        return Err(format_error(path, format!("expected {n} samples, found {}", values.len())));
    }
    let field = ComplexField::new(&grid, values).map_err(|e| format_error(path, e.to_string()))?;
    Ok(FieldSnapshot { field, t, gauge })
}

pub fn read_field(path: &Path) -> Result<FieldSnapshot> {
    let text = fs::read_to_string(path)?;
    parse_field(path, &text)
}

/// Writes `header` and `rows` as a CSV file with a trailing newline.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

/// `<dir>/<stem>_<index>.field` with a zero-padded index.
pub fn checkpoint_path(dir: &Path, stem: &str, index: usize) -> PathBuf {
    dir.join(format!("{stem}_{index:05}.field"))
}
