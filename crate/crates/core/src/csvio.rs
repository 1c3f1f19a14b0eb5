//! Small CSV helpers shared by the loaders and the dump writers.

use std::fs::File;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Writer};

use crate::error::{Result, SmiError};

pub(crate) fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| SmiError::io(path, e))?;
    Ok(ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

pub(crate) fn headers(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<String>> {
    let h = rdr.headers().map_err(|e| SmiError::csv(path, e))?;
    Ok(h.iter().map(str::to_owned).collect())
}

/// Iterates data records, yielding each with its 1-based line number.
pub(crate) fn records(
    path: &Path,
    rdr: &mut csv::Reader<File>,
) -> Result<Vec<(usize, StringRecord)>> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| SmiError::csv(path, e))?;
        // blank trailing lines come through as a single empty field
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    Ok(out)
}

pub(crate) fn expect_header(path: &Path, found: &[String], expected: &[&str]) -> Result<()> {
    if found
        .iter()
        .map(String::as_str)
        .eq(expected.iter().copied())
    {
        return Ok(());
    }
    Err(SmiError::Schema {
        path: path.to_path_buf(),
        message: format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            found.join(",")
        ),
    })
}

pub(crate) fn parse_f64(raw: &str) -> Option<f64> {
    raw.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Exact round-trip text for a real (shortest representation that parses back
/// to the same bits).
pub(crate) fn exact(v: f64) -> String {
    format!("{v}")
}

/// Fixed six-decimal text for report-only dumps.
pub(crate) fn fixed6(v: f64) -> String {
    // avoid "-0.000000"
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_owned()
    } else {
        s
    }
}

pub(crate) struct CsvOut {
    path: std::path::PathBuf,
    writer: Writer<File>,
}

impl CsvOut {
    pub(crate) fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| SmiError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            writer: Writer::from_writer(file),
        })
    }

    pub(crate) fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| SmiError::csv(&self.path, e))
    }

    pub(crate) fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| SmiError::io(&self.path, e))
    }
}
