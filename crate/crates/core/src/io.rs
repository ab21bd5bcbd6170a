//! JSON norm records and CSV formats for tables and curves.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! value read back from a file is bit-identical to the one written.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::couple_ops::CoveringCurve;
use crate::error::{Error, Result};
use crate::measure::FiniteMeasureSpace;
use crate::norm::{Exponent, LatticeNorm, Mask};

/// `p` as written in records: a number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentRecord(pub f64);

impl Serialize for ExponentRecord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExponentRecord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(ExponentRecord(p)),
            Raw::Str(s) if s.eq_ignore_ascii_case("inf") => Ok(ExponentRecord(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// A weighted `l^p` norm on a finite measure space.
///
/// `mu` may be omitted when the record is built on a given space. `w`
/// defaults to all ones and `mask` (a list of atom indices) to every atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormRecord {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    pub p: ExponentRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<usize>>,
}

impl NormRecord {
    pub fn space(&self) -> Result<Arc<FiniteMeasureSpace>> {
        if self.mu.is_empty() {
            return Err(Error::InvalidParameter(
                "norm record has no measure \"mu\"".into(),
            ));
        }
        Ok(Arc::new(FiniteMeasureSpace::new(self.mu.clone())?))
    }

    /// Build the norm on `space`, which must have the record's masses if
    /// the record gives any.
    pub fn build_on(&self, space: Arc<FiniteMeasureSpace>) -> Result<LatticeNorm> {
        if !self.mu.is_empty() && space.weights() != self.mu.as_slice() {
            return Err(Error::InvalidParameter(
                "norm record lives on a different measure space".into(),
            ));
        }
        let n = space.len();
        let p = Exponent::new(self.p.0)?;
        let w = self.w.clone().unwrap_or_else(|| vec![1.0; n]);
        let x = LatticeNorm::weighted_lp(space, p, w)?;
        match &self.mask {
            Some(m) => x.with_mask(Mask::from_indices(n, m)?),
            None => Ok(x),
        }
    }

    pub fn build(&self) -> Result<LatticeNorm> {
        self.build_on(self.space()?)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

/// One `"re,im"` cell; a bare real number is also accepted.
pub fn parse_complex(cell: &str) -> Result<Complex64> {
    match cell.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?)),
        None => Ok(Complex64::new(parse_f64(cell)?, 0.0)),
    }
}

pub fn format_complex(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

/// A complex table from CSV with one `"re,im"` cell per entry. A first row
/// that does not parse is taken as a header.
pub fn read_complex_table<R: Read>(r: R) -> Result<(usize, usize, Vec<Complex64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: Result<Vec<Complex64>> = rec.iter().map(parse_complex).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", i + 1))),
        }
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(Error::Empty("complex table"));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "row {bad} has {} cells, expected {cols}",
            rows[bad].len()
        )));
    }
    let m = rows.len();
    Ok((m, cols, rows.into_iter().flatten().collect()))
}

pub fn write_complex_table<W: Write>(
    w: W,
    rows: usize,
    cols: usize,
    a: &[Complex64],
) -> Result<()> {
    if a.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            got: a.len(),
        });
    }
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..rows {
        writer.write_record(
            a[i * cols..(i + 1) * cols]
                .iter()
                .map(|z| format_complex(*z)),
        )?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringRow {
    pub eps: f64,
    pub greedy_size: usize,
    /// Empty when the exact solver was not run.
    pub exact_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetAuditRow {
    pub eps: f64,
    pub approx_error_max: f64,
    pub bound_2eps: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessRow {
    pub theta: f64,
    pub eps: f64,
    /// Empty for a failed cell.
    pub covering_number: Option<usize>,
    pub sample_count: usize,
    pub seed: u64,
    /// `ok` when the count is at most the one at the next larger eps,
    /// `violated` otherwise, `failed` for a failed cell.
    pub monotone: String,
}

impl CompactnessRow {
    pub fn from_curve(c: &CoveringCurve) -> Vec<Self> {
        let mut prev: Option<usize> = None;
        c.points
            .iter()
            .map(|p| {
                let ok = prev.is_none_or(|q| q <= p.covering_number);
                prev = Some(p.covering_number);
                CompactnessRow {
                    theta: c.theta,
                    eps: p.eps,
                    covering_number: Some(p.covering_number),
                    sample_count: c.sample_count,
                    seed: c.seed,
                    monotone: if ok { "ok" } else { "violated" }.into(),
                }
            })
            .collect()
    }

    pub fn failed(theta: f64, eps: f64, sample_count: usize, seed: u64) -> Self {
        CompactnessRow {
            theta,
            eps,
            covering_number: None,
            sample_count,
            seed,
            monotone: "failed".into(),
        }
    }
}

/// Serialize rows as CSV with a header row.
pub fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn rows_to_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}
