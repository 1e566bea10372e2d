//! CSV output. Every table carries its header, even when empty, and floats
//! use the shortest representation that parses back to the same value.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::auxcalc::AuxRow;
use crate::error::{Error, Result};
use crate::exponents::ExponentReport;
use crate::functional::{ScanResult, ScanRow, Term, TermFit, Verdict};
use crate::simulator::{SimVerdict, SweepRow, TraceRow};

/// A row type with a fixed column list.
pub trait CsvRecord: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

impl CsvRecord for AuxRow {
    const HEADER: &'static [&'static str] = &["t", "B", "beta", "Gamma", "g"];
}

impl CsvRecord for ScanRow {
    const HEADER: &'static [&'static str] = &["term", "r", "h", "g", "product"];
}

impl CsvRecord for TermFit {
    const HEADER: &'static [&'static str] = &["term", "fitted", "predicted"];
}

impl CsvRecord for TraceRow {
    const HEADER: &'static [&'static str] = &["t", "sup_norm", "energy"];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunVerdict {
    Blowup,
    Survived,
    BoundaryContaminated,
}

impl From<&SimVerdict> for RunVerdict {
    fn from(v: &SimVerdict) -> Self {
        match v {
            SimVerdict::Blowup { .. } => RunVerdict::Blowup,
            SimVerdict::Survived { .. } => RunVerdict::Survived,
            SimVerdict::BoundaryContaminated { .. } => RunVerdict::BoundaryContaminated,
        }
    }
}

/// One line of a `p` sweep; `t_star` is empty unless the run blew up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub p: f64,
    pub verdict: RunVerdict,
    pub t_star: Option<f64>,
}

impl From<&SweepRow> for SweepCsvRow {
    fn from(row: &SweepRow) -> Self {
        SweepCsvRow {
            p: row.p,
            verdict: RunVerdict::from(&row.verdict),
            t_star: row.t_star(),
        }
    }
}

impl CsvRecord for SweepCsvRow {
    const HEADER: &'static [&'static str] = &["p", "verdict", "t_star"];
}

/// A scan row joined with its term's fitted and predicted slopes and the
/// overall verdict, as the `scan` command prints it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCsvRow {
    pub alpha_tag: Term,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub product: f64,
    pub log_slope_fitted: f64,
    pub log_slope_predicted: f64,
    pub verdict: Verdict,
}

impl CsvRecord for ScanCsvRow {
    const HEADER: &'static [&'static str] =
        &["alpha_tag", "R", "H", "G", "product", "log_slope_fitted", "log_slope_predicted", "verdict"];
}

pub fn scan_table(result: &ScanResult) -> Vec<ScanCsvRow> {
    result
        .rows
        .iter()
        .filter_map(|row| {
            let fit = result.fit(row.term)?;
            Some(ScanCsvRow {
                alpha_tag: row.term,
                r: row.r,
                h: row.h,
                g: row.g,
                product: row.product,
                log_slope_fitted: fit.fitted,
                log_slope_predicted: fit.predicted,
                verdict: result.verdict,
            })
        })
        .collect()
}

/// Damped-range exponents for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub n: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub p_min: f64,
    pub p_crit: f64,
    pub meaningful: bool,
}

impl ExponentRow {
    pub fn new(n: usize, alpha: f64, gamma: f64, delta: f64, report: &ExponentReport) -> Self {
        ExponentRow { n, alpha, gamma, delta, p_min: report.p_min, p_crit: report.p_crit, meaningful: report.meaningful }
    }
}

impl CsvRecord for ExponentRow {
    const HEADER: &'static [&'static str] = &["n", "alpha", "gamma", "delta", "p_min", "p_crit", "meaningful"];
}

pub fn write_csv<T: CsvRecord, W: Write>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(T::HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<T: CsvRecord>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::InvalidParameter(format!("non-UTF-8 CSV output: {e}")))
}

/// Parses a table written by [`write_csv`], checking the header.
pub fn read_csv<T: CsvRecord, R: Read>(reader: R) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(T::HEADER.iter().copied()) {
        return Err(Error::InvalidParameter(format!(
            "CSV header {:?} does not match expected {:?}",
            header.iter().collect::<Vec<_>>(),
            T::HEADER
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_csv_file<T: CsvRecord>(path: &Path, rows: &[T]) -> Result<()> {
    write_csv(File::create(path)?, rows)
}

pub fn read_csv_file<T: CsvRecord>(path: &Path) -> Result<Vec<T>> {
    read_csv(File::open(path)?)
}
