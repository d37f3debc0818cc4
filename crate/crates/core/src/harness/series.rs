use std::io::Write;
use std::path::Path;

use super::{HarnessError, Result};
use crate::noise::EstimatedSeries;

pub const SERIES_HEADER: [&str; 8] =
    ["step", "raw_mean", "raw_stderr", "calib_mean", "calib_stderr", "mitigated", "mitigated_err", "flag"];

/// One line of a series file. Calibration and mitigated columns are empty
/// when the run has none.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub step: usize,
    pub raw_mean: f64,
    pub raw_stderr: f64,
    pub calib: Option<(f64, f64)>,
    pub mitigated: Option<(f64, f64)>,
    pub flag: bool,
}

impl SeriesRow {
    /// The mitigated value when present, else the raw mean.
    pub fn primary(&self) -> f64 {
        self.mitigated.map_or(self.raw_mean, |m| m.0)
    }
}

pub(super) fn rows(raw: &EstimatedSeries, calib: Option<&EstimatedSeries>, mitigated: Option<&EstimatedSeries>) -> Vec<SeriesRow> {
    (0..raw.len())
        .map(|t| SeriesRow {
            step: t,
            raw_mean: raw.values[t],
            raw_stderr: raw.stderrs[t],
            calib: calib.map(|c| (c.values[t], c.stderrs[t])),
            mitigated: mitigated.map(|m| (m.values[t], m.stderrs[t])),
            flag: mitigated.is_some_and(|m| m.flags[t]),
        })
        .collect()
}

pub(super) fn write_series<W: Write>(w: W, rows: &[SeriesRow]) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SERIES_HEADER)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        wr.write_record([
            r.step.to_string(),
            r.raw_mean.to_string(),
            r.raw_stderr.to_string(),
            opt(r.calib.map(|c| c.0)),
            opt(r.calib.map(|c| c.1)),
            opt(r.mitigated.map(|m| m.0)),
            opt(r.mitigated.map(|m| m.1)),
            u8::from(r.flag).to_string(),
        ])?;
    }
    wr.flush()
}

/// Parses a series file written by a run.
pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>> {
    let fmt = |message: String| HarnessError::Format { path: path.to_owned(), message };
    let mut rd = csv::Reader::from_path(path).map_err(|e| fmt(e.to_string()))?;
    let header = rd.headers().map_err(|e| fmt(e.to_string()))?.clone();
    if header.iter().ne(SERIES_HEADER) {
        return Err(fmt(format!("header must be {}", SERIES_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let num = |k: usize| -> Result<Option<f64>> {
            let s = rec.get(k).unwrap_or("");
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| fmt(format!("row {}: bad number '{s}' in {}", i + 1, SERIES_HEADER[k])))
        };
        let need = |k: usize| num(k)?.ok_or_else(|| fmt(format!("row {}: missing {}", i + 1, SERIES_HEADER[k])));
        let pair = |a: usize, b: usize| -> Result<Option<(f64, f64)>> { Ok(num(a)?.zip(num(b)?)) };
        let step = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| fmt(format!("row {}: bad step", i + 1)))?;
        if step != i {
            return Err(fmt(format!("steps must run 0, 1, 2, ...; row {} has step {step}", i + 1)));
        }
        out.push(SeriesRow {
            step,
            raw_mean: need(1)?,
            raw_stderr: need(2)?,
            calib: pair(3, 4)?,
            mitigated: pair(5, 6)?,
            flag: rec.get(7) == Some("1"),
        });
    }
    Ok(out)
}
