use std::path::Path;

use super::run::{Manifest, MANIFEST};
use super::series::read_series;
use super::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointDiff {
    pub file: String,
    /// `|a - b|` per step of the primary column.
    pub diffs: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub points: Vec<PointDiff>,
    pub max: f64,
    pub mean: f64,
    pub tol: f64,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.max <= self.tol
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("file,max_abs_diff,mean_abs_diff\n");
        for p in &self.points {
            s += &format!("{},{:e},{:e}\n", p.file, p.max, p.mean);
        }
        s += &format!(
            "overall max {:e}, mean {:e}, tol {:e}: {}\n",
            self.max,
            self.mean,
            self.tol,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        s
    }
}

fn manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format { path, message: e.to_string() })
}

/// Step-by-step differences of the series files two runs share. Both runs
/// must cover the same steps, measured set, and series files.
pub fn compare(dir_a: &Path, dir_b: &Path, tol: f64) -> Result<CompareReport> {
    let (ma, mb) = (manifest(dir_a)?, manifest(dir_b)?);
    if ma.n_steps != mb.n_steps {
        return Err(HarnessError::GridMismatch(format!("n_steps {} vs {}", ma.n_steps, mb.n_steps)));
    }
    if ma.measure != mb.measure {
        return Err(HarnessError::GridMismatch("measured sets differ".into()));
    }
    let series = |m: &Manifest| -> Vec<String> { m.files.keys().filter(|k| k.ends_with("_series.csv")).cloned().collect() };
    let (fa, fb) = (series(&ma), series(&mb));
    if fa != fb {
        return Err(HarnessError::GridMismatch(format!("series files differ: {fa:?} vs {fb:?}")));
    }
    let mut points = Vec::with_capacity(fa.len());
    for file in fa {
        let a = read_series(&dir_a.join(&file))?;
        let b = read_series(&dir_b.join(&file))?;
        if a.len() != b.len() {
            return Err(HarnessError::GridMismatch(format!("{file}: {} vs {} steps", a.len(), b.len())));
        }
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x.primary() - y.primary()).abs()).collect();
        let max = diffs.iter().copied().fold(0.0, f64::max);
        let mean = diffs.iter().sum::<f64>() / diffs.len().max(1) as f64;
        points.push(PointDiff { file, diffs, max, mean });
    }
    let max = points.iter().map(|p| p.max).fold(0.0, f64::max);
    let total: usize = points.iter().map(|p| p.diffs.len()).sum();
    let mean = points.iter().flat_map(|p| &p.diffs).sum::<f64>() / total.max(1) as f64;
    Ok(CompareReport { points, max, mean, tol })
}
