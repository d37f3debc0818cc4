//! Averaged magnetisation, its discrete Fourier spectrum, and extraction of
//! the period-doubling and quasicrystal side peaks.

use std::io::Write;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::FloquetParams;
use crate::lattice::MeasureSet;

pub const DEFAULT_N_MAX: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("measured set is empty")]
    EmptySet,
    #[error("series has {len} points, the transform needs {n_max}")]
    SeriesTooShort { len: usize, n_max: usize },
    #[error("n_max must be at least 2")]
    BadNMax,
    #[error("step {step} has {found} values, expected {expected}")]
    RaggedSeries { step: usize, expected: usize, found: usize },
    #[error("envelope prediction needs a nonzero coupling angle")]
    ZeroCoupling,
    #[error("peak window half-width {0} is outside (0, 0.5]")]
    BadWindow(f64),
}

pub type Result<T, E = AnalysisError> = std::result::Result<T, E>;

/// `Z̄` per step, starting at step 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl TimeSeries {
    pub fn exact(values: Vec<f64>) -> Self {
        let errors = vec![0.0; values.len()];
        Self { values, errors }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Mean of `<Z_j>` over `set`. `snapshots[n][j]` is qubit `j` at step `n`;
/// `errors`, when given, has the same layout and is propagated as independent.
pub fn averaged_z(snapshots: &[Vec<f64>], errors: Option<&[Vec<f64>]>, set: &MeasureSet) -> Result<TimeSeries> {
    if set.is_empty() {
        return Err(AnalysisError::EmptySet);
    }
    let a = set.len() as f64;
    let max_q = *set.qubits().iter().max().expect("non-empty");
    let mut out = TimeSeries { values: Vec::with_capacity(snapshots.len()), errors: Vec::with_capacity(snapshots.len()) };
    for (n, row) in snapshots.iter().enumerate() {
        if row.len() <= max_q {
            return Err(AnalysisError::RaggedSeries { step: n, expected: max_q + 1, found: row.len() });
        }
        out.values.push(set.qubits().iter().map(|&q| row[q]).sum::<f64>() / a);
        let err = match errors {
            Some(e) => set.qubits().iter().map(|&q| e[n][q].powi(2)).sum::<f64>().sqrt() / a,
            None => 0.0,
        };
        out.errors.push(err);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    pub freq: f64,
    pub amp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peaks {
    pub main: Peak,
    pub side_plus: Option<Peak>,
    pub side_minus: Option<Peak>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// `ωT/(2π) = k / n_max`.
    pub freqs: Vec<f64>,
    pub amps: Vec<f64>,
    pub n_max: usize,
    pub peaks: Peaks,
}

impl Spectrum {
    fn peak(&self, k: usize) -> Peak {
        Peak { bin: k, freq: self.freqs[k], amp: self.amps[k] }
    }

    /// Columns `k,omega_over_2pi,amplitude`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "omega_over_2pi", "amplitude"])?;
        for k in 0..self.n_max {
            wr.write_record([k.to_string(), format!("{:.17e}", self.freqs[k]), format!("{:.17e}", self.amps[k])])?;
        }
        wr.flush()
    }
}

/// `|n_max⁻¹ Σ_n x_n e^{-2πi k n / n_max}|` over the first `n_max` points.
/// The main peak is the largest amplitude with `k ≥ 1`; side peaks are left
/// for [`find_dtqc_peaks`].
pub fn dft(series: &[f64], n_max: usize) -> Result<Spectrum> {
    if n_max < 2 {
        return Err(AnalysisError::BadNMax);
    }
    if series.len() < n_max {
        return Err(AnalysisError::SeriesTooShort { len: series.len(), n_max });
    }
    let mut buf: Vec<Complex<f64>> = series[..n_max].iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n_max).process(&mut buf);
    let amps: Vec<f64> = buf.iter().map(|z| z.norm() / n_max as f64).collect();
    let freqs = (0..n_max).map(|k| k as f64 / n_max as f64).collect();
    let main = argmax(&amps, 1..n_max);
    let mut spec = Spectrum {
        freqs,
        amps,
        n_max,
        peaks: Peaks { main: Peak { bin: 0, freq: 0.0, amp: 0.0 }, side_plus: None, side_minus: None },
    };
    spec.peaks.main = spec.peak(main);
    Ok(spec)
}

/// First index of the largest value in `range`.
fn argmax(amps: &[f64], range: std::ops::Range<usize>) -> usize {
    range.fold(None, |best: Option<usize>, k| match best {
        Some(b) if amps[b] >= amps[k] => Some(b),
        _ => Some(k),
    })
    .expect("non-empty range")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakOptions {
    /// Half-width of the search window around `ωT/(2π) = 0.5`.
    pub window: f64,
    /// A side peak must exceed this multiple of the window median.
    pub prominence: f64,
    /// ... and this fraction of the main amplitude (rejects round-off).
    pub rel_floor: f64,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self { window: 0.25, prominence: 3.0, rel_floor: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtqcPeaks {
    pub peaks: Peaks,
    /// `(ω₊ − ω₋)/2` in `ωT/(2π)` units.
    pub omega_env: Option<f64>,
    pub a_side: Option<f64>,
}

impl DtqcPeaks {
    pub fn has_side_peaks(&self) -> bool {
        self.omega_env.is_some()
    }

    /// Flat `key = value` block; absent values print as `none`.
    pub fn to_text(&self) -> String {
        let f = |x: Option<f64>| x.map_or_else(|| "none".to_string(), |v| format!("{v:.6}"));
        let p = &self.peaks;
        format!(
            "main_freq = {:.6}\nmain_amp = {:.6e}\nomega_plus = {}\na_plus = {}\nomega_minus = {}\na_minus = {}\nomega_env = {}\na_side = {}\n",
            p.main.freq,
            p.main.amp,
            f(p.side_plus.map(|s| s.freq)),
            f(p.side_plus.map(|s| s.amp)),
            f(p.side_minus.map(|s| s.freq)),
            f(p.side_minus.map(|s| s.amp)),
            f(self.omega_env),
            f(self.a_side),
        )
    }
}

/// Side peaks are the largest local maxima strictly above and strictly below
/// the 0.5 bin inside the window that clear
/// `max(prominence · median, rel_floor · main)`, the median taken over the
/// window without the 0.5 bin and the main bin. Both must exist for an
/// envelope frequency to be reported.
pub fn find_dtqc_peaks(spec: &mut Spectrum, opts: &PeakOptions) -> Result<DtqcPeaks> {
    if !(opts.window > 0.0 && opts.window <= 0.5) {
        return Err(AnalysisError::BadWindow(opts.window));
    }
    let n = spec.n_max;
    let amps = &spec.amps;
    let center = n as f64 / 2.0;
    let half = opts.window * n as f64;
    let in_window = |k: usize| k >= 1 && k < n && (k as f64 - center).abs() < half - 1e-9;
    let is_center = |k: usize| (k as f64 - center).abs() < 0.5;
    let main = spec.peaks.main.bin;

    let mut rest: Vec<f64> = (1..n).filter(|&k| in_window(k) && !is_center(k) && k != main).map(|k| amps[k]).collect();
    rest.sort_by(f64::total_cmp);
    let median = if rest.is_empty() {
        0.0
    } else if rest.len() % 2 == 1 {
        rest[rest.len() / 2]
    } else {
        0.5 * (rest[rest.len() / 2 - 1] + rest[rest.len() / 2])
    };
    let threshold = (opts.prominence * median).max(opts.rel_floor * spec.peaks.main.amp);

    let local_max = |k: usize| {
        let left = if k > 0 { amps[k - 1] } else { f64::NEG_INFINITY };
        let right = if k + 1 < n { amps[k + 1] } else { f64::NEG_INFINITY };
        amps[k] > left && amps[k] >= right
    };
    let best = |cands: Vec<usize>| -> Option<usize> {
        cands
            .into_iter()
            .filter(|&k| local_max(k) && amps[k] > threshold)
            .fold(None, |b: Option<usize>, k| match b {
                Some(b) if amps[b] >= amps[k] => Some(b),
                _ => Some(k),
            })
    };
    let below = best((1..n).filter(|&k| in_window(k) && (k as f64) < center - 0.25).collect());
    let above = best((1..n).filter(|&k| in_window(k) && (k as f64) > center + 0.25).collect());

    let (side_minus, side_plus) = match (below, above) {
        (Some(m), Some(p)) => (Some(spec.peak(m)), Some(spec.peak(p))),
        _ => (None, None),
    };
    spec.peaks.side_minus = side_minus;
    spec.peaks.side_plus = side_plus;
    let (omega_env, a_side) = match (side_minus, side_plus) {
        (Some(m), Some(p)) => (Some((p.freq - m.freq) / 2.0), Some(p.amp + m.amp)),
        _ => (None, None),
    };
    Ok(DtqcPeaks { peaks: spec.peaks, omega_env, a_side })
}

/// `ε / (2|θ_J|)` in `ωT/(2π)` units.
pub fn predicted_env(params: &FloquetParams) -> Result<f64> {
    if params.theta_j == 0.0 {
        return Err(AnalysisError::ZeroCoupling);
    }
    Ok(params.epsilon() / (2.0 * params.theta_j.abs()))
}
