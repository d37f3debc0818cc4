use super::{Channel, EstimatedSeries, NoiseError};

/// Calibration magnitudes below this make the ratio meaningless.
pub const DEFAULT_UNDERFLOW_FLOOR: f64 = 1e-3;

/// `raw / |calib|` step by step with the error of a ratio of independent
/// estimates. Steps where `|calib|` falls below `floor` are flagged and given
/// an infinite error.
pub fn mitigate(raw: &EstimatedSeries, calib: &EstimatedSeries, floor: f64) -> Result<EstimatedSeries, NoiseError> {
    if raw.len() != calib.len() {
        return Err(NoiseError::GridMismatch(raw.len(), calib.len()));
    }
    if calib.channel != Channel::Calibration {
        return Err(NoiseError::WrongChannel { expected: Channel::Calibration, found: calib.channel });
    }
    let mut out = EstimatedSeries::new(Vec::with_capacity(raw.len()), Vec::new(), raw.n_shots, Channel::Mitigated);
    out.flags.clear();
    for t in 0..raw.len() {
        let (r, sr) = (raw.values[t], raw.stderrs[t]);
        let (c, sc) = (calib.values[t].abs(), calib.stderrs[t]);
        if c < floor {
            out.values.push(if c > 0.0 { r / c } else { f64::NAN });
            out.stderrs.push(f64::INFINITY);
            out.flags.push(true);
            continue;
        }
        out.values.push(r / c);
        out.stderrs.push(((sr / c).powi(2) + (r * sc / (c * c)).powi(2)).sqrt());
        out.flags.push(raw.flags[t]);
    }
    Ok(out)
}

/// `f_t = |calib_t|`.
pub fn estimate_f(calib: &EstimatedSeries) -> Result<Vec<f64>, NoiseError> {
    if calib.channel != Channel::Calibration {
        return Err(NoiseError::WrongChannel { expected: Channel::Calibration, found: calib.channel });
    }
    Ok(calib.values.iter().map(|v| v.abs()).collect())
}

/// Number of gates of fidelity `1 - p` whose product is `f`.
pub fn effective_volume(f: f64, p: f64) -> Result<f64, NoiseError> {
    if !(f > 0.0 && f < 1.0 && p > 0.0 && p < 1.0) {
        return Err(NoiseError::Domain { f, p });
    }
    Ok(f.ln() / (-p).ln_1p())
}

/// The global depolarizing map on a traceless observable: every value is
/// scaled by `f_t`, errors alike.
pub fn contaminate(ideal: &EstimatedSeries, f: &[f64], channel: Channel) -> EstimatedSeries {
    assert_eq!(ideal.len(), f.len());
    let values = ideal.values.iter().zip(f).map(|(v, f)| v * f).collect();
    let stderrs = ideal.stderrs.iter().zip(f).map(|(s, f)| s * f).collect();
    EstimatedSeries::new(values, stderrs, ideal.n_shots, channel)
}
