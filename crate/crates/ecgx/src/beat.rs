//! Segment conditioning and beat extraction: smoothing/baseline removal,
//! z-score normalization, R-peak detection and 180-sample windowing.

use thiserror::Error;

/// Samples per classifier input window.
pub const BEAT_LEN: usize = 180;
/// Samples before the R peak in the extracted window.
pub const BEAT_PRE: usize = 90;

#[derive(Debug, Error, PartialEq)]
pub enum BeatError {
    #[error("segment too short: {0} samples (need at least 2)")]
    TooShort(usize),
    #[error("degenerate segment: standard deviation below 1e-12")]
    DegenerateSegment,
    #[error("beat window around index {r_index} leaves the signal of length {len}")]
    OutOfBounds { r_index: usize, len: usize },
    #[error("sampling rate {0} must be positive and finite")]
    InvalidRate(f64),
}

/// A z-scored segment ready for windowing.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSegment {
    pub values: Vec<f64>,
    pub source_seq: u64,
}

/// A 180-sample window centered on a detected R peak.
#[derive(Debug, Clone, PartialEq)]
pub struct Beat {
    pub samples: Vec<f64>,
    pub r_index: usize,
    pub source_seq: u64,
}

/// Smooths with a 5-point centered moving average (shrunken windows at
/// the edges) and removes baseline with a first difference. Output keeps
/// the input length; constant input maps to all zeros.
pub fn bandpass_filter(values: &[f64], fs_hz: f64) -> Result<Vec<f64>, BeatError> {
    if !(fs_hz > 0.0 && fs_hz.is_finite()) {
        return Err(BeatError::InvalidRate(fs_hz));
    }
    if values.is_empty() {
        return Err(BeatError::TooShort(0));
    }
    let n = values.len();
    let mut smoothed = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(2);
        let hi = (i + 2).min(n - 1);
        let window = &values[lo..=hi];
        smoothed.push(window.iter().sum::<f64>() / window.len() as f64);
    }
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    for i in 1..n {
        out.push(smoothed[i] - smoothed[i - 1]);
    }
    Ok(out)
}

/// Z-scores a sequence with population statistics.
pub fn normalize(values: &[f64], source_seq: u64) -> Result<NormalizedSegment, BeatError> {
    if values.len() < 2 {
        return Err(BeatError::TooShort(values.len()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 {
        return Err(BeatError::DegenerateSegment);
    }
    Ok(NormalizedSegment {
        values: values.iter().map(|v| (v - mean) / std).collect(),
        source_seq,
    })
}

/// Finds R peaks as local maxima above an adaptive threshold.
///
/// The threshold starts at 0.6x the global maximum of the first two
/// seconds and tracks 0.5x the running mean of accepted peak amplitudes.
/// Peaks closer than 200 ms keep only the larger candidate.
pub fn detect_rpeaks(values: &[f64], fs_hz: f64) -> Result<Vec<usize>, BeatError> {
    if !(fs_hz > 0.0 && fs_hz.is_finite()) {
        return Err(BeatError::InvalidRate(fs_hz));
    }
    if values.len() < 3 {
        return Ok(Vec::new());
    }
    let refractory = (0.2 * fs_hz).round() as usize;
    let lead_in = ((2.0 * fs_hz) as usize).min(values.len());
    let init_max = values[..lead_in].iter().cloned().fold(f64::MIN, f64::max);
    let mut threshold = 0.6 * init_max;

    let mut peaks: Vec<usize> = Vec::new();
    let mut amp_sum = 0.0;
    for i in 1..values.len() - 1 {
        let v = values[i];
        if !(v > values[i - 1] && v >= values[i + 1]) {
            continue; // not a local maximum
        }
        if v <= threshold || v <= 0.0 {
            continue;
        }
        match peaks.last() {
            Some(&last) if i - last < refractory => {
                if v > values[last] {
                    amp_sum += v - values[last];
                    *peaks.last_mut().unwrap() = i;
                }
            }
            _ => {
                peaks.push(i);
                amp_sum += v;
            }
        }
        threshold = 0.5 * amp_sum / peaks.len() as f64;
    }
    Ok(peaks)
}

/// Cuts the 180-sample window `[r_index - 90, r_index + 90)`.
pub fn extract_beat(
    values: &[f64],
    r_index: usize,
    source_seq: u64,
) -> Result<Beat, BeatError> {
    if r_index < BEAT_PRE || r_index + (BEAT_LEN - BEAT_PRE) > values.len() {
        return Err(BeatError::OutOfBounds {
            r_index,
            len: values.len(),
        });
    }
    Ok(Beat {
        samples: values[r_index - BEAT_PRE..r_index + (BEAT_LEN - BEAT_PRE)].to_vec(),
        r_index,
        source_seq,
    })
}
