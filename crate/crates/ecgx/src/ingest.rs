//! Sample acquisition: synthetic ECG generation, file replay and
//! grouping of the byte stream into 300-sample segments.
//!
//! The wire representation of a signal is a headerless byte stream, one
//! unsigned 8-bit sample per byte at the declared sampling rate. The
//! synthetic generator additionally reports the exact R-peak indices it
//! placed, written as one decimal index per line in a sidecar file.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Samples per segment; ~0.6 s at 500 Hz.
pub const SEGMENT_LEN: usize = 300;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("sampling rate {0} must be positive and finite")]
    InvalidRate(f64),
    #[error("heart rate {0} bpm outside [30, 220]")]
    InvalidHeartRate(f64),
    #[error("noise standard deviation {0} must be nonnegative and finite")]
    InvalidNoise(f64),
    #[error("duration {0} must be nonnegative and finite")]
    InvalidDuration(f64),
    #[error("reading signal file: {0}")]
    Io(#[from] std::io::Error),
}

/// Maps a raw ADC byte to a signed count relative to midscale.
pub fn center(raw: u8) -> i8 {
    (raw as i16 - 128) as i8
}

/// Inverse of [`center`].
pub fn uncenter(sample: i8) -> u8 {
    (sample as i16 + 128) as u8
}

/// One 300-sample acquisition unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub samples: Vec<i8>,
}

impl Segment {
    /// The segment's centered samples reinterpreted as raw bytes for the
    /// cipher (two's complement pass-through).
    pub fn as_bytes(&self) -> Vec<u8> {
        self.samples.iter().map(|&s| s as u8).collect()
    }

    pub fn from_bytes(seq: u64, timestamp_ms: u64, bytes: &[u8]) -> Self {
        Self {
            seq,
            timestamp_ms,
            samples: bytes.iter().map(|&b| b as i8).collect(),
        }
    }
}

/// Accumulates raw samples and emits a [`Segment`] after every 300.
/// A trailing partial group is held back, never emitted.
#[derive(Debug)]
pub struct Segmentizer {
    fs_hz: f64,
    pending: Vec<i8>,
    next_seq: u64,
}

impl Segmentizer {
    pub fn new(fs_hz: f64) -> Result<Self, IngestError> {
        if !(fs_hz > 0.0 && fs_hz.is_finite()) {
            return Err(IngestError::InvalidRate(fs_hz));
        }
        Ok(Self {
            fs_hz,
            pending: Vec::with_capacity(SEGMENT_LEN),
            next_seq: 0,
        })
    }

    /// Feeds one raw sample; returns a segment when the 300th arrives.
    pub fn push(&mut self, raw: u8) -> Option<Segment> {
        self.pending.push(center(raw));
        if self.pending.len() < SEGMENT_LEN {
            return None;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let timestamp_ms =
            (seq as f64 * SEGMENT_LEN as f64 * 1000.0 / self.fs_hz).round() as u64;
        Some(Segment {
            seq,
            timestamp_ms,
            samples: std::mem::replace(&mut self.pending, Vec::with_capacity(SEGMENT_LEN)),
        })
    }

    /// Samples currently held back (always < 300).
    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }
}

/// Groups a finite sample stream into segments, dropping the remainder.
pub fn segmentize(
    stream: impl IntoIterator<Item = u8>,
    fs_hz: f64,
) -> Result<Vec<Segment>, IngestError> {
    let mut seg = Segmentizer::new(fs_hz)?;
    Ok(stream.into_iter().filter_map(|b| seg.push(b)).collect())
}

/// Parameters of the synthetic ECG generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub fs_hz: f64,
    pub heart_rate_bpm: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub duration_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            fs_hz: 500.0,
            heart_rate_bpm: 72.0,
            noise_std: 2.0,
            seed: 1,
            duration_s: 60.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if !(self.fs_hz > 0.0 && self.fs_hz.is_finite()) {
            return Err(IngestError::InvalidRate(self.fs_hz));
        }
        if !(30.0..=220.0).contains(&self.heart_rate_bpm) {
            return Err(IngestError::InvalidHeartRate(self.heart_rate_bpm));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(IngestError::InvalidNoise(self.noise_std));
        }
        if !(self.duration_s >= 0.0 && self.duration_s.is_finite()) {
            return Err(IngestError::InvalidDuration(self.duration_s));
        }
        Ok(())
    }
}

/// (time offset s, Gaussian width s, relative amplitude) of the P, Q, R,
/// S and T deflections relative to the R peak.
const WAVES: [(f64, f64, f64); 5] = [
    (-0.20, 0.025, 0.17),
    (-0.03, 0.010, -0.25),
    (0.00, 0.012, 1.00),
    (0.03, 0.010, -0.85),
    (0.25, 0.060, 0.35),
];

/// Offset of the first R peak from stream start, seconds.
const FIRST_BEAT_S: f64 = 0.3;
/// Midscale offset of the clean waveform in ADC counts. 127 keeps the
/// high bit of the dithered baseline balanced, which the ciphertext
/// randomness inherits.
const BASELINE: f64 = 127.0;
/// Counts per unit of relative amplitude; the clean signal spans roughly
/// [73, 191].
const SCALE: f64 = 64.0;

/// Generates a noisy synthetic ECG as raw bytes plus the ground-truth
/// R-peak sample indices used during synthesis. Deterministic per seed.
pub fn synth_ecg(config: &SynthConfig) -> Result<(Vec<u8>, Vec<usize>), IngestError> {
    config.validate()?;
    let n = (config.duration_s * config.fs_hz).round() as usize;
    let beat_period = 60.0 / config.heart_rate_bpm;

    // Beat schedule: R peaks at FIRST_BEAT_S + k * period, kept while
    // inside the stream. Bumps from one extra beat either side keep the
    // waveform continuous at the edges.
    let mut rpeaks = Vec::new();
    let mut beat_centers = Vec::new();
    let mut k = 0u64;
    loop {
        let center_s = FIRST_BEAT_S + k as f64 * beat_period;
        let idx = (center_s * config.fs_hz).round() as usize;
        if idx >= n {
            beat_centers.push(center_s); // edge bump only
            break;
        }
        rpeaks.push(idx);
        beat_centers.push(center_s);
        k += 1;
    }
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise_std.max(f64::MIN_POSITIVE)).unwrap();

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / config.fs_hz;
        let mut v = 0.0;
        for &c in &beat_centers {
            for &(off, width, amp) in &WAVES {
                let d = t - (c + off);
                if d.abs() < 6.0 * width {
                    v += amp * (-d * d / (2.0 * width * width)).exp();
                }
            }
        }
        let mut y = BASELINE + SCALE * v;
        if config.noise_std > 0.0 {
            y += noise.sample(&mut rng);
        }
        samples.push(y.round().clamp(0.0, 255.0) as u8);
    }
    Ok((samples, rpeaks))
}

/// Replays a headerless signal file as a sample stream. When paced,
/// delivery approximates `1/fs_hz` wall-clock spacing per sample.
pub struct FileReplay {
    reader: BufReader<File>,
    fs_hz: f64,
    paced: bool,
    start: Instant,
    delivered: u64,
}

impl FileReplay {
    pub fn open(path: &Path, fs_hz: f64, paced: bool) -> Result<Self, IngestError> {
        if !(fs_hz > 0.0 && fs_hz.is_finite()) {
            return Err(IngestError::InvalidRate(fs_hz));
        }
        Ok(Self {
            reader: BufReader::new(File::open(path)?),
            fs_hz,
            paced,
            start: Instant::now(),
            delivered: 0,
        })
    }
}

impl Iterator for FileReplay {
    type Item = Result<u8, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut byte = [0u8; 1];
        match self.reader.read(&mut byte) {
            Ok(0) => None,
            Ok(_) => {
                if self.paced {
                    let due = self.start
                        + Duration::from_secs_f64(self.delivered as f64 / self.fs_hz);
                    let now = Instant::now();
                    if due > now {
                        std::thread::sleep(due - now);
                    }
                }
                self.delivered += 1;
                Some(Ok(byte[0]))
            }
            Err(e) => Some(Err(IngestError::Io(e))),
        }
    }
}

/// Writes the ground-truth sidecar: one decimal R-peak index per line.
pub fn write_rpeak_sidecar(path: &Path, rpeaks: &[usize]) -> Result<(), IngestError> {
    use std::io::Write;
    let mut f = File::create(path)?;
    for &idx in rpeaks {
        writeln!(f, "{idx}")?;
    }
    Ok(())
}

/// Reads a ground-truth sidecar written by [`write_rpeak_sidecar`].
pub fn read_rpeak_sidecar(path: &Path) -> Result<Vec<usize>, IngestError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim().parse::<usize>().map_err(|e| {
                IngestError::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("bad R-peak index {l:?}: {e}"),
                ))
            })
        })
        .collect()
}
