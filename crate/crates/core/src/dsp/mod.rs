//! Frame-level spectral analysis: MFCCs, Savitzky-Golay derivatives, pitch
//! tracking and formant estimation.

mod formants;
mod lpc;
mod mfcc;
mod pitch;
mod resample;
mod savgol;

use serde::{Deserialize, Serialize};

pub use formants::{formants, FormantConfig, FormantEstimate};
pub use lpc::{lpc_coefficients, polynomial_roots};
pub use mfcc::{mel_filterbank, mfcc, MfccConfig};
pub use pitch::{normalized_autocorrelation, pitch_track, PitchConfig, PitchTrack};
pub(crate) use pitch::{parabolic, Autocorrelator};
pub use resample::resample;
pub use savgol::{savgol_coefficients, sg_derivative, SgConfig};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A frames × coefficients matrix with its framing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries<T> {
    values: Vec<T>,
    n_frames: usize,
    n_coeffs: usize,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl<T: Real> FrameSeries<T> {
    /// Builds a series from row-major values.
    pub fn from_rows(rows: Vec<Vec<T>>, frame_len: usize, hop: usize, sample_rate: u32) -> Result<Self> {
        let n_frames = rows.len();
        let n_coeffs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_coeffs) {
            return Err(Error::Config("ragged frame rows".into()));
        }
        let values: Vec<T> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite frame value".into()));
        }
        Ok(Self { values, n_frames, n_coeffs, frame_len, hop, sample_rate })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_coeffs(&self) -> usize {
        self.n_coeffs
    }

    pub fn row(&self, frame: usize) -> &[T] {
        &self.values[frame * self.n_coeffs..(frame + 1) * self.n_coeffs]
    }

    pub fn get(&self, frame: usize, coeff: usize) -> T {
        self.values[frame * self.n_coeffs + coeff]
    }

    pub fn column(&self, coeff: usize) -> Vec<T> {
        (0..self.n_frames).map(|f| self.get(f, coeff)).collect()
    }

    /// Population variance of every coefficient over frames.
    pub fn column_variances(&self) -> Vec<T> {
        (0..self.n_coeffs).map(|c| crate::scalar::population_variance(&self.column(c))).collect()
    }

    pub(crate) fn map_columns(&self, f: impl Fn(&[T]) -> Vec<T>) -> Self {
        let mut values = vec![T::zero(); self.values.len()];
        for c in 0..self.n_coeffs {
            let out = f(&self.column(c));
            for (t, v) in out.into_iter().enumerate() {
                values[t * self.n_coeffs + c] = v;
            }
        }
        Self { values, ..self.clone() }
    }
}

/// Number of full frames: `floor((len - frame_len) / hop) + 1`, or zero when
/// the signal is shorter than one frame.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len || hop == 0 {
        0
    } else {
        (len - frame_len) / hop + 1
    }
}

/// Every tunable of the acoustic analysis, grouped by stage.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub vad: crate::corpus::VadConfig,
    pub mfcc: MfccConfig,
    pub sg: SgConfig,
    pub pitch: PitchConfig,
    pub formant: FormantConfig,
    pub vq: crate::voicequality::MarkConfig,
}

pub(crate) fn pre_emphasis<T: Real>(xs: &[T], coeff: T) -> Vec<T> {
    let mut out = Vec::with_capacity(xs.len());
    let mut prev = T::zero();
    for (i, &x) in xs.iter().enumerate() {
        out.push(if i == 0 { x } else { x - coeff * prev });
        prev = x;
    }
    out
}
