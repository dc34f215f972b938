use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{frame_count, pre_emphasis, FrameSeries};
use crate::corpus::{frame_len, hop_len, AudioClip};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    pub n_coeffs: usize,
    pub n_mels: usize,
    /// FFT length; `None` picks the next power of two above the frame.
    pub fft_size: Option<usize>,
    /// When false the cepstrum starts at coefficient 1 instead of 0.
    pub include_c0: bool,
    pub pre_emphasis: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self { n_coeffs: 12, n_mels: 26, fft_size: None, include_c0: true, pre_emphasis: 0.97 }
    }
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filters spanning 0 Hz to Nyquist, one row per filter over
/// the `fft_size / 2 + 1` power-spectrum bins.
pub fn mel_filterbank(n_mels: usize, fft_size: usize, sample_rate: u32) -> Vec<Vec<f64>> {
    let n_bins = fft_size / 2 + 1;
    let nyquist = sample_rate as f64 / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..n_mels + 2).map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64)).collect();
    let bin_hz = |k: usize| k as f64 * sample_rate as f64 / fft_size as f64;
    (0..n_mels)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..n_bins)
                .map(|k| {
                    let f = bin_hz(k);
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= mid {
                        (f - lo) / (mid - lo)
                    } else {
                        (hi - f) / (hi - mid)
                    }
                })
                .collect()
        })
        .collect()
}

/// Mel-frequency cepstral coefficients, one row per 25 ms frame (10 ms hop).
///
/// Per frame: pre-emphasis (applied to the whole clip), periodic Hann window,
/// power spectrum, mel filterbank, natural log, orthonormal DCT-II.
pub fn mfcc<T: Real>(clip: &AudioClip<T>, config: &MfccConfig) -> Result<FrameSeries<T>> {
    let sr = clip.sample_rate();
    let (flen, hop) = (frame_len(sr), hop_len(sr));
    let n_frames = frame_count(clip.len(), flen, hop);
    if n_frames == 0 {
        return Err(Error::TooShort { needed: flen, got: clip.len() });
    }
    let fft_size = match config.fft_size {
        Some(n) if n < flen => return Err(Error::Config(format!("mfcc.fft_size {n} is shorter than the {flen}-sample frame"))),
        Some(n) => n,
        None => flen.next_power_of_two(),
    };
    let first = usize::from(!config.include_c0);
    if config.n_coeffs == 0 || first + config.n_coeffs > config.n_mels {
        return Err(Error::Config(format!("mfcc.n_coeffs {} incompatible with {} mel bands", config.n_coeffs, config.n_mels)));
    }

    let emphasized = pre_emphasis(clip.samples(), T::lit(config.pre_emphasis));
    let window: Vec<T> = (0..flen)
        .map(|n| T::lit(0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / flen as f64).cos()))
        .collect();
    let bank: Vec<Vec<T>> = mel_filterbank(config.n_mels, fft_size, sr)
        .into_iter()
        .map(|row| row.into_iter().map(T::lit).collect())
        .collect();
    // Orthonormal DCT-II basis, restricted to the retained coefficients.
    let m = config.n_mels as f64;
    let dct: Vec<Vec<T>> = (first..first + config.n_coeffs)
        .map(|k| {
            let scale = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            (0..config.n_mels)
                .map(|j| T::lit(scale * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / m).cos()))
                .collect()
        })
        .collect();

    let fft = FftPlanner::<T>::new().plan_fft_forward(fft_size);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); fft_size];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    let n_bins = fft_size / 2 + 1;
    let mut power = vec![T::zero(); n_bins];
    let mut log_mel = vec![T::zero(); config.n_mels];
    let floor = T::lit(1e-12);

    let mut rows = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * hop;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < flen {
                Complex::new(emphasized[start + i] * window[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            };
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (p, c) in power.iter_mut().zip(&buf[..n_bins]) {
            *p = c.norm_sqr();
        }
        for (lm, filt) in log_mel.iter_mut().zip(&bank) {
            let e: T = filt.iter().zip(&power).map(|(&w, &p)| w * p).sum();
            *lm = e.max(floor).ln();
        }
        rows.push(dct.iter().map(|basis| basis.iter().zip(&log_mel).map(|(&b, &l)| b * l).sum()).collect());
    }
    FrameSeries::from_rows(rows, flen, hop, sr)
}
