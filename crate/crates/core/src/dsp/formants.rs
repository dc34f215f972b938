use serde::{Deserialize, Serialize};

use super::lpc::{lpc_coefficients, polynomial_roots};
use super::pitch::PitchTrack;
use super::{pre_emphasis, resample};
use crate::corpus::AudioClip;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormantConfig {
    pub lpc_order: usize,
    /// Analysis rate; the clip is resampled to this before LPC.
    pub sample_rate: u32,
    pub pre_emphasis: f64,
    pub window_ms: f64,
    pub max_bandwidth: f64,
    pub f1_range: (f64, f64),
    pub f2_range: (f64, f64),
}

impl Default for FormantConfig {
    fn default() -> Self {
        Self {
            lpc_order: 12,
            sample_rate: 10_000,
            pre_emphasis: 0.97,
            window_ms: 25.0,
            max_bandwidth: 400.0,
            f1_range: (90.0, 1000.0),
            f2_range: (600.0, 3000.0),
        }
    }
}

/// Mean F1/F2 over voiced frames where both candidates were found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormantEstimate {
    pub f1_mean: f64,
    pub f2_mean: f64,
    pub frames_used: usize,
}

/// Candidate resonances of one LPC polynomial: (frequency, bandwidth) in Hz,
/// ascending by frequency, upper half-plane roots only.
fn candidates<T: Real>(coeffs: &[T], fs: f64, max_bw: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = polynomial_roots(coeffs)
        .into_iter()
        .filter(|z| z.im.to_f64_lossy() > 0.0)
        .filter_map(|z| {
            let mag = z.norm().to_f64_lossy();
            if !(mag > 0.0 && mag < 1.0) {
                return None;
            }
            let freq = z.im.to_f64_lossy().atan2(z.re.to_f64_lossy()) * fs / (2.0 * std::f64::consts::PI);
            let bw = -mag.ln() * fs / std::f64::consts::PI;
            (bw < max_bw).then_some((freq, bw))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// F1 is the first candidate in the F1 range; F2 the next one after it in
/// the F2 range.
fn pick_f1_f2(cands: &[(f64, f64)], config: &FormantConfig) -> Option<(f64, f64)> {
    let in_range = |f: f64, (lo, hi): (f64, f64)| f >= lo && f <= hi;
    let i1 = cands.iter().position(|&(f, _)| in_range(f, config.f1_range))?;
    let f2 = cands[i1 + 1..].iter().find(|&&(f, _)| in_range(f, config.f2_range))?;
    Some((cands[i1].0, f2.0))
}

/// Estimates the first two formants from the voiced frames of `track`.
/// Returns `None` when no frame yields both candidates.
pub fn formants<T: Real>(clip: &AudioClip<T>, track: &PitchTrack<T>, config: &FormantConfig) -> Option<FormantEstimate> {
    let src = clip.sample_rate();
    let target = config.sample_rate.min(src);
    let fs = target as f64;
    let signal = pre_emphasis(&resample(clip.samples(), src, target), T::lit(config.pre_emphasis));
    let win_len = ((config.window_ms * 1e-3 * fs).round() as usize).max(config.lpc_order + 2);
    let window: Vec<T> = (0..win_len)
        .map(|n| T::lit(0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (win_len - 1) as f64).cos()))
        .collect();

    let (mut sum1, mut sum2, mut used) = (0.0, 0.0, 0usize);
    let mut frame = vec![T::zero(); win_len];
    for (i, f0) in track.f0.iter().enumerate() {
        if f0.is_none() {
            continue;
        }
        let centre_secs = (track.frame_start(i) as f64 + track.frame_len as f64 / 2.0) / src as f64;
        let centre = (centre_secs * fs).round() as i64;
        let start = centre - (win_len / 2) as i64;
        if start < 0 || start as usize + win_len > signal.len() {
            continue;
        }
        for (k, slot) in frame.iter_mut().enumerate() {
            *slot = signal[start as usize + k] * window[k];
        }
        let Some(a) = lpc_coefficients(&frame, config.lpc_order) else { continue };
        if let Some((f1, f2)) = pick_f1_f2(&candidates(&a, fs, config.max_bandwidth), config) {
            sum1 += f1;
            sum2 += f2;
            used += 1;
        }
    }
    (used > 0).then(|| FormantEstimate { f1_mean: sum1 / used as f64, f2_mean: sum2 / used as f64, frames_used: used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{pitch_track, PitchConfig};

    /// Impulse train at `f0` through two second-order resonators.
    fn two_pole_vowel(f0: f64, poles: [(f64, f64); 2], secs: f64) -> AudioClip<f64> {
        let sr = 44100.0;
        let n = (secs * sr) as usize;
        let period = (sr / f0).round() as usize;
        let mut x: Vec<f64> = (0..n).map(|i| if i % period == 0 { 1.0 } else { 0.0 }).collect();
        for (f, bw) in poles {
            let r = (-std::f64::consts::PI * bw / sr).exp();
            let a1 = 2.0 * r * (2.0 * std::f64::consts::PI * f / sr).cos();
            let a2 = -r * r;
            let mut y = vec![0.0; n];
            for i in 0..n {
                y[i] = x[i] + a1 * if i >= 1 { y[i - 1] } else { 0.0 } + a2 * if i >= 2 { y[i - 2] } else { 0.0 };
            }
            x = y;
        }
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        AudioClip::new(x.into_iter().map(|v| 0.5 * v / peak).collect(), 44100).unwrap()
    }

    #[test]
    fn recovers_two_pole_vowels() {
        for (p1, p2) in [(500.0, 1500.0), (700.0, 1700.0)] {
            let clip = two_pole_vowel(110.0, [(p1, 80.0), (p2, 100.0)], 0.6);
            let track = pitch_track(&clip, &PitchConfig::default());
            let est = formants(&clip, &track, &FormantConfig::default()).expect("formants");
            assert!((est.f1_mean - p1).abs() <= 25.0, "F1 {} vs {p1}", est.f1_mean);
            assert!((est.f2_mean - p2).abs() <= 50.0, "F2 {} vs {p2}", est.f2_mean);
        }
    }

    #[test]
    fn pure_sine_has_at_most_one_candidate_pair() {
        let x: Vec<f64> = (0..22050).map(|i| 0.5 * (2.0 * std::f64::consts::PI * 200.0 * i as f64 / 44100.0).sin()).collect();
        let clip = AudioClip::new(x, 44100).unwrap();
        let track = pitch_track(&clip, &PitchConfig::default());
        // Degenerate spectrum: either missing, or a pair that is not a real resonance structure.
        if let Some(est) = formants(&clip, &track, &FormantConfig::default()) {
            assert!(est.f1_mean >= 90.0 && est.f2_mean <= 3000.0);
        }
    }

    #[test]
    fn unvoiced_track_gives_none() {
        let clip = AudioClip::new(vec![0.0f64; 22050], 44100).unwrap();
        let track = pitch_track(&clip, &PitchConfig::default());
        assert!(formants(&clip, &track, &FormantConfig::default()).is_none());
    }

    #[test]
    fn picks_first_in_range_then_next() {
        let cfg = FormantConfig::default();
        let cands = [(60.0, 50.0), (450.0, 80.0), (800.0, 90.0), (2500.0, 100.0)];
        assert_eq!(pick_f1_f2(&cands, &cfg), Some((450.0, 800.0)));
        assert_eq!(pick_f1_f2(&[(450.0, 80.0)], &cfg), None);
    }
}
