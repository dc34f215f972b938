//! Energy-gate silence removal.

use serde::{Deserialize, Serialize};

use super::audio::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Energy gate parameters. A frame is kept when its RMS level lies within
/// `drop_db` of the loudest frame of the clip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VadConfig {
    pub drop_db: f64,
    /// Kept segments shorter than this are discarded.
    pub min_ms: f64,
    /// Context retained on both sides of every kept segment.
    pub pad_ms: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self { drop_db: 35.0, min_ms: 100.0, pad_ms: 50.0 }
    }
}

/// Analysis frame length (25 ms) in samples.
pub fn frame_len(sample_rate: u32) -> usize {
    ((sample_rate as f64 * 0.025).floor() as usize).max(1)
}

/// Analysis hop (10 ms) in samples.
pub fn hop_len(sample_rate: u32) -> usize {
    ((sample_rate as f64 * 0.010).floor() as usize).max(1)
}

/// RMS level in dB of every 25 ms / 10 ms frame. A clip shorter than one
/// frame is treated as a single frame.
pub fn frame_levels_db<T: Real>(samples: &[T], frame: usize, hop: usize) -> Vec<f64> {
    if samples.len() <= frame {
        return vec![rms_db(samples)];
    }
    let count = (samples.len() - frame) / hop + 1;
    (0..count).map(|i| rms_db(&samples[i * hop..i * hop + frame])).collect()
}

fn rms_db<T: Real>(xs: &[T]) -> f64 {
    let energy: f64 = xs.iter().map(|x| x.to_f64_lossy().powi(2)).sum::<f64>() / xs.len().max(1) as f64;
    if energy > 0.0 {
        10.0 * energy.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Sample ranges kept by the gate, sorted and non-overlapping.
pub fn voiced_regions<T: Real>(clip: &AudioClip<T>, config: &VadConfig) -> Result<Vec<(usize, usize)>> {
    let sr = clip.sample_rate();
    let (frame, hop) = (frame_len(sr), hop_len(sr));
    let n = clip.len();
    let levels = frame_levels_db(clip.samples(), frame, hop);
    let max_db = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max_db.is_finite() {
        return Err(Error::NoVoicedContent);
    }
    let threshold = max_db - config.drop_db;

    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &db) in levels.iter().enumerate() {
        if db <= threshold {
            continue;
        }
        let (start, end) = (i * hop, (i * hop + frame).min(n));
        match runs.last_mut() {
            Some(last) if start <= last.1 => last.1 = last.1.max(end),
            _ => runs.push((start, end)),
        }
    }

    let min_len = (config.min_ms * 1e-3 * sr as f64).round() as usize;
    let pad = (config.pad_ms * 1e-3 * sr as f64).round() as usize;
    let mut kept: Vec<(usize, usize)> = Vec::new();
    for (s, e) in runs.into_iter().filter(|(s, e)| e - s >= min_len.min(n)) {
        let (s, e) = (s.saturating_sub(pad), (e + pad).min(n));
        match kept.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => kept.push((s, e)),
        }
    }
    if kept.is_empty() {
        return Err(Error::NoVoicedContent);
    }
    Ok(kept)
}

/// Concatenates the frames the energy gate keeps.
pub fn remove_silence<T: Real>(clip: &AudioClip<T>, config: &VadConfig) -> Result<AudioClip<T>> {
    let regions = voiced_regions(clip, config)?;
    let samples: Vec<T> = regions.iter().flat_map(|&(s, e)| clip.samples()[s..e].iter().copied()).collect();
    AudioClip::new(samples, clip.sample_rate())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(f: f64, amp: f64, n: usize, sr: u32) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * std::f64::consts::PI * f * i as f64 / sr as f64).sin()).collect()
    }

    #[test]
    fn trailing_zeros_removed() {
        let sr = 44100;
        let mut x = sine(220.0, 0.5, sr as usize, sr);
        x.extend(std::iter::repeat(0.0).take(sr as usize));
        let clip = AudioClip::new(x, sr).unwrap();
        let frame = frame_len(sr) as f64 / sr as f64;

        let no_pad = VadConfig { pad_ms: 0.0, ..VadConfig::default() };
        let out = remove_silence(&clip, &no_pad).unwrap();
        assert!((out.duration_secs() - 1.0).abs() <= frame, "{}", out.duration_secs());

        // With the default padding the extra context is bounded by the pad.
        let cfg = VadConfig::default();
        let out = remove_silence(&clip, &cfg).unwrap();
        assert!((out.duration_secs() - 1.0 - cfg.pad_ms * 1e-3).abs() <= frame, "{}", out.duration_secs());
    }

    #[test]
    fn all_zero_is_error() {
        let clip = AudioClip::new(vec![0.0f64; 44100], 44100).unwrap();
        assert!(matches!(remove_silence(&clip, &VadConfig::default()), Err(Error::NoVoicedContent)));
    }

    #[test]
    fn fully_voiced_is_identity() {
        let sr = 44100;
        let clip = AudioClip::new(sine(150.0, 0.3, 30_000, sr), sr).unwrap();
        let out = remove_silence(&clip, &VadConfig::default()).unwrap();
        assert_eq!(out, clip);
    }

    #[test]
    fn short_bursts_dropped() {
        let sr = 16000;
        let mut x = vec![0.0; 16000];
        // 30 ms burst: shorter than the 100 ms minimum once framed.
        x[8000..8480].copy_from_slice(&sine(300.0, 0.5, 480, sr));
        let mut long = sine(200.0, 0.5, 8000, sr);
        long.extend(x);
        let clip = AudioClip::new(long, sr).unwrap();
        let regions = voiced_regions(&clip, &VadConfig::default()).unwrap();
        assert_eq!(regions.len(), 1);
        assert!(regions[0].1 < 8000 + 2000);
    }

    #[test]
    fn idempotent_and_shrinking() {
        let sr = 22050;
        let mut x = sine(180.0, 0.4, 10_000, sr);
        x.extend(vec![0.0; 12_000]);
        x.extend(sine(240.0, 0.2, 9_000, sr));
        x.extend(vec![0.0; 5_000]);
        let clip = AudioClip::new(x, sr).unwrap();
        let cfg = VadConfig::default();
        let once = remove_silence(&clip, &cfg).unwrap();
        let twice = remove_silence(&once, &cfg).unwrap();
        assert!(once.len() <= clip.len());
        let hop = hop_len(sr);
        assert!(once.len().abs_diff(twice.len()) <= hop, "{} vs {}", once.len(), twice.len());
    }
}
