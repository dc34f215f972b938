use std::ops::Range;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::frame_count;
use crate::corpus::{frame_len, frame_levels_db, hop_len, AudioClip};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PitchConfig {
    pub fmin: f64,
    pub fmax: f64,
    /// Minimum normalized autocorrelation peak for a voiced frame.
    pub voicing_threshold: f64,
    /// Bonus per octave towards shorter lags; breaks ties between a period
    /// and its multiples.
    pub octave_cost: f64,
    /// A peak near half or a third of the chosen lag replaces it when it
    /// reaches this fraction of the chosen peak.
    pub subharmonic_ratio: f64,
    /// Path cost per octave of F0 change between consecutive voiced frames.
    pub octave_jump_cost: f64,
    /// Frames quieter than the loudest frame minus this many dB are unvoiced.
    pub silence_drop_db: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self { fmin: 75.0, fmax: 500.0, voicing_threshold: 0.45, octave_cost: 0.01, subharmonic_ratio: 0.8, octave_jump_cost: 0.35, silence_drop_db: 35.0 }
    }
}

/// Per-frame fundamental frequency on the 25 ms / 10 ms analysis grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack<T> {
    /// `None` marks an unvoiced frame.
    pub f0: Vec<Option<T>>,
    /// Interpolated autocorrelation peak of every frame (zero when silent).
    pub strength: Vec<T>,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
    pub fmin: f64,
    pub fmax: f64,
}

impl<T: Real> PitchTrack<T> {
    pub fn n_frames(&self) -> usize {
        self.f0.len()
    }

    pub fn voicing(&self) -> Vec<bool> {
        self.f0.iter().map(Option::is_some).collect()
    }

    pub fn voiced_f0(&self) -> Vec<T> {
        self.f0.iter().flatten().copied().collect()
    }

    pub fn voiced_fraction(&self) -> f64 {
        if self.f0.is_empty() {
            return 0.0;
        }
        self.f0.iter().filter(|f| f.is_some()).count() as f64 / self.f0.len() as f64
    }

    /// Maximal runs of consecutive voiced frames.
    pub fn voiced_runs(&self) -> Vec<Range<usize>> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, f) in self.f0.iter().enumerate() {
            match (f.is_some(), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(s..self.f0.len());
        }
        runs
    }

    /// First sample of frame `i`.
    pub fn frame_start(&self, i: usize) -> usize {
        i * self.hop
    }
}

/// FFT-backed normalized autocorrelation of fixed-length frames.
pub(crate) struct Autocorrelator<T: Real> {
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
    prefix: Vec<T>,
    raw: Vec<T>,
}

impl<T: Real> Autocorrelator<T> {
    pub(crate) fn new(frame: usize, max_lag: usize) -> Self {
        let n = (frame + max_lag + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self {
            n,
            fwd,
            inv,
            buf: vec![Complex::new(T::zero(), T::zero()); n],
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            prefix: Vec::new(),
            raw: Vec::new(),
        }
    }

    /// `r[τ] = Σ x[n]x[n+τ] / sqrt(Σ x[n]² · Σ x[n+τ]²)` over the overlap,
    /// for `τ` in `0..=max_lag`. The frame mean is removed first.
    pub(crate) fn compute(&mut self, frame: &[T], max_lag: usize, out: &mut Vec<T>) {
        let len = frame.len();
        let mean = frame.iter().copied().sum::<T>() / T::from_usize_lossy(len.max(1));
        for (i, slot) in self.buf.iter_mut().enumerate() {
            *slot = Complex::new(if i < len { frame[i] - mean } else { T::zero() }, T::zero());
        }
        self.prefix.clear();
        self.prefix.push(T::zero());
        let mut acc = T::zero();
        for &x in frame {
            acc += (x - mean) * (x - mean);
            self.prefix.push(acc);
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        for c in self.buf.iter_mut() {
            *c = Complex::new(c.norm_sqr(), T::zero());
        }
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = T::from_usize_lossy(self.n);
        out.clear();
        self.raw.clear();
        let tiny = T::lit(1e-30);
        for lag in 0..=max_lag.min(len.saturating_sub(1)) {
            let num = self.buf[lag].re / scale;
            self.raw.push(num);
            let e1 = self.prefix[len - lag];
            let e2 = self.prefix[len] - self.prefix[lag];
            let den = (e1 * e2).sqrt();
            out.push(if den > tiny { num / den } else { T::zero() });
        }
    }
}

impl<T: Real> Autocorrelator<T> {
    /// For the last computed frame: the per-lag mean product relative to the
    /// whole frame's mean power, `(Σ x[n]x[n+τ] / (N-τ)) / (Σ x² / N)`.
    /// Unlike the overlap normalization this stays small when the energy is
    /// concentrated in a transient at one end of the frame.
    pub(crate) fn whole_frame(&self, out: &mut Vec<T>) {
        out.clear();
        let len = self.prefix.len() - 1;
        let power = self.prefix[len] / T::from_usize_lossy(len.max(1));
        for (lag, &num) in self.raw.iter().enumerate() {
            let v = num / T::from_usize_lossy(len - lag) / power;
            out.push(if power > T::lit(1e-30) { v } else { T::zero() });
        }
    }
}

/// Normalized autocorrelation of one frame for lags `0..=max_lag`.
pub fn normalized_autocorrelation<T: Real>(frame: &[T], max_lag: usize) -> Vec<T> {
    let mut ac = Autocorrelator::new(frame.len(), max_lag);
    let mut out = Vec::new();
    ac.compute(frame, max_lag, &mut out);
    out
}

/// Parabolic peak refinement around index `i`: returns (offset, peak value).
pub(crate) fn parabolic<T: Real>(left: T, mid: T, right: T) -> (T, T) {
    let denom = left - T::lit(2.0) * mid + right;
    if denom.abs() < T::lit(1e-15) {
        return (T::zero(), mid);
    }
    let delta = (T::lit(0.5) * (left - right) / denom).max(-T::lit(0.5)).min(T::lit(0.5));
    (delta, mid - T::lit(0.25) * (left - right) * delta)
}

/// Lag search bounds in samples for the configured F0 band.
pub(crate) fn lag_bounds(sample_rate: u32, fmin: f64, fmax: f64) -> (usize, usize) {
    let sr = sample_rate as f64;
    (((sr / fmax).floor() as usize).max(2), (sr / fmin).ceil() as usize)
}

/// Highest interpolated local maximum of `r` within 4% of `target` lag.
fn local_peak_near<T: Real>(r: &[T], target: f64, lag_lo: usize) -> Option<(f64, T)> {
    let lo = ((target * 0.96).floor() as usize).max(lag_lo).max(1);
    let hi = ((target * 1.04).ceil() as usize).min(r.len().saturating_sub(2));
    let mut best: Option<(f64, T)> = None;
    for lag in lo..=hi {
        if r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] {
            let (delta, peak) = parabolic(r[lag - 1], r[lag], r[lag + 1]);
            if best.map_or(true, |(_, p)| peak > p) {
                best = Some((lag as f64 + delta.to_f64_lossy(), peak));
            }
        }
    }
    best
}

/// Autocorrelation pitch tracker on the 25 ms / 10 ms grid.
///
/// Candidate strengths are the smaller of the overlap-normalized and the
/// whole-frame-normalized autocorrelation. A frame is voiced when its best
/// peak in the F0 band reaches the voicing threshold and its level is within
/// `silence_drop_db` of the loudest frame. Within each voiced run the F0
/// path is chosen among the frames' candidate peaks (parabolically
/// interpolated) by a Viterbi search penalizing octave jumps.
pub fn pitch_track<T: Real>(clip: &AudioClip<T>, config: &PitchConfig) -> PitchTrack<T> {
    let sr = clip.sample_rate();
    let (flen, hop) = (frame_len(sr), hop_len(sr));
    let n_frames = frame_count(clip.len(), flen, hop);
    let (lag_lo, lag_hi) = lag_bounds(sr, config.fmin, config.fmax);
    let lag_hi = lag_hi.min(flen.saturating_sub(2));
    let mut track = PitchTrack {
        f0: vec![None; n_frames],
        strength: vec![T::zero(); n_frames],
        frame_len: flen,
        hop,
        sample_rate: sr,
        fmin: config.fmin,
        fmax: config.fmax,
    };
    if n_frames == 0 || lag_hi <= lag_lo + 1 {
        return track;
    }
    let levels = frame_levels_db(clip.samples(), flen, hop);
    let loudest = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = loudest - config.silence_drop_db;

    let mut ac = Autocorrelator::new(flen, lag_hi + 1);
    let mut r = Vec::with_capacity(lag_hi + 2);
    let mut whole = Vec::with_capacity(lag_hi + 2);
    let srf = sr as f64;
    let threshold = T::lit(config.voicing_threshold);
    // Per voiced frame: candidate (lag, peak, score) list.
    let mut cands: Vec<Vec<(f64, T, f64)>> = vec![Vec::new(); n_frames];
    for i in 0..n_frames {
        if !levels[i].is_finite() || levels[i] <= floor {
            continue;
        }
        let frame = &clip.samples()[i * hop..i * hop + flen];
        ac.compute(frame, lag_hi + 1, &mut r);
        ac.whole_frame(&mut whole);
        for (a, &b) in r.iter_mut().zip(&whole) {
            *a = a.min(b);
        }
        let mut list: Vec<(f64, T, f64)> = Vec::new();
        for lag in lag_lo..=lag_hi {
            if !(r[lag] > r[lag - 1] && r[lag] >= r[lag + 1]) {
                continue;
            }
            let (delta, peak) = parabolic(r[lag - 1], r[lag], r[lag + 1]);
            let lag_f = lag as f64 + delta.to_f64_lossy();
            let f0 = srf / lag_f;
            if f0 < config.fmin || f0 > config.fmax {
                continue;
            }
            let score = peak.to_f64_lossy() - config.octave_cost * (config.fmin * lag_f / srf).log2();
            list.push((lag_f, peak, score));
        }
        let Some(best) = (0..list.len()).max_by(|&a, &b| list[a].2.total_cmp(&list[b].2)) else { continue };
        let (mut lag_f, mut peak, best_score) = list[best];
        for k in [3.0, 2.0] {
            if let Some((l, p)) = local_peak_near(&r, lag_f / k, lag_lo) {
                if p.to_f64_lossy() >= config.subharmonic_ratio * peak.to_f64_lossy() {
                    (lag_f, peak) = (l, p);
                    list.push((l, p, best_score + 1e-9));
                    break;
                }
            }
        }
        track.strength[i] = peak;
        if peak >= threshold {
            track.f0[i] = Some(T::lit(srf / lag_f));
            list.sort_by(|a, b| b.2.total_cmp(&a.2));
            list.truncate(MAX_CANDIDATES);
            cands[i] = list;
        }
    }
    for run in track.voiced_runs() {
        let path = best_path(&cands[run.clone()], config.octave_jump_cost);
        for (i, lag) in run.zip(path) {
            track.f0[i] = Some(T::lit(srf / lag));
        }
    }
    track
}

const MAX_CANDIDATES: usize = 6;

/// Viterbi search over per-frame lag candidates maximizing the summed
/// candidate scores minus `jump_cost` per octave of frame-to-frame change.
fn best_path<T>(frames: &[Vec<(f64, T, f64)>], jump_cost: f64) -> Vec<f64> {
    let mut acc: Vec<Vec<f64>> = Vec::with_capacity(frames.len());
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(frames.len());
    for (t, list) in frames.iter().enumerate() {
        if t == 0 {
            acc.push(list.iter().map(|c| c.2).collect());
            back.push(vec![0; list.len()]);
            continue;
        }
        let prev = &frames[t - 1];
        let (mut a, mut b) = (Vec::with_capacity(list.len()), Vec::with_capacity(list.len()));
        for c in list {
            let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
            for (j, p) in prev.iter().enumerate() {
                let v = acc[t - 1][j] - jump_cost * (c.0 / p.0).log2().abs();
                if v > best {
                    (best, arg) = (v, j);
                }
            }
            a.push(best + c.2);
            b.push(arg);
        }
        acc.push(a);
        back.push(b);
    }
    let mut path = vec![0.0; frames.len()];
    let Some(last) = acc.last() else { return path };
    let mut k = (0..last.len()).max_by(|&x, &y| last[x].total_cmp(&last[y])).unwrap_or(0);
    for t in (0..frames.len()).rev() {
        path[t] = frames[t][k].0;
        k = back[t][k];
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn sine(f: f64, n: usize, sr: u32) -> AudioClip<f64> {
        AudioClip::new((0..n).map(|i| 0.5 * (2.0 * std::f64::consts::PI * f * i as f64 / sr as f64).sin()).collect(), sr)
            .unwrap()
    }

    #[test]
    fn autocorrelation_matches_direct_sum() {
        let mut rng = crate::seed::rng_for(11, &[]);
        let x: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = normalized_autocorrelation(&x, 120);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let y: Vec<f64> = x.iter().map(|v| v - mean).collect();
        for lag in [0usize, 1, 17, 64, 120] {
            let n = y.len() - lag;
            let num: f64 = (0..n).map(|i| y[i] * y[i + lag]).sum();
            let e1: f64 = (0..n).map(|i| y[i] * y[i]).sum();
            let e2: f64 = (0..n).map(|i| y[i + lag] * y[i + lag]).sum();
            assert!((r[lag] - num / (e1 * e2).sqrt()).abs() < 1e-9, "lag {lag}");
        }
    }

    #[test]
    fn sine_200_hz() {
        let t = pitch_track(&sine(200.0, 44100, 44100), &PitchConfig::default());
        assert_eq!(t.n_frames(), 98);
        for f in &t.f0 {
            let f = f.expect("voiced");
            assert!((f - 200.0).abs() < 1.0, "{f}");
        }
    }

    #[test]
    fn harmonic_signals_within_one_percent() {
        for f0 in [100.0, 150.0, 250.0, 400.0] {
            let sr = 44100;
            let x: Vec<f64> = (0..22050)
                .map(|i| {
                    let t = i as f64 / sr as f64;
                    (1..=5).map(|h| (2.0 * std::f64::consts::PI * f0 * h as f64 * t).sin() / h as f64).sum::<f64>() * 0.2
                })
                .collect();
            let track = pitch_track(&AudioClip::new(x, sr).unwrap(), &PitchConfig::default());
            let voiced = track.voiced_f0();
            assert_eq!(voiced.len(), track.n_frames());
            for f in voiced {
                assert!((f - f0).abs() / f0 < 0.01, "{f0}: {f}");
            }
        }
    }

    #[test]
    fn white_noise_mostly_unvoiced() {
        let mut rng = crate::seed::rng_for(5, &[]);
        let x: Vec<f64> = (0..44100).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let t = pitch_track(&AudioClip::new(x, 44100).unwrap(), &PitchConfig::default());
        assert!(t.voiced_fraction() < 0.1, "{}", t.voiced_fraction());
    }

    #[test]
    fn silence_unvoiced() {
        let t = pitch_track(&AudioClip::new(vec![0.0f64; 20000], 44100).unwrap(), &PitchConfig::default());
        assert!(t.f0.iter().all(Option::is_none));
        assert!(t.voiced_runs().is_empty());
    }

    #[test]
    fn f32_track() {
        let clip: AudioClip<f32> = sine(150.0, 11025, 44100).cast();
        let t = pitch_track(&clip, &PitchConfig::default());
        for f in t.voiced_f0() {
            assert!((f - 150.0).abs() < 1.5);
        }
    }

    #[test]
    fn runs_split_on_gaps() {
        let mut x = sine(180.0, 8820, 44100).into_samples();
        x.extend(vec![0.0; 8820]);
        x.extend(sine(180.0, 8820, 44100).into_samples());
        let t = pitch_track(&AudioClip::new(x, 44100).unwrap(), &PitchConfig::default());
        assert_eq!(t.voiced_runs().len(), 2);
    }
}
