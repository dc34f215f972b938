//! Cycle-level voice quality: glottal period marking, local jitter and
//! shimmer, and autocorrelation harmonics-to-noise ratio.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::AudioClip;
use crate::dsp::PitchTrack;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pitch-mark search window, as multiples of the locally expected period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkConfig {
    pub mark_window_lo: f64,
    pub mark_window_hi: f64,
}

impl Default for MarkConfig {
    fn default() -> Self {
        Self { mark_window_lo: 0.8, mark_window_hi: 1.25 }
    }
}

/// Consecutive glottal cycles from one voiced region. `period_lengths[i]` is
/// the duration of cycle `i` in seconds and `period_amplitudes[i]` the
/// absolute waveform peak that opens it.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSequence<T> {
    pub period_lengths: Vec<T>,
    pub period_amplitudes: Vec<T>,
    pub source_region: Range<usize>,
}

impl<T: Real> PeriodSequence<T> {
    pub fn new(period_lengths: Vec<T>, period_amplitudes: Vec<T>, source_region: Range<usize>) -> Result<Self> {
        if period_lengths.len() != period_amplitudes.len() {
            return Err(Error::Config(format!(
                "{} period lengths but {} amplitudes",
                period_lengths.len(),
                period_amplitudes.len()
            )));
        }
        Ok(Self { period_lengths, period_amplitudes, source_region })
    }

    pub fn len(&self) -> usize {
        self.period_lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.period_lengths.is_empty()
    }
}

/// Waveform peak near `idx` refined by a parabola through its neighbours:
/// returns (fractional position, peak value).
fn refine_peak<T: Real>(x: &[T], idx: usize) -> (f64, T) {
    if idx == 0 || idx + 1 >= x.len() {
        return (idx as f64, x[idx]);
    }
    let (delta, peak) = crate::dsp::parabolic(x[idx - 1], x[idx], x[idx + 1]);
    (idx as f64 + delta.to_f64_lossy(), peak)
}

fn argmax<T: Real>(x: &[T], range: Range<usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in range {
        if best.map_or(true, |b| x[i] > x[b]) {
            best = Some(i);
        }
    }
    best
}

/// Marks glottal cycles by positive-peak picking within every maximal voiced
/// run of `track`.
///
/// Marking starts at the largest sample of the run and walks outwards, each
/// next mark being the largest sample within `[lo, hi]` times the expected
/// period (from the nearest voiced frame's F0). Spacings outside the F0 band
/// split the sequence; pieces with fewer than three marks are discarded.
pub fn track_periods<T: Real>(clip: &AudioClip<T>, track: &PitchTrack<T>, config: &MarkConfig) -> Vec<PeriodSequence<T>> {
    let x = clip.samples();
    let sr = clip.sample_rate() as f64;
    let (min_period, max_period) = (1.0 / track.fmax, 1.0 / track.fmin);
    let mut out = Vec::new();

    for run in track.voiced_runs() {
        let start = track.frame_start(run.start);
        let end = (track.frame_start(run.end - 1) + track.frame_len).min(x.len());
        if end <= start + 2 {
            continue;
        }
        let run_f0: Vec<f64> = track.f0[run.clone()].iter().map(|f| f.expect("voiced run").to_f64_lossy()).collect();
        let expected = |pos: f64| -> f64 {
            let frame = ((pos - start as f64 - track.frame_len as f64 / 2.0) / track.hop as f64).round();
            let k = frame.clamp(0.0, (run_f0.len() - 1) as f64) as usize;
            sr / run_f0[k]
        };

        let Some(seed) = argmax(x, start..end) else { continue };
        let mut marks = vec![refine_peak(x, seed)];
        // forward
        let mut cur = seed;
        loop {
            let p = expected(cur as f64);
            let lo = cur + (config.mark_window_lo * p).ceil() as usize;
            let hi = cur + (config.mark_window_hi * p).floor() as usize;
            if hi >= end || lo > hi {
                break;
            }
            let Some(next) = argmax(x, lo..hi + 1) else { break };
            marks.push(refine_peak(x, next));
            cur = next;
        }
        // backward
        let mut cur = seed;
        let mut back = Vec::new();
        loop {
            let p = expected(cur as f64);
            let far = (config.mark_window_hi * p).floor() as usize;
            let near = (config.mark_window_lo * p).ceil() as usize;
            if far > cur || cur - far < start || near > far {
                break;
            }
            let Some(prev) = argmax(x, cur - far..cur - near + 1) else { break };
            back.push(refine_peak(x, prev));
            cur = prev;
        }
        back.reverse();
        back.extend(marks);
        let marks = back;

        // Split wherever a spacing leaves the F0 band.
        let mut piece: Vec<(f64, T)> = Vec::new();
        let mut flush = |piece: &mut Vec<(f64, T)>| {
            if piece.len() >= 3 {
                let lengths = piece.windows(2).map(|w| T::lit((w[1].0 - w[0].0) / sr)).collect();
                let amps = piece[..piece.len() - 1].iter().map(|m| m.1.abs()).collect();
                let region = piece[0].0.floor() as usize..piece[piece.len() - 1].0.ceil() as usize + 1;
                out.push(PeriodSequence { period_lengths: lengths, period_amplitudes: amps, source_region: region });
            }
            piece.clear();
        };
        for m in marks {
            if let Some(last) = piece.last() {
                let spacing = (m.0 - last.0) / sr;
                if spacing < min_period * 0.999 || spacing > max_period * 1.001 {
                    flush(&mut piece);
                }
            }
            piece.push(m);
        }
        flush(&mut piece);
    }
    out
}

/// Mean absolute difference of consecutive values within each sequence,
/// divided by the mean of all values. Pairs never cross sequences.
fn local_perturbation<T: Real>(seqs: impl Iterator<Item = Vec<T>> + Clone) -> Option<T> {
    let (mut diff_sum, mut pairs) = (T::zero(), 0usize);
    let (mut total, mut count) = (T::zero(), 0usize);
    for values in seqs {
        for w in values.windows(2) {
            diff_sum += (w[1] - w[0]).abs();
            pairs += 1;
        }
        total += values.iter().copied().sum::<T>();
        count += values.len();
    }
    if pairs == 0 || count == 0 {
        return None;
    }
    let mean = total / T::from_usize_lossy(count);
    if mean <= T::zero() {
        return None;
    }
    Some(diff_sum / T::from_usize_lossy(pairs) / mean)
}

/// Local jitter: mean |T(i+1) - T(i)| over mean T. `None` without any pair.
pub fn jitter<T: Real>(seqs: &[PeriodSequence<T>]) -> Option<T> {
    local_perturbation(seqs.iter().map(|s| s.period_lengths.clone()))
}

/// Local shimmer: mean |A(i+1) - A(i)| over mean A. `None` without any pair.
pub fn shimmer<T: Real>(seqs: &[PeriodSequence<T>]) -> Option<T> {
    local_perturbation(seqs.iter().map(|s| s.period_amplitudes.clone()))
}

/// Harmonics-to-noise ratio in dB: mean over voiced frames of
/// `10 log10(r / (1 - r))`, with `r` the normalized autocorrelation peak at
/// the frame's F0 lag clamped to `[1e-3, 1 - 1e-3]`.
pub fn hnr<T: Real>(clip: &AudioClip<T>, track: &PitchTrack<T>) -> Option<T> {
    let x = clip.samples();
    let sr = clip.sample_rate() as f64;
    let max_lag = (sr / track.fmin).ceil() as usize + 2;
    let mut ac = crate::dsp::Autocorrelator::<T>::new(track.frame_len, max_lag);
    let mut r = Vec::new();
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, f0) in track.f0.iter().enumerate() {
        let Some(f0) = f0 else { continue };
        let start = track.frame_start(i);
        if start + track.frame_len > x.len() {
            continue;
        }
        let lag = sr / f0.to_f64_lossy();
        let k = lag.round() as usize;
        if k < 1 || k + 1 >= track.frame_len {
            continue;
        }
        ac.compute(&x[start..start + track.frame_len], k + 1, &mut r);
        if r.len() <= k + 1 {
            continue;
        }
        let (_, peak) = crate::dsp::parabolic(r[k - 1], r[k], r[k + 1]);
        let rv = peak.to_f64_lossy().clamp(1e-3, 1.0 - 1e-3);
        sum += 10.0 * (rv / (1.0 - rv)).log10();
        n += 1;
    }
    (n > 0).then(|| T::lit(sum / n as f64))
}
