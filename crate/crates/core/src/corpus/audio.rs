use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mono PCM audio with amplitudes nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Real> AudioClip<T> {
    /// Builds a clip, rejecting empty, non-finite or zero-rate input.
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidClip("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidClip(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: T) -> Self {
        Self { samples: self.samples.iter().map(|&x| x * gain).collect(), sample_rate: self.sample_rate }
    }

    /// Converts the sample type.
    pub fn cast<U: Real>(&self) -> AudioClip<U> {
        AudioClip {
            samples: self.samples.iter().map(|&x| U::lit(x.to_f64_lossy())).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Reads a RIFF/WAVE file. 16-bit integer and 32-bit float PCM are accepted;
/// multichannel audio is averaged to mono.
pub fn load_audio<T: Real>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    let path = path.as_ref();
    let wav_err = |source| Error::Wav { path: path.to_path_buf(), source };
    let reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::UnsupportedAudio("zero channels".into()));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(wav_err)?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>()
            .map_err(wav_err)?,
        (fmt, bits) => {
            return Err(Error::UnsupportedAudio(format!("{fmt:?} PCM with {bits} bits per sample")));
        }
    };
    if interleaved.len() < channels {
        return Err(Error::EmptyAudio);
    }
    let mono: Vec<T> = interleaved
        .chunks_exact(channels)
        .map(|frame| T::lit(frame.iter().sum::<f64>() / channels as f64))
        .collect();
    AudioClip::new(mono, spec.sample_rate)
}

/// Writes a mono 16-bit PCM file. Samples are scaled by 32768 and clipped.
pub fn save_audio<T: Real>(clip: &AudioClip<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let wav_err = |source| Error::Wav { path: path.to_path_buf(), source };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &x in clip.samples() {
        writer.write_sample(quantize_i16(x.to_f64_lossy())).map_err(wav_err)?;
    }
    writer.finalize().map_err(wav_err)
}

pub(crate) fn quantize_i16(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}
