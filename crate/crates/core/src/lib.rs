//! Speech-marker extraction, synthetic voices and the statistics battery for
//! voice-based cognitive screening studies.
//!
//! Signal kernels are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod corpus;
pub mod dsp;
pub mod error;
pub mod features;
pub mod scalar;
pub mod seed;
pub mod stats;
pub mod synthlab;
pub mod voicequality;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Clip = corpus::AudioClip<f64>;
pub type ClipF32 = corpus::AudioClip<f32>;
pub type Frames = dsp::FrameSeries<f64>;
pub type Track = dsp::PitchTrack<f64>;
pub type Periods = voicequality::PeriodSequence<f64>;
pub type Voice = synthlab::SynthVoice<f64>;
