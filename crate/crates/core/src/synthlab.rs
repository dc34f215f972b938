//! Synthetic voices with known cycle-level ground truth, and synthetic
//! corpora with injected group effects.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{save_audio, write_manifest, AudioClip, Condition, ResponseRecord, Sex, NEUROPSYCH_NAMES, QUESTION_IDS};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::{derive_seed, rng_for, tag};

/// How per-cycle perturbations evolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationLaw {
    /// `+1, -1, +1, ...`; local jitter/shimmer equal exactly `2 eps`.
    #[default]
    Alternating,
    /// Mean-reverting Gaussian walk with unit stationary variance, clipped
    /// to ±3.
    RandomWalk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VoiceSpec {
    pub f0: f64,
    pub duration: f64,
    pub jitter_eps: f64,
    pub shimmer_eps: f64,
    pub snr_db: f64,
    /// (frequency, bandwidth) in Hz, applied as a cascade.
    pub formant_poles: Vec<(f64, f64)>,
    /// Amplitude in Hz of the slow sinusoidal F0 drift.
    pub f0_drift: f64,
    pub drift_rate_hz: f64,
    pub jitter_law: PerturbationLaw,
    pub shimmer_law: PerturbationLaw,
    pub sample_rate: u32,
    /// Silence added before and after the voiced segment, seconds.
    pub pad_secs: f64,
    pub seed: u64,
}

impl Default for VoiceSpec {
    fn default() -> Self {
        Self {
            f0: 120.0,
            duration: 1.0,
            jitter_eps: 0.0,
            shimmer_eps: 0.0,
            snr_db: 60.0,
            formant_poles: vec![(600.0, 150.0), (1400.0, 180.0), (2600.0, 240.0)],
            f0_drift: 0.0,
            drift_rate_hz: 0.7,
            jitter_law: PerturbationLaw::Alternating,
            shimmer_law: PerturbationLaw::Alternating,
            sample_rate: 44_100,
            pad_secs: 0.0,
            seed: 0,
        }
    }
}

impl VoiceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(75.0..=500.0).contains(&self.f0) {
            return bad(format!("f0 {} outside [75, 500] Hz", self.f0));
        }
        if !(self.duration > 0.0) {
            return bad("duration must be positive".into());
        }
        for (name, eps) in [("jitter_eps", self.jitter_eps), ("shimmer_eps", self.shimmer_eps)] {
            if !(0.0..=0.1).contains(&eps) {
                return bad(format!("{name} {eps} outside [0, 0.1]"));
            }
        }
        if self.f0_drift < 0.0 || self.f0 - self.f0_drift < 75.0 || self.f0 + self.f0_drift > 500.0 {
            return bad("f0 drift leaves [75, 500] Hz".into());
        }
        if self.pad_secs < 0.0 || self.sample_rate < 8000 {
            return bad("invalid padding or sample rate".into());
        }
        for &(f, bw) in &self.formant_poles {
            if !(f > 0.0 && f < self.sample_rate as f64 / 2.0 && bw > 0.0) {
                return bad(format!("invalid formant pole ({f}, {bw})"));
            }
        }
        Ok(())
    }
}

/// A synthesized clip and the exact cycle parameters used to make it.
#[derive(Debug, Clone, Serialize)]
pub struct SynthVoice<T> {
    #[serde(skip)]
    pub clip: AudioClip<T>,
    pub spec: VoiceSpec,
    /// Cycle durations T_i in seconds.
    pub periods: Vec<f64>,
    /// Cycle amplitude factors A_i.
    pub amplitudes: Vec<f64>,
    /// Cycle onsets in seconds from the start of the clip.
    pub onsets: Vec<f64>,
    /// Instantaneous F0 (before jitter) at each onset, Hz.
    pub f0_track: Vec<f64>,
}

struct LawState {
    law: PerturbationLaw,
    value: f64,
}

impl LawState {
    fn new(law: PerturbationLaw, rng: &mut crate::seed::Rng) -> Self {
        let value = match law {
            PerturbationLaw::Alternating => 1.0,
            PerturbationLaw::RandomWalk => Normal::new(0.0, 1.0).unwrap().sample(rng),
        };
        Self { law, value }
    }

    fn current(&self) -> f64 {
        match self.law {
            PerturbationLaw::Alternating => self.value,
            PerturbationLaw::RandomWalk => self.value.clamp(-3.0, 3.0),
        }
    }

    fn advance(&mut self, rng: &mut crate::seed::Rng) {
        const RHO: f64 = 0.9;
        match self.law {
            PerturbationLaw::Alternating => self.value = -self.value,
            PerturbationLaw::RandomWalk => {
                let step: f64 = Normal::new(0.0, 1.0).unwrap().sample(rng);
                self.value = RHO * self.value + (1.0 - RHO * RHO).sqrt() * step;
            }
        }
    }
}

/// Rosenberg glottal flow pulse with opening and closing phases of fixed
/// length, evaluated at `t` seconds after onset.
fn rosenberg(t: f64, open: f64, close: f64) -> f64 {
    if t < 0.0 {
        0.0
    } else if t < open {
        0.5 * (1.0 - (std::f64::consts::PI * t / open).cos())
    } else if t < open + close {
        (std::f64::consts::PI * (t - open) / (2.0 * close)).cos()
    } else {
        0.0
    }
}

/// Two-pole resonator cascade with unit gain at DC.
fn formant_cascade(x: &mut [f64], poles: &[(f64, f64)], sr: f64) {
    for &(f, bw) in poles {
        let r = (-std::f64::consts::PI * bw / sr).exp();
        let a1 = 2.0 * r * (2.0 * std::f64::consts::PI * f / sr).cos();
        let a2 = -r * r;
        let b0 = 1.0 - a1 - a2;
        let (mut y1, mut y2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let y = b0 * *v + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }
}

/// Synthesizes a sustained voice from `spec`.
///
/// Cycle `i` lasts `T_i = (1 / f0(t_i)) (1 + law(i) jitter_eps)` where
/// `f0(t)` carries the sinusoidal drift, and is scaled by
/// `A_i = 1 + law(i) shimmer_eps`. The differentiated pulse train passes the
/// formant cascade, white noise is added at `snr_db` relative to the voiced
/// signal power, and the clip is scaled to a 0.5 peak.
pub fn synth_voice<T: Real>(spec: &VoiceSpec) -> Result<SynthVoice<T>> {
    spec.validate()?;
    let sr = spec.sample_rate as f64;
    let mut rng = rng_for(spec.seed, &[tag("voice")]);
    let mut jl = LawState::new(spec.jitter_law, &mut rng);
    let mut sl = LawState::new(spec.shimmer_law, &mut rng);

    let (mut periods, mut amplitudes, mut onsets, mut f0_track) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut t = 0.0;
    while t < spec.duration {
        let f = spec.f0 + spec.f0_drift * (2.0 * std::f64::consts::PI * spec.drift_rate_hz * t).sin();
        let period = (1.0 + jl.current() * spec.jitter_eps) / f;
        if t + period > spec.duration {
            break;
        }
        onsets.push(t + spec.pad_secs);
        periods.push(period);
        amplitudes.push(1.0 + sl.current() * spec.shimmer_eps);
        f0_track.push(f);
        t += period;
        jl.advance(&mut rng);
        sl.advance(&mut rng);
    }
    if periods.len() < 2 {
        return Err(Error::Config("duration shorter than two cycles".into()));
    }

    let voiced_len = (spec.duration * sr).round() as usize;
    let pad = (spec.pad_secs * sr).round() as usize;
    let n = voiced_len + 2 * pad;
    let nominal = 1.0 / spec.f0;
    let (open, close) = (0.4 * nominal, 0.16 * nominal);
    let mut flow = vec![0.0; n + 1];
    for (&onset, &amp) in onsets.iter().zip(&amplitudes) {
        let lo = (onset * sr).floor() as usize;
        let hi = (((onset + open + close) * sr).ceil() as usize + 1).min(n + 1);
        for (k, slot) in flow.iter_mut().enumerate().take(hi).skip(lo) {
            *slot += amp * rosenberg(k as f64 / sr - onset, open, close);
        }
    }
    // Lip radiation: first difference of the flow.
    let mut x: Vec<f64> = flow.windows(2).map(|w| w[1] - w[0]).collect();
    formant_cascade(&mut x, &spec.formant_poles, sr);

    let voiced = pad..pad + voiced_len;
    let power = x[voiced.clone()].iter().map(|v| v * v).sum::<f64>() / voiced_len as f64;
    let sd = (power / 10f64.powf(spec.snr_db / 10.0)).sqrt();
    let normal = Normal::new(0.0, sd.max(f64::MIN_POSITIVE)).map_err(|e| Error::Config(e.to_string()))?;
    for v in &mut x[voiced] {
        *v += normal.sample(&mut rng);
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { 0.5 / peak } else { 1.0 };
    let samples: Vec<T> = x.iter().map(|v| T::lit(v * gain)).collect();
    Ok(SynthVoice { clip: AudioClip::new(samples, spec.sample_rate)?, spec: spec.clone(), periods, amplitudes, onsets, f0_track })
}

/// Voice parameters a group effect can shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoiceParam {
    F0,
    JitterEps,
    ShimmerEps,
    SnrDb,
    F0Drift,
}

impl VoiceParam {
    pub const ALL: [VoiceParam; 5] =
        [VoiceParam::F0, VoiceParam::JitterEps, VoiceParam::ShimmerEps, VoiceParam::SnrDb, VoiceParam::F0Drift];

    /// Acoustic feature most directly driven by this parameter.
    pub fn feature_name(self) -> &'static str {
        match self {
            VoiceParam::F0 => "f0",
            VoiceParam::JitterEps => "jitter",
            VoiceParam::ShimmerEps => "shimmer",
            VoiceParam::SnrDb => "hnr",
            VoiceParam::F0Drift => "pitch_variation",
        }
    }
}

/// Between-participant mean and SD of a voice parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
}

impl Spread {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub n_participants: usize,
    pub n_high: usize,
    pub n_female: usize,
    pub age: Spread,
    pub age_range: (f64, f64),
    pub education: Spread,
    pub education_range: (f64, f64),
    /// Voiced duration of each response, seconds.
    pub duration: f64,
    pub pad_secs: f64,
    pub f0_female: Spread,
    pub f0_male: Spread,
    pub jitter_eps: Spread,
    pub shimmer_eps: Spread,
    pub snr_db: Spread,
    pub f0_drift: Spread,
    /// Response-to-response variation within a participant, as a fraction
    /// of the between-participant SD.
    pub within_sd_fraction: f64,
    /// Shift of the high group's mean, in between-participant SD units.
    pub group_effects: BTreeMap<VoiceParam, f64>,
    /// Shift of the high group's neuropsychological scores, in SD units
    /// (towards worse performance).
    pub neuropsych_effect_sd: f64,
    /// Reproduce the published pattern of unanswered questions.
    pub paper_missingness: bool,
    /// Otherwise drop each response independently with this probability.
    pub missing_rate: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self::paper()
    }
}

impl CorpusSpec {
    /// 54 participants (32 high, 27 female) with jitter and noise levels
    /// shifted by 1.5 SD in the high group.
    pub fn paper() -> Self {
        let mut group_effects = BTreeMap::new();
        group_effects.insert(VoiceParam::JitterEps, 1.5);
        group_effects.insert(VoiceParam::SnrDb, -1.5);
        Self {
            n_participants: 54,
            n_high: 32,
            n_female: 27,
            age: Spread::new(76.0, 6.0),
            age_range: (58.0, 91.0),
            education: Spread::new(13.2, 2.7),
            education_range: (6.0, 22.0),
            duration: 1.2,
            pad_secs: 0.15,
            f0_female: Spread::new(200.0, 20.0),
            f0_male: Spread::new(120.0, 15.0),
            jitter_eps: Spread::new(0.008, 0.003),
            shimmer_eps: Spread::new(0.03, 0.01),
            snr_db: Spread::new(20.0, 3.0),
            f0_drift: Spread::new(6.0, 2.0),
            within_sd_fraction: 0.3,
            group_effects,
            neuropsych_effect_sd: 0.0,
            paper_missingness: true,
            missing_rate: 0.0,
        }
    }

    /// Same population with no group differences at all.
    pub fn null() -> Self {
        Self { group_effects: BTreeMap::new(), ..Self::paper() }
    }

    fn spread(&self, p: VoiceParam, sex: Sex) -> Spread {
        match p {
            VoiceParam::F0 => match sex {
                Sex::Female => self.f0_female,
                Sex::Male => self.f0_male,
            },
            VoiceParam::JitterEps => self.jitter_eps,
            VoiceParam::ShimmerEps => self.shimmer_eps,
            VoiceParam::SnrDb => self.snr_db,
            VoiceParam::F0Drift => self.f0_drift,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n_participants < 2 || self.n_high == 0 || self.n_high >= self.n_participants {
            return bad("need at least one participant in each group");
        }
        if self.n_female > self.n_participants {
            return bad("n_female exceeds n_participants");
        }
        if self.paper_missingness && self.n_participants < PAPER_MISSING.len() {
            return bad("published missingness pattern needs at least 11 participants");
        }
        if !(0.0..1.0).contains(&self.missing_rate) || self.duration <= 0.0 || self.within_sd_fraction < 0.0 {
            return bad("invalid missing rate, duration or within-participant spread");
        }
        Ok(())
    }
}

/// Questions left unanswered by individual participants in the published
/// cohort: 11 cognitive and 7 daily-life responses missing in total.
const PAPER_MISSING: [&[&str]; 11] = [
    &["phonemic_fluency"],
    &["phonemic_fluency"],
    &["counting_backward"],
    &["subtraction"],
    &["picture_description"],
    &["dinner_menu"],
    &["risk_planning"],
    &["general_knowledge", "risk_planning"],
    &["semantic_fluency", "phonemic_fluency", "picture_description"],
    &["counting_backward", "subtraction", "phonemic_fluency", "childhood_activity", "dinner_menu", "general_knowledge"],
    &[],
];

/// Vowel-like (F1, F2) targets per question, before speaker scaling.
const QUESTION_FORMANTS: [(f64, f64); 10] = [
    (700.0, 1220.0),
    (530.0, 1840.0),
    (390.0, 2000.0),
    (600.0, 1000.0),
    (660.0, 1700.0),
    (450.0, 1100.0),
    (570.0, 1500.0),
    (640.0, 1190.0),
    (490.0, 1350.0),
    (420.0, 1800.0),
];

/// Per-participant truth recorded in the corpus sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticipantTruth {
    pub participant_id: String,
    pub group: String,
    pub ecog_score: f64,
    pub sex: Sex,
    pub voice: BTreeMap<VoiceParam, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusTruth {
    pub seed: u64,
    pub spec: CorpusSpec,
    /// Features expected to separate the groups.
    pub effect_features: Vec<String>,
    pub participants: Vec<ParticipantTruth>,
}

/// Manifest records and voice specs of a corpus, without writing audio.
#[derive(Debug, Clone)]
pub struct CorpusPlan {
    pub records: Vec<ResponseRecord>,
    pub voices: Vec<VoiceSpec>,
    pub truth: CorpusTruth,
}

fn clamp_normal(rng: &mut crate::seed::Rng, s: Spread, lo: f64, hi: f64) -> f64 {
    let v = if s.sd > 0.0 { Normal::new(s.mean, s.sd).unwrap().sample(rng) } else { s.mean };
    v.clamp(lo, hi)
}

fn param_bounds(p: VoiceParam) -> (f64, f64) {
    match p {
        VoiceParam::F0 => (85.0, 400.0),
        VoiceParam::JitterEps | VoiceParam::ShimmerEps => (0.0, 0.1),
        VoiceParam::SnrDb => (0.0, 60.0),
        VoiceParam::F0Drift => (0.0, 30.0),
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Draws participants, responses and voice specs. Audio paths are
/// `audio/<participant>_<question>.wav` relative to `base`.
pub fn plan_corpus(spec: &CorpusSpec, seed: u64, base: &Path) -> Result<CorpusPlan> {
    spec.validate()?;
    let mut rng = rng_for(seed, &[tag("corpus")]);
    let n = spec.n_participants;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let high: Vec<bool> = {
        let mut h = vec![false; n];
        for &i in &order[..spec.n_high] {
            h[i] = true;
        }
        h
    };
    order.shuffle(&mut rng);
    let mut female = vec![false; n];
    for &i in &order[..spec.n_female] {
        female[i] = true;
    }
    order.shuffle(&mut rng);
    let mut missing: Vec<&[&str]> = vec![&[]; n];
    if spec.paper_missingness {
        for (k, &i) in order.iter().take(PAPER_MISSING.len()).enumerate() {
            missing[i] = PAPER_MISSING[k];
        }
    }
    let width = n.to_string().len().max(2);

    let mut records = Vec::new();
    let mut voices = Vec::new();
    let mut participants = Vec::new();
    for i in 0..n {
        let pid = format!("P{:0width$}", i + 1);
        let sex = if female[i] { Sex::Female } else { Sex::Male };
        let age = clamp_normal(&mut rng, spec.age, spec.age_range.0, spec.age_range.1).round();
        let education = clamp_normal(&mut rng, spec.education, spec.education_range.0, spec.education_range.1).round();
        let ecog = if high[i] { round2(rng.gen_range(1.85..3.2)) } else { round2(rng.gen_range(1.0..1.76)) };

        let mut voice = BTreeMap::new();
        for p in VoiceParam::ALL {
            let s = spec.spread(p, sex);
            let shift = if high[i] { spec.group_effects.get(&p).copied().unwrap_or(0.0) * s.sd } else { 0.0 };
            let (lo, hi) = param_bounds(p);
            voice.insert(p, clamp_normal(&mut rng, Spread::new(s.mean + shift, s.sd), lo, hi));
        }
        let formant_scale = if female[i] { 1.15 } else { 1.0 } * rng.gen_range(0.95..1.05);

        let neuro_base = [(27.0, 2.0, 15.0, 30.0), (15.0, 2.0, 0.0, 18.0), (4.0, 1.0, 0.0, 5.0), (12.0, 4.0, 0.0, 25.0), (9.0, 4.0, 0.0, 25.0), (45.0, 15.0, 15.0, 150.0), (110.0, 40.0, 30.0, 300.0)];
        let mut neuropsych = [None; 7];
        for (k, &(m, sd, lo, hi)) in neuro_base.iter().enumerate() {
            // Timed tests (trail making) get longer when performance worsens.
            let dir = if NEUROPSYCH_NAMES[k].starts_with("tmt") { 1.0 } else { -1.0 };
            let shift = if high[i] { dir * spec.neuropsych_effect_sd * sd } else { 0.0 };
            neuropsych[k] = Some(clamp_normal(&mut rng, Spread::new(m + shift, sd), lo, hi).round());
        }

        for (q, &(qid, condition)) in QUESTION_IDS.iter().enumerate() {
            let dropped = if spec.paper_missingness { missing[i].contains(&qid) } else { rng.gen::<f64>() < spec.missing_rate };
            // Draws below are made even for dropped responses so that the
            // remaining ones do not depend on the missingness pattern.
            let param = |p: VoiceParam, rng: &mut crate::seed::Rng| {
                let s = spec.spread(p, sex);
                let (lo, hi) = param_bounds(p);
                clamp_normal(rng, Spread::new(voice[&p], s.sd * spec.within_sd_fraction), lo, hi)
            };
            let f0 = param(VoiceParam::F0, &mut rng);
            let jitter_eps = param(VoiceParam::JitterEps, &mut rng);
            let shimmer_eps = param(VoiceParam::ShimmerEps, &mut rng);
            let snr_db = param(VoiceParam::SnrDb, &mut rng);
            let drift = param(VoiceParam::F0Drift, &mut rng).min(0.3 * f0);
            let (f1, f2) = QUESTION_FORMANTS[q];
            let jig = rng.gen_range(0.97..1.03);
            let voice_seed = derive_seed(seed, &[tag("voice"), i as u64, q as u64]);
            if dropped {
                continue;
            }
            let audio_path = base.join("audio").join(format!("{pid}_{qid}.wav"));
            records.push(ResponseRecord {
                participant_id: pid.clone(),
                question_id: qid.to_string(),
                condition,
                audio_path,
                ecog_score: ecog,
                age,
                sex,
                education,
                neuropsych,
            });
            voices.push(VoiceSpec {
                f0,
                duration: spec.duration,
                jitter_eps,
                shimmer_eps,
                snr_db,
                formant_poles: vec![
                    (f1 * formant_scale * jig, 130.0),
                    (f2 * formant_scale * jig, 160.0),
                    (2600.0 * formant_scale, 220.0),
                    (3500.0 * formant_scale, 280.0),
                ],
                f0_drift: drift,
                pad_secs: spec.pad_secs,
                seed: voice_seed,
                ..VoiceSpec::default()
            });
        }
        participants.push(ParticipantTruth {
            participant_id: pid,
            group: if high[i] { "high" } else { "low" }.to_string(),
            ecog_score: ecog,
            sex,
            voice,
        });
    }
    let effect_features = spec
        .group_effects
        .iter()
        .filter(|(_, &v)| v != 0.0)
        .map(|(p, _)| p.feature_name().to_string())
        .filter(|f| f != "f0")
        .collect();
    let truth = CorpusTruth { seed, spec: spec.clone(), effect_features, participants };
    Ok(CorpusPlan { records, voices, truth })
}

/// Per-clip sidecar contents.
#[derive(Serialize)]
struct ClipTruth<'a> {
    participant_id: &'a str,
    question_id: &'a str,
    spec: &'a VoiceSpec,
    periods: &'a [f64],
    amplitudes: &'a [f64],
    f0_track: &'a [f64],
}

/// Writes WAVs, per-clip ground-truth JSON, `manifest.csv` and
/// `ground_truth.json` under `out_dir`. Returns the manifest path.
pub fn synth_corpus(spec: &CorpusSpec, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    let audio_dir = out_dir.join("audio");
    let truth_dir = out_dir.join("truth");
    for d in [&audio_dir, &truth_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let plan = plan_corpus(spec, seed, out_dir)?;
    plan.records.par_iter().zip(plan.voices.par_iter()).try_for_each(|(rec, vs)| -> Result<()> {
        let voice = synth_voice::<f64>(vs)?;
        save_audio(&voice.clip, &rec.audio_path)?;
        let side = ClipTruth {
            participant_id: &rec.participant_id,
            question_id: &rec.question_id,
            spec: vs,
            periods: &voice.periods,
            amplitudes: &voice.amplitudes,
            f0_track: &voice.f0_track,
        };
        let path = truth_dir.join(format!("{}_{}.json", rec.participant_id, rec.question_id));
        std::fs::write(&path, serde_json::to_vec(&side)?).map_err(|e| Error::io(&path, e))
    })?;
    let manifest = out_dir.join("manifest.csv");
    write_manifest(&plan.records, &manifest, out_dir)?;
    let gt = out_dir.join("ground_truth.json");
    std::fs::write(&gt, serde_json::to_vec_pretty(&plan.truth)?).map_err(|e| Error::io(&gt, e))?;
    Ok(manifest)
}

/// Number of records per condition.
pub fn condition_counts(records: &[ResponseRecord]) -> (usize, usize) {
    let cog = records.iter().filter(|r| r.condition == Condition::Cognitive).count();
    (cog, records.len() - cog)
}
