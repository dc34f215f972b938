//! Manifest parsing, WAV ingestion, silence elimination and group labels.

mod audio;
mod vad;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use audio::{load_audio, save_audio, AudioClip};
pub use vad::{frame_len, frame_levels_db, hop_len, remove_silence, voiced_regions, VadConfig};

use crate::error::{Error, Result};

/// ECog score at or above which a participant belongs to the high group.
pub const ECOG_CUTOFF: f64 = 1.81;

/// Names of the optional neuropsychological test columns, in manifest order.
pub const NEUROPSYCH_NAMES: [&str; 7] = ["mmse", "fab", "cdt", "lm1", "lm2", "tmta", "tmtb"];

/// The five cognitive tasks followed by the five daily-life questions.
pub const QUESTION_IDS: [(&str, Condition); 10] = [
    ("counting_backward", Condition::Cognitive),
    ("subtraction", Condition::Cognitive),
    ("phonemic_fluency", Condition::Cognitive),
    ("semantic_fluency", Condition::Cognitive),
    ("picture_description", Condition::Cognitive),
    ("childhood_activity", Condition::Daily),
    ("dinner_menu", Condition::Daily),
    ("risk_planning", Condition::Daily),
    ("travel_planning", Condition::Daily),
    ("general_knowledge", Condition::Daily),
];

const QUESTIONS_PER_CONDITION: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Cognitive,
    Daily,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Cognitive => "cognitive",
            Condition::Daily => "daily",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cognitive" => Ok(Condition::Cognitive),
            "daily" => Ok(Condition::Daily),
            other => Err(format!("unknown condition `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
}

impl Sex {
    /// Numeric encoding used in feature vectors: F → 1, M → 0.
    pub fn code(self) -> f64 {
        match self {
            Sex::Female => 1.0,
            Sex::Male => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
        }
    }
}

/// Dichotomized ECog group. `Low < High`; high is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupLabel {
    Low,
    High,
}

impl GroupLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupLabel::Low => "low",
            GroupLabel::High => "high",
        }
    }

    pub fn is_high(self) -> bool {
        self == GroupLabel::High
    }
}

impl FromStr for GroupLabel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "low" => Ok(GroupLabel::Low),
            "high" => Ok(GroupLabel::High),
            other => Err(format!("unknown group `{other}`")),
        }
    }
}

/// Labels a participant from their ECog score.
pub fn label_group(ecog_score: f64) -> Result<GroupLabel> {
    check_ecog(ecog_score)?;
    Ok(if ecog_score >= ECOG_CUTOFF { GroupLabel::High } else { GroupLabel::Low })
}

fn check_ecog(score: f64) -> Result<()> {
    if (1.0..=4.0).contains(&score) {
        Ok(())
    } else {
        Err(Error::EcogOutOfRange(score))
    }
}

/// One participant's voice response to one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub participant_id: String,
    pub question_id: String,
    pub condition: Condition,
    pub audio_path: PathBuf,
    pub ecog_score: f64,
    pub age: f64,
    pub sex: Sex,
    pub education: f64,
    /// Scores in [`NEUROPSYCH_NAMES`] order; `None` where not recorded.
    pub neuropsych: [Option<f64>; 7],
}

impl ResponseRecord {
    pub fn group(&self) -> GroupLabel {
        if self.ecog_score >= ECOG_CUTOFF {
            GroupLabel::High
        } else {
            GroupLabel::Low
        }
    }
}

const REQUIRED_COLUMNS: [&str; 8] =
    ["participant_id", "question_id", "condition", "audio_path", "ecog", "age", "sex", "education"];

/// Reads a manifest CSV. Relative audio paths are resolved against the
/// manifest's directory. Records are returned in file order.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ResponseRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base)
}

/// Parses manifest text; `base` anchors relative audio paths.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ResponseRecord>> {
    if text.trim().is_empty() {
        return Err(Error::NoRecords);
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let index: BTreeMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for col in REQUIRED_COLUMNS {
        if !index.contains_key(col) {
            return Err(Error::MissingColumn(col.into()));
        }
    }

    let mut records = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut question_condition: BTreeMap<String, Condition> = BTreeMap::new();
    let mut per_condition: BTreeMap<Condition, BTreeSet<String>> = BTreeMap::new();

    for (i, row) in reader.records().enumerate() {
        let row = row?;
        // Data rows are numbered from 1; the header is row 0.
        let row_no = i + 1;
        let field = |name: &str| row.get(index[name]).unwrap_or("");
        let bad = |name: &str, message: String| Error::Manifest { row: row_no, field: name.into(), message };
        let number = |name: &str| -> Result<f64> {
            let raw = field(name);
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(name, format!("expected a number, got `{raw}`")))
        };

        let participant_id = field("participant_id").to_string();
        if participant_id.is_empty() {
            return Err(bad("participant_id", "empty".into()));
        }
        let question_id = field("question_id").to_string();
        if question_id.is_empty() {
            return Err(bad("question_id", "empty".into()));
        }
        let condition: Condition = field("condition").parse().map_err(|m| bad("condition", m))?;
        let audio_raw = field("audio_path");
        if audio_raw.is_empty() {
            return Err(bad("audio_path", "empty".into()));
        }
        let audio_path = base.join(audio_raw);
        let ecog_score = number("ecog")?;
        if check_ecog(ecog_score).is_err() {
            return Err(bad("ecog", format!("ecog_score out of range: {ecog_score}")));
        }
        let age = number("age")?;
        if age <= 0.0 {
            return Err(bad("age", format!("age must be positive, got {age}")));
        }
        let sex = match field("sex") {
            "F" => Sex::Female,
            "M" => Sex::Male,
            other => return Err(bad("sex", format!("expected F or M, got `{other}`"))),
        };
        let education = number("education")?;
        if education < 0.0 {
            return Err(bad("education", format!("education must be non-negative, got {education}")));
        }
        let mut neuropsych = [None; 7];
        for (slot, name) in neuropsych.iter_mut().zip(NEUROPSYCH_NAMES) {
            if let Some(&col) = index.get(name) {
                let raw = row.get(col).unwrap_or("");
                if !raw.is_empty() {
                    *slot = Some(number(name)?);
                }
            }
        }

        match question_condition.get(&question_id) {
            Some(&c) if c != condition => {
                return Err(bad("condition", format!("question `{question_id}` already listed under `{c}`")));
            }
            _ => {
                question_condition.insert(question_id.clone(), condition);
            }
        }
        let qs = per_condition.entry(condition).or_default();
        qs.insert(question_id.clone());
        if qs.len() > QUESTIONS_PER_CONDITION {
            return Err(bad(
                "question_id",
                format!("more than {QUESTIONS_PER_CONDITION} questions under condition `{condition}`"),
            ));
        }
        if !seen.insert((participant_id.clone(), question_id.clone())) {
            return Err(Error::DuplicateRecord { participant: participant_id, question: question_id });
        }

        records.push(ResponseRecord {
            participant_id,
            question_id,
            condition,
            audio_path,
            ecog_score,
            age,
            sex,
            education,
            neuropsych,
        });
    }
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    Ok(records)
}

/// Writes records back out in manifest format. Audio paths are written
/// relative to `base` when possible.
pub fn write_manifest(records: &[ResponseRecord], path: impl AsRef<Path>, base: &Path) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    header.extend(NEUROPSYCH_NAMES);
    w.write_record(&header)?;
    for r in records {
        let audio = r.audio_path.strip_prefix(base).unwrap_or(&r.audio_path);
        let mut row = vec![
            r.participant_id.clone(),
            r.question_id.clone(),
            r.condition.to_string(),
            audio.to_string_lossy().into_owned(),
            fmt_num(r.ecog_score),
            fmt_num(r.age),
            r.sex.as_str().to_string(),
            fmt_num(r.education),
        ];
        row.extend(r.neuropsych.iter().map(|v| v.map(fmt_num).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "participant_id,question_id,condition,audio_path,ecog,age,sex,education";

    #[test]
    fn labels_at_cutoff() {
        assert_eq!(label_group(1.81).unwrap(), GroupLabel::High);
        assert_eq!(label_group(1.00).unwrap(), GroupLabel::Low);
        assert_eq!(label_group(3.95).unwrap(), GroupLabel::High);
        assert_eq!(label_group(1.8099).unwrap(), GroupLabel::Low);
        assert!(label_group(0.99).is_err());
        assert!(label_group(4.01).is_err());
    }

    proptest::proptest! {
        #[test]
        fn labels_monotone(a in 1.0f64..=4.0, b in 1.0f64..=4.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            proptest::prop_assert!(label_group(lo).unwrap() <= label_group(hi).unwrap());
        }
    }

    #[test]
    fn empty_manifest() {
        assert!(matches!(parse_manifest("", Path::new(".")), Err(Error::NoRecords)));
        assert!(matches!(parse_manifest(&format!("{HEADER}\n"), Path::new(".")), Err(Error::NoRecords)));
    }

    #[test]
    fn ecog_out_of_range_names_row_and_field() {
        let text = format!("{HEADER}\np1,subtraction,cognitive,a.wav,2.0,70,F,12\np2,subtraction,cognitive,b.wav,4.2,70,M,12\n");
        let err = parse_manifest(&text, Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2") && msg.contains("ecog") && msg.contains("out of range"), "{msg}");
    }

    #[test]
    fn duplicate_rejected() {
        let text = format!("{HEADER}\np1,subtraction,cognitive,a.wav,2.0,70,F,12\np1,subtraction,cognitive,b.wav,2.0,70,F,12\n");
        assert!(matches!(parse_manifest(&text, Path::new(".")), Err(Error::DuplicateRecord { .. })));
    }

    #[test]
    fn malformed_fields() {
        let cases = [
            ("p1,subtraction,cognitive,a.wav,2.0,70,X,12", "sex"),
            ("p1,subtraction,cognitive,a.wav,2.0,abc,F,12", "age"),
            ("p1,subtraction,weekly,a.wav,2.0,70,F,12", "condition"),
            ("p1,subtraction,cognitive,a.wav,2.0,70,F,-1", "education"),
        ];
        for (row, field) in cases {
            let err = parse_manifest(&format!("{HEADER}\n{row}\n"), Path::new(".")).unwrap_err();
            assert!(matches!(&err, Error::Manifest { row: 1, field: f, .. } if f == field), "{err}");
        }
    }

    #[test]
    fn question_condition_consistency() {
        let text = format!("{HEADER}\np1,q1,cognitive,a.wav,2.0,70,F,12\np2,q1,daily,a.wav,2.0,70,F,12\n");
        assert!(parse_manifest(&text, Path::new(".")).is_err());
        let mut rows = String::from(HEADER);
        for q in 0..6 {
            rows.push_str(&format!("\np1,q{q},cognitive,a.wav,2.0,70,F,12"));
        }
        assert!(parse_manifest(&rows, Path::new(".")).is_err());
    }

    #[test]
    fn neuropsych_columns_optional() {
        let text = format!(
            "{HEADER},mmse,fab,cdt,lm1,lm2,tmta,tmtb\np1,q,daily,a.wav,1.5,80,M,9,28,15,9,,6,40,100\n"
        );
        let recs = parse_manifest(&text, Path::new("/data")).unwrap();
        assert_eq!(recs[0].neuropsych, [Some(28.0), Some(15.0), Some(9.0), None, Some(6.0), Some(40.0), Some(100.0)]);
        assert_eq!(recs[0].audio_path, Path::new("/data/a.wav"));
        assert_eq!(recs[0].group(), GroupLabel::Low);
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!("{HEADER}\np1,q,daily,clips/a.wav,1.5,80,M,9\np2,q,daily,clips/b.wav,3.5,66,F,16\n");
        let recs = parse_manifest(&text, dir.path()).unwrap();
        let out = dir.path().join("m.csv");
        write_manifest(&recs, &out, dir.path()).unwrap();
        assert_eq!(load_manifest(&out).unwrap(), recs);
    }
}
