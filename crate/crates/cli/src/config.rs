//! Run configuration: TOML overrides in, config echo out.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use voxmark_core::dsp::AnalysisConfig;
use voxmark_core::synthlab::CorpusSpec;
use voxmark_explain::ExplainOptions;
use voxmark_learn::CvOptions;

use crate::error::{CliError, Result};

/// Contents of a `--config` file. A config echo is itself a valid config
/// file, so `command` and `inputs` are accepted and ignored.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[allow(dead_code)]
    pub command: Option<String>,
    pub seed: Option<u64>,
    #[allow(dead_code)]
    pub inputs: Option<toml::Table>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub cv: CvOptions,
    #[serde(default)]
    pub explain: ExplainOptions,
    pub synth: Option<CorpusSpec>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Everything needed to replay a run: pass the echo back with `--config`
/// together with the same inputs.
#[derive(Debug, Serialize)]
pub struct Echo<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub inputs: BTreeMap<&'static str, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<&'a AnalysisConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv: Option<&'a CvOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explain: Option<&'a ExplainOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<&'a CorpusSpec>,
}

impl<'a> Echo<'a> {
    pub fn new(command: &'a str, seed: u64) -> Self {
        Echo { command, seed, inputs: BTreeMap::new(), analysis: None, cv: None, explain: None, synth: None }
    }

    pub fn input(mut self, key: &'static str, value: impl ToString) -> Self {
        self.inputs.insert(key, value.to_string());
        self
    }

    /// Writes `<stem>.config.toml` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| CliError::Internal(format!("config echo: {e}")))?;
        let path = dir.join(format!("{stem}.config.toml"));
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}
