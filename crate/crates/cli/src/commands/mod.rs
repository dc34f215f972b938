pub mod evaluate;
pub mod explain;
pub mod extract;
pub mod report;
pub mod stats;
pub mod synth;

use std::path::Path;

use crate::config::FileConfig;
use crate::error::{CliError, Result};

/// Settings shared by every subcommand.
pub struct Ctx {
    pub seed: u64,
    pub file: FileConfig,
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
