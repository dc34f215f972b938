use std::path::PathBuf;

use clap::{Args, ValueEnum};
use voxmark_core::corpus::load_manifest;
use voxmark_core::synthlab::{condition_counts, synth_corpus, CorpusSpec};

use super::{ensure_dir, read_file, Ctx};
use crate::config::Echo;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// 54 participants with jitter and noise shifted in the high group.
    Paper,
    /// Same population without group differences.
    Null,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "paper")]
    pub preset: Preset,
    /// TOML corpus spec; unset fields take the paper preset values.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(ctx: &Ctx, args: &SynthArgs) -> Result<()> {
    let spec = if let Some(path) = &args.spec {
        toml::from_str::<CorpusSpec>(&read_file(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
    } else if let Some(s) = &ctx.file.synth {
        s.clone()
    } else {
        match args.preset {
            Preset::Paper => CorpusSpec::paper(),
            Preset::Null => CorpusSpec::null(),
        }
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    ensure_dir(&args.out)?;
    let manifest = synth_corpus(&spec, ctx.seed, &args.out)?;
    let records = load_manifest(&manifest)?;
    let (cog, daily) = condition_counts(&records);
    let mut echo = Echo::new("synth", ctx.seed);
    echo.synth = Some(&spec);
    echo.write(&args.out, "synth")?;
    println!(
        "{} participants, {cog} cognitive + {daily} daily responses -> {}",
        spec.n_participants,
        manifest.display()
    );
    Ok(())
}
