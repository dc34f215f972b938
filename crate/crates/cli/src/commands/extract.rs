use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use voxmark_core::corpus::{load_manifest, Condition};
use voxmark_core::features::{extract_features, write_feature_table};

use super::{ensure_dir, Ctx};
use crate::config::Echo;
use crate::error::{CliError, Result};

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for `features.csv` and `skipped.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Frames more than this many dB below the loudest frame are silence.
    #[arg(long)]
    pub vad_drop_db: Option<f64>,
    /// Shortest kept voiced segment, ms.
    #[arg(long)]
    pub vad_min_ms: Option<f64>,
    /// Context kept around each voiced segment, ms.
    #[arg(long)]
    pub vad_pad_ms: Option<f64>,
}

pub fn run(ctx: &Ctx, args: &ExtractArgs) -> Result<()> {
    let mut analysis = ctx.file.analysis.clone();
    if let Some(v) = args.vad_drop_db {
        analysis.vad.drop_db = v;
    }
    if let Some(v) = args.vad_min_ms {
        analysis.vad.min_ms = v;
    }
    if let Some(v) = args.vad_pad_ms {
        analysis.vad.pad_ms = v;
    }
    let records = load_manifest(&args.manifest)?;
    ensure_dir(&args.out)?;

    let results: Vec<_> = records.par_iter().map(|r| extract_features(r, &analysis)).collect();
    let mut vectors = Vec::with_capacity(results.len());
    let mut skipped = csv::Writer::from_path(args.out.join("skipped.csv"))?;
    skipped.write_record(["participant_id", "question_id", "error"])?;
    for (rec, res) in records.iter().zip(results) {
        match res {
            Ok(v) => vectors.push(v),
            Err(e) => {
                log::warn!("skipping {}/{}: {e}", rec.participant_id, rec.question_id);
                skipped.write_record([rec.participant_id.as_str(), rec.question_id.as_str(), &e.to_string()])?;
            }
        }
    }
    skipped.flush().map_err(|e| CliError::io(&args.out.join("skipped.csv"), e))?;
    if vectors.is_empty() {
        return Err(CliError::Data(format!("all {} records failed", records.len())));
    }
    let table = args.out.join("features.csv");
    write_feature_table(&vectors, &table)?;

    let mut echo = Echo::new("extract", ctx.seed).input("manifest", args.manifest.display());
    echo.analysis = Some(&analysis);
    echo.write(&args.out, "extract")?;
    let cog = vectors.iter().filter(|v| v.condition == Condition::Cognitive).count();
    println!(
        "{cog} cognitive + {} daily rows, {} skipped -> {}",
        vectors.len() - cog,
        records.len() - vectors.len(),
        table.display()
    );
    Ok(())
}
