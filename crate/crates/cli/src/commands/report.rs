use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use voxmark_core::stats::StatsReport;
use voxmark_explain::{CommonFeatures, ImportanceReport};
use voxmark_learn::EvalReport;

use super::{read_file, write_file, Ctx};
use crate::config::Echo;
use crate::error::{CliError, Result};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory holding `evaluate`, `stats` and `explain` outputs.
    #[arg(long)]
    pub dir: PathBuf,
    /// Defaults to `<dir>/report.md`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Files in `dir` named `<prefix>*.json`, sorted by name.
fn json_files(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let p = e.map_err(|e| CliError::io(dir, e))?.path();
        let name = p.file_name().and_then(|s| s.to_str()).unwrap_or_default();
        if name.starts_with(prefix) && name.ends_with(".json") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

const MODE_ORDER: [&str; 3] = ["cognitive", "daily", "neuropsych"];

fn classification(md: &mut String, evals: &mut [EvalReport]) {
    evals.sort_by_key(|r| (MODE_ORDER.iter().position(|m| *m == r.mode).unwrap_or(3), r.algorithm.id()));
    let _ = writeln!(md, "## Classification\n");
    let _ = writeln!(md, "Pooled over the ten outer test folds; high ECog is the positive class.\n");
    let _ = writeln!(md, "| Data | Model | ACC | SEN | SPE | F1 | TP | FN | TN | FP | Participant ACC |");
    let _ = writeln!(md, "|---|---|---|---|---|---|---|---|---|---|---|");
    for r in evals.iter() {
        let [acc, sen, spe, f1] = r.metrics.rounded();
        let c = r.confusion;
        let _ = writeln!(
            md,
            "| {} | {} | {acc:.1} | {sen:.1} | {spe:.1} | {f1:.1} | {} | {} | {} | {} | {:.1} |",
            r.mode,
            r.algorithm.display_name(),
            c.tp,
            c.fn_,
            c.tn,
            c.fp,
            r.participant_metrics.accuracy
        );
    }
    let _ = writeln!(md);
}

fn importance(md: &mut String, reports: &[ImportanceReport]) {
    let _ = writeln!(md, "## Robust features\n");
    for r in reports {
        let _ = writeln!(md, "### {} ({})\n", r.mode, r.algorithm.display_name());
        let ranking = r.ranking();
        if ranking.is_empty() {
            let _ = writeln!(md, "No feature was selected in more than half of the folds.\n");
            continue;
        }
        let _ = writeln!(md, "| Rank | Feature | Mean abs. Shapley | Selection frequency |");
        let _ = writeln!(md, "|---|---|---|---|");
        for (i, f) in ranking.iter().enumerate() {
            let _ = writeln!(md, "| {} | {} | {:.4} | {:.1} |", i + 1, f.name, f.mean_abs_shapley, f.selection_frequency);
        }
        let _ = writeln!(md);
    }
}

fn common(md: &mut String, path: &Path, c: &CommonFeatures) {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let _ = writeln!(
        md,
        "Common robust features ({name}): {}. Share of mean abs. Shapley: {:.1}% and {:.1}%.\n",
        if c.features.is_empty() { "none".to_string() } else { c.features.join(", ") },
        100.0 * c.fraction_a,
        100.0 * c.fraction_b
    );
}

fn statistics(md: &mut String, s: &StatsReport) {
    let _ = writeln!(md, "## Statistics\n");
    let _ = writeln!(md, "| Condition | Correlated with ECog (BH p < 0.05) | Group difference (BH p < 0.05) |");
    let _ = writeln!(md, "|---|---|---|");
    for c in [voxmark_core::corpus::Condition::Cognitive, voxmark_core::corpus::Condition::Daily] {
        let list = |v: Vec<String>| if v.is_empty() { "none".to_string() } else { v.join(", ") };
        let _ = writeln!(md, "| {c} | {} | {} |", list(s.significant(c, "rho", 0.05)), list(s.significant(c, "eta_sq", 0.05)));
    }
    let _ = writeln!(md);
    for x in &s.cross {
        if let Some(p) = x.paired {
            let _ = writeln!(
                md,
                "- {}: cognitive {:.3} ± {:.3} vs daily {:.3} ± {:.3}, paired t = {:.2}, p = {:.2e} ({} features)",
                x.statistic, p.mean_a, p.sd_a, p.mean_b, p.sd_b, p.t, p.p, x.n_features
            );
        }
        if let Some(a) = x.agreement {
            let _ = writeln!(md, "- {} agreement across conditions: Spearman rho = {:.2}, p = {:.2e}", x.statistic, a.rho, a.p);
        }
    }
    let _ = writeln!(md);
}

pub fn run(ctx: &Ctx, args: &ReportArgs) -> Result<()> {
    let mut evals = Vec::new();
    for p in json_files(&args.dir, "eval_")? {
        evals.push(EvalReport::from_json(&read_file(&p)?)?);
    }
    let mut importances = Vec::new();
    for p in json_files(&args.dir, "importance_")? {
        importances.push(ImportanceReport::from_json(&read_file(&p)?)?);
    }
    let stats_path = args.dir.join("stats.json");
    let stats: Option<StatsReport> =
        if stats_path.exists() { Some(serde_json::from_str(&read_file(&stats_path)?)?) } else { None };
    let commons = json_files(&args.dir, "common_")?;
    if evals.is_empty() && importances.is_empty() && stats.is_none() {
        return Err(CliError::Data(format!("{}: no evaluation, explanation or statistics outputs", args.dir.display())));
    }

    let mut md = String::from("# voxmark report\n\n");
    if !evals.is_empty() {
        classification(&mut md, &mut evals);
    }
    if !importances.is_empty() {
        importance(&mut md, &importances);
    }
    for p in &commons {
        let c: CommonFeatures = serde_json::from_str(&read_file(p)?)?;
        common(&mut md, p, &c);
    }
    if let Some(s) = &stats {
        statistics(&mut md, s);
    }
    let out = args.out.clone().unwrap_or_else(|| args.dir.join("report.md"));
    write_file(&out, &md)?;
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    Echo::new("report", ctx.seed).input("dir", args.dir.display()).write(dir, "report")?;
    println!("{}", out.display());
    Ok(())
}
