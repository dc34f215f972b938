use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::Args;
use voxmark_core::features::{build_dataset, read_feature_table, DatasetMode, FeatureVector};
use voxmark_core::stats::StatsReport;
use voxmark_explain::{common_features, explain_report, CommonFeatures, ExplainOptions, ImportanceReport};
use voxmark_learn::{make_fold_plan, EvalReport, FoldPlan};

use super::{ensure_dir, read_file, write_file, Ctx};
use crate::config::Echo;
use crate::error::{CliError, Result};
use crate::svg::{bar_chart, Bar};

#[derive(Debug, Args)]
pub struct ExplainArgs {
    /// Feature table the evaluation was run on.
    #[arg(long)]
    pub features: PathBuf,
    /// Evaluation report (`eval_<mode>_<algorithm>.json`).
    #[arg(long)]
    pub eval: PathBuf,
    /// Fold plan of the evaluation; rebuilt from the report seed when absent.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Report of another condition, for common-feature highlighting.
    #[arg(long)]
    pub other: Option<PathBuf>,
    #[arg(long)]
    pub other_plan: Option<PathBuf>,
    /// `stats.json` from `stats`, for significance markers.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub background: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

fn load_report(path: &Path) -> Result<EvalReport> {
    let r = EvalReport::from_json(&read_file(path)?)?;
    if !r.verify() {
        return Err(CliError::Data(format!("{}: metrics do not match the stored confusion counts", path.display())));
    }
    Ok(r)
}

fn attribute(
    vectors: &[FeatureVector],
    report: &EvalReport,
    plan: Option<&Path>,
    options: &ExplainOptions,
) -> Result<ImportanceReport> {
    let mode: DatasetMode = report.mode.parse().map_err(CliError::Data)?;
    let dataset = build_dataset(vectors, mode)?;
    let plan = match plan {
        Some(p) => FoldPlan::from_json(&read_file(p)?)?,
        None => make_fold_plan(&dataset, report.seed)?,
    };
    Ok(explain_report(&dataset, &plan, report, options)?)
}

fn stem(r: &ImportanceReport) -> String {
    format!("{}_{}", r.mode, r.algorithm.id())
}

fn write_outputs(dir: &Path, r: &ImportanceReport, common: &HashSet<String>, stats: Option<&StatsReport>) -> Result<()> {
    let stem = stem(r);
    write_file(&dir.join(format!("importance_{stem}.json")), r.to_json()?)?;
    let mut attributions = Vec::new();
    r.write_attributions_csv(&mut attributions)?;
    write_file(&dir.join(format!("attributions_{stem}.csv")), attributions)?;

    let ranking = r.ranking();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "feature", "mean_abs_shapley", "selection_frequency", "common"])?;
    for (i, f) in ranking.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            f.name.clone(),
            f.mean_abs_shapley.to_string(),
            f.selection_frequency.to_string(),
            common.contains(&f.name).to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&dir.join(format!("ranking_{stem}.csv")), bytes)?;

    // * group difference, † correlation with ECog, both BH-adjusted.
    let marks = |name: &str| -> String {
        let Some(s) = stats else { return String::new() };
        let row = s.rows.iter().find(|x| x.feature == name && x.condition.as_str() == r.mode);
        let mut m = String::new();
        if row.and_then(|x| x.eta_p_adj).is_some_and(|p| p < 0.05) {
            m.push('*');
        }
        if row.and_then(|x| x.rho_p_adj).is_some_and(|p| p < 0.05) {
            m.push('\u{2020}');
        }
        m
    };
    let bars: Vec<Bar> = ranking
        .iter()
        .map(|f| Bar { label: format!("{}{}", f.name, marks(&f.name)), value: f.mean_abs_shapley, highlight: common.contains(&f.name) })
        .collect();
    let mut legend = String::new();
    if !common.is_empty() {
        legend.push_str("red: common to both conditions");
    }
    if stats.is_some() {
        legend.push_str(if legend.is_empty() { "" } else { "; " });
        legend.push_str("* group difference, \u{2020} ECog correlation (BH p < 0.05)");
    }
    let title = format!("{} ({}): robust features by mean |Shapley|", r.mode, r.algorithm.display_name());
    write_file(&dir.join(format!("fig2_{stem}.svg")), bar_chart(&title, &bars, &legend))
}

pub fn run(ctx: &Ctx, args: &ExplainArgs) -> Result<()> {
    let mut options = ctx.file.explain;
    options.seed = ctx.seed;
    if let Some(p) = args.permutations {
        options.n_permutations = p;
    }
    if let Some(b) = args.background {
        options.n_background = b;
    }
    if options.n_background == 0 {
        return Err(CliError::Usage("background must be at least 1".into()));
    }
    let vectors = read_feature_table(&args.features)?;
    let stats: Option<StatsReport> = match &args.stats {
        Some(p) => Some(serde_json::from_str(&read_file(p)?)?),
        None => None,
    };
    let main = attribute(&vectors, &load_report(&args.eval)?, args.plan.as_deref(), &options)?;
    let other = match &args.other {
        Some(p) => Some(attribute(&vectors, &load_report(p)?, args.other_plan.as_deref(), &options)?),
        None => None,
    };
    let common: Option<CommonFeatures> = other.as_ref().map(|o| common_features(&main.frequencies, &o.frequencies));
    let common_set: HashSet<String> = common.iter().flat_map(|c| c.features.iter().cloned()).collect();

    ensure_dir(&args.out)?;
    write_outputs(&args.out, &main, &common_set, stats.as_ref())?;
    if let (Some(o), Some(c)) = (&other, &common) {
        write_outputs(&args.out, o, &common_set, stats.as_ref())?;
        write_file(&args.out.join(format!("common_{}_{}.json", stem(&main), stem(o))), serde_json::to_string_pretty(c)?)?;
    }

    let mut echo = Echo::new("explain", ctx.seed).input("features", args.features.display()).input("eval", args.eval.display());
    for (key, v) in [("plan", &args.plan), ("other", &args.other), ("other_plan", &args.other_plan), ("stats", &args.stats)] {
        if let Some(p) = v {
            echo = echo.input(key, p.display());
        }
    }
    echo.explain = Some(&options);
    echo.write(&args.out, &format!("explain_{}", stem(&main)))?;

    for r in std::iter::once(&main).chain(other.as_ref()) {
        let top: Vec<String> =
            r.ranking().iter().take(10).map(|f| format!("{} ({:.4})", f.name, f.mean_abs_shapley)).collect();
        println!("{}: {}", stem(r), if top.is_empty() { "no robust features".into() } else { top.join(", ") });
    }
    if let Some(c) = &common {
        println!(
            "common: [{}], share {:.1}% / {:.1}%",
            c.features.join(", "),
            100.0 * c.fraction_a,
            100.0 * c.fraction_b
        );
    }
    Ok(())
}
