use std::path::PathBuf;

use clap::{Args, ValueEnum};
use voxmark_core::features::{build_dataset, read_feature_table, DatasetMode};
use voxmark_learn::cv::write_summary_csv;
use voxmark_learn::{audit, evaluate_algorithms, make_fold_plan, AccessLog, Algorithm, Objective};

use super::{ensure_dir, write_file, Ctx};
use crate::config::Echo;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveArg {
    Accuracy,
    F1,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Feature table written by `extract`.
    #[arg(long)]
    pub features: PathBuf,
    /// cognitive, daily or neuropsych.
    #[arg(long, default_value = "cognitive")]
    pub condition: DatasetMode,
    /// Comma-separated subset of knn, logreg, svm, gbt-a, gbt-b.
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Vec<Algorithm>,
    /// TPE trials per outer fold.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(ctx: &Ctx, args: &EvaluateArgs) -> Result<()> {
    let mut cv = ctx.file.cv;
    if let Some(b) = args.budget {
        cv.budget = b;
    }
    if let Some(o) = args.objective {
        cv.objective = match o {
            ObjectiveArg::Accuracy => Objective::Accuracy,
            ObjectiveArg::F1 => Objective::F1,
        };
    }
    if cv.budget == 0 {
        return Err(CliError::Usage("budget must be at least 1".into()));
    }
    let algorithms: Vec<Algorithm> = if args.algorithms.is_empty() { Algorithm::ALL.to_vec() } else { args.algorithms.clone() };

    let vectors = read_feature_table(&args.features)?;
    let dataset = build_dataset(&vectors, args.condition)?;
    let plan = make_fold_plan(&dataset, ctx.seed)?;
    let log = AccessLog::default();
    let reports = evaluate_algorithms(&dataset, &algorithms, &plan, &cv, ctx.seed, &log)?;
    let leakage = audit(&log, &plan, &dataset);

    ensure_dir(&args.out)?;
    let mode = args.condition.as_str();
    for r in &reports {
        write_file(&args.out.join(format!("eval_{mode}_{}.json", r.algorithm.id())), r.to_json()?)?;
    }
    let mut summary = Vec::new();
    write_summary_csv(&reports, &mut summary)?;
    write_file(&args.out.join(format!("summary_{mode}.csv")), &summary)?;
    write_file(&args.out.join(format!("folds_{mode}.json")), plan.to_json()?)?;
    write_file(&args.out.join(format!("audit_{mode}.json")), serde_json::to_string_pretty(&leakage)?)?;

    let ids: Vec<&str> = algorithms.iter().map(|a| a.id()).collect();
    let mut echo = Echo::new("evaluate", ctx.seed)
        .input("features", args.features.display())
        .input("condition", mode)
        .input("algorithms", ids.join(","));
    echo.cv = Some(&cv);
    echo.write(&args.out, &format!("evaluate_{mode}"))?;

    if !leakage.clean() {
        return Err(CliError::Internal(format!("leakage audit found {} test-row reads during fitting", leakage.violations)));
    }
    println!("{:<34} {:>6} {:>6} {:>6} {:>6}", format!("{mode} model"), "ACC", "SEN", "SPE", "F1");
    for r in &reports {
        let [acc, sen, spe, f1] = r.metrics.rounded();
        println!("{:<34} {acc:>6.1} {sen:>6.1} {spe:>6.1} {f1:>6.1}", r.algorithm.display_name());
    }
    Ok(())
}
