use std::path::PathBuf;

use clap::Args;
use voxmark_core::corpus::Condition;
use voxmark_core::features::{feature_index, read_feature_table, FeatureVector};
use voxmark_core::stats::{significance_marker, stats_report, FeatureStats, StatsReport};

use super::{ensure_dir, write_file, Ctx};
use crate::config::Echo;
use crate::error::{CliError, Result};
use crate::svg::{box_panel, scatter_panel, Panel, Svg, GREY};

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Feature table written by `extract`.
    #[arg(long)]
    pub features: PathBuf,
    /// Significance level for the BH-adjusted p-values in the figures.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub out: PathBuf,
}

const CONDITIONS: [Condition; 2] = [Condition::Cognitive, Condition::Daily];

fn column(report: &StatsReport, c: Condition, f: fn(&FeatureStats) -> Option<f64>) -> Vec<Option<f64>> {
    report.rows.iter().filter(|r| r.condition == c).map(f).collect()
}

fn paired(report: &StatsReport, f: fn(&FeatureStats) -> Option<f64>) -> Vec<(f64, f64)> {
    let a = column(report, Condition::Cognitive, f);
    let b = column(report, Condition::Daily, f);
    a.into_iter().zip(b).filter_map(|(x, y)| Some((x?, y?))).collect()
}

fn cross_markers(report: &StatsReport, statistic: &str) -> (String, String) {
    let c = report.cross.iter().find(|c| c.statistic == statistic);
    let t = c.and_then(|c| c.paired).map(|p| significance_marker(p.p).to_string()).unwrap_or_default();
    let agree = c
        .and_then(|c| c.agreement)
        .map(|a| format!("rho = {:.2}{}", a.rho, significance_marker(a.p)))
        .unwrap_or_default();
    (t, agree)
}

/// Boxes of |rho| and eta_p^2 per condition, plus their cross-condition scatter.
fn comparison_figures(report: &StatsReport) -> (String, String) {
    type Get = fn(&FeatureStats) -> Option<f64>;
    let stats: [(&str, &str, Get); 2] =
        [("rho", "|partial Spearman rho| with ECog", |r| r.rho.map(f64::abs)), ("eta_sq", "ANCOVA eta_p^2 (high vs low)", |r| r.eta_sq)];
    let mut boxes = Svg::new(640.0, 340.0);
    for (i, (key, title, get)) in stats.iter().enumerate() {
        let (marker, _) = cross_markers(report, key);
        let groups: Vec<(&str, Vec<f64>)> =
            CONDITIONS.iter().map(|&c| (c.as_str(), column(report, c, *get).into_iter().flatten().collect())).collect();
        box_panel(&mut boxes, Panel { x: 70.0 + 320.0 * i as f64, y: 50.0, w: 230.0, h: 240.0 }, title, &groups, &marker);
    }
    let signed: [(&str, &str, Get); 2] = [("rho", "partial Spearman rho", |r| r.rho), ("eta_sq", "eta_p^2", |r| r.eta_sq)];
    let mut scatter = Svg::new(640.0, 340.0);
    for (i, (key, title, get)) in signed.iter().enumerate() {
        let (_, caption) = cross_markers(report, key);
        let panel = Panel { x: 70.0 + 320.0 * i as f64, y: 40.0, w: 230.0, h: 240.0 };
        scatter_panel(&mut scatter, panel, title, &paired(report, *get), ("cognitive", "daily"), &caption);
    }
    (boxes.finish(), scatter.finish())
}

/// Group boxes of z-scored values for the features significant in both
/// the correlation and the ANCOVA.
fn feature_figure(report: &StatsReport, vectors: &[FeatureVector], condition: Condition, alpha: f64) -> String {
    let sig: Vec<&FeatureStats> = report
        .rows
        .iter()
        .filter(|r| r.condition == condition)
        .filter(|r| r.rho_p_adj.is_some_and(|p| p < alpha) && r.eta_p_adj.is_some_and(|p| p < alpha))
        .collect();
    let per_row = 4;
    let rows = sig.len().div_ceil(per_row).max(1);
    let mut svg = Svg::new(170.0 * per_row as f64 + 40.0, 260.0 * rows as f64 + 40.0);
    if sig.is_empty() {
        svg.text(340.0, 130.0, 12.0, "middle", GREY, &format!("no {condition} feature passes both tests at {alpha}"));
        return svg.finish();
    }
    for (i, r) in sig.iter().enumerate() {
        let j = feature_index(&r.feature).expect("stats rows use table features");
        let rows_c: Vec<&FeatureVector> = vectors.iter().filter(|v| v.condition == condition).collect();
        let vals: Vec<f64> = rows_c.iter().filter_map(|v| v.values[j]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
        let z = |v: f64| if sd > 0.0 { (v - mean) / sd } else { 0.0 };
        let pick = |high: bool| -> Vec<f64> {
            rows_c.iter().filter(|v| v.group.is_high() == high).filter_map(|v| v.values[j]).map(z).collect()
        };
        let groups = [("low", pick(false)), ("high", pick(true))];
        let marker = r.eta_p_adj.map(significance_marker).unwrap_or_default();
        let panel = Panel { x: 60.0 + 170.0 * (i % per_row) as f64, y: 50.0 + 260.0 * (i / per_row) as f64, w: 110.0, h: 180.0 };
        box_panel(&mut svg, panel, &r.feature, &groups, marker);
    }
    svg.finish()
}

pub fn run(ctx: &Ctx, args: &StatsArgs) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha {} outside (0, 1)", args.alpha)));
    }
    let vectors = read_feature_table(&args.features)?;
    let report = stats_report(&vectors)?;
    ensure_dir(&args.out)?;
    report.write_csv(args.out.join("stats.csv"))?;
    write_file(&args.out.join("stats.json"), serde_json::to_string_pretty(&report)?)?;
    let (boxes, scatter) = comparison_figures(&report);
    write_file(&args.out.join("fig3a_comparison.svg"), boxes)?;
    write_file(&args.out.join("fig3b_agreement.svg"), scatter)?;
    for c in CONDITIONS {
        write_file(&args.out.join(format!("fig4_{c}.svg")), feature_figure(&report, &vectors, c, args.alpha))?;
    }
    Echo::new("stats", ctx.seed)
        .input("features", args.features.display())
        .input("alpha", args.alpha)
        .write(&args.out, "stats")?;

    for c in CONDITIONS {
        let rho = report.significant(c, "rho", args.alpha);
        let eta = report.significant(c, "eta_sq", args.alpha);
        println!("{c}: {} correlated with ECog [{}], {} differing by group [{}]", rho.len(), rho.join(", "), eta.len(), eta.join(", "));
    }
    for x in &report.cross {
        if let Some(p) = x.paired {
            println!("{} cognitive vs daily: t = {:.3}, p = {:.3e}", x.statistic, p.t, p.p);
        }
    }
    Ok(())
}
