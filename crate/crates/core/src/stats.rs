//! Covariate-adjusted rank correlation, ANCOVA effect sizes, Benjamini-Hochberg
//! adjustment and the cross-condition comparisons built on them.

use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::corpus::Condition;
use crate::error::{Error, Result};
use crate::features::{feature_names, FeatureVector, N_ACOUSTIC};

/// Average ranks (1-based); ties share the mean of their positions.
pub fn rank(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Least-squares fit by modified Gram-Schmidt.
struct LeastSquares {
    q: Vec<Vec<f64>>,
}

impl LeastSquares {
    /// Orthonormalizes the design columns. A column whose remaining norm
    /// falls below `1e-10` of its original norm is collinear with the
    /// columns before it.
    fn new(columns: &[Vec<f64>], names: &[String]) -> Result<Self> {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
        let mut collinear = Vec::new();
        for (c, name) in columns.iter().zip(names) {
            let norm0 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut v = c.clone();
            for basis in &q {
                let d: f64 = basis.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, b) in v.iter_mut().zip(basis) {
                    *x -= d * b;
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm0 == 0.0 || norm <= 1e-10 * norm0 {
                collinear.push(name.clone());
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            q.push(v);
        }
        if !collinear.is_empty() {
            return Err(Error::RankDeficient(collinear));
        }
        Ok(Self { q })
    }

    fn residuals(&self, y: &[f64]) -> Vec<f64> {
        let mut r = y.to_vec();
        for basis in &self.q {
            let d: f64 = basis.iter().zip(&r).map(|(a, b)| a * b).sum();
            for (x, b) in r.iter_mut().zip(basis) {
                *x -= d * b;
            }
        }
        r
    }
}

fn ss(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn centred_ss(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Rows where every value is finite.
fn complete_rows(cols: &[&[f64]]) -> Vec<usize> {
    let n = cols.first().map_or(0, |c| c.len());
    (0..n).filter(|&i| cols.iter().all(|c| c[i].is_finite())).collect()
}

fn pick(v: &[f64], rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&i| v[i]).collect()
}

fn two_sided_t(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

/// Spearman correlation of `x` and `y` adjusted for `covariates`.
///
/// All variables are rank-transformed, ranked `x` and `y` are regressed on
/// the ranked covariates plus an intercept, and `rho` is the Pearson
/// correlation of the residuals; `p` is two-sided from a t distribution with
/// `n - k - 2` degrees of freedom. Non-finite values (missing cells) drop the
/// row. When the covariates explain `x` or `y` completely there is no
/// partial association and `rho = 0`, `p = 1`.
pub fn partial_spearman(x: &[f64], y: &[f64], covariates: &[Vec<f64>]) -> Result<Correlation> {
    if x.len() != y.len() || covariates.iter().any(|c| c.len() != x.len()) {
        return Err(Error::InsufficientData("length mismatch".into()));
    }
    let mut cols: Vec<&[f64]> = vec![x, y];
    cols.extend(covariates.iter().map(Vec::as_slice));
    let rows = complete_rows(&cols);
    let (n, k) = (rows.len(), covariates.len());
    if n < k + 3 {
        return Err(Error::InsufficientData(format!("{n} complete rows for {k} covariates")));
    }
    let rx = rank(&pick(x, &rows));
    let ry = rank(&pick(y, &rows));
    if centred_ss(&rx) == 0.0 || centred_ss(&ry) == 0.0 {
        return Err(Error::Undefined("constant variable after ranking".into()));
    }
    let mut design = vec![vec![1.0; n]];
    let mut names = vec!["intercept".to_string()];
    for (j, c) in covariates.iter().enumerate() {
        design.push(rank(&pick(c, &rows)));
        names.push(format!("covariate_{j}"));
    }
    let ls = LeastSquares::new(&design, &names)?;
    let (ex, ey) = (ls.residuals(&rx), ls.residuals(&ry));
    let (sx, sy) = (ss(&ex), ss(&ey));
    let df = (n - k - 2) as f64;
    if sx <= 1e-20 * centred_ss(&rx) || sy <= 1e-20 * centred_ss(&ry) {
        return Ok(Correlation { rho: 0.0, p: 1.0, n });
    }
    let rho = (ex.iter().zip(&ey).map(|(a, b)| a * b).sum::<f64>() / (sx * sy).sqrt()).clamp(-1.0, 1.0);
    let p = if df <= 0.0 { 1.0 } else { two_sided_t(rho * (df / (1.0 - rho * rho)).sqrt(), df) };
    Ok(Correlation { rho, p, n })
}

/// Plain Spearman correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    partial_spearman(x, y, &[])
}

/// Cross-condition agreement of two per-feature coefficient vectors.
pub fn agreement(a: &[f64], b: &[f64]) -> Result<Correlation> {
    spearman(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaSquared {
    pub eta_sq: f64,
    pub f: f64,
    pub p: f64,
    pub n: usize,
}

/// One-way ANCOVA of `y` on a binary group with covariates.
///
/// Fits `y ~ intercept + covariates + group` and the reduced model without
/// the group; `eta_sq = SS_group / (SS_group + SS_residual)` with
/// `SS_group` the drop in residual sum of squares, `p` from `F(1, n - k - 2)`.
pub fn ancova_eta(y: &[f64], group: &[bool], covariates: &[Vec<f64>], covariate_names: &[String]) -> Result<EtaSquared> {
    if y.len() != group.len() || covariates.iter().any(|c| c.len() != y.len()) {
        return Err(Error::InsufficientData("length mismatch".into()));
    }
    let g: Vec<f64> = group.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut cols: Vec<&[f64]> = vec![y];
    cols.extend(covariates.iter().map(Vec::as_slice));
    let rows = complete_rows(&cols);
    let (n, k) = (rows.len(), covariates.len());
    let gr = pick(&g, &rows);
    let n_high = gr.iter().filter(|&&v| v == 1.0).count();
    if n_high == 0 || n_high == n {
        return Err(Error::InsufficientData("both groups must be represented".into()));
    }
    if n < k + 4 {
        return Err(Error::InsufficientData(format!("{n} complete rows for {k} covariates")));
    }
    let yr = pick(y, &rows);
    let mut design = vec![vec![1.0; n]];
    let mut names = vec!["intercept".to_string()];
    for (j, c) in covariates.iter().enumerate() {
        design.push(pick(c, &rows));
        names.push(covariate_names.get(j).cloned().unwrap_or_else(|| format!("covariate_{j}")));
    }
    let reduced = LeastSquares::new(&design, &names)?;
    design.push(gr);
    names.push("group".into());
    let full = LeastSquares::new(&design, &names)?;
    let ss_reduced = ss(&reduced.residuals(&yr));
    let ss_full = ss(&full.residuals(&yr));
    let ss_group = (ss_reduced - ss_full).max(0.0);
    let total = ss_group + ss_full;
    let eta_sq = if total > 0.0 { (ss_group / total).clamp(0.0, 1.0) } else { 0.0 };
    let df = (n - k - 2) as f64;
    let scale = ss_reduced.max(f64::MIN_POSITIVE);
    let (f, p) = if ss_full <= 1e-24 * scale {
        (f64::INFINITY, 0.0)
    } else {
        let f = ss_group / (ss_full / df);
        (f, FisherSnedecor::new(1.0, df).expect("positive df").sf(f))
    };
    Ok(EtaSquared { eta_sq, f, p, n })
}

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
pub fn bh_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut out = vec![0.0; m];
    let mut running = 1.0f64;
    for (pos, &i) in idx.iter().enumerate().rev() {
        let adj = (p_values[i] * m as f64 / (pos + 1) as f64).max(p_values[i]);
        running = running.min(adj).min(1.0);
        out[i] = running;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedT {
    pub t: f64,
    pub p: f64,
    pub df: usize,
    pub mean_a: f64,
    pub sd_a: f64,
    pub mean_b: f64,
    pub sd_b: f64,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (centred_ss(v) / (n - 1.0)).sqrt())
}

/// Two-sided paired t-test on `a - b`.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<PairedT> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::InsufficientData("paired t needs two equal-length samples of at least 3".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (md, sd) = mean_sd(&d);
    if !(sd > 1e-15 * md.abs().max(1e-300)) || sd == 0.0 {
        return Err(Error::Undefined("paired differences have zero variance".into()));
    }
    let n = d.len();
    let t = md / (sd / (n as f64).sqrt());
    let ((mean_a, sd_a), (mean_b, sd_b)) = (mean_sd(a), mean_sd(b));
    Ok(PairedT { t, p: two_sided_t(t, (n - 1) as f64), df: n - 1, mean_a, sd_a, mean_b, sd_b })
}

/// `*`, `**`, `***` at 0.05, 0.01, 0.001.
pub fn significance_marker(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// One feature within one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub feature: String,
    pub condition: Condition,
    pub n: usize,
    pub rho: Option<f64>,
    pub rho_p: Option<f64>,
    pub rho_p_adj: Option<f64>,
    pub eta_sq: Option<f64>,
    pub eta_p: Option<f64>,
    pub eta_p_adj: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCondition {
    pub statistic: String,
    /// Features with the statistic defined in both conditions.
    pub n_features: usize,
    pub paired: Option<PairedT>,
    pub agreement: Option<Correlation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub rows: Vec<FeatureStats>,
    pub cross: Vec<CrossCondition>,
}

fn adjust_optional(p: &[Option<f64>]) -> Vec<Option<f64>> {
    let present: Vec<f64> = p.iter().flatten().copied().collect();
    let adj = bh_adjust(&present);
    let mut it = adj.into_iter();
    p.iter().map(|v| v.map(|_| it.next().expect("one adjusted value per present p"))).collect()
}

/// Statistics of the 42 acoustic features in one condition: partial
/// Spearman against the ECog score and ANCOVA η_p² between groups, both
/// adjusted for age, sex and education, BH-corrected within the condition.
pub fn condition_stats(vectors: &[FeatureVector], condition: Condition) -> Result<Vec<FeatureStats>> {
    let rows: Vec<&FeatureVector> = vectors.iter().filter(|v| v.condition == condition).collect();
    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!("no {condition} rows")));
    }
    let val = |j: usize| -> Vec<f64> { rows.iter().map(|v| v.values[j].unwrap_or(f64::NAN)).collect() };
    let covariates: Vec<Vec<f64>> = (N_ACOUSTIC..N_ACOUSTIC + 3).map(val).collect();
    let cov_names: Vec<String> = feature_names()[N_ACOUSTIC..].to_vec();
    let ecog: Vec<f64> = rows.iter().map(|v| v.ecog_score).collect();
    let group: Vec<bool> = rows.iter().map(|v| v.group.is_high()).collect();

    let mut out = Vec::with_capacity(N_ACOUSTIC);
    for j in 0..N_ACOUSTIC {
        let x = val(j);
        let corr = partial_spearman(&x, &ecog, &covariates).ok();
        let eta = ancova_eta(&x, &group, &covariates, &cov_names).ok();
        out.push(FeatureStats {
            feature: feature_names()[j].clone(),
            condition,
            n: x.iter().filter(|v| v.is_finite()).count(),
            rho: corr.map(|c| c.rho),
            rho_p: corr.map(|c| c.p),
            rho_p_adj: None,
            eta_sq: eta.map(|e| e.eta_sq),
            eta_p: eta.map(|e| e.p),
            eta_p_adj: None,
        });
    }
    let rho_adj = adjust_optional(&out.iter().map(|r| r.rho_p).collect::<Vec<_>>());
    let eta_adj = adjust_optional(&out.iter().map(|r| r.eta_p).collect::<Vec<_>>());
    for (r, (a, b)) in out.iter_mut().zip(rho_adj.into_iter().zip(eta_adj)) {
        r.rho_p_adj = a;
        r.eta_p_adj = b;
    }
    Ok(out)
}

/// The full battery over both conditions plus cross-condition paired
/// t-tests (on |rho| and η_p²) and Spearman agreement (on signed rho and η_p²).
pub fn stats_report(vectors: &[FeatureVector]) -> Result<StatsReport> {
    let cog = condition_stats(vectors, Condition::Cognitive)?;
    let daily = condition_stats(vectors, Condition::Daily)?;
    let mut cross = Vec::new();
    type Getter = fn(&FeatureStats) -> Option<f64>;
    let stats: [(&str, Getter, Getter); 2] = [
        ("rho", |r| r.rho.map(f64::abs), |r| r.rho),
        ("eta_sq", |r| r.eta_sq, |r| r.eta_sq),
    ];
    for (name, paired_get, agree_get) in stats {
        let pairs: Vec<(usize, usize)> = (0..N_ACOUSTIC)
            .filter(|&j| paired_get(&cog[j]).is_some() && paired_get(&daily[j]).is_some())
            .map(|j| (j, j))
            .collect();
        let a: Vec<f64> = pairs.iter().map(|&(j, _)| paired_get(&cog[j]).unwrap()).collect();
        let b: Vec<f64> = pairs.iter().map(|&(_, j)| paired_get(&daily[j]).unwrap()).collect();
        let sa: Vec<f64> = pairs.iter().map(|&(j, _)| agree_get(&cog[j]).unwrap()).collect();
        let sb: Vec<f64> = pairs.iter().map(|&(_, j)| agree_get(&daily[j]).unwrap()).collect();
        cross.push(CrossCondition {
            statistic: name.to_string(),
            n_features: pairs.len(),
            paired: paired_t(&a, &b).ok(),
            agreement: agreement(&sa, &sb).ok(),
        });
    }
    let mut rows = cog;
    rows.extend(daily);
    Ok(StatsReport { rows, cross })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl StatsReport {
    /// One row per feature × condition with significance markers on the
    /// adjusted p-values.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "feature", "condition", "n", "rho", "rho_p", "rho_p_adj", "rho_sig", "eta_sq", "eta_p", "eta_p_adj", "eta_sig",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.feature.clone(),
                r.condition.to_string(),
                r.n.to_string(),
                cell(r.rho),
                cell(r.rho_p),
                cell(r.rho_p_adj),
                r.rho_p_adj.map(significance_marker).unwrap_or_default().to_string(),
                cell(r.eta_sq),
                cell(r.eta_p),
                cell(r.eta_p_adj),
                r.eta_p_adj.map(significance_marker).unwrap_or_default().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Features with BH-adjusted p below `alpha` for the statistic (`rho` or
    /// `eta_sq`) in the condition.
    pub fn significant(&self, condition: Condition, statistic: &str, alpha: f64) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| r.condition == condition)
            .filter(|r| match statistic {
                "rho" => r.rho_p_adj.is_some_and(|p| p < alpha),
                _ => r.eta_p_adj.is_some_and(|p| p < alpha),
            })
            .map(|r| r.feature.clone())
            .collect()
    }
}
