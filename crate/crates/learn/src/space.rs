//! Hyperparameter domains and sampled configurations.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::models::Algorithm;
use crate::{LearnError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Float { lo: f64, hi: f64, log: bool },
    Int { lo: i64, hi: i64 },
    Cat(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Cat(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Cat(v) => f.write_str(v),
        }
    }
}

/// One point in a [`HyperSpace`], keyed by parameter name.
pub type Config = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperSpace {
    pub params: Vec<Param>,
}

fn float(name: &str, lo: f64, hi: f64, log: bool) -> Param {
    Param { name: name.into(), domain: Domain::Float { lo, hi, log } }
}

fn int(name: &str, lo: i64, hi: i64) -> Param {
    Param { name: name.into(), domain: Domain::Int { lo, hi } }
}

fn cat(name: &str, choices: &[&str]) -> Param {
    Param { name: name.into(), domain: Domain::Cat(choices.iter().map(|s| s.to_string()).collect()) }
}

pub const BORUTA_PERC: &str = "boruta_perc";
pub const BORUTA_TREES: &str = "boruta_trees";

impl HyperSpace {
    /// Classifier domains. Ranges spanning two or more decades are searched
    /// on a log scale.
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        let params = match algorithm {
            Algorithm::Knn => vec![
                int("n_neighbors", 1, 20),
                cat("weights", &["uniform", "distance"]),
                cat("metric", &["euclidean", "manhattan", "minkowski"]),
            ],
            Algorithm::LogReg => vec![
                cat("penalty", &["elasticnet", "l1", "l2", "none"]),
                float("C", 1.0, 1e4, true),
                float("l1_ratio", 0.1, 0.9, false),
                cat("solver", &["saga"]),
            ],
            Algorithm::Svm => vec![
                cat("kernel", &["rbf", "linear"]),
                float("C", 1e-2, 1e2, true),
                float("gamma", 1e-3, 1.0, true),
            ],
            Algorithm::GbtA => vec![
                cat("booster", &["gbtree", "gblinear", "dart"]),
                float("lambda", 1.0, 4.0, false),
                float("alpha", 1e-8, 1e2, true),
                float("subsample", 0.5, 1.0, false),
                float("colsample_bytree", 0.5, 1.0, false),
                int("max_depth", 1, 11),
                float("min_child_weight", 1.0, 1e2, true),
                float("eta", 1e-8, 1.0, true),
                float("gamma", 1e-8, 7.0, true),
                cat("grow_policy", &["depthwise", "lossguide"]),
                cat("sample_type", &["uniform", "weighted"]),
                cat("normalize_type", &["tree", "forest"]),
                float("rate_drop", 1e-8, 1.0, true),
                float("skip_drop", 1e-8, 1.0, true),
            ],
            Algorithm::GbtB => vec![
                float("lambda_l1", 1.0, 10.0, false),
                float("lambda_l2", 1e-2, 1.0, true),
                int("num_leaves", 10, 32),
                float("feature_fraction", 0.1, 0.5, false),
                float("bagging_fraction", 0.8, 1.0, false),
                int("bagging_freq", 3, 7),
                int("min_child_samples", 1, 16),
            ],
        };
        HyperSpace { params }
    }

    /// Classifier domains plus the Boruta tunables searched jointly with them.
    pub fn with_boruta(algorithm: Algorithm) -> Self {
        let mut s = Self::for_algorithm(algorithm);
        s.params.push(cat(BORUTA_PERC, &["80", "90", "100"]));
        s.params.push(cat(BORUTA_TREES, &["100", "300"]));
        s
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn contains(&self, config: &Config) -> bool {
        config.len() == self.params.len()
            && self.params.iter().all(|p| match (config.get(&p.name), &p.domain) {
                (Some(Value::Float(v)), Domain::Float { lo, hi, .. }) => v.is_finite() && v >= lo && v <= hi,
                (Some(Value::Int(v)), Domain::Int { lo, hi }) => v >= lo && v <= hi,
                (Some(Value::Cat(v)), Domain::Cat(choices)) => choices.contains(v),
                _ => false,
            })
    }

    /// Maps a point of the unit cube to a configuration, one coordinate per parameter.
    pub fn from_unit(&self, u: &[f64]) -> Config {
        self.params.iter().zip(u).map(|(p, &t)| (p.name.clone(), p.domain.from_unit(t))).collect()
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Config {
        let u: Vec<f64> = (0..self.len()).map(|_| rng.gen::<f64>()).collect();
        self.from_unit(&u)
    }
}

impl Domain {
    pub fn from_unit(&self, t: f64) -> Value {
        let t = t.clamp(0.0, 1.0);
        match self {
            Domain::Float { lo, hi, log } => {
                let v = if *log { (lo.ln() + t * (hi.ln() - lo.ln())).exp() } else { lo + t * (hi - lo) };
                Value::Float(v.clamp(*lo, *hi))
            }
            Domain::Int { lo, hi } => {
                let span = (hi - lo + 1) as f64;
                Value::Int((lo + (t * span).floor() as i64).min(*hi))
            }
            Domain::Cat(c) => Value::Cat(c[((t * c.len() as f64).floor() as usize).min(c.len() - 1)].clone()),
        }
    }
}

fn missing(name: &str) -> LearnError {
    LearnError::InvalidParam { name: name.into(), message: "missing".into() }
}

/// Typed accessors used when turning a configuration into model parameters.
pub trait ConfigExt {
    fn float(&self, name: &str) -> Result<f64>;
    fn int(&self, name: &str) -> Result<i64>;
    fn cat(&self, name: &str) -> Result<&str>;
}

impl ConfigExt for Config {
    fn float(&self, name: &str) -> Result<f64> {
        match self.get(name) {
            Some(Value::Float(v)) => Ok(*v),
            Some(Value::Int(v)) => Ok(*v as f64),
            Some(_) => Err(LearnError::InvalidParam { name: name.into(), message: "expected a number".into() }),
            None => Err(missing(name)),
        }
    }

    fn int(&self, name: &str) -> Result<i64> {
        match self.get(name) {
            Some(Value::Int(v)) => Ok(*v),
            Some(Value::Float(v)) if v.fract() == 0.0 => Ok(*v as i64),
            Some(Value::Cat(s)) => s
                .parse()
                .map_err(|_| LearnError::InvalidParam { name: name.into(), message: format!("`{s}` is not an integer") }),
            Some(_) => Err(LearnError::InvalidParam { name: name.into(), message: "expected an integer".into() }),
            None => Err(missing(name)),
        }
    }

    fn cat(&self, name: &str) -> Result<&str> {
        match self.get(name) {
            Some(Value::Cat(s)) => Ok(s),
            Some(_) => Err(LearnError::InvalidParam { name: name.into(), message: "expected a category".into() }),
            None => Err(missing(name)),
        }
    }
}
