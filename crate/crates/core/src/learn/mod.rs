//! SMOTE balancing and the five binary classifiers behind one fit/predict
//! surface.

mod forest;
mod logistic;
mod naive_bayes;
mod smote;
mod standardize;
mod svm;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

pub use forest::{Forest, ForestParams};
pub use logistic::{LinearModel, LogisticParams};
pub use naive_bayes::NaiveBayesModel;
pub use smote::{interpolate, smote_balance, DEFAULT_SMOTE_NEIGHBORS};
pub use standardize::Standardizer;
pub use svm::SvmParams;
pub use tree::{Tree, TreeNode, TreeParams};

const MODEL_FORMAT: &str = "droidlens-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("cannot fit on an empty dataset")]
    Empty,
    #[error("row {0} has a non-finite feature")]
    NonFinite(usize),
    #[error("unknown hyperparameter `{key}` for {kind}")]
    UnknownHyperparameter { kind: ClassifierKind, key: String },
    #[error("hyperparameter `{key}`: {message}")]
    InvalidHyperparameter { key: String, message: String },
    #[error("SMOTE needs at least 2 minority rows, found {0}")]
    SmoteMinority(usize),
    #[error("model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: not a model file (format {format:?}, version {version})")]
    BadModelFile {
        path: PathBuf,
        format: String,
        version: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    LogisticRegression,
    GaussianNb,
    LinearSvm,
    DecisionTree,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::LogisticRegression,
        ClassifierKind::GaussianNb,
        ClassifierKind::LinearSvm,
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
    ];

    /// Column head used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "Logistic Regression",
            ClassifierKind::GaussianNb => "Naive Bayes",
            ClassifierKind::LinearSvm => "Support Vector Machines",
            ClassifierKind::DecisionTree => "Decision Trees",
            ClassifierKind::RandomForest => "Random Forest",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::GaussianNb => "gaussian_nb",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::RandomForest => "random_forest",
        }
    }

    /// Accepted hyperparameters and their defaults. For the tree kinds a
    /// `max_depth` or `max_features` of 0 means "no limit" / "automatic".
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            ClassifierKind::LogisticRegression => &[
                ("lambda", 1e-4),
                ("learning_rate", 1.0),
                ("max_iter", 1000.0),
                ("grad_tol", 1e-6),
            ],
            ClassifierKind::GaussianNb => &[("var_smoothing", 1e-9)],
            ClassifierKind::LinearSvm => &[("lambda", 1e-4), ("epochs", 200.0)],
            ClassifierKind::DecisionTree => &[("min_samples_split", 2.0), ("max_depth", 0.0)],
            ClassifierKind::RandomForest => &[
                ("n_trees", 100.0),
                ("max_features", 0.0),
                ("min_samples_split", 2.0),
                ("max_depth", 0.0),
            ],
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            hyperparameters: BTreeMap::new(),
            seed: default_seed(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyperparameters.insert(key.to_string(), value);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// One spec per kind, all defaults.
    pub fn all_defaults(seed: u64) -> Vec<ClassifierSpec> {
        ClassifierKind::ALL
            .iter()
            .map(|&k| ClassifierSpec::new(k).seed(seed))
            .collect()
    }

    /// Rejects unknown keys and out-of-range values.
    pub fn validate(&self) -> Result<(), LearnError> {
        let defaults = self.kind.defaults();
        for (key, &value) in &self.hyperparameters {
            if !defaults.iter().any(|(k, _)| k == key) {
                return Err(LearnError::UnknownHyperparameter {
                    kind: self.kind,
                    key: key.clone(),
                });
            }
            let bad = |message: &str| {
                Err(LearnError::InvalidHyperparameter {
                    key: key.clone(),
                    message: format!("{value}: {message}"),
                })
            };
            if !value.is_finite() {
                return bad("must be finite");
            }
            match key.as_str() {
                "lambda" | "learning_rate" if value <= 0.0 => return bad("must be positive"),
                "grad_tol" | "var_smoothing" if value < 0.0 => return bad("must be non-negative"),
                "max_iter" | "epochs" | "n_trees" if value < 1.0 || value.fract() != 0.0 => {
                    return bad("must be a positive integer")
                }
                "min_samples_split" if value < 2.0 || value.fract() != 0.0 => {
                    return bad("must be an integer of at least 2")
                }
                "max_depth" | "max_features" if value < 0.0 || value.fract() != 0.0 => {
                    return bad("must be a non-negative integer")
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> f64 {
        self.hyperparameters.get(key).copied().unwrap_or_else(|| {
            self.kind
                .defaults()
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .expect("hyperparameter has a default")
        })
    }

    fn get_count(&self, key: &str) -> usize {
        self.get(key) as usize
    }

    fn get_limit(&self, key: &str) -> Option<usize> {
        Some(self.get_count(key)).filter(|&v| v > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelBody {
    /// Training data held a single class.
    Constant {
        label: u8,
    },
    Linear(LinearModel),
    NaiveBayes(NaiveBayesModel),
    Tree(Tree),
    Forest(Forest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub kind: ClassifierKind,
    pub n_features: usize,
    pub body: ModelBody,
}

impl ClassifierModel {
    pub fn is_constant(&self) -> bool {
        matches!(self.body, ModelBody::Constant { .. })
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8, LearnError> {
        if x.len() != self.n_features {
            return Err(LearnError::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(match &self.body {
            ModelBody::Constant { label } => *label,
            ModelBody::Linear(m) => m.predict(x),
            ModelBody::NaiveBayes(m) => m.predict(x),
            ModelBody::Tree(t) => t.predict(x),
            ModelBody::Forest(f) => f.predict(x),
        })
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>, LearnError> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        let envelope = Envelope {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: Some(self.clone()),
        };
        crate::atomic::write_atomically(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &envelope).map_err(std::io::Error::other)?;
            writeln!(w)
        })
        .map_err(|source| LearnError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        let text = std::fs::read_to_string(path).map_err(|source| LearnError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let envelope: Envelope =
            serde_json::from_str(&text).map_err(|source| LearnError::Json {
                path: path.to_path_buf(),
                source,
            })?;
        match envelope {
            Envelope {
                format,
                version: MODEL_VERSION,
                model: Some(model),
            } if format == MODEL_FORMAT => Ok(model),
            Envelope {
                format, version, ..
            } => Err(LearnError::BadModelFile {
                path: path.to_path_buf(),
                format,
                version,
            }),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    #[serde(default)]
    model: Option<ClassifierModel>,
}

/// Fits one classifier. A single-class training set yields a constant model.
pub fn fit(spec: &ClassifierSpec, ds: &Dataset) -> Result<ClassifierModel, LearnError> {
    spec.validate()?;
    if ds.is_empty() {
        return Err(LearnError::Empty);
    }
    if let Some(row) = ds
        .features()
        .iter()
        .position(|r| r.iter().any(|v| !v.is_finite()))
    {
        return Err(LearnError::NonFinite(row));
    }
    let (x, y) = (ds.features(), ds.labels());
    let body = match ds.class_counts() {
        (0, _) => ModelBody::Constant { label: 1 },
        (_, 0) => ModelBody::Constant { label: 0 },
        _ => match spec.kind {
            ClassifierKind::LogisticRegression => ModelBody::Linear(logistic::fit_logistic(
                x,
                y,
                LogisticParams {
                    lambda: spec.get("lambda"),
                    learning_rate: spec.get("learning_rate"),
                    max_iter: spec.get_count("max_iter"),
                    grad_tol: spec.get("grad_tol"),
                },
            )),
            ClassifierKind::GaussianNb => ModelBody::NaiveBayes(naive_bayes::fit_naive_bayes(
                x,
                y,
                spec.get("var_smoothing"),
            )),
            ClassifierKind::LinearSvm => ModelBody::Linear(svm::fit_svm(
                x,
                y,
                SvmParams {
                    lambda: spec.get("lambda"),
                    epochs: spec.get_count("epochs"),
                    seed: spec.seed,
                },
            )),
            ClassifierKind::DecisionTree => ModelBody::Tree(tree::grow_tree(
                x,
                y,
                (0..ds.len()).collect(),
                &TreeParams {
                    min_samples_split: spec.get_count("min_samples_split"),
                    max_depth: spec.get_limit("max_depth"),
                    max_features: None,
                },
                None,
            )),
            ClassifierKind::RandomForest => ModelBody::Forest(forest::fit_forest(
                x,
                y,
                ForestParams {
                    n_trees: spec.get_count("n_trees"),
                    max_features: spec.get_limit("max_features"),
                    min_samples_split: spec.get_count("min_samples_split"),
                    max_depth: spec.get_limit("max_depth"),
                    seed: spec.seed,
                },
            )),
        },
    };
    Ok(ClassifierModel {
        kind: spec.kind,
        n_features: ds.n_features(),
        body,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> Dataset {
        let mut ids = Vec::new();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let j = f64::from(i % 5) * 0.1;
            ids.push(format!("n{i}"));
            x.push(vec![1.0 + j, 2.0 - j]);
            y.push(0);
            ids.push(format!("p{i}"));
            x.push(vec![6.0 + j, 5.0 + j]);
            y.push(1);
        }
        Dataset::new(ids, x, y).unwrap()
    }

    #[test]
    fn every_kind_separates_blobs() {
        let ds = blobs();
        for spec in ClassifierSpec::all_defaults(1) {
            let m = fit(&spec, &ds).unwrap();
            assert_eq!(
                m.predict_batch(ds.features()).unwrap(),
                ds.labels(),
                "{}",
                spec.kind
            );
        }
    }

    #[test]
    fn single_class_is_constant() {
        let ds = blobs().subset(&[1, 3, 5]);
        let m = fit(&ClassifierSpec::new(ClassifierKind::LinearSvm), &ds).unwrap();
        assert!(m.is_constant());
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn unknown_key_rejected() {
        let spec = ClassifierSpec::new(ClassifierKind::GaussianNb).with("lambda", 1.0);
        assert!(matches!(
            fit(&spec, &blobs()),
            Err(LearnError::UnknownHyperparameter { .. })
        ));
    }

    #[test]
    fn bad_value_rejected() {
        let spec = ClassifierSpec::new(ClassifierKind::DecisionTree).with("min_samples_split", 1.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn dimension_checked() {
        let m = fit(&ClassifierSpec::new(ClassifierKind::DecisionTree), &blobs()).unwrap();
        assert!(matches!(
            m.predict(&[1.0]),
            Err(LearnError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = blobs();
        for spec in ClassifierSpec::all_defaults(3) {
            let m = fit(&spec, &ds).unwrap();
            let path = dir.path().join(format!("{}.json", spec.kind));
            m.save(&path).unwrap();
            assert_eq!(ClassifierModel::load(&path).unwrap(), m);
        }
    }

    #[test]
    fn foreign_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        std::fs::write(&path, r#"{"format":"other","version":1}"#).unwrap();
        assert!(matches!(
            ClassifierModel::load(&path),
            Err(LearnError::BadModelFile { .. })
        ));
    }
}
