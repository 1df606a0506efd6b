use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{kfold_indices, training_indices};
use super::metrics::{mean_metrics, metrics, ConfusionCounts, Metrics};
use super::EvalError;
use crate::clustering::{KMeans, KMeansModel, DEFAULT_RESTARTS};
use crate::dataset::Dataset;
use crate::learn::{
    fit, smote_balance, ClassifierKind, ClassifierModel, ClassifierSpec, Standardizer,
};
use crate::matrix::squared_distance;
use crate::rng::derive_seed_path;

// Independent random streams under the run seed.
const FOLD_STREAM: u64 = 0;
const ROUTER_STREAM: u64 = 1;
const SMOTE_STREAM: u64 = 2;
const MODEL_STREAM: u64 = 3;

/// Where the routing clusters are fitted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    /// Inside each fold, on training rows only.
    #[default]
    #[serde(rename = "leakfree")]
    LeakFree,
    /// Once on the full dataset before splitting; test rows leak into the
    /// clustering.
    #[serde(rename = "paper")]
    FullDataset,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Metrics of the confusion counts summed over folds.
    #[default]
    Pooled,
    /// Mean of the per-fold metrics.
    PerFoldMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    Plain,
    Clustered,
}

/// Settings shared by both pipelines; the clustering fields only affect the
/// clustered one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub cv_k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub aggregation: Aggregation,
    pub cluster_k: usize,
    pub smote: bool,
    pub smote_k: usize,
    pub protocol: Protocol,
    /// Cluster on z-scored features (fitted on the training rows).
    pub standardize_clustering: bool,
    pub cluster_restarts: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            cv_k: 10,
            seed: 42,
            stratified: true,
            aggregation: Aggregation::Pooled,
            cluster_k: 2,
            smote: true,
            smote_k: crate::learn::DEFAULT_SMOTE_NEIGHBORS,
            protocol: Protocol::LeakFree,
            standardize_clustering: false,
            cluster_restarts: DEFAULT_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub kind: ClassifierKind,
    /// Summed over folds.
    pub counts: ConfusionCounts,
    pub fold_counts: Vec<ConfusionCounts>,
    /// Derived from the counts according to the report's aggregation.
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pipeline: PipelineKind,
    pub seed: u64,
    pub folds: usize,
    pub aggregation: Aggregation,
    pub rows: Vec<ClassifierResult>,
}

impl EvalReport {
    pub fn row(&self, kind: ClassifierKind) -> Option<&ClassifierResult> {
        self.rows.iter().find(|r| r.kind == kind)
    }
}

/// Nearest-centroid routing of rows to clusters.
#[derive(Debug, Clone)]
pub struct Router {
    scaler: Option<Standardizer>,
    model: KMeansModel,
}

impl Router {
    pub fn fit(rows: &[Vec<f64>], cfg: &EvalConfig, seed: u64) -> Result<Self, EvalError> {
        let scaler = cfg.standardize_clustering.then(|| Standardizer::fit(rows));
        let space = match &scaler {
            Some(s) if s.output_dim() > 0 => s.transform_all(rows),
            _ => rows.to_vec(),
        };
        let scaler = scaler.filter(|s| s.output_dim() > 0);
        let (model, _) = KMeans::new(cfg.cluster_k, seed)
            .restarts(cfg.cluster_restarts)
            .fit(&space)?;
        Ok(Self { scaler, model })
    }

    pub fn k(&self) -> usize {
        self.model.k()
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        match &self.scaler {
            Some(s) => s.transform(x),
            None => x.to_vec(),
        }
    }

    /// Nearest centroid among those with `allowed[c]`, ties to the lowest id.
    fn route_within(&self, x: &[f64], allowed: &[bool]) -> usize {
        let p = self.project(x);
        let mut best = (usize::MAX, f64::INFINITY);
        for (c, centroid) in self.model.centroids.iter().enumerate() {
            let d = squared_distance(&p, centroid);
            if allowed[c] && d < best.1 {
                best = (c, d);
            }
        }
        best.0
    }

    pub fn route(&self, x: &[f64]) -> usize {
        self.route_within(x, &vec![true; self.k()])
    }
}

fn model_seed(
    cfg: &EvalConfig,
    spec: &ClassifierSpec,
    fold: usize,
    cluster: usize,
) -> ClassifierSpec {
    let seed = derive_seed_path(
        cfg.seed,
        &[MODEL_STREAM, spec.seed, fold as u64, cluster as u64],
    );
    spec.clone().seed(seed)
}

fn fit_all(
    train: &Dataset,
    specs: &[ClassifierSpec],
    cfg: &EvalConfig,
    fold: usize,
    cluster: usize,
) -> Result<Vec<ClassifierModel>, EvalError> {
    specs
        .iter()
        .map(|spec| {
            fit(&model_seed(cfg, spec, fold, cluster), train).map_err(|source| EvalError::Fit {
                fold,
                cluster,
                kind: spec.kind,
                source,
            })
        })
        .collect()
}

fn predict_all(models: &[ClassifierModel], x: &[f64]) -> Result<Vec<u8>, EvalError> {
    models
        .iter()
        .map(|m| m.predict(x).map_err(EvalError::from))
        .collect()
}

/// Predictions of each spec (outer) on each test row (inner) after training
/// on `train` alone.
pub fn plain_fold(
    train: &Dataset,
    test: &Dataset,
    specs: &[ClassifierSpec],
    cfg: &EvalConfig,
    fold: usize,
) -> Result<Vec<Vec<u8>>, EvalError> {
    let models = fit_all(train, specs, cfg, fold, 0)?;
    let mut out = vec![Vec::with_capacity(test.len()); specs.len()];
    for x in test.features() {
        for (s, p) in predict_all(&models, x)?.into_iter().enumerate() {
            out[s].push(p);
        }
    }
    Ok(out)
}

/// Clustered counterpart of [`plain_fold`]: clusters `train`, balances and
/// fits per cluster, and routes each test row to its cluster's models. Only
/// `train` influences any fitted state.
pub fn clustered_fold(
    train: &Dataset,
    test: &Dataset,
    specs: &[ClassifierSpec],
    cfg: &EvalConfig,
    fold: usize,
) -> Result<Vec<Vec<u8>>, EvalError> {
    let router = Router::fit(
        train.features(),
        cfg,
        derive_seed_path(cfg.seed, &[ROUTER_STREAM, fold as u64]),
    )?;
    clustered_fold_with(&router, train, test, specs, cfg, fold)
}

fn clustered_fold_with(
    router: &Router,
    train: &Dataset,
    test: &Dataset,
    specs: &[ClassifierSpec],
    cfg: &EvalConfig,
    fold: usize,
) -> Result<Vec<Vec<u8>>, EvalError> {
    let k = router.k();
    let mut members = vec![Vec::new(); k];
    for (i, x) in train.features().iter().enumerate() {
        members[router.route(x)].push(i);
    }
    let occupied: Vec<bool> = members.iter().map(|m| !m.is_empty()).collect();

    let mut models: Vec<Option<Vec<ClassifierModel>>> = Vec::with_capacity(k);
    for (c, rows) in members.iter().enumerate() {
        if rows.is_empty() {
            log::info!("fold {fold}: cluster {c} has no training rows; its test rows use the nearest occupied cluster");
            models.push(None);
            continue;
        }
        let mut part = train.subset(rows);
        let (benign, malware) = part.class_counts();
        if cfg.smote && benign > 0 && malware > 0 && benign != malware {
            if benign.min(malware) < 2 {
                log::warn!("fold {fold}: cluster {c} has a single minority row; skipping SMOTE");
            } else {
                let seed = derive_seed_path(cfg.seed, &[SMOTE_STREAM, fold as u64, c as u64]);
                part =
                    smote_balance(&part, cfg.smote_k, seed).map_err(|source| EvalError::Fit {
                        fold,
                        cluster: c,
                        kind: specs[0].kind,
                        source,
                    })?;
            }
        }
        models.push(Some(fit_all(&part, specs, cfg, fold, c)?));
    }

    let mut out = vec![Vec::with_capacity(test.len()); specs.len()];
    for x in test.features() {
        let c = router.route_within(x, &occupied);
        let fitted = models[c].as_ref().expect("routed to an occupied cluster");
        for (s, p) in predict_all(fitted, x)?.into_iter().enumerate() {
            out[s].push(p);
        }
    }
    Ok(out)
}

fn check_input(ds: &Dataset, specs: &[ClassifierSpec]) -> Result<(), EvalError> {
    if specs.is_empty() {
        return Err(EvalError::NoClassifiers);
    }
    for spec in specs {
        spec.validate()?;
    }
    let (benign, malware) = ds.class_counts();
    if benign == 0 || malware == 0 {
        return Err(EvalError::SingleClass);
    }
    Ok(())
}

fn run_folds<F>(
    ds: &Dataset,
    specs: &[ClassifierSpec],
    cfg: &EvalConfig,
    pipeline: PipelineKind,
    per_fold: F,
) -> Result<EvalReport, EvalError>
where
    F: Fn(&Dataset, &Dataset, usize) -> Result<Vec<Vec<u8>>, EvalError> + Sync,
{
    let folds = kfold_indices(
        ds.labels(),
        cfg.cv_k,
        derive_seed_path(cfg.seed, &[FOLD_STREAM]),
        cfg.stratified,
    )?;
    let results: Vec<Result<Vec<ConfusionCounts>, EvalError>> = (0..folds.len())
        .into_par_iter()
        .map(|f| {
            let train = ds.subset(&training_indices(&folds, f));
            let test = ds.subset(&folds[f]);
            let preds = per_fold(&train, &test, f)?;
            Ok(preds
                .iter()
                .map(|p| ConfusionCounts::from_predictions(test.labels(), p))
                .collect())
        })
        .collect();
    let mut by_fold = Vec::with_capacity(results.len());
    for r in results {
        by_fold.push(r?);
    }
    let rows = specs
        .iter()
        .enumerate()
        .map(|(s, spec)| {
            let fold_counts: Vec<ConfusionCounts> = by_fold.iter().map(|f| f[s]).collect();
            let mut counts = ConfusionCounts::default();
            for &c in &fold_counts {
                counts += c;
            }
            let metrics = match cfg.aggregation {
                Aggregation::Pooled => metrics(counts),
                Aggregation::PerFoldMean => {
                    mean_metrics(&fold_counts.iter().map(|&c| metrics(c)).collect::<Vec<_>>())
                }
            };
            ClassifierResult {
                kind: spec.kind,
                counts,
                fold_counts,
                metrics,
            }
        })
        .collect();
    Ok(EvalReport {
        pipeline,
        seed: cfg.seed,
        folds: folds.len(),
        aggregation: cfg.aggregation,
        rows,
    })
}

/// k-fold evaluation of each spec on the whole dataset.
pub fn run_plain_pipeline(
    ds: &Dataset,
    specs: &[ClassifierSpec],
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    check_input(ds, specs)?;
    run_folds(ds, specs, cfg, PipelineKind::Plain, |train, test, f| {
        plain_fold(train, test, specs, cfg, f)
    })
}

/// k-fold evaluation where each fold clusters, balances and fits per cluster.
pub fn run_clustered_pipeline(
    ds: &Dataset,
    specs: &[ClassifierSpec],
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    check_input(ds, specs)?;
    if cfg.cluster_k == 0 || ds.len() < cfg.cluster_k * 2 {
        return Err(EvalError::TooFewRows {
            n: ds.len(),
            cluster_k: cfg.cluster_k,
        });
    }
    match cfg.protocol {
        Protocol::LeakFree => {
            run_folds(ds, specs, cfg, PipelineKind::Clustered, |train, test, f| {
                clustered_fold(train, test, specs, cfg, f)
            })
        }
        Protocol::FullDataset => {
            let router = Router::fit(
                ds.features(),
                cfg,
                derive_seed_path(cfg.seed, &[ROUTER_STREAM, u64::MAX]),
            )?;
            run_folds(ds, specs, cfg, PipelineKind::Clustered, |train, test, f| {
                clustered_fold_with(&router, train, test, specs, cfg, f)
            })
        }
    }
}

/// Plain-pipeline reports for several fold counts.
pub fn fold_count_curve(
    ds: &Dataset,
    specs: &[ClassifierSpec],
    fold_counts: &[usize],
    cfg: &EvalConfig,
) -> Result<Vec<EvalReport>, EvalError> {
    fold_counts
        .iter()
        .map(|&k| {
            let cfg = EvalConfig {
                cv_k: k,
                ..cfg.clone()
            };
            run_plain_pipeline(ds, specs, &cfg)
        })
        .collect()
}
