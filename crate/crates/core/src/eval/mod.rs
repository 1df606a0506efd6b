//! Cross-validation, detection metrics, the plain and clustered pipelines,
//! and the clustering comparison.

mod compare;
mod folds;
mod metrics;
mod pipeline;
pub mod report;

use thiserror::Error;

use crate::clustering::ClusterError;
use crate::learn::{ClassifierKind, LearnError};

pub use compare::{
    compare_clusterings, Algorithm, ClusterGrid, ClusteringComparison, ComparisonRow, GridParam,
};
pub use folds::{kfold_indices, training_indices};
pub use metrics::{mean_metrics, metrics, ConfusionCounts, Metrics};
pub use pipeline::{
    clustered_fold, fold_count_curve, plain_fold, run_clustered_pipeline, run_plain_pipeline,
    Aggregation, ClassifierResult, EvalConfig, EvalReport, PipelineKind, Protocol, Router,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("{k} folds requested for {n} rows")]
    TooManyFolds { k: usize, n: usize },
    #[error("both classes must be present")]
    SingleClass,
    #[error("no classifiers requested")]
    NoClassifiers,
    #[error("clustered pipeline needs at least 2 rows per cluster: {n} rows for cluster_k = {cluster_k}")]
    TooFewRows { n: usize, cluster_k: usize },
    #[error("empty parameter grid: {0}")]
    EmptyGrid(&'static str),
    #[error("fold {fold}, cluster {cluster}, {kind}: {source}")]
    Fit {
        fold: usize,
        cluster: usize,
        kind: ClassifierKind,
        #[source]
        source: LearnError,
    },
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}
