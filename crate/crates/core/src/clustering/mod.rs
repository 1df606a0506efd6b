//! The five clustering algorithms compared on opcode features, plus the
//! Calinski-Harabasz and silhouette validity indices and the SSE elbow curve.
//!
//! All fits take raw row-major data (`&[Vec<f64>]`) and are pure given
//! their parameters and seed.

mod agglomerative;
mod birch;
mod dbscan;
mod gmm;
mod kmeans;
mod validity;

use thiserror::Error;

pub use agglomerative::{agglomerative, Linkage};
pub use birch::{birch, Birch, BirchThreshold};
pub use dbscan::{dbscan, Dbscan};
pub use gmm::{gmm, Gmm, GmmModel};
pub use kmeans::{assign_clusters, kmeans, sse_curve, KMeans, KMeansModel, DEFAULT_RESTARTS};
pub use validity::{calinski_harabasz, silhouette, Silhouette};

use crate::matrix;

/// Label reserved for DBSCAN noise points.
pub const NOISE: i32 = -1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("empty input")]
    Empty,
    #[error("rows have inconsistent lengths")]
    Ragged,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("k = {k} is out of range for n = {n}")]
    InvalidK { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: model has {expected} features, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{labels} labels for {rows} rows")]
    LabelLengthMismatch { labels: usize, rows: usize },
    #[error("need at least 2 clusters, found {0}")]
    TooFewClusters(usize),
    #[error("need n > k, have n = {n}, k = {k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("every cluster is a singleton")]
    AllSingletons,
    #[error("noise labels must be filtered out first")]
    NoiseNotFiltered,
    #[error("k = {k} exceeds the {entries} CF leaf entries; lower the threshold")]
    TooFewLeafEntries { k: usize, entries: usize },
}

/// Cluster membership for each row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    labels: Vec<i32>,
    k: usize,
}

impl Assignment {
    /// Non-noise labels must form `0..k` without gaps.
    pub fn new(labels: Vec<i32>) -> Result<Self, ClusterError> {
        let k = labels
            .iter()
            .copied()
            .max()
            .map_or(0, |m| (m + 1).max(0) as usize);
        if labels.iter().any(|&l| l < NOISE) {
            return Err(ClusterError::InvalidParameter("label below -1".into()));
        }
        let mut seen = vec![false; k];
        for &l in labels.iter().filter(|&&l| l >= 0) {
            seen[l as usize] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(ClusterError::InvalidParameter(
                "cluster ids must be contiguous from 0".into(),
            ));
        }
        Ok(Self { labels, k })
    }

    pub(crate) fn from_parts(labels: Vec<i32>, k: usize) -> Self {
        Self { labels, k }
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in self.labels.iter().filter(|&&l| l >= 0) {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Relabels clusters in order of first appearance; used to compare
    /// partitions independent of cluster numbering.
    pub fn canonical(&self) -> Vec<i32> {
        let mut map = vec![NOISE; self.k];
        let mut next = 0;
        self.labels
            .iter()
            .map(|&l| {
                if l == NOISE {
                    return NOISE;
                }
                let slot = &mut map[l as usize];
                if *slot == NOISE {
                    *slot = next;
                    next += 1;
                }
                *slot
            })
            .collect()
    }

    /// Rows and assignment with noise points removed (cluster ids kept).
    pub fn without_noise(&self, x: &[Vec<f64>]) -> (Vec<Vec<f64>>, Assignment) {
        let (rows, labels): (Vec<_>, Vec<_>) = x
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l != NOISE)
            .map(|(r, &l)| (r.clone(), l))
            .unzip();
        let k = self.k;
        (rows, Assignment { labels, k })
    }
}

/// Shared validation: non-empty, rectangular, finite. Returns `d`.
pub(crate) fn check_data(x: &[Vec<f64>]) -> Result<usize, ClusterError> {
    if x.is_empty() {
        return Err(ClusterError::Empty);
    }
    let d = matrix::dimension(x).ok_or(ClusterError::Ragged)?;
    if !matrix::all_finite(x) {
        return Err(ClusterError::NonFinite);
    }
    Ok(d)
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<(), ClusterError> {
    if k < 1 || k > n {
        Err(ClusterError::InvalidK { k, n })
    } else {
        Ok(())
    }
}
