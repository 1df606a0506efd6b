use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::clustering::{
    agglomerative, calinski_harabasz, silhouette, Assignment, Birch, BirchThreshold, ClusterError,
    Dbscan, Gmm, KMeans, Linkage, DEFAULT_RESTARTS,
};
use crate::learn::Standardizer;
use crate::rng::derive_seed_path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    KMeans,
    Agglomerative,
    Birch,
    Dbscan,
    Gmm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::KMeans,
        Algorithm::Agglomerative,
        Algorithm::Birch,
        Algorithm::Dbscan,
        Algorithm::Gmm,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::KMeans => "k_means",
            Algorithm::Agglomerative => "agglomerative",
            Algorithm::Birch => "birch",
            Algorithm::Dbscan => "dbscan",
            Algorithm::Gmm => "gmm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "K-Means Clustering",
            Algorithm::Agglomerative => "Agglomerative Clustering",
            Algorithm::Birch => "BIRCH Clustering",
            Algorithm::Dbscan => "DBSCAN Clustering",
            Algorithm::Gmm => "Gaussian Mixture Model Clustering",
        }
    }
}

/// Parameter grids for [`compare_clusterings`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterGrid {
    pub algorithms: Vec<Algorithm>,
    /// Cluster counts tried for every algorithm except DBSCAN.
    pub k_values: Vec<usize>,
    pub eps_values: Vec<f64>,
    pub min_pts: usize,
    pub linkage: Linkage,
    pub birch_threshold: BirchThreshold,
    pub standardize: bool,
    pub kmeans_restarts: usize,
}

impl Default for ClusterGrid {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            k_values: vec![2, 3, 4, 5],
            eps_values: vec![5000.0, 10000.0, 15000.0, 20000.0],
            min_pts: 5,
            linkage: Linkage::Ward,
            birch_threshold: BirchThreshold::default(),
            standardize: false,
            kmeans_restarts: DEFAULT_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridParam {
    K(usize),
    Eps(f64),
}

impl fmt::Display for GridParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridParam::K(k) => write!(f, "k = {k}"),
            GridParam::Eps(e) => write!(f, "eps = {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub param: GridParam,
    /// Non-empty, non-noise clusters found.
    pub clusters: usize,
    pub noise_fraction: f64,
    /// `None` when undefined; `Some(inf)` when within-cluster dispersion is 0.
    pub calinski_harabasz: Option<f64>,
    pub silhouette: Option<f64>,
    /// Why a score is missing.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringComparison {
    pub rows: Vec<ComparisonRow>,
    /// Row with the highest Calinski-Harabasz score, ties broken by the
    /// higher silhouette, then by row order.
    pub winner: Option<usize>,
}

fn score(x: &[Vec<f64>], a: &Assignment) -> (Option<f64>, Option<f64>, Option<String>) {
    let (rows, kept) = a.without_noise(x);
    let mut notes = Vec::new();
    let ch = if rows.is_empty() {
        notes.push("all points are noise".to_string());
        None
    } else {
        calinski_harabasz(&rows, &kept)
            .map_err(|e| notes.push(format!("calinski-harabasz: {e}")))
            .ok()
    };
    let sil = silhouette(x, a)
        .map(|s| s.score)
        .map_err(|e| {
            if !rows.is_empty() {
                notes.push(format!("silhouette: {e}"));
            }
        })
        .ok();
    let note = (!notes.is_empty()).then(|| notes.join("; "));
    (ch, sil, note)
}

fn run_one(
    x: &[Vec<f64>],
    grid: &ClusterGrid,
    algorithm: Algorithm,
    param: GridParam,
    seed: u64,
) -> ComparisonRow {
    let result: Result<Assignment, ClusterError> = match (algorithm, param) {
        (Algorithm::KMeans, GridParam::K(k)) => {
            KMeans::new(k, derive_seed_path(seed, &[0, k as u64]))
                .restarts(grid.kmeans_restarts)
                .fit(x)
                .map(|r| r.1)
        }
        (Algorithm::Agglomerative, GridParam::K(k)) => agglomerative(x, k, grid.linkage),
        (Algorithm::Birch, GridParam::K(k)) => Birch::new(k).threshold(grid.birch_threshold).fit(x),
        (Algorithm::Gmm, GridParam::K(k)) => Gmm::new(k, derive_seed_path(seed, &[1, k as u64]))
            .fit(x)
            .map(|r| r.1),
        (Algorithm::Dbscan, GridParam::Eps(eps)) => Dbscan::new(eps).min_pts(grid.min_pts).fit(x),
        _ => unreachable!("grid pairs algorithms with their own parameter"),
    };
    match result {
        Ok(a) => {
            let (calinski_harabasz, silhouette, note) = score(x, &a);
            ComparisonRow {
                algorithm,
                param,
                clusters: a.cluster_sizes().iter().filter(|&&s| s > 0).count(),
                noise_fraction: a.noise_count() as f64 / a.len() as f64,
                calinski_harabasz,
                silhouette,
                note,
            }
        }
        Err(e) => ComparisonRow {
            algorithm,
            param,
            clusters: 0,
            noise_fraction: 0.0,
            calinski_harabasz: None,
            silhouette: None,
            note: Some(e.to_string()),
        },
    }
}

fn beats(a: &ComparisonRow, b: &ComparisonRow) -> bool {
    let (Some(ca), Some(cb)) = (a.calinski_harabasz, b.calinski_harabasz) else {
        return a.calinski_harabasz.is_some();
    };
    match ca.total_cmp(&cb) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            a.silhouette.unwrap_or(f64::NEG_INFINITY) > b.silhouette.unwrap_or(f64::NEG_INFINITY)
        }
    }
}

/// Runs every algorithm over its grid and scores each partition.
pub fn compare_clusterings(
    x: &[Vec<f64>],
    grid: &ClusterGrid,
    seed: u64,
) -> Result<ClusteringComparison, EvalError> {
    crate::clustering::check_data(x)?;
    let mut jobs = Vec::new();
    for &algorithm in &grid.algorithms {
        if algorithm == Algorithm::Dbscan {
            if grid.eps_values.is_empty() {
                return Err(EvalError::EmptyGrid("eps_values"));
            }
            jobs.extend(
                grid.eps_values
                    .iter()
                    .map(|&e| (algorithm, GridParam::Eps(e))),
            );
        } else {
            if grid.k_values.is_empty() {
                return Err(EvalError::EmptyGrid("k_values"));
            }
            jobs.extend(grid.k_values.iter().map(|&k| (algorithm, GridParam::K(k))));
        }
    }
    if jobs.is_empty() {
        return Err(EvalError::EmptyGrid("algorithms"));
    }
    let space = if grid.standardize {
        let s = Standardizer::fit(x);
        if s.output_dim() == 0 {
            x.to_vec()
        } else {
            s.transform_all(x)
        }
    } else {
        x.to_vec()
    };
    let rows: Vec<ComparisonRow> = jobs
        .par_iter()
        .map(|&(a, p)| run_one(&space, grid, a, p, seed))
        .collect();
    let mut winner: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if r.calinski_harabasz.is_some() && winner.is_none_or(|w| beats(r, &rows[w])) {
            winner = Some(i);
        }
    }
    Ok(ClusteringComparison { rows, winner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_blobs, BlobSpec};

    fn two_blobs() -> Vec<Vec<f64>> {
        synth_blobs(
            &BlobSpec {
                centers: vec![vec![10000.0, 10000.0], vec![40000.0, 40000.0]],
                labels: vec![0, 1],
                per_center_count: 15,
                noise_sigma: 1500.0,
            },
            11,
        )
        .unwrap()
        .features()
        .to_vec()
    }

    #[test]
    fn kmeans_two_wins_on_two_blobs() {
        let x = two_blobs();
        let grid = ClusterGrid {
            algorithms: vec![Algorithm::KMeans],
            ..ClusterGrid::default()
        };
        let cmp = compare_clusterings(&x, &grid, 1).unwrap();
        assert_eq!(cmp.rows.len(), 4);
        assert_eq!(cmp.rows[cmp.winner.unwrap()].param, GridParam::K(2));
    }

    #[test]
    fn full_grid_has_twenty_rows() {
        let x = two_blobs();
        let cmp = compare_clusterings(&x, &ClusterGrid::default(), 1).unwrap();
        assert_eq!(cmp.rows.len(), 20);
        for r in &cmp.rows {
            if r.algorithm != Algorithm::Dbscan {
                assert!(
                    r.calinski_harabasz.is_some() && r.silhouette.is_some(),
                    "{r:?}"
                );
            }
        }
    }

    #[test]
    fn tiny_eps_is_all_noise() {
        let x = two_blobs();
        let grid = ClusterGrid {
            algorithms: vec![Algorithm::Dbscan],
            eps_values: vec![1e-6],
            ..ClusterGrid::default()
        };
        let cmp = compare_clusterings(&x, &grid, 1).unwrap();
        let r = &cmp.rows[0];
        assert_eq!(
            (r.clusters, r.calinski_harabasz, r.silhouette),
            (0, None, None)
        );
        assert_eq!(r.noise_fraction, 1.0);
        assert_eq!(cmp.winner, None);
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = ClusterGrid {
            k_values: vec![],
            ..ClusterGrid::default()
        };
        assert!(matches!(
            compare_clusterings(&two_blobs(), &grid, 1),
            Err(EvalError::EmptyGrid("k_values"))
        ));
    }
}
