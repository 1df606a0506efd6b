use rand::Rng as _;
use rayon::prelude::*;

use super::{check_data, check_k, Assignment, ClusterError};
use crate::matrix::{distance, nearest, squared_distance};
use crate::rng::{derive_seed_path, rng_from_seed, Rng};

/// Restarts per k in [`sse_curve`].
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances of points to their assigned centroid.
    pub sse: f64,
    pub iterations: usize,
    /// SSE after every assignment step, last entry equal to `sse`.
    pub sse_history: Vec<f64>,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dimension(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize, ClusterError> {
        assign_clusters(x, self)
    }
}

/// Nearest centroid by Euclidean distance, ties to the lowest index.
pub fn assign_clusters(x: &[f64], model: &KMeansModel) -> Result<usize, ClusterError> {
    if x.len() != model.dimension() {
        return Err(ClusterError::DimensionMismatch {
            expected: model.dimension(),
            got: x.len(),
        });
    }
    Ok(nearest(x, &model.centroids).0)
}

/// k-means parameters; `KMeans::new(k, seed)` gives the defaults.
#[derive(Debug, Clone)]
pub struct KMeans {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    /// Independent k-means++ starts; the lowest final SSE wins.
    pub restarts: usize,
}

impl KMeans {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: 300,
            tol: 1e-6,
            restarts: 1,
        }
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }

    pub fn fit(&self, x: &[Vec<f64>]) -> Result<(KMeansModel, Assignment), ClusterError> {
        check_data(x)?;
        check_k(self.k, x.len())?;
        if self.restarts == 1 {
            return Ok(lloyd(x, self.k, self.seed, self.max_iter, self.tol));
        }
        let runs: Vec<_> = (0..self.restarts as u64)
            .map(|r| {
                lloyd(
                    x,
                    self.k,
                    derive_seed_path(self.seed, &[r]),
                    self.max_iter,
                    self.tol,
                )
            })
            .collect();
        // first run wins ties
        Ok(runs
            .into_iter()
            .reduce(|best, run| if run.0.sse < best.0.sse { run } else { best })
            .expect("restarts >= 1"))
    }
}

/// Single k-means++ start with default iteration limits.
pub fn kmeans(
    x: &[Vec<f64>],
    k: usize,
    seed: u64,
) -> Result<(KMeansModel, Assignment), ClusterError> {
    KMeans::new(k, seed).fit(x)
}

/// Best-of-[`DEFAULT_RESTARTS`] SSE for each k.
pub fn sse_curve(
    x: &[Vec<f64>],
    ks: &[usize],
    seed: u64,
) -> Result<Vec<(usize, f64)>, ClusterError> {
    check_data(x)?;
    ks.iter()
        .map(|&k| {
            let (model, _) = KMeans::new(k, derive_seed_path(seed, &[k as u64]))
                .restarts(DEFAULT_RESTARTS)
                .fit(x)?;
            Ok((k, model.sse))
        })
        .collect()
}

fn plus_plus_init(x: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(x[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = x
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                chosen = Some(i);
                if acc > target {
                    break;
                }
            }
            chosen.expect("positive total weight")
        } else {
            rng.random_range(0..n)
        };
        let c = x[pick].clone();
        for (w, p) in d2.iter_mut().zip(x) {
            *w = w.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(x: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    x.par_iter().map(|p| nearest(p, centroids)).unzip()
}

/// Moves the centroid of every empty cluster onto the point currently
/// farthest from its own centroid.
fn repair_empty(x: &[Vec<f64>], centroids: &mut [Vec<f64>], labels: &mut [usize], d2: &mut [f64]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut far = None;
        for (i, &d) in d2.iter().enumerate() {
            // never strip the last member of another cluster
            if d > 0.0 && sizes[labels[i]] > 1 && far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        let Some((i, _)) = far else { continue };
        sizes[labels[i]] -= 1;
        sizes[j] = 1;
        centroids[j] = x[i].clone();
        labels[i] = j;
        d2[i] = 0.0;
    }
}

fn lloyd(
    x: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> (KMeansModel, Assignment) {
    let d = x[0].len();
    let mut rng = rng_from_seed(seed);
    let mut centroids = plus_plus_init(x, k, &mut rng);
    let mut history = Vec::new();
    let mut iterations = 0;

    let (mut labels, mut d2) = assign(x, &centroids);
    repair_empty(x, &mut centroids, &mut labels, &mut d2);
    history.push(d2.iter().sum::<f64>());

    while iterations < max_iter {
        iterations += 1;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in x.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for j in 0..k {
            if counts[j] == 0 {
                continue;
            }
            let inv = 1.0 / counts[j] as f64;
            let updated: Vec<f64> = sums[j].iter().map(|s| s * inv).collect();
            shift = shift.max(distance(&updated, &centroids[j]));
            centroids[j] = updated;
        }

        let (new_labels, new_d2) = assign(x, &centroids);
        labels = new_labels;
        d2 = new_d2;
        repair_empty(x, &mut centroids, &mut labels, &mut d2);
        let sse: f64 = d2.iter().sum();
        debug_assert!(
            sse <= history[history.len() - 1] * (1.0 + 1e-12) + 1e-12,
            "SSE increased across a Lloyd iteration"
        );
        history.push(sse);
        if shift < tol {
            break;
        }
    }

    let sse = *history.last().expect("at least one assignment");
    let labels: Vec<i32> = labels.into_iter().map(|l| l as i32).collect();
    (
        KMeansModel {
            centroids,
            sse,
            iterations,
            sse_history: history,
        },
        Assignment::from_parts(labels, k),
    )
}
