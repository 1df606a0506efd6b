use rayon::prelude::*;

use super::{check_data, Assignment, ClusterError, NOISE};
use crate::matrix::{distance, squared_distance};

fn check_labels(x: &[Vec<f64>], a: &Assignment) -> Result<(), ClusterError> {
    if a.len() != x.len() {
        return Err(ClusterError::LabelLengthMismatch {
            labels: a.len(),
            rows: x.len(),
        });
    }
    Ok(())
}

/// Ratio of between- to within-cluster dispersion, each divided by its
/// degrees of freedom. Zero within-cluster dispersion gives `+inf`.
pub fn calinski_harabasz(x: &[Vec<f64>], a: &Assignment) -> Result<f64, ClusterError> {
    let d = check_data(x)?;
    check_labels(x, a)?;
    if a.noise_count() > 0 {
        return Err(ClusterError::NoiseNotFiltered);
    }
    let sizes = a.cluster_sizes();
    let k = sizes.iter().filter(|&&s| s > 0).count();
    let n = x.len();
    if k < 2 {
        return Err(ClusterError::TooFewClusters(k));
    }
    if n <= k {
        return Err(ClusterError::TooFewPoints { n, k });
    }

    let mut means = vec![vec![0.0; d]; a.k()];
    let mut overall = vec![0.0; d];
    for (p, &l) in x.iter().zip(a.labels()) {
        for c in 0..d {
            means[l as usize][c] += p[c];
            overall[c] += p[c];
        }
    }
    for (m, &s) in means.iter_mut().zip(&sizes) {
        if s > 0 {
            m.iter_mut().for_each(|v| *v /= s as f64);
        }
    }
    overall.iter_mut().for_each(|v| *v /= n as f64);

    let between: f64 = means
        .iter()
        .zip(&sizes)
        .filter(|(_, &s)| s > 0)
        .map(|(m, &s)| s as f64 * squared_distance(m, &overall))
        .sum();
    let within: f64 = x
        .iter()
        .zip(a.labels())
        .map(|(p, &l)| squared_distance(p, &means[l as usize]))
        .sum();
    if within == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((between / (k - 1) as f64) / (within / (n - k) as f64))
}

/// Mean silhouette over non-noise points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Silhouette {
    pub score: f64,
    /// Share of rows dropped as noise before scoring.
    pub excluded_fraction: f64,
}

/// Exact O(n^2) silhouette; points in singleton clusters contribute 0.
pub fn silhouette(x: &[Vec<f64>], a: &Assignment) -> Result<Silhouette, ClusterError> {
    check_data(x)?;
    check_labels(x, a)?;
    let keep: Vec<usize> = (0..x.len()).filter(|&i| a.labels()[i] != NOISE).collect();
    let excluded_fraction = 1.0 - keep.len() as f64 / x.len() as f64;
    let sizes = a.cluster_sizes();
    let k = sizes.iter().filter(|&&s| s > 0).count();
    if k < 2 {
        return Err(ClusterError::TooFewClusters(k));
    }
    if k == keep.len() {
        return Err(ClusterError::AllSingletons);
    }

    let label = |i: usize| a.labels()[i] as usize;
    let scores: Vec<f64> = keep
        .par_iter()
        .map(|&i| {
            let own = label(i);
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; a.k()];
            for &j in &keep {
                if j != i {
                    sums[label(j)] += distance(&x[i], &x[j]);
                }
            }
            let a_i = sums[own] / (sizes[own] - 1) as f64;
            let b_i = sums
                .iter()
                .zip(&sizes)
                .enumerate()
                .filter(|&(c, (_, &s))| c != own && s > 0)
                .map(|(_, (&sum, &s))| sum / s as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a_i.max(b_i);
            if denom == 0.0 {
                0.0
            } else {
                (b_i - a_i) / denom
            }
        })
        .collect();
    let score = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(Silhouette {
        score,
        excluded_fraction,
    })
}
