use serde::{Deserialize, Serialize};

use super::{check_data, check_k, Assignment, ClusterError};
use crate::matrix::squared_distance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    #[default]
    Ward,
    Complete,
    Average,
}

/// Condensed upper-triangle distance matrix.
struct Condensed {
    n: usize,
    d: Vec<f64>,
}

impl Condensed {
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[self.index(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let at = self.index(i, j);
        self.d[at] = v;
    }
}

/// Bottom-up merging from singletons until `k` clusters remain.
///
/// Among equally close pairs the one with the lexicographically smallest
/// `(i, j)` cluster ids merges first, a cluster's id being its smallest row
/// index. Labels are numbered by first row of each cluster.
pub fn agglomerative(
    x: &[Vec<f64>],
    k: usize,
    linkage: Linkage,
) -> Result<Assignment, ClusterError> {
    check_data(x)?;
    let n = x.len();
    check_k(k, n)?;

    let mut dist = Condensed {
        n,
        d: Vec::with_capacity(n * n.saturating_sub(1) / 2),
    };
    for i in 0..n {
        for j in i + 1..n {
            let sq = squared_distance(&x[i], &x[j]);
            // ward runs its recurrence on squared distances
            dist.d.push(if linkage == Linkage::Ward {
                sq
            } else {
                sq.sqrt()
            });
        }
    }

    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut parent: Vec<usize> = (0..n).collect();

    let scan = |dist: &Condensed, active: &[bool], r: usize| -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (j, _) in active.iter().enumerate().skip(r + 1).filter(|(_, &a)| a) {
            let v = dist.get(r, j);
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((j, v));
            }
        }
        best
    };
    let mut nn: Vec<Option<(usize, f64)>> = (0..n).map(|r| scan(&dist, &active, r)).collect();

    let mut remaining = n;
    while remaining > k {
        let mut pick: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            if let Some((j, v)) = nn[i] {
                if pick.is_none_or(|(_, _, b)| v < b) {
                    pick = Some((i, j, v));
                }
            }
        }
        let (i, j, dij) = pick.expect("more than k active clusters");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for m in 0..n {
            if !active[m] || m == i || m == j {
                continue;
            }
            let (dmi, dmj) = (dist.get(m, i), dist.get(m, j));
            let merged = match linkage {
                Linkage::Ward => {
                    let nm = size[m] as f64;
                    ((nm + ni) * dmi + (nm + nj) * dmj - nm * dij) / (nm + ni + nj)
                }
                Linkage::Complete => dmi.max(dmj),
                Linkage::Average => (ni * dmi + nj * dmj) / (ni + nj),
            };
            dist.set(m, i, merged);
        }
        active[j] = false;
        size[i] += size[j];
        parent[j] = i;
        remaining -= 1;

        for r in 0..n {
            if !active[r] {
                continue;
            }
            let stale = r == i || matches!(nn[r], Some((t, _)) if t == i || t == j);
            if stale {
                nn[r] = scan(&dist, &active, r);
            } else if r < i {
                let v = dist.get(r, i);
                if let Some((t, b)) = nn[r] {
                    if v < b || (v == b && i < t) {
                        nn[r] = Some((i, v));
                    }
                }
            }
        }
        nn[j] = None;
    }

    // resolve each row to its surviving root; roots are numbered in row order
    let mut root_label = vec![-1i32; n];
    let mut next = 0;
    let mut labels = Vec::with_capacity(n);
    for r in 0..n {
        let mut root = r;
        while parent[root] != root {
            root = parent[root];
        }
        if root_label[root] < 0 {
            root_label[root] = next;
            next += 1;
        }
        labels.push(root_label[root]);
    }
    Ok(Assignment::from_parts(labels, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&p| vec![p]).collect()
    }

    #[test]
    fn two_pairs_any_linkage() {
        let x = line(&[0.0, 1.0, 10.0, 11.0]);
        for linkage in [Linkage::Ward, Linkage::Complete, Linkage::Average] {
            let a = agglomerative(&x, 2, linkage).unwrap();
            assert_eq!(a.labels(), &[0, 0, 1, 1], "{linkage:?}");
        }
    }

    #[test]
    fn trivial_partitions() {
        let x = line(&[3.0, -1.0, 4.0, 1.0, 5.0]);
        for linkage in [Linkage::Ward, Linkage::Complete, Linkage::Average] {
            assert_eq!(
                agglomerative(&x, 5, linkage).unwrap().labels(),
                &[0, 1, 2, 3, 4]
            );
            assert_eq!(agglomerative(&x, 1, linkage).unwrap().labels(), &[0; 5]);
        }
    }

    #[test]
    fn ties_merge_lowest_pair_first() {
        // equally spaced: (0,1) and (1,2) and (2,3) tie; (0,1) merges first
        let x = line(&[0.0, 1.0, 2.0, 3.0]);
        let a = agglomerative(&x, 3, Linkage::Complete).unwrap();
        assert_eq!(a.labels(), &[0, 0, 1, 2]);
    }

    #[test]
    fn rejects_k_out_of_range() {
        let x = line(&[0.0, 1.0]);
        assert!(agglomerative(&x, 0, Linkage::Ward).is_err());
        assert!(agglomerative(&x, 3, Linkage::Ward).is_err());
    }
}
