use rayon::prelude::*;

use super::{check_data, Assignment, ClusterError, NOISE};
use crate::matrix::squared_distance;

#[derive(Debug, Clone)]
pub struct Dbscan {
    pub eps: f64,
    pub min_pts: usize,
}

impl Dbscan {
    pub fn new(eps: f64) -> Self {
        Self { eps, min_pts: 5 }
    }

    pub fn min_pts(mut self, min_pts: usize) -> Self {
        self.min_pts = min_pts;
        self
    }

    /// Core points have at least `min_pts` neighbors within `eps`, counting
    /// themselves. Clusters are the connected components of core points,
    /// numbered by their lowest row. A border point joins the cluster of its
    /// nearest core neighbor; everything else is noise.
    ///
    /// Neighborhoods are recomputed on demand instead of stored, so memory
    /// stays linear even when `eps` covers most of the data.
    pub fn fit(&self, x: &[Vec<f64>]) -> Result<Assignment, ClusterError> {
        check_data(x)?;
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(ClusterError::InvalidParameter(
                "eps must be finite and > 0".into(),
            ));
        }
        if self.min_pts < 1 {
            return Err(ClusterError::InvalidParameter(
                "min_pts must be >= 1".into(),
            ));
        }
        let eps2 = self.eps * self.eps;
        let n = x.len();
        let core: Vec<bool> = x
            .par_iter()
            .map(|p| x.iter().filter(|q| squared_distance(p, q) <= eps2).count() >= self.min_pts)
            .collect();

        let mut labels = vec![NOISE; n];
        let mut k = 0i32;
        let mut stack = Vec::new();
        for seed in 0..n {
            if !core[seed] || labels[seed] != NOISE {
                continue;
            }
            labels[seed] = k;
            stack.push(seed);
            while let Some(p) = stack.pop() {
                for q in 0..n {
                    if core[q] && labels[q] == NOISE && squared_distance(&x[p], &x[q]) <= eps2 {
                        labels[q] = k;
                        stack.push(q);
                    }
                }
            }
            k += 1;
        }

        let border: Vec<(usize, i32)> = (0..n)
            .into_par_iter()
            .filter(|&i| !core[i])
            .filter_map(|i| {
                let mut best: Option<(f64, usize)> = None;
                for j in (0..n).filter(|&j| core[j]) {
                    let d = squared_distance(&x[i], &x[j]);
                    if d <= eps2 && best.is_none_or(|(b, _)| d < b) {
                        best = Some((d, j));
                    }
                }
                best.map(|(_, j)| (i, labels[j]))
            })
            .collect();
        for (i, label) in border {
            labels[i] = label;
        }
        Ok(Assignment::from_parts(labels, k as usize))
    }
}

pub fn dbscan(x: &[Vec<f64>], eps: f64, min_pts: usize) -> Result<Assignment, ClusterError> {
    Dbscan::new(eps).min_pts(min_pts).fit(x)
}
