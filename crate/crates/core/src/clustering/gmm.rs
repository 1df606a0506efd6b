use rayon::prelude::*;

use super::{check_data, check_k, Assignment, ClusterError, KMeans};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Diagonal-covariance Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    /// Total log-likelihood of the training data under the final parameters.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Mean per-sample log-likelihood after every E-step.
    pub ll_history: Vec<f64>,
}

impl GmmModel {
    fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(&w, (mean, var))| {
                let mut acc = 0.0;
                for ((v, m), s2) in x.iter().zip(mean).zip(var) {
                    let diff = v - m;
                    acc += LN_2PI + s2.ln() + diff * diff / s2;
                }
                w.ln() - 0.5 * acc
            })
            .collect()
    }

    /// Posterior component probabilities for one point, computed in log space.
    pub fn responsibilities(&self, x: &[f64]) -> Vec<f64> {
        let lp = self.log_joint(x);
        let lse = log_sum_exp(&lp);
        lp.iter().map(|l| (l - lse).exp()).collect()
    }

    /// Most probable component, ties to the lowest index.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.log_joint(x))
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct Gmm {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub reg_floor: f64,
}

impl Gmm {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: 200,
            tol: 1e-6,
            reg_floor: 1e-6,
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

    pub fn reg_floor(mut self, reg_floor: f64) -> Self {
        self.reg_floor = reg_floor;
        self
    }

    fn e_step(&self, model: &GmmModel, x: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
        let rows: Vec<(Vec<f64>, f64)> = x
            .par_iter()
            .map(|p| {
                let lp = model.log_joint(p);
                let lse = log_sum_exp(&lp);
                (lp.iter().map(|l| (l - lse).exp()).collect(), lse)
            })
            .collect();
        let total = rows.iter().map(|(_, l)| l).sum();
        (rows.into_iter().map(|(r, _)| r).collect(), total)
    }

    fn m_step(&self, model: &mut GmmModel, x: &[Vec<f64>], resp: &[Vec<f64>]) {
        let d = x[0].len();
        let n = x.len() as f64;
        for j in 0..self.k {
            let nk: f64 = resp.iter().map(|r| r[j]).sum::<f64>() + 10.0 * f64::EPSILON;
            let mut mean = vec![0.0; d];
            for (p, r) in x.iter().zip(resp) {
                for (m, v) in mean.iter_mut().zip(p) {
                    *m += r[j] * v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= nk);
            let mut var = vec![0.0; d];
            for (p, r) in x.iter().zip(resp) {
                for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
                    let diff = v - m;
                    *s += r[j] * diff * diff;
                }
            }
            var.iter_mut()
                .for_each(|s| *s = (*s / nk).max(self.reg_floor));
            model.weights[j] = nk / n;
            model.means[j] = mean;
            model.variances[j] = var;
        }
        let total: f64 = model.weights.iter().sum();
        model.weights.iter_mut().for_each(|w| *w /= total);
    }

    fn init(&self, x: &[Vec<f64>]) -> Result<GmmModel, ClusterError> {
        let (km, assignment) = KMeans::new(self.k, self.seed).fit(x)?;
        let d = x[0].len();
        let n = x.len() as f64;
        let global_var: Vec<f64> = {
            let mean: Vec<f64> = (0..d)
                .map(|c| x.iter().map(|p| p[c]).sum::<f64>() / n)
                .collect();
            (0..d)
                .map(|c| x.iter().map(|p| (p[c] - mean[c]).powi(2)).sum::<f64>() / n)
                .collect()
        };
        let sizes = assignment.cluster_sizes();
        let mut variances = Vec::with_capacity(self.k);
        for (j, centroid) in km.centroids.iter().enumerate() {
            let var = if sizes[j] > 1 {
                let mut var = vec![0.0; d];
                for (p, _) in x
                    .iter()
                    .zip(assignment.labels())
                    .filter(|(_, &l)| l as usize == j)
                {
                    for ((s, v), m) in var.iter_mut().zip(p).zip(centroid) {
                        *s += (v - m).powi(2);
                    }
                }
                var.iter().map(|s| s / sizes[j] as f64).collect()
            } else {
                global_var.clone()
            };
            variances.push(
                var.into_iter()
                    .map(|s: f64| s.max(self.reg_floor))
                    .collect(),
            );
        }
        let weights: Vec<f64> = sizes.iter().map(|&s| (s.max(1)) as f64).collect();
        let total: f64 = weights.iter().sum();
        Ok(GmmModel {
            weights: weights.into_iter().map(|w| w / total).collect(),
            means: km.centroids,
            variances,
            log_likelihood: f64::NEG_INFINITY,
            iterations: 0,
            converged: false,
            ll_history: Vec::new(),
        })
    }

    pub fn fit(&self, x: &[Vec<f64>]) -> Result<(GmmModel, Assignment), ClusterError> {
        check_data(x)?;
        check_k(self.k, x.len())?;
        if self.reg_floor.is_nan() || self.reg_floor <= 0.0 {
            return Err(ClusterError::InvalidParameter(
                "reg_floor must be > 0".into(),
            ));
        }
        let n = x.len() as f64;
        let mut model = self.init(x)?;
        let (mut resp, mut total) = self.e_step(&model, x);
        model.ll_history.push(total / n);
        while model.iterations < self.max_iter {
            self.m_step(&mut model, x, &resp);
            model.iterations += 1;
            let (r, t) = self.e_step(&model, x);
            resp = r;
            total = t;
            let prev = *model.ll_history.last().expect("initial E-step recorded");
            model.ll_history.push(total / n);
            if (total / n - prev).abs() < self.tol {
                model.converged = true;
                break;
            }
        }
        model.log_likelihood = total;
        let labels = resp.iter().map(|r| argmax(r) as i32).collect();
        Ok((model, Assignment::from_parts(labels, self.k)))
    }
}

pub fn gmm(x: &[Vec<f64>], k: usize, seed: u64) -> Result<(GmmModel, Assignment), ClusterError> {
    Gmm::new(k, seed).fit(x)
}
