use serde::{Deserialize, Serialize};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub log_priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    /// Added to every variance; `var_smoothing` times the largest feature variance.
    pub epsilon: f64,
}

impl NaiveBayesModel {
    pub fn log_posterior(&self, x: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            let ll: f64 = x
                .iter()
                .zip(&self.means[c])
                .zip(&self.variances[c])
                .map(|((v, m), s2)| -0.5 * (LN_2PI + s2.ln() + (v - m) * (v - m) / s2))
                .sum();
            *slot = self.log_priors[c] + ll;
        }
        out
    }

    /// Higher log-posterior wins; ties go to 0.
    pub fn predict(&self, x: &[f64]) -> u8 {
        let lp = self.log_posterior(x);
        u8::from(lp[1] > lp[0])
    }
}

fn moments(rows: &[&Vec<f64>], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len().max(1) as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}

/// Both classes must be present.
pub(crate) fn fit_naive_bayes(x: &[Vec<f64>], y: &[u8], var_smoothing: f64) -> NaiveBayesModel {
    let d = x[0].len();
    let all: Vec<&Vec<f64>> = x.iter().collect();
    let (_, global_var) = moments(&all, d);
    let max_var = global_var.iter().copied().fold(0.0, f64::max);
    let epsilon = if max_var > 0.0 {
        var_smoothing * max_var
    } else {
        var_smoothing
    };

    let mut means: [Vec<f64>; 2] = Default::default();
    let mut variances: [Vec<f64>; 2] = Default::default();
    let mut log_priors = [0.0; 2];
    for c in 0..2u8 {
        let rows: Vec<&Vec<f64>> = x
            .iter()
            .zip(y)
            .filter(|(_, &t)| t == c)
            .map(|(r, _)| r)
            .collect();
        let (m, v) = moments(&rows, d);
        log_priors[usize::from(c)] = (rows.len() as f64 / x.len() as f64).ln();
        means[usize::from(c)] = m;
        variances[usize::from(c)] = v.into_iter().map(|s| s + epsilon).collect();
    }
    NaiveBayesModel {
        log_priors,
        means,
        variances,
        epsilon,
    }
}
