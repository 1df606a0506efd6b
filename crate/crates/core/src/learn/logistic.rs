use serde::{Deserialize, Serialize};

use super::Standardizer;

/// Weights over standardized features plus a bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub scaler: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective value at every accepted step (or epoch for the SVM).
    pub loss_history: Vec<f64>,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        let z = self.scaler.transform(x);
        self.bias + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Class 1 only for a strictly positive margin.
    pub fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.decision(x) > 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LogisticParams {
    pub lambda: f64,
    pub learning_rate: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn margins(z: &[Vec<f64>], w: &[f64], b: f64) -> Vec<f64> {
    z.iter()
        .map(|r| b + r.iter().zip(w).map(|(a, c)| a * c).sum::<f64>())
        .collect()
}

/// Mean log-loss plus `lambda * |w|^2` (bias unpenalized).
fn objective(z: &[Vec<f64>], y: &[u8], w: &[f64], b: f64, lambda: f64) -> f64 {
    let m = margins(z, w, b);
    let data: f64 = m
        .iter()
        .zip(y)
        .map(|(&s, &t)| softplus(s) - f64::from(t) * s)
        .sum::<f64>()
        / z.len() as f64;
    data + lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// Full-batch gradient descent; a step that raises the objective is
/// rejected and the step size halved.
pub(crate) fn fit_logistic(x: &[Vec<f64>], y: &[u8], p: LogisticParams) -> LinearModel {
    let scaler = Standardizer::fit(x);
    let z = scaler.transform_all(x);
    let d = scaler.output_dim();
    let n = z.len() as f64;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut loss = objective(&z, y, &w, b, p.lambda);
    let mut history = vec![loss];
    let mut step = p.learning_rate;

    for _ in 0..p.max_iter {
        let m = margins(&z, &w, b);
        let mut gw: Vec<f64> = w.iter().map(|v| 2.0 * p.lambda * v).collect();
        let mut gb = 0.0;
        for ((row, &s), &t) in z.iter().zip(&m).zip(y) {
            let r = (sigmoid(s) - f64::from(t)) / n;
            gb += r;
            for (g, v) in gw.iter_mut().zip(row) {
                *g += r * v;
            }
        }
        let gnorm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if gnorm < p.grad_tol || step < 1e-12 {
            break;
        }
        let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(v, g)| v - step * g).collect();
        let cand_b = b - step * gb;
        let cand_loss = objective(&z, y, &cand_w, cand_b, p.lambda);
        if cand_loss <= loss {
            w = cand_w;
            b = cand_b;
            loss = cand_loss;
            history.push(loss);
        } else {
            step *= 0.5;
        }
    }

    LinearModel {
        scaler,
        weights: w,
        bias: b,
        loss_history: history,
    }
}
