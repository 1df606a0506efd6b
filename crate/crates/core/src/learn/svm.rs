use rand::seq::SliceRandom;

use super::{LinearModel, Standardizer};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

/// `lambda/2 |w|^2 + mean hinge`, bias folded into `w` as a constant feature.
fn objective(z: &[Vec<f64>], y: &[f64], w: &[f64], lambda: f64) -> f64 {
    let d = w.len() - 1;
    let hinge: f64 = z
        .iter()
        .zip(y)
        .map(|(r, &t)| {
            let s = w[d] + r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            (1.0 - t * s).max(0.0)
        })
        .sum::<f64>()
        / z.len() as f64;
    0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>() + hinge
}

/// Epoch-wise stochastic sub-gradient descent (step `1/(lambda t)`) over
/// seeded shuffles. The model keeps the weights of the best epoch, so the
/// recorded objective never increases.
pub(crate) fn fit_svm(x: &[Vec<f64>], y: &[u8], p: SvmParams) -> LinearModel {
    let scaler = Standardizer::fit(x);
    let z = scaler.transform_all(x);
    let d = scaler.output_dim();
    let t_sign: Vec<f64> = y.iter().map(|&t| if t == 1 { 1.0 } else { -1.0 }).collect();
    let mut rng = rng_from_seed(p.seed);
    let radius = 1.0 / p.lambda.sqrt();

    let mut w = vec![0.0; d + 1];
    let mut best_w = w.clone();
    let mut best = objective(&z, &t_sign, &w, p.lambda);
    let mut history = vec![best];
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut t = 0u64;

    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (p.lambda * t as f64);
            let row = &z[i];
            let margin = t_sign[i] * (w[d] + row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>());
            let shrink = 1.0 - eta * p.lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if margin < 1.0 {
                for (v, a) in w.iter_mut().zip(row) {
                    *v += eta * t_sign[i] * a;
                }
                w[d] += eta * t_sign[i];
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
            }
        }
        let obj = objective(&z, &t_sign, &w, p.lambda);
        if obj < best {
            best = obj;
            best_w.clone_from(&w);
            history.push(best);
        }
    }

    let bias = best_w[d];
    best_w.truncate(d);
    LinearModel {
        scaler,
        weights: best_w,
        bias,
        loss_history: history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_blobs() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..30 {
            let j = (i % 5) as f64 * 0.3;
            x.push(vec![2.0 + j, 3.0 - j]);
            y.push(0);
            x.push(vec![8.0 - j, 9.0 + j]);
            y.push(1);
        }
        let m = fit_svm(
            &x,
            &y,
            SvmParams {
                lambda: 1e-4,
                epochs: 200,
                seed: 1,
            },
        );
        for (r, &t) in x.iter().zip(&y) {
            assert_eq!(m.predict(r), t);
            // margin sign agrees with the label
            assert_eq!(m.decision(r) > 0.0, t == 1);
        }
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }
}
