use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, Tree, TreeParams};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Majority vote; an even split goes to 0.
    pub fn predict(&self, x: &[f64]) -> u8 {
        let ones = self.trees.iter().filter(|t| t.predict(x) == 1).count();
        u8::from(2 * ones > self.trees.len())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` means `floor(sqrt(d))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

pub(crate) fn fit_forest(x: &[Vec<f64>], y: &[u8], p: ForestParams) -> Forest {
    let n = x.len();
    let d = x[0].len();
    let max_features = p
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
        .clamp(1, d);
    let params = TreeParams {
        min_samples_split: p.min_samples_split,
        max_depth: p.max_depth,
        max_features: Some(max_features),
    };
    let trees = (0..p.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(p.seed, t as u64));
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow_tree(x, y, sample, &params, Some(&mut rng))
        })
        .collect();
    Forest { trees }
}
