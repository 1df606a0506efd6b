use rand::seq::SliceRandom;

use super::EvalError;
use crate::rng::rng_from_seed;

/// Splits row indices into `k` folds.
///
/// Rows are shuffled with `seed`, then dealt round-robin. When stratified,
/// each class is dealt in turn and the dealing position carries over from
/// one class to the next, so fold sizes and per-fold class counts each
/// differ by at most one. Stratification needs every present class to have
/// at least `k` rows; otherwise a plain split is used and a warning logged.
/// Indices inside each fold are ascending.
pub fn kfold_indices(
    labels: &[u8],
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<Vec<Vec<usize>>, EvalError> {
    let n = labels.len();
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    if k > n {
        return Err(EvalError::TooManyFolds { k, n });
    }
    let mut rng = rng_from_seed(seed);
    let mut groups: Vec<Vec<usize>> = vec![(0..n).collect()];
    if stratified {
        let by_class: Vec<Vec<usize>> = [0u8, 1]
            .iter()
            .map(|&c| (0..n).filter(|&i| labels[i] == c).collect::<Vec<_>>())
            .filter(|g| !g.is_empty())
            .collect();
        if by_class.iter().all(|g| g.len() >= k) {
            groups = by_class;
        } else {
            log::warn!("a class has fewer than {k} rows; falling back to unstratified folds");
        }
    }
    let mut folds = vec![Vec::new(); k];
    let mut at = 0;
    for mut g in groups {
        g.shuffle(&mut rng);
        for i in g {
            folds[at].push(i);
            at = (at + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Complement of fold `f`, ascending.
pub fn training_indices(folds: &[Vec<usize>], f: usize) -> Vec<usize> {
    let mut train: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != f)
        .flat_map(|(_, fold)| fold.iter().copied())
        .collect();
    train.sort_unstable();
    train
}
