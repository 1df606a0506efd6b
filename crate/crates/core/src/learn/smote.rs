use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;

use super::LearnError;
use crate::dataset::Dataset;
use crate::matrix::squared_distance;
use crate::rng::rng_from_seed;

pub const DEFAULT_SMOTE_NEIGHBORS: usize = 5;

/// `base + u * (neighbor - base)`.
pub fn interpolate(base: &[f64], neighbor: &[f64], u: f64) -> Vec<f64> {
    base.iter()
        .zip(neighbor)
        .map(|(b, n)| b + u * (n - b))
        .collect()
}

/// Indices (into `pool`) of the `k` nearest rows to `pool[at]`, excluding
/// itself; distance ties go to the lower index.
fn nearest_neighbors(rows: &[Vec<f64>], pool: &[usize], at: usize, k: usize) -> Vec<usize> {
    let me = &rows[pool[at]];
    let mut d: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != at)
        .map(|(j, &r)| (squared_distance(me, &rows[r]), j))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, j)| j).collect()
}

/// Oversamples the minority class up to the majority count. Original rows
/// keep their order; synthetics are appended with ids `<base id>#smote<j>`.
pub fn smote_balance(ds: &Dataset, k_neighbors: usize, seed: u64) -> Result<Dataset, LearnError> {
    let (benign, malware) = ds.class_counts();
    if benign == malware {
        return Ok(ds.clone());
    }
    let minority_label = u8::from(malware < benign);
    let minority: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.labels()[i] == minority_label)
        .collect();
    if minority.len() < 2 {
        return Err(LearnError::SmoteMinority(minority.len()));
    }
    if k_neighbors == 0 {
        return Err(LearnError::InvalidHyperparameter {
            key: "smote_k".into(),
            message: "must be at least 1".into(),
        });
    }
    let k = k_neighbors.min(minority.len() - 1);
    let needed = benign.max(malware) - minority.len();

    // Draw everything up front so neighbor searches can run in parallel
    // without touching the random stream.
    let mut rng = rng_from_seed(seed);
    let draws: Vec<(usize, usize, f64)> = (0..needed)
        .map(|_| {
            let base = rng.random_range(0..minority.len());
            let slot = rng.random_range(0..k);
            let u: f64 = rng.random();
            (base, slot, u)
        })
        .collect();
    let mut bases: Vec<usize> = draws.iter().map(|d| d.0).collect();
    bases.sort_unstable();
    bases.dedup();
    let neighbors: BTreeMap<usize, Vec<usize>> = bases
        .par_iter()
        .map(|&b| (b, nearest_neighbors(ds.features(), &minority, b, k)))
        .collect();

    let mut out = ds.clone();
    for (j, &(base, slot, u)) in draws.iter().enumerate() {
        let b = minority[base];
        let n = minority[neighbors[&base][slot]];
        let x = interpolate(&ds.features()[b], &ds.features()[n], u);
        out.push_unchecked(format!("{}#smote{j}", ds.ids()[b]), x, minority_label);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Dataset {
        let ids = (0..6).map(|i| format!("r{i}")).collect();
        let x = vec![
            vec![0.0, 0.0],
            vec![2.0, 2.0],
            vec![9.0, 1.0],
            vec![9.0, 2.0],
            vec![9.0, 3.0],
            vec![9.0, 4.0],
        ];
        Dataset::new(ids, x, vec![1, 1, 0, 0, 0, 0]).unwrap()
    }

    #[test]
    fn two_point_minority_stays_on_diagonal() {
        let out = smote_balance(&fixture(), 5, 7).unwrap();
        assert_eq!(out.class_counts(), (4, 4));
        assert_eq!(&out.features()[..6], fixture().features());
        for x in &out.features()[6..] {
            assert_eq!(x[0], x[1]);
            assert!((0.0..=2.0).contains(&x[0]));
        }
        assert!(out.ids()[6].contains("#smote0"));
    }

    #[test]
    fn balanced_is_identity() {
        let ds = fixture().subset(&[0, 1, 2, 3]);
        assert_eq!(smote_balance(&ds, 5, 1).unwrap(), ds);
    }

    #[test]
    fn single_minority_rejected() {
        let ds = fixture().subset(&[0, 2, 3]);
        assert!(matches!(
            smote_balance(&ds, 5, 1),
            Err(LearnError::SmoteMinority(1))
        ));
    }

    #[test]
    fn interpolate_endpoints() {
        assert_eq!(interpolate(&[1.0, 2.0], &[3.0, 6.0], 0.0), vec![1.0, 2.0]);
        assert_eq!(interpolate(&[1.0, 2.0], &[3.0, 6.0], 0.5), vec![2.0, 4.0]);
    }

    #[test]
    fn seeded() {
        assert_eq!(
            smote_balance(&fixture(), 5, 3).unwrap(),
            smote_balance(&fixture(), 5, 3).unwrap()
        );
    }
}
