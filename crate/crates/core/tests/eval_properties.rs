mod common;

use common::{clean_blobs, four_blobs};
use droidlens::dataset::Dataset;
use droidlens::eval::{
    clustered_fold, kfold_indices, mean_metrics, metrics, plain_fold, run_clustered_pipeline,
    run_plain_pipeline, training_indices, Aggregation, ConfusionCounts, EvalConfig, Protocol,
    Router,
};
use droidlens::learn::{ClassifierKind, ClassifierSpec};
use proptest::prelude::*;

fn spread(v: impl Iterator<Item = usize>) -> usize {
    let v: Vec<usize> = v.collect();
    v.iter().max().unwrap() - v.iter().min().unwrap()
}

proptest! {
    #[test]
    fn folds_partition_rows(
        labels in prop::collection::vec(0..2u8, 2..150),
        k in 2usize..12,
        seed in any::<u64>(),
        stratified in any::<bool>(),
    ) {
        let n = labels.len();
        prop_assume!(k <= n);
        let folds = kfold_indices(&labels, k, seed, stratified).unwrap();
        prop_assert_eq!(&folds, &kfold_indices(&labels, k, seed, stratified).unwrap());
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(spread(folds.iter().map(Vec::len)) <= 1);
        for f in &folds {
            prop_assert!(f.windows(2).all(|w| w[0] < w[1]));
        }
        let ones = labels.iter().filter(|&&y| y == 1).count();
        if stratified && [ones, n - ones].iter().all(|&c| c == 0 || c >= k) {
            for class in 0..2u8 {
                prop_assert!(spread(folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count())) <= 1);
            }
        }
        for f in 0..k {
            let train = training_indices(&folds, f);
            prop_assert_eq!(train.len() + folds[f].len(), n);
            prop_assert!(train.iter().all(|i| !folds[f].contains(i)));
        }
    }

    #[test]
    fn metrics_match_their_definitions(tp in 0u64..500, tn in 0u64..500, fp in 0u64..500, fn_ in 0u64..500) {
        let m = metrics(ConfusionCounts::new(tp, tn, fp, fn_));
        let ratio = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
            (None, None) => true,
            _ => false,
        };
        prop_assert!(close(m.accuracy, ratio(tp + tn, tp + tn + fp + fn_)));
        prop_assert!(close(m.tpr, ratio(tp, tp + fn_)));
        prop_assert!(close(m.tnr, ratio(tn, tn + fp)));
    }

    #[test]
    fn predictions_recount_to_the_same_counts(
        pairs in prop::collection::vec((0..2u8, 0..2u8), 0..200),
    ) {
        let (truth, pred): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let c = ConfusionCounts::from_predictions(&truth, &pred);
        prop_assert_eq!(c.total(), truth.len() as u64);
        prop_assert_eq!(c.tp + c.fn_, truth.iter().filter(|&&y| y == 1).count() as u64);
        prop_assert_eq!(c.tp + c.fp, pred.iter().filter(|&&y| y == 1).count() as u64);
    }
}

fn specs() -> Vec<ClassifierSpec> {
    vec![
        ClassifierSpec::new(ClassifierKind::LogisticRegression),
        ClassifierSpec::new(ClassifierKind::DecisionTree),
    ]
}

#[test]
fn report_counts_cover_every_row_once() {
    let ds = four_blobs(2);
    let cfg = EvalConfig::default();
    for rep in [
        run_plain_pipeline(&ds, &specs(), &cfg).unwrap(),
        run_clustered_pipeline(&ds, &specs(), &cfg).unwrap(),
    ] {
        for row in &rep.rows {
            assert_eq!(row.counts.total(), ds.len() as u64);
            assert_eq!(row.fold_counts.len(), cfg.cv_k);
            let mut sum = ConfusionCounts::default();
            for c in &row.fold_counts {
                sum += *c;
            }
            assert_eq!(sum, row.counts);
            assert_eq!(row.metrics, metrics(row.counts));
        }
    }
}

#[test]
fn per_fold_mean_averages_fold_metrics() {
    let ds = clean_blobs(4);
    let cfg = EvalConfig {
        aggregation: Aggregation::PerFoldMean,
        ..EvalConfig::default()
    };
    let rep = run_plain_pipeline(&ds, &specs(), &cfg).unwrap();
    for row in &rep.rows {
        let per: Vec<_> = row.fold_counts.iter().map(|&c| metrics(c)).collect();
        assert_eq!(row.metrics, mean_metrics(&per));
    }
}

#[test]
fn pipelines_are_reproducible() {
    let ds = four_blobs(3);
    let cfg = EvalConfig::default();
    let a = run_clustered_pipeline(&ds, &ClassifierSpec::all_defaults(1), &cfg).unwrap();
    let b = run_clustered_pipeline(&ds, &ClassifierSpec::all_defaults(1), &cfg).unwrap();
    assert_eq!(a, b);
}

fn split(ds: &Dataset, fold: usize) -> (Dataset, Dataset) {
    let folds = kfold_indices(ds.labels(), 5, 0, true).unwrap();
    (
        ds.subset(&training_indices(&folds, fold)),
        ds.subset(&folds[fold]),
    )
}

fn perturb_row(ds: &Dataset, row: usize, value: f64) -> Dataset {
    let mut x = ds.features().to_vec();
    x[row].iter_mut().for_each(|v| *v = value);
    Dataset::new(ds.ids().to_vec(), x, ds.labels().to_vec()).unwrap()
}

#[test]
fn test_rows_cannot_influence_other_predictions() {
    let ds = four_blobs(5);
    let cfg = EvalConfig::default();
    let (train, test) = split(&ds, 1);
    let base = clustered_fold(&train, &test, &specs(), &cfg, 1).unwrap();

    // hiding the test labels changes nothing
    let flipped = test
        .with_labels(test.labels().iter().map(|y| 1 - y).collect())
        .unwrap();
    assert_eq!(
        clustered_fold(&train, &flipped, &specs(), &cfg, 1).unwrap(),
        base
    );
    assert_eq!(
        plain_fold(&train, &flipped, &specs(), &cfg, 1).unwrap(),
        plain_fold(&train, &test, &specs(), &cfg, 1).unwrap()
    );

    // moving one test row far away leaves every other prediction alone
    for j in [0, test.len() / 2, test.len() - 1] {
        let moved = clustered_fold(&train, &perturb_row(&test, j, 1e7), &specs(), &cfg, 1).unwrap();
        for (a, b) in base.iter().zip(&moved) {
            for i in (0..test.len()).filter(|&i| i != j) {
                assert_eq!(a[i], b[i], "row {i} changed when row {j} moved");
            }
        }
    }
}

/// Co-membership of every pair of `rows` under a router.
fn partition(router: &Router, rows: &[Vec<f64>]) -> Vec<bool> {
    let routes: Vec<usize> = rows.iter().map(|x| router.route(x)).collect();
    let mut same = Vec::new();
    for i in 0..routes.len() {
        for j in i + 1..routes.len() {
            same.push(routes[i] == routes[j]);
        }
    }
    same
}

#[test]
fn leak_check_is_sensitive_to_a_router_fitted_on_test_rows() {
    let ds = four_blobs(6);
    let cfg = EvalConfig::default();
    let (train, test) = split(&ds, 0);
    let moved = perturb_row(&test, 0, 1e7);

    // fitted on training rows only: unaffected by the moved test row
    let clean = Router::fit(train.features(), &cfg, 9).unwrap();
    let again = Router::fit(train.features(), &cfg, 9).unwrap();
    assert_eq!(
        partition(&clean, train.features()),
        partition(&again, train.features())
    );

    // fitted on training plus test rows: the same perturbation reshapes the
    // clusters the training rows fall into
    let with = |t: &Dataset| {
        let mut rows = train.features().to_vec();
        rows.extend_from_slice(t.features());
        Router::fit(&rows, &cfg, 9).unwrap()
    };
    assert_ne!(
        partition(&with(&test), train.features()),
        partition(&with(&moved), train.features())
    );
}

#[test]
fn full_dataset_protocol_still_counts_every_row() {
    let ds = four_blobs(8);
    let cfg = EvalConfig {
        protocol: Protocol::FullDataset,
        ..EvalConfig::default()
    };
    let rep = run_clustered_pipeline(&ds, &specs(), &cfg).unwrap();
    assert!(rep.rows.iter().all(|r| r.counts.total() == ds.len() as u64));
}

#[test]
fn too_few_folds_or_rows_are_errors() {
    let ds = four_blobs(0);
    let bad_k = EvalConfig {
        cv_k: 1,
        ..EvalConfig::default()
    };
    assert!(run_plain_pipeline(&ds, &specs(), &bad_k).is_err());
    assert!(run_plain_pipeline(&ds, &[], &EvalConfig::default()).is_err());
    let single = ds.with_labels(vec![0; ds.len()]).unwrap();
    assert!(run_plain_pipeline(&single, &specs(), &EvalConfig::default()).is_err());
}
