mod common;

use common::{clean_blobs, segment_residual, wide_dataset};
use droidlens::dataset::Dataset;
use droidlens::learn::{fit, smote_balance, ClassifierKind, ClassifierModel, ClassifierSpec};
use proptest::prelude::*;

fn dataset(rows: Vec<(Vec<f64>, u8)>) -> Dataset {
    let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
    let (x, y) = rows.into_iter().unzip();
    Dataset::new(ids, x, y).unwrap()
}

fn labeled_rows(d: usize) -> impl Strategy<Value = Vec<(Vec<f64>, u8)>> {
    prop::collection::vec((prop::collection::vec(0.0..100.0f64, d), 0..2u8), 4..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn smote_synthetics_lie_on_minority_segments(
        rows in (1usize..6).prop_flat_map(labeled_rows),
        k in 1usize..7,
        seed in any::<u64>(),
    ) {
        let ds = dataset(rows);
        let (b, m) = ds.class_counts();
        prop_assume!(b.min(m) >= 2);
        let minority = u8::from(m < b);
        let out = smote_balance(&ds, k, seed).unwrap();
        let (ob, om) = out.class_counts();
        prop_assert_eq!(ob, om);
        prop_assert_eq!(ob, b.max(m));
        prop_assert_eq!(&out.features()[..ds.len()], ds.features());
        let pool: Vec<&Vec<f64>> = ds
            .features()
            .iter()
            .zip(ds.labels())
            .filter(|(_, &y)| y == minority)
            .map(|(x, _)| x)
            .collect();
        for (x, &y) in out.features()[ds.len()..].iter().zip(&out.labels()[ds.len()..]) {
            prop_assert_eq!(y, minority);
            prop_assert!(segment_residual(x, &pool) < 1e-9);
        }
    }

    #[test]
    fn tree_fits_conflict_free_training_data(rows in labeled_rows(3)) {
        // drop rows whose features repeat with a different label
        let mut seen: Vec<(Vec<f64>, u8)> = Vec::new();
        for (x, y) in rows {
            if !seen.iter().any(|(s, _)| *s == x) {
                seen.push((x, y));
            }
        }
        let ds = dataset(seen);
        let model = fit(&ClassifierSpec::new(ClassifierKind::DecisionTree), &ds).unwrap();
        let pred = model.predict_batch(ds.features()).unwrap();
        prop_assert_eq!(pred.as_slice(), ds.labels());
    }

    #[test]
    fn constant_training_labels_give_constant_models(
        x in prop::collection::vec(prop::collection::vec(0.0..10.0f64, 2), 1..20),
        label in 0..2u8,
    ) {
        let ds = dataset(x.into_iter().map(|r| (r, label)).collect());
        for spec in ClassifierSpec::all_defaults(1) {
            let model = fit(&spec, &ds).unwrap();
            prop_assert!(model.is_constant());
            prop_assert_eq!(model.predict(&[3.0, 4.0]).unwrap(), label);
        }
    }
}

#[test]
fn fits_are_deterministic_for_a_seed() {
    let ds = clean_blobs(3);
    for spec in ClassifierSpec::all_defaults(9) {
        let a = fit(&spec, &ds).unwrap();
        let b = fit(&spec, &ds).unwrap();
        assert_eq!(a, b, "{}", spec.kind);
    }
}

#[test]
fn saved_models_predict_identically() {
    let ds = wide_dataset(4, 30);
    let dir = tempfile::tempdir().unwrap();
    for spec in ClassifierSpec::all_defaults(2) {
        let model = fit(&spec, &ds).unwrap();
        let path = dir.path().join(format!("{}.json", spec.kind.key()));
        model.save(&path).unwrap();
        let loaded = ClassifierModel::load(&path).unwrap();
        assert_eq!(
            loaded.predict_batch(ds.features()).unwrap(),
            model.predict_batch(ds.features()).unwrap(),
            "{}",
            spec.kind
        );
    }
}

#[test]
fn dimension_mismatch_is_an_error() {
    let model = fit(
        &ClassifierSpec::new(ClassifierKind::LogisticRegression),
        &clean_blobs(0),
    )
    .unwrap();
    assert!(model.predict(&[1.0, 2.0]).is_err());
}

#[test]
fn forest_seed_changes_trees_but_not_clean_accuracy() {
    let ds = clean_blobs(5);
    let spec = ClassifierSpec::new(ClassifierKind::RandomForest);
    let a = fit(&spec.clone().seed(1), &ds).unwrap();
    let b = fit(&spec.seed(2), &ds).unwrap();
    assert_ne!(a, b);
    let acc = |m: &ClassifierModel| {
        let p = m.predict_batch(ds.features()).unwrap();
        p.iter().zip(ds.labels()).filter(|(a, b)| a == b).count() as f64 / ds.len() as f64
    };
    assert!(acc(&a) > 0.95 && acc(&b) > 0.95);
}

#[test]
fn smote_keeps_balanced_data_unchanged() {
    let ds = clean_blobs(1);
    assert_eq!(smote_balance(&ds, 5, 0).unwrap(), ds);
}
