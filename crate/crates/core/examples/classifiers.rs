//! Fits all five classifiers on a noisy two-class fixture, reports
//! training accuracy, and round-trips one model through its file format.
//!
//!     cargo run --release --example classifiers

use std::error::Error;

use droidlens::dataset::{synth_blobs, BlobSpec};
use droidlens::learn::{fit, ClassifierKind, ClassifierModel, ClassifierSpec};

fn main() -> Result<(), Box<dyn Error>> {
    let spec = BlobSpec {
        centers: vec![vec![30.0, 10.0, 5.0, 0.0], vec![40.0, 18.0, 2.0, 3.0]],
        labels: vec![0, 1],
        per_center_count: 100,
        noise_sigma: 4.0,
    };
    let ds = synth_blobs(&spec, 11)?;
    let mut models = Vec::new();
    for spec in ClassifierSpec::all_defaults(42) {
        let model = fit(&spec, &ds)?;
        let predicted = model.predict_batch(ds.features())?;
        let correct = predicted
            .iter()
            .zip(ds.labels())
            .filter(|(p, y)| p == y)
            .count();
        println!(
            "{:<24} training accuracy {:.3}",
            spec.kind.display_name(),
            correct as f64 / ds.len() as f64
        );
        models.push(model);
    }

    // hyperparameters are checked by name
    let tuned = ClassifierSpec::new(ClassifierKind::RandomForest)
        .with("n_trees", 25.0)
        .with("max_depth", 4.0);
    let forest = fit(&tuned, &ds)?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("forest.json");
    forest.save(&path)?;
    let restored = ClassifierModel::load(&path)?;
    assert_eq!(
        restored.predict_batch(ds.features())?,
        forest.predict_batch(ds.features())?
    );
    println!(
        "saved and reloaded a 25-tree forest ({} bytes)",
        std::fs::metadata(&path)?.len()
    );

    let typo = ClassifierSpec::new(ClassifierKind::LogisticRegression).with("lamda", 0.1);
    println!("rejected: {}", fit(&typo, &ds).unwrap_err());
    Ok(())
}
