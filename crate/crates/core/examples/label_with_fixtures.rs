//! Labels feature rows by antivirus consensus, replaying recorded engine
//! reports from a fixture directory instead of calling the live service.
//!
//!     cargo run --example label_with_fixtures

use std::error::Error;
use std::fs;

use droidlens::dataset::oracle::{label_features, OracleClient};
use droidlens::dataset::{consensus_label, ScanVerdicts};

fn report(detected: &[bool]) -> String {
    let engines: Vec<String> = detected
        .iter()
        .enumerate()
        .map(|(i, d)| format!("\"engine{i}\": {{\"detected\": {d}}}"))
        .collect();
    format!("{{\"engines\": {{{}}}}}", engines.join(", "))
}

fn main() -> Result<(), Box<dyn Error>> {
    let hashes = [
        "0a".repeat(32), // clean
        "1b".repeat(32), // one engine fires
        "2c".repeat(32), // most engines fire
    ];
    let verdicts = [
        vec![false; 5],
        vec![true, false, false, false, false],
        vec![true, true, true, false, true],
    ];

    let fixtures = tempfile::tempdir()?;
    for (h, v) in hashes.iter().zip(&verdicts) {
        fs::write(fixtures.path().join(format!("{h}.json")), report(v))?;
    }

    let ids: Vec<String> = hashes.to_vec();
    let rows = vec![vec![3.0; 256], vec![1.0; 256], vec![9.0; 256]];
    for threshold in [1, 3] {
        let mut client = OracleClient::fixtures(fixtures.path());
        let ds = label_features(&mut client, &ids, &rows, threshold)?;
        let (benign, malware) = ds.class_counts();
        println!(
            "threshold {threshold}: labels {:?} ({benign} benign, {malware} malware)",
            ds.labels()
        );
    }

    // an empty engine map is never silently treated as benign
    let empty = ScanVerdicts {
        file_hash: "ff".repeat(32),
        engines: Default::default(),
    };
    println!("empty report: {}", consensus_label(&empty, 1).unwrap_err());
    Ok(())
}
