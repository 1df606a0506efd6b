//! Compares plain cross-validation against cluster-then-classify on data
//! where the class boundary flips between two regions, so no single linear
//! model fits but one model per region does.
//!
//!     cargo run --release --example plain_vs_clustered

use std::error::Error;

use droidlens::dataset::{synth_blobs, BlobSpec};
use droidlens::eval::{report, run_clustered_pipeline, run_plain_pipeline, EvalConfig};
use droidlens::learn::ClassifierSpec;

fn main() -> Result<(), Box<dyn Error>> {
    let spec = BlobSpec {
        centers: vec![
            vec![15.0, 20.0],
            vec![25.0, 20.0],
            vec![115.0, 120.0],
            vec![125.0, 120.0],
        ],
        // benign left of malware in one region, right of it in the other
        labels: vec![0, 1, 1, 0],
        per_center_count: 50,
        noise_sigma: 1.5,
    };
    let ds = synth_blobs(&spec, 5)?;
    let specs = ClassifierSpec::all_defaults(42);
    let cfg = EvalConfig::default();
    let plain = run_plain_pipeline(&ds, &specs, &cfg)?;
    let clustered = run_clustered_pipeline(&ds, &specs, &cfg)?;
    print!("{}", report::report_table(&plain));
    println!();
    print!("{}", report::report_table(&clustered));
    println!();
    print!("{}", report::summary_markdown(&plain, &clustered));
    Ok(())
}
