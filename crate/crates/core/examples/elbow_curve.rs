//! SSE of k-means for k = 1..8 on three well-separated groups; the curve
//! flattens after k = 3.
//!
//!     cargo run --example elbow_curve

use std::error::Error;

use droidlens::clustering::sse_curve;
use droidlens::dataset::{synth_blobs, BlobSpec};
use droidlens::eval::report::sse_csv;

fn main() -> Result<(), Box<dyn Error>> {
    let spec = BlobSpec {
        centers: vec![
            vec![100.0, 100.0, 0.0],
            vec![900.0, 100.0, 50.0],
            vec![500.0, 800.0, 20.0],
        ],
        labels: vec![0, 1, 1],
        per_center_count: 40,
        noise_sigma: 20.0,
    };
    let ds = synth_blobs(&spec, 3)?;
    let ks: Vec<usize> = (1..=8).collect();
    let curve = sse_curve(ds.features(), &ks, 42)?;
    print!("{}", sse_csv(&curve));
    let top = curve[0].1;
    for (k, sse) in &curve {
        println!("k={k:<2} {:>7.3}% of the k=1 SSE", 100.0 * sse / top);
    }
    Ok(())
}
