//! Scores k-means, agglomerative, BIRCH, DBSCAN and GMM on synthetic
//! opcode-count data and picks the best partition by Calinski-Harabasz.
//!
//!     cargo run --release --example cluster_comparison

use std::error::Error;

use droidlens::dataset::{synth_blobs, BlobSpec};
use droidlens::eval::{compare_clusterings, report, ClusterGrid};

/// A 256-wide center that is zero except for a few busy opcodes.
fn center(hot: &[(usize, f64)]) -> Vec<f64> {
    let mut c = vec![0.0; 256];
    for &(op, v) in hot {
        c[op] = v;
    }
    c
}

fn main() -> Result<(), Box<dyn Error>> {
    // two app families with very different instruction mixes
    let spec = BlobSpec {
        centers: vec![
            center(&[(0x6e, 40000.0), (0x0c, 30000.0), (0x0e, 9000.0)]),
            center(&[(0x6e, 8000.0), (0x12, 6000.0), (0x0e, 2000.0)]),
        ],
        labels: vec![1, 0],
        per_center_count: 60,
        noise_sigma: 1500.0,
    };
    let ds = synth_blobs(&spec, 7)?;
    let cmp = compare_clusterings(ds.features(), &ClusterGrid::default(), 42)?;
    print!("{}", report::comparison_table(&cmp));
    if let Some(w) = cmp.winner {
        let row = &cmp.rows[w];
        println!(
            "\nbest: {} with {} ({} clusters)",
            row.algorithm.display_name(),
            row.param,
            row.clusters
        );
    }
    Ok(())
}
