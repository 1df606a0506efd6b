//! Oversamples the minority class with SMOTE and checks that every
//! synthetic row lies on a segment between two original minority rows.
//!
//!     cargo run --example smote_balance

use std::error::Error;

use droidlens::dataset::Dataset;
use droidlens::learn::smote_balance;

fn main() -> Result<(), Box<dyn Error>> {
    let ids = (0..9).map(|i| format!("app{i}")).collect();
    let rows = vec![
        vec![0.0, 0.0],
        vec![2.0, 2.0],
        vec![4.0, 1.0],
        vec![20.0, 20.0],
        vec![21.0, 20.0],
        vec![20.0, 21.0],
        vec![22.0, 22.0],
        vec![21.0, 23.0],
        vec![23.0, 21.0],
    ];
    let labels = vec![1, 1, 1, 0, 0, 0, 0, 0, 0];
    let ds = Dataset::new(ids, rows, labels)?;

    let balanced = smote_balance(&ds, 5, 42)?;
    println!(
        "before {:?}, after {:?}",
        ds.class_counts(),
        balanced.class_counts()
    );
    let minority: Vec<&Vec<f64>> = ds.features()[..3].iter().collect();
    for (id, x) in balanced
        .ids()
        .iter()
        .zip(balanced.features())
        .skip(ds.len())
    {
        // smallest distance to any segment between two minority rows
        let mut best = f64::INFINITY;
        for a in &minority {
            for b in &minority {
                let d: Vec<f64> = b.iter().zip(a.iter()).map(|(b, a)| b - a).collect();
                let len2: f64 = d.iter().map(|v| v * v).sum();
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (x.iter()
                        .zip(a.iter())
                        .zip(&d)
                        .map(|((x, a), d)| (x - a) * d)
                        .sum::<f64>()
                        / len2)
                        .clamp(0.0, 1.0)
                };
                let r: f64 = x
                    .iter()
                    .zip(a.iter())
                    .zip(&d)
                    .map(|((x, a), d)| (x - a - t * d).powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(r);
            }
        }
        println!(
            "{id:<14} ({:.3}, {:.3})  segment residual {best:.1e}",
            x[0], x[1]
        );
    }
    Ok(())
}
