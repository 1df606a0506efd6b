use rand_distr::{Distribution, Normal};

use super::{Dataset, DatasetError};
use crate::rng::rng_from_seed;

/// Gaussian blobs around fixed centers, one label per center.
#[derive(Debug, Clone)]
pub struct BlobSpec {
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub per_center_count: usize,
    pub noise_sigma: f64,
}

/// Rows are emitted center by center; negative draws clamp to 0 because
/// features are counts.
pub fn synth_blobs(spec: &BlobSpec, seed: u64) -> Result<Dataset, DatasetError> {
    if spec.centers.is_empty() {
        return Err(DatasetError::BadBlobSpec("no centers".into()));
    }
    if spec.labels.len() != spec.centers.len() {
        return Err(DatasetError::BadBlobSpec(format!(
            "{} labels for {} centers",
            spec.labels.len(),
            spec.centers.len()
        )));
    }
    if spec.per_center_count == 0 {
        return Err(DatasetError::BadBlobSpec(
            "per_center_count must be >= 1".into(),
        ));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(DatasetError::BadBlobSpec(
            "noise_sigma must be finite and >= 0".into(),
        ));
    }
    let noise =
        Normal::new(0.0, spec.noise_sigma).map_err(|e| DatasetError::BadBlobSpec(e.to_string()))?;
    let mut rng = rng_from_seed(seed);

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, (center, &label)) in spec.centers.iter().zip(&spec.labels).enumerate() {
        for i in 0..spec.per_center_count {
            let row = center
                .iter()
                .map(|&m| {
                    let v = if spec.noise_sigma == 0.0 {
                        m
                    } else {
                        m + noise.sample(&mut rng)
                    };
                    v.max(0.0)
                })
                .collect();
            ids.push(format!("blob{c}_{i}"));
            rows.push(row);
            labels.push(label);
        }
    }
    Dataset::new(ids, rows, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_centers(sigma: f64) -> BlobSpec {
        BlobSpec {
            centers: vec![vec![5.0, 5.0], vec![50.0, 10.0]],
            labels: vec![0, 1],
            per_center_count: 10,
            noise_sigma: sigma,
        }
    }

    #[test]
    fn zero_noise_rows_equal_centers() {
        let ds = synth_blobs(&two_centers(0.0), 1).unwrap();
        assert_eq!(ds.len(), 20);
        assert!(ds.features()[..10].iter().all(|r| r == &vec![5.0, 5.0]));
        assert!(ds.features()[10..].iter().all(|r| r == &vec![50.0, 10.0]));
        assert_eq!(ds.class_counts(), (10, 10));
    }

    #[test]
    fn same_seed_same_data() {
        let a = synth_blobs(&two_centers(3.0), 9).unwrap();
        let b = synth_blobs(&two_centers(3.0), 9).unwrap();
        assert_eq!(a, b);
        let c = synth_blobs(&two_centers(3.0), 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn clamps_negative_draws() {
        let spec = BlobSpec {
            centers: vec![vec![0.0; 4]],
            labels: vec![0],
            per_center_count: 50,
            noise_sigma: 1.0,
        };
        let ds = synth_blobs(&spec, 3).unwrap();
        assert!(ds.features().iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn empty_centers_rejected() {
        let spec = BlobSpec {
            centers: vec![],
            labels: vec![],
            per_center_count: 1,
            noise_sigma: 0.0,
        };
        assert!(synth_blobs(&spec, 0).is_err());
    }
}
