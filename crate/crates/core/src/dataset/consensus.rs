use std::collections::BTreeMap;

use super::{DatasetError, BENIGN, MALWARE};

/// Per-engine detection verdicts for one sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanVerdicts {
    pub file_hash: String,
    pub engines: BTreeMap<String, bool>,
}

impl ScanVerdicts {
    pub fn detections(&self) -> usize {
        self.engines.values().filter(|&&d| d).count()
    }
}

/// Malware iff at least `threshold` engines flag the sample.
///
/// With `threshold = 1` a single detection suffices. A report with no
/// engines is an error rather than an implicit benign.
pub fn consensus_label(v: &ScanVerdicts, threshold: usize) -> Result<u8, DatasetError> {
    if v.engines.is_empty() {
        return Err(DatasetError::UnknownLabel(v.file_hash.clone()));
    }
    Ok(if v.detections() >= threshold.max(1) {
        MALWARE
    } else {
        BENIGN
    })
}
