use std::ops::AddAssign;

use super::{DexError, DexFile, InstructionKind, Instructions};

/// Per-file opcode frequencies, one bucket per opcode byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpcodeHistogram {
    counts: [u64; 256],
    total: u64,
}

impl Default for OpcodeHistogram {
    fn default() -> Self {
        Self {
            counts: [0; 256],
            total: 0,
        }
    }
}

impl OpcodeHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn count(&self, opcode: u8) -> u64 {
        self.counts[usize::from(opcode)]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn record(&mut self, opcode: u8) {
        self.counts[usize::from(opcode)] += 1;
        self.total += 1;
    }

    /// Counts in opcode order as a feature row.
    pub fn to_features(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// The `n` most frequent opcodes, ties broken by opcode byte.
    pub fn top(&self, n: usize) -> Vec<(u8, u64)> {
        let mut pairs: Vec<(u8, u64)> = (0..=255u8)
            .map(|op| (op, self.count(op)))
            .filter(|&(_, c)| c > 0)
            .collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        pairs.truncate(n);
        pairs
    }
}

impl AddAssign<&OpcodeHistogram> for OpcodeHistogram {
    fn add_assign(&mut self, rhs: &OpcodeHistogram) {
        for (a, b) in self.counts.iter_mut().zip(rhs.counts.iter()) {
            *a += b;
        }
        self.total += rhs.total;
    }
}

/// Walks every method body in the file and counts one hit per instruction.
///
/// Payload pseudo-instructions consume their code units but are not counted.
pub fn opcode_histogram(dex: &DexFile<'_>) -> Result<OpcodeHistogram, DexError> {
    let mut hist = OpcodeHistogram::new();
    for (class_index, class) in dex.class_defs.iter().enumerate() {
        let wrap = |e: DexError| DexError::MalformedClass {
            class_index,
            source: Box::new(e),
        };
        for method in dex.class_methods(class).map_err(wrap)? {
            if method.code_off == 0 {
                continue;
            }
            let code = dex.code_item(method.code_off).map_err(wrap)?;
            for step in Instructions::new(&code.insns) {
                if let (_, InstructionKind::Opcode(op), _) = step.map_err(wrap)? {
                    hist.record(op);
                }
            }
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dex::{parse_dex, ClassBuilder, DexBuilder};

    #[test]
    fn const_const_return() {
        let bytes = DexBuilder::new()
            .class(ClassBuilder::new().direct_method(vec![0x1012, 0x2012, 0x000e]))
            .build();
        let hist = opcode_histogram(&parse_dex(&bytes).unwrap()).unwrap();
        assert_eq!(hist.count(0x12), 2);
        assert_eq!(hist.count(0x0e), 1);
        assert_eq!(hist.total(), 3);
        assert_eq!(hist.top(5), vec![(0x12, 2), (0x0e, 1)]);
    }

    #[test]
    fn no_methods_gives_zero_histogram() {
        let bytes = DexBuilder::new().class(ClassBuilder::new()).build();
        let hist = opcode_histogram(&parse_dex(&bytes).unwrap()).unwrap();
        assert_eq!(hist, OpcodeHistogram::new());
        let bytes = DexBuilder::new().build();
        assert_eq!(hist, opcode_histogram(&parse_dex(&bytes).unwrap()).unwrap());
    }

    #[test]
    fn abstract_methods_are_skipped() {
        let bytes = DexBuilder::new()
            .class(
                ClassBuilder::new()
                    .abstract_virtual_method()
                    .virtual_method(vec![0x000e]),
            )
            .build();
        let hist = opcode_histogram(&parse_dex(&bytes).unwrap()).unwrap();
        assert_eq!(hist.total(), 1);
    }

    #[test]
    fn fill_array_payload_not_counted() {
        // fill-array-data v0, +4 ; return-void ; payload(width 1, size 3) at unit 4
        let insns = vec![
            0x0026, 0x0004, 0x0000, 0x000e, 0x0300, 0x0001, 0x0003, 0x0000, 0x0201, 0x0003,
        ];
        let bytes = DexBuilder::new()
            .class(ClassBuilder::new().direct_method(insns))
            .build();
        let hist = opcode_histogram(&parse_dex(&bytes).unwrap()).unwrap();
        assert_eq!(hist.count(0x26), 1);
        assert_eq!(hist.count(0x0e), 1);
        assert_eq!(hist.count(0x00), 0);
        assert_eq!(hist.total(), 2);
    }

    #[test]
    fn unknown_opcode_reports_class_index() {
        let bytes = DexBuilder::new()
            .class(ClassBuilder::new().direct_method(vec![0x000e]))
            .class(ClassBuilder::new().direct_method(vec![0x003e]))
            .build();
        let err = opcode_histogram(&parse_dex(&bytes).unwrap()).unwrap_err();
        assert!(matches!(
            err,
            DexError::MalformedClass { class_index: 1, .. }
        ));
    }

    #[test]
    fn merge_sums_counts() {
        let mut a = OpcodeHistogram::new();
        a.record(1);
        let mut b = OpcodeHistogram::new();
        b.record(1);
        b.record(2);
        a += &b;
        assert_eq!(a.count(1), 2);
        assert_eq!(a.total(), 3);
        assert_eq!(a.to_features().iter().sum::<f64>(), 3.0);
    }
}
