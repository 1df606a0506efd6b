//! Dalvik opcode table and instruction stepping.

use super::DexError;

/// Identifiers of the payload pseudo-instructions embedded in `insns`.
pub const PACKED_SWITCH_PAYLOAD: u16 = 0x0100;
pub const SPARSE_SWITCH_PAYLOAD: u16 = 0x0200;
pub const FILL_ARRAY_DATA_PAYLOAD: u16 = 0x0300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Opcode {
    pub name: &'static str,
    /// Width in 16-bit code units; 0 marks an unassigned opcode byte.
    pub width: u8,
}

impl Opcode {
    pub fn is_assigned(&self) -> bool {
        self.width != 0
    }
}

/// Looks up the table entry for an opcode byte.
pub fn opcode(byte: u8) -> &'static Opcode {
    &OPCODES[usize::from(byte)]
}

/// What the unit at a given position starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstructionKind {
    Opcode(u8),
    Payload(u16),
}

/// Width in code units of the instruction (or payload) starting at `index`.
pub fn instruction_width(code: &[u16], index: usize) -> Result<usize, DexError> {
    decode_at(code, index).map(|(_, width)| width)
}

pub(crate) fn decode_at(code: &[u16], index: usize) -> Result<(InstructionKind, usize), DexError> {
    let unit = *code.get(index).ok_or(DexError::InstructionOutOfRange {
        index,
        len: code.len(),
    })?;
    let header = |extra: usize| -> Result<&[u16], DexError> {
        code.get(index..index + extra)
            .ok_or(DexError::PayloadTruncated { index, ident: unit })
    };
    let width = match unit {
        PACKED_SWITCH_PAYLOAD => {
            let h = header(2)?;
            usize::from(h[1]) * 2 + 4
        }
        SPARSE_SWITCH_PAYLOAD => {
            let h = header(2)?;
            usize::from(h[1]) * 4 + 2
        }
        FILL_ARRAY_DATA_PAYLOAD => {
            let h = header(4)?;
            let element_width = u64::from(h[1]);
            let size = u64::from(h[2]) | (u64::from(h[3]) << 16);
            let data_units = (size * element_width).div_ceil(2);
            usize::try_from(data_units + 4)
                .map_err(|_| DexError::PayloadTruncated { index, ident: unit })?
        }
        _ => {
            let byte = (unit & 0xff) as u8;
            let op = opcode(byte);
            if !op.is_assigned() {
                return Err(DexError::UnknownOpcode {
                    opcode: byte,
                    index,
                });
            }
            return Ok((InstructionKind::Opcode(byte), usize::from(op.width)));
        }
    };
    Ok((InstructionKind::Payload(unit), width))
}

/// Iterator over the instructions of one `insns` array.
///
/// Yields `(position, kind, width)`; stops after the first error.
pub struct Instructions<'a> {
    code: &'a [u16],
    pos: usize,
    failed: bool,
}

impl<'a> Instructions<'a> {
    pub fn new(code: &'a [u16]) -> Self {
        Self {
            code,
            pos: 0,
            failed: false,
        }
    }
}

impl Iterator for Instructions<'_> {
    type Item = Result<(usize, InstructionKind, usize), DexError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.pos >= self.code.len() {
            return None;
        }
        let at = self.pos;
        let step = decode_at(self.code, at).and_then(|(kind, width)| {
            if at + width > self.code.len() {
                Err(DexError::InstructionOverrun {
                    index: at,
                    width,
                    len: self.code.len(),
                })
            } else {
                Ok((at, kind, width))
            }
        });
        match &step {
            Ok((_, _, width)) => self.pos += width,
            Err(_) => self.failed = true,
        }
        Some(step)
    }
}

#[rustfmt::skip]
static OPCODES: [Opcode; 256] = [
    Opcode { name: "nop", width: 1 }, // 0x00
    Opcode { name: "move", width: 1 }, // 0x01
    Opcode { name: "move/from16", width: 2 }, // 0x02
    Opcode { name: "move/16", width: 3 }, // 0x03
    Opcode { name: "move-wide", width: 1 }, // 0x04
    Opcode { name: "move-wide/from16", width: 2 }, // 0x05
    Opcode { name: "move-wide/16", width: 3 }, // 0x06
    Opcode { name: "move-object", width: 1 }, // 0x07
    Opcode { name: "move-object/from16", width: 2 }, // 0x08
    Opcode { name: "move-object/16", width: 3 }, // 0x09
    Opcode { name: "move-result", width: 1 }, // 0x0a
    Opcode { name: "move-result-wide", width: 1 }, // 0x0b
    Opcode { name: "move-result-object", width: 1 }, // 0x0c
    Opcode { name: "move-exception", width: 1 }, // 0x0d
    Opcode { name: "return-void", width: 1 }, // 0x0e
    Opcode { name: "return", width: 1 }, // 0x0f
    Opcode { name: "return-wide", width: 1 }, // 0x10
    Opcode { name: "return-object", width: 1 }, // 0x11
    Opcode { name: "const/4", width: 1 }, // 0x12
    Opcode { name: "const/16", width: 2 }, // 0x13
    Opcode { name: "const", width: 3 }, // 0x14
    Opcode { name: "const/high16", width: 2 }, // 0x15
    Opcode { name: "const-wide/16", width: 2 }, // 0x16
    Opcode { name: "const-wide/32", width: 3 }, // 0x17
    Opcode { name: "const-wide", width: 5 }, // 0x18
    Opcode { name: "const-wide/high16", width: 2 }, // 0x19
    Opcode { name: "const-string", width: 2 }, // 0x1a
    Opcode { name: "const-string/jumbo", width: 3 }, // 0x1b
    Opcode { name: "const-class", width: 2 }, // 0x1c
    Opcode { name: "monitor-enter", width: 1 }, // 0x1d
    Opcode { name: "monitor-exit", width: 1 }, // 0x1e
    Opcode { name: "check-cast", width: 2 }, // 0x1f
    Opcode { name: "instance-of", width: 2 }, // 0x20
    Opcode { name: "array-length", width: 1 }, // 0x21
    Opcode { name: "new-instance", width: 2 }, // 0x22
    Opcode { name: "new-array", width: 2 }, // 0x23
    Opcode { name: "filled-new-array", width: 3 }, // 0x24
    Opcode { name: "filled-new-array/range", width: 3 }, // 0x25
    Opcode { name: "fill-array-data", width: 3 }, // 0x26
    Opcode { name: "throw", width: 1 }, // 0x27
    Opcode { name: "goto", width: 1 }, // 0x28
    Opcode { name: "goto/16", width: 2 }, // 0x29
    Opcode { name: "goto/32", width: 3 }, // 0x2a
    Opcode { name: "packed-switch", width: 3 }, // 0x2b
    Opcode { name: "sparse-switch", width: 3 }, // 0x2c
    Opcode { name: "cmpl-float", width: 2 }, // 0x2d
    Opcode { name: "cmpg-float", width: 2 }, // 0x2e
    Opcode { name: "cmpl-double", width: 2 }, // 0x2f
    Opcode { name: "cmpg-double", width: 2 }, // 0x30
    Opcode { name: "cmp-long", width: 2 }, // 0x31
    Opcode { name: "if-eq", width: 2 }, // 0x32
    Opcode { name: "if-ne", width: 2 }, // 0x33
    Opcode { name: "if-lt", width: 2 }, // 0x34
    Opcode { name: "if-ge", width: 2 }, // 0x35
    Opcode { name: "if-gt", width: 2 }, // 0x36
    Opcode { name: "if-le", width: 2 }, // 0x37
    Opcode { name: "if-eqz", width: 2 }, // 0x38
    Opcode { name: "if-nez", width: 2 }, // 0x39
    Opcode { name: "if-ltz", width: 2 }, // 0x3a
    Opcode { name: "if-gez", width: 2 }, // 0x3b
    Opcode { name: "if-gtz", width: 2 }, // 0x3c
    Opcode { name: "if-lez", width: 2 }, // 0x3d
    Opcode { name: "unused-3e", width: 0 }, // 0x3e
    Opcode { name: "unused-3f", width: 0 }, // 0x3f
    Opcode { name: "unused-40", width: 0 }, // 0x40
    Opcode { name: "unused-41", width: 0 }, // 0x41
    Opcode { name: "unused-42", width: 0 }, // 0x42
    Opcode { name: "unused-43", width: 0 }, // 0x43
    Opcode { name: "aget", width: 2 }, // 0x44
    Opcode { name: "aget-wide", width: 2 }, // 0x45
    Opcode { name: "aget-object", width: 2 }, // 0x46
    Opcode { name: "aget-boolean", width: 2 }, // 0x47
    Opcode { name: "aget-byte", width: 2 }, // 0x48
    Opcode { name: "aget-char", width: 2 }, // 0x49
    Opcode { name: "aget-short", width: 2 }, // 0x4a
    Opcode { name: "aput", width: 2 }, // 0x4b
    Opcode { name: "aput-wide", width: 2 }, // 0x4c
    Opcode { name: "aput-object", width: 2 }, // 0x4d
    Opcode { name: "aput-boolean", width: 2 }, // 0x4e
    Opcode { name: "aput-byte", width: 2 }, // 0x4f
    Opcode { name: "aput-char", width: 2 }, // 0x50
    Opcode { name: "aput-short", width: 2 }, // 0x51
    Opcode { name: "iget", width: 2 }, // 0x52
    Opcode { name: "iget-wide", width: 2 }, // 0x53
    Opcode { name: "iget-object", width: 2 }, // 0x54
    Opcode { name: "iget-boolean", width: 2 }, // 0x55
    Opcode { name: "iget-byte", width: 2 }, // 0x56
    Opcode { name: "iget-char", width: 2 }, // 0x57
    Opcode { name: "iget-short", width: 2 }, // 0x58
    Opcode { name: "iput", width: 2 }, // 0x59
    Opcode { name: "iput-wide", width: 2 }, // 0x5a
    Opcode { name: "iput-object", width: 2 }, // 0x5b
    Opcode { name: "iput-boolean", width: 2 }, // 0x5c
    Opcode { name: "iput-byte", width: 2 }, // 0x5d
    Opcode { name: "iput-char", width: 2 }, // 0x5e
    Opcode { name: "iput-short", width: 2 }, // 0x5f
    Opcode { name: "sget", width: 2 }, // 0x60
    Opcode { name: "sget-wide", width: 2 }, // 0x61
    Opcode { name: "sget-object", width: 2 }, // 0x62
    Opcode { name: "sget-boolean", width: 2 }, // 0x63
    Opcode { name: "sget-byte", width: 2 }, // 0x64
    Opcode { name: "sget-char", width: 2 }, // 0x65
    Opcode { name: "sget-short", width: 2 }, // 0x66
    Opcode { name: "sput", width: 2 }, // 0x67
    Opcode { name: "sput-wide", width: 2 }, // 0x68
    Opcode { name: "sput-object", width: 2 }, // 0x69
    Opcode { name: "sput-boolean", width: 2 }, // 0x6a
    Opcode { name: "sput-byte", width: 2 }, // 0x6b
    Opcode { name: "sput-char", width: 2 }, // 0x6c
    Opcode { name: "sput-short", width: 2 }, // 0x6d
    Opcode { name: "invoke-virtual", width: 3 }, // 0x6e
    Opcode { name: "invoke-super", width: 3 }, // 0x6f
    Opcode { name: "invoke-direct", width: 3 }, // 0x70
    Opcode { name: "invoke-static", width: 3 }, // 0x71
    Opcode { name: "invoke-interface", width: 3 }, // 0x72
    Opcode { name: "unused-73", width: 0 }, // 0x73
    Opcode { name: "invoke-virtual/range", width: 3 }, // 0x74
    Opcode { name: "invoke-super/range", width: 3 }, // 0x75
    Opcode { name: "invoke-direct/range", width: 3 }, // 0x76
    Opcode { name: "invoke-static/range", width: 3 }, // 0x77
    Opcode { name: "invoke-interface/range", width: 3 }, // 0x78
    Opcode { name: "unused-79", width: 0 }, // 0x79
    Opcode { name: "unused-7a", width: 0 }, // 0x7a
    Opcode { name: "neg-int", width: 1 }, // 0x7b
    Opcode { name: "not-int", width: 1 }, // 0x7c
    Opcode { name: "neg-long", width: 1 }, // 0x7d
    Opcode { name: "not-long", width: 1 }, // 0x7e
    Opcode { name: "neg-float", width: 1 }, // 0x7f
    Opcode { name: "neg-double", width: 1 }, // 0x80
    Opcode { name: "int-to-long", width: 1 }, // 0x81
    Opcode { name: "int-to-float", width: 1 }, // 0x82
    Opcode { name: "int-to-double", width: 1 }, // 0x83
    Opcode { name: "long-to-int", width: 1 }, // 0x84
    Opcode { name: "long-to-float", width: 1 }, // 0x85
    Opcode { name: "long-to-double", width: 1 }, // 0x86
    Opcode { name: "float-to-int", width: 1 }, // 0x87
    Opcode { name: "float-to-long", width: 1 }, // 0x88
    Opcode { name: "float-to-double", width: 1 }, // 0x89
    Opcode { name: "double-to-int", width: 1 }, // 0x8a
    Opcode { name: "double-to-long", width: 1 }, // 0x8b
    Opcode { name: "double-to-float", width: 1 }, // 0x8c
    Opcode { name: "int-to-byte", width: 1 }, // 0x8d
    Opcode { name: "int-to-char", width: 1 }, // 0x8e
    Opcode { name: "int-to-short", width: 1 }, // 0x8f
    Opcode { name: "add-int", width: 2 }, // 0x90
    Opcode { name: "sub-int", width: 2 }, // 0x91
    Opcode { name: "mul-int", width: 2 }, // 0x92
    Opcode { name: "div-int", width: 2 }, // 0x93
    Opcode { name: "rem-int", width: 2 }, // 0x94
    Opcode { name: "and-int", width: 2 }, // 0x95
    Opcode { name: "or-int", width: 2 }, // 0x96
    Opcode { name: "xor-int", width: 2 }, // 0x97
    Opcode { name: "shl-int", width: 2 }, // 0x98
    Opcode { name: "shr-int", width: 2 }, // 0x99
    Opcode { name: "ushr-int", width: 2 }, // 0x9a
    Opcode { name: "add-long", width: 2 }, // 0x9b
    Opcode { name: "sub-long", width: 2 }, // 0x9c
    Opcode { name: "mul-long", width: 2 }, // 0x9d
    Opcode { name: "div-long", width: 2 }, // 0x9e
    Opcode { name: "rem-long", width: 2 }, // 0x9f
    Opcode { name: "and-long", width: 2 }, // 0xa0
    Opcode { name: "or-long", width: 2 }, // 0xa1
    Opcode { name: "xor-long", width: 2 }, // 0xa2
    Opcode { name: "shl-long", width: 2 }, // 0xa3
    Opcode { name: "shr-long", width: 2 }, // 0xa4
    Opcode { name: "ushr-long", width: 2 }, // 0xa5
    Opcode { name: "add-float", width: 2 }, // 0xa6
    Opcode { name: "sub-float", width: 2 }, // 0xa7
    Opcode { name: "mul-float", width: 2 }, // 0xa8
    Opcode { name: "div-float", width: 2 }, // 0xa9
    Opcode { name: "rem-float", width: 2 }, // 0xaa
    Opcode { name: "add-double", width: 2 }, // 0xab
    Opcode { name: "sub-double", width: 2 }, // 0xac
    Opcode { name: "mul-double", width: 2 }, // 0xad
    Opcode { name: "div-double", width: 2 }, // 0xae
    Opcode { name: "rem-double", width: 2 }, // 0xaf
    Opcode { name: "add-int/2addr", width: 1 }, // 0xb0
    Opcode { name: "sub-int/2addr", width: 1 }, // 0xb1
    Opcode { name: "mul-int/2addr", width: 1 }, // 0xb2
    Opcode { name: "div-int/2addr", width: 1 }, // 0xb3
    Opcode { name: "rem-int/2addr", width: 1 }, // 0xb4
    Opcode { name: "and-int/2addr", width: 1 }, // 0xb5
    Opcode { name: "or-int/2addr", width: 1 }, // 0xb6
    Opcode { name: "xor-int/2addr", width: 1 }, // 0xb7
    Opcode { name: "shl-int/2addr", width: 1 }, // 0xb8
    Opcode { name: "shr-int/2addr", width: 1 }, // 0xb9
    Opcode { name: "ushr-int/2addr", width: 1 }, // 0xba
    Opcode { name: "add-long/2addr", width: 1 }, // 0xbb
    Opcode { name: "sub-long/2addr", width: 1 }, // 0xbc
    Opcode { name: "mul-long/2addr", width: 1 }, // 0xbd
    Opcode { name: "div-long/2addr", width: 1 }, // 0xbe
    Opcode { name: "rem-long/2addr", width: 1 }, // 0xbf
    Opcode { name: "and-long/2addr", width: 1 }, // 0xc0
    Opcode { name: "or-long/2addr", width: 1 }, // 0xc1
    Opcode { name: "xor-long/2addr", width: 1 }, // 0xc2
    Opcode { name: "shl-long/2addr", width: 1 }, // 0xc3
    Opcode { name: "shr-long/2addr", width: 1 }, // 0xc4
    Opcode { name: "ushr-long/2addr", width: 1 }, // 0xc5
    Opcode { name: "add-float/2addr", width: 1 }, // 0xc6
    Opcode { name: "sub-float/2addr", width: 1 }, // 0xc7
    Opcode { name: "mul-float/2addr", width: 1 }, // 0xc8
    Opcode { name: "div-float/2addr", width: 1 }, // 0xc9
    Opcode { name: "rem-float/2addr", width: 1 }, // 0xca
    Opcode { name: "add-double/2addr", width: 1 }, // 0xcb
    Opcode { name: "sub-double/2addr", width: 1 }, // 0xcc
    Opcode { name: "mul-double/2addr", width: 1 }, // 0xcd
    Opcode { name: "div-double/2addr", width: 1 }, // 0xce
    Opcode { name: "rem-double/2addr", width: 1 }, // 0xcf
    Opcode { name: "add-int/lit16", width: 2 }, // 0xd0
    Opcode { name: "rsub-int", width: 2 }, // 0xd1
    Opcode { name: "mul-int/lit16", width: 2 }, // 0xd2
    Opcode { name: "div-int/lit16", width: 2 }, // 0xd3
    Opcode { name: "rem-int/lit16", width: 2 }, // 0xd4
    Opcode { name: "and-int/lit16", width: 2 }, // 0xd5
    Opcode { name: "or-int/lit16", width: 2 }, // 0xd6
    Opcode { name: "xor-int/lit16", width: 2 }, // 0xd7
    Opcode { name: "add-int/lit8", width: 2 }, // 0xd8
    Opcode { name: "rsub-int/lit8", width: 2 }, // 0xd9
    Opcode { name: "mul-int/lit8", width: 2 }, // 0xda
    Opcode { name: "div-int/lit8", width: 2 }, // 0xdb
    Opcode { name: "rem-int/lit8", width: 2 }, // 0xdc
    Opcode { name: "and-int/lit8", width: 2 }, // 0xdd
    Opcode { name: "or-int/lit8", width: 2 }, // 0xde
    Opcode { name: "xor-int/lit8", width: 2 }, // 0xdf
    Opcode { name: "shl-int/lit8", width: 2 }, // 0xe0
    Opcode { name: "shr-int/lit8", width: 2 }, // 0xe1
    Opcode { name: "ushr-int/lit8", width: 2 }, // 0xe2
    Opcode { name: "unused-e3", width: 0 }, // 0xe3
    Opcode { name: "unused-e4", width: 0 }, // 0xe4
    Opcode { name: "unused-e5", width: 0 }, // 0xe5
    Opcode { name: "unused-e6", width: 0 }, // 0xe6
    Opcode { name: "unused-e7", width: 0 }, // 0xe7
    Opcode { name: "unused-e8", width: 0 }, // 0xe8
    Opcode { name: "unused-e9", width: 0 }, // 0xe9
    Opcode { name: "unused-ea", width: 0 }, // 0xea
    Opcode { name: "unused-eb", width: 0 }, // 0xeb
    Opcode { name: "unused-ec", width: 0 }, // 0xec
    Opcode { name: "unused-ed", width: 0 }, // 0xed
    Opcode { name: "unused-ee", width: 0 }, // 0xee
    Opcode { name: "unused-ef", width: 0 }, // 0xef
    Opcode { name: "unused-f0", width: 0 }, // 0xf0
    Opcode { name: "unused-f1", width: 0 }, // 0xf1
    Opcode { name: "unused-f2", width: 0 }, // 0xf2
    Opcode { name: "unused-f3", width: 0 }, // 0xf3
    Opcode { name: "unused-f4", width: 0 }, // 0xf4
    Opcode { name: "unused-f5", width: 0 }, // 0xf5
    Opcode { name: "unused-f6", width: 0 }, // 0xf6
    Opcode { name: "unused-f7", width: 0 }, // 0xf7
    Opcode { name: "unused-f8", width: 0 }, // 0xf8
    Opcode { name: "unused-f9", width: 0 }, // 0xf9
    Opcode { name: "invoke-polymorphic", width: 4 }, // 0xfa
    Opcode { name: "invoke-polymorphic/range", width: 4 }, // 0xfb
    Opcode { name: "invoke-custom", width: 3 }, // 0xfc
    Opcode { name: "invoke-custom/range", width: 3 }, // 0xfd
    Opcode { name: "const-method-handle", width: 2 }, // 0xfe
    Opcode { name: "const-method-type", width: 2 }, // 0xff
];
