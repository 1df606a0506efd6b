//! Native DEX parsing down to per-file opcode histograms.
//!
//! Only what the instruction walk needs is materialized: the header, the
//! `class_defs` table, each class's `class_data_item` and the `code_item`s
//! it points at. String, type and method tables are bounds-checked but
//! never decoded.

mod builder;
mod histogram;
mod opcodes;
mod uleb128;

use std::fmt;

use thiserror::Error;

pub use builder::{ClassBuilder, DexBuilder};
pub use histogram::{opcode_histogram, OpcodeHistogram};
pub use opcodes::{
    instruction_width, opcode, InstructionKind, Instructions, Opcode, FILL_ARRAY_DATA_PAYLOAD,
    PACKED_SWITCH_PAYLOAD, SPARSE_SWITCH_PAYLOAD,
};
pub use uleb128::{read_uleb128, write_uleb128};

pub const HEADER_SIZE: usize = 0x70;
pub const ENDIAN_CONSTANT: u32 = 0x1234_5678;
pub const REVERSE_ENDIAN_CONSTANT: u32 = 0x7856_3412;
const CLASS_DEF_SIZE: usize = 32;
const CODE_ITEM_HEADER: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DexError {
    #[error("bad magic: not a dex file (versions 035 to 040 are accepted)")]
    BadMagic,
    #[error("truncated header: {len} bytes, need {HEADER_SIZE}")]
    TruncatedHeader { len: usize },
    #[error("header_size is {0:#x}, expected 0x70")]
    BadHeaderSize(u32),
    #[error("endian tag {0:#010x} not supported")]
    BadEndianTag(u32),
    #[error("file_size {declared} exceeds buffer length {actual}")]
    FileSizeMismatch { declared: u32, actual: usize },
    #[error("checksum mismatch: header says {declared:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { declared: u32, computed: u32 },
    #[error("{what} region [{offset:#x}, +{len}) lies outside the {buffer}-byte buffer")]
    OutOfBounds {
        what: &'static str,
        offset: u64,
        len: u64,
        buffer: usize,
    },
    #[error("unterminated uleb128 at offset {offset:#x}")]
    UnterminatedUleb128 { offset: usize },
    #[error("uleb128 at offset {offset:#x} is longer than 5 bytes or overflows u32")]
    OverlongUleb128 { offset: usize },
    #[error("unknown opcode {opcode:#04x} at code unit {index}")]
    UnknownOpcode { opcode: u8, index: usize },
    #[error("payload {ident:#06x} at code unit {index} has a header past the end of insns")]
    PayloadTruncated { index: usize, ident: u16 },
    #[error("instruction at code unit {index} (width {width}) runs past insns_size {len}")]
    InstructionOverrun {
        index: usize,
        width: usize,
        len: usize,
    },
    #[error("code unit index {index} out of range for {len} units")]
    InstructionOutOfRange { index: usize, len: usize },
    #[error("class #{class_index}: {source}")]
    MalformedClass {
        class_index: usize,
        #[source]
        source: Box<DexError>,
    },
}

/// Offset/size pair from the header.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Section {
    pub size: u32,
    pub off: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DexHeader {
    pub checksum: u32,
    pub file_size: u32,
    pub header_size: u32,
    pub endian_tag: u32,
    pub link: Section,
    pub map_off: u32,
    pub string_ids: Section,
    pub type_ids: Section,
    pub proto_ids: Section,
    pub field_ids: Section,
    pub method_ids: Section,
    pub class_defs: Section,
    pub data: Section,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassDef {
    pub class_idx: u32,
    pub class_data_off: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeItem {
    pub registers_size: u16,
    pub insns_size: u32,
    pub insns: Vec<u16>,
}

/// Options for [`parse_dex_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Verify the adler32 checksum over everything after the checksum field.
    pub verify_checksum: bool,
}

/// A parsed DEX file borrowing the input buffer.
#[derive(Clone)]
pub struct DexFile<'a> {
    pub version: u16,
    pub header: DexHeader,
    pub class_defs: Vec<ClassDef>,
    bytes: &'a [u8],
}

impl fmt::Debug for DexFile<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DexFile")
            .field("version", &self.version)
            .field("header", &self.header)
            .field("class_defs", &self.class_defs.len())
            .finish()
    }
}

fn u16_at(bytes: &[u8], off: usize) -> Result<u16, DexError> {
    bytes
        .get(off..off + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or(DexError::OutOfBounds {
            what: "u16",
            offset: off as u64,
            len: 2,
            buffer: bytes.len(),
        })
}

fn u32_at(bytes: &[u8], off: usize) -> Result<u32, DexError> {
    bytes
        .get(off..off + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DexError::OutOfBounds {
            what: "u32",
            offset: off as u64,
            len: 4,
            buffer: bytes.len(),
        })
}

fn check_region(what: &'static str, offset: u64, len: u64, buffer: usize) -> Result<(), DexError> {
    if offset
        .checked_add(len)
        .is_some_and(|end| end <= buffer as u64)
    {
        Ok(())
    } else {
        Err(DexError::OutOfBounds {
            what,
            offset,
            len,
            buffer,
        })
    }
}

fn parse_version(bytes: &[u8]) -> Result<u16, DexError> {
    let magic = bytes.get(..8).ok_or(DexError::BadMagic)?;
    if &magic[..4] != b"dex\n" || magic[7] != 0 {
        return Err(DexError::BadMagic);
    }
    let digits = &magic[4..7];
    if !digits.iter().all(u8::is_ascii_digit) {
        return Err(DexError::BadMagic);
    }
    let version = digits
        .iter()
        .fold(0u16, |acc, d| acc * 10 + u16::from(d - b'0'));
    if (35..=40).contains(&version) {
        Ok(version)
    } else {
        Err(DexError::BadMagic)
    }
}

/// Parses with default options (checksum not verified).
pub fn parse_dex(bytes: &[u8]) -> Result<DexFile<'_>, DexError> {
    parse_dex_with(bytes, ParseOptions::default())
}

pub fn parse_dex_with(bytes: &[u8], options: ParseOptions) -> Result<DexFile<'_>, DexError> {
    if bytes.len() < 8 {
        // too short to even hold the magic; still distinguish garbage from truncation
        if bytes.len() >= 4 && &bytes[..4] == b"dex\n" {
            return Err(DexError::TruncatedHeader { len: bytes.len() });
        }
        return Err(DexError::BadMagic);
    }
    let version = parse_version(bytes)?;
    if bytes.len() < HEADER_SIZE {
        return Err(DexError::TruncatedHeader { len: bytes.len() });
    }

    let section = |off: usize| -> Result<Section, DexError> {
        Ok(Section {
            size: u32_at(bytes, off)?,
            off: u32_at(bytes, off + 4)?,
        })
    };
    let header = DexHeader {
        checksum: u32_at(bytes, 0x08)?,
        file_size: u32_at(bytes, 0x20)?,
        header_size: u32_at(bytes, 0x24)?,
        endian_tag: u32_at(bytes, 0x28)?,
        link: section(0x2c)?,
        map_off: u32_at(bytes, 0x34)?,
        string_ids: section(0x38)?,
        type_ids: section(0x40)?,
        proto_ids: section(0x48)?,
        field_ids: section(0x50)?,
        method_ids: section(0x58)?,
        class_defs: section(0x60)?,
        data: section(0x68)?,
    };

    if header.header_size as usize != HEADER_SIZE {
        return Err(DexError::BadHeaderSize(header.header_size));
    }
    if header.endian_tag != ENDIAN_CONSTANT {
        return Err(DexError::BadEndianTag(header.endian_tag));
    }
    if header.file_size as usize > bytes.len() {
        return Err(DexError::FileSizeMismatch {
            declared: header.file_size,
            actual: bytes.len(),
        });
    }
    if options.verify_checksum {
        let computed = adler2::adler32_slice(&bytes[12..]);
        if computed != header.checksum {
            return Err(DexError::ChecksumMismatch {
                declared: header.checksum,
                computed,
            });
        }
    }

    let len = bytes.len();
    let tables: [(&'static str, Section, u64); 7] = [
        ("string_ids", header.string_ids, 4),
        ("type_ids", header.type_ids, 4),
        ("proto_ids", header.proto_ids, 12),
        ("field_ids", header.field_ids, 8),
        ("method_ids", header.method_ids, 8),
        ("class_defs", header.class_defs, CLASS_DEF_SIZE as u64),
        ("data", header.data, 1),
    ];
    for (what, sec, item) in tables {
        if sec.size > 0 {
            check_region(what, u64::from(sec.off), u64::from(sec.size) * item, len)?;
        }
    }
    if header.link.size > 0 {
        check_region(
            "link",
            u64::from(header.link.off),
            u64::from(header.link.size),
            len,
        )?;
    }
    if header.map_off != 0 {
        check_region("map", u64::from(header.map_off), 4, len)?;
    }

    let base = header.class_defs.off as usize;
    let class_defs = (0..header.class_defs.size as usize)
        .map(|i| {
            let at = base + i * CLASS_DEF_SIZE;
            let class_data_off = u32_at(bytes, at + 24)?;
            if class_data_off != 0 {
                check_region("class_data", u64::from(class_data_off), 1, len)?;
            }
            Ok(ClassDef {
                class_idx: u32_at(bytes, at)?,
                class_data_off,
            })
        })
        .collect::<Result<Vec<_>, DexError>>()?;

    Ok(DexFile {
        version,
        header,
        class_defs,
        bytes,
    })
}

/// One encoded method from a `class_data_item`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodedMethod {
    pub method_idx: u32,
    pub access_flags: u32,
    pub code_off: u32,
}

impl<'a> DexFile<'a> {
    pub fn bytes(&self) -> &'a [u8] {
        self.bytes
    }

    /// Direct then virtual methods of one class, with method indices un-delta'd.
    pub fn class_methods(&self, class: &ClassDef) -> Result<Vec<EncodedMethod>, DexError> {
        if class.class_data_off == 0 {
            return Ok(Vec::new());
        }
        let bytes = self.bytes;
        let mut pos = class.class_data_off as usize;
        let next = |pos: &mut usize| -> Result<u32, DexError> {
            let (v, p) = read_uleb128(bytes, *pos)?;
            *pos = p;
            Ok(v)
        };
        let static_fields = next(&mut pos)?;
        let instance_fields = next(&mut pos)?;
        let direct = next(&mut pos)?;
        let virtual_ = next(&mut pos)?;

        for _ in 0..u64::from(static_fields) + u64::from(instance_fields) {
            next(&mut pos)?; // field_idx_diff
            next(&mut pos)?; // access_flags
        }
        let mut methods = Vec::new();
        for count in [direct, virtual_] {
            // indices restart their delta chain for each list
            let mut method_idx = 0u32;
            for _ in 0..count {
                let diff = next(&mut pos)?;
                method_idx = method_idx.wrapping_add(diff);
                let access_flags = next(&mut pos)?;
                let code_off = next(&mut pos)?;
                methods.push(EncodedMethod {
                    method_idx,
                    access_flags,
                    code_off,
                });
            }
        }
        Ok(methods)
    }

    pub fn code_item(&self, code_off: u32) -> Result<CodeItem, DexError> {
        let bytes = self.bytes;
        let off = code_off as usize;
        check_region(
            "code_item",
            u64::from(code_off),
            CODE_ITEM_HEADER as u64,
            bytes.len(),
        )?;
        let registers_size = u16_at(bytes, off)?;
        let insns_size = u32_at(bytes, off + 12)?;
        let start = off + CODE_ITEM_HEADER;
        check_region(
            "insns",
            start as u64,
            u64::from(insns_size) * 2,
            bytes.len(),
        )?;
        let insns = bytes[start..start + insns_size as usize * 2]
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        Ok(CodeItem {
            registers_size,
            insns_size,
            insns,
        })
    }

    /// Every code item reachable from the class definitions, in class order.
    pub fn code_items(&self) -> Result<Vec<CodeItem>, DexError> {
        let mut items = Vec::new();
        for (class_index, class) in self.class_defs.iter().enumerate() {
            let wrap = |e: DexError| DexError::MalformedClass {
                class_index,
                source: Box::new(e),
            };
            for method in self.class_methods(class).map_err(wrap)? {
                if method.code_off != 0 {
                    items.push(self.code_item(method.code_off).map_err(wrap)?);
                }
            }
        }
        Ok(items)
    }
}
