//! Assembles small but well-formed DEX files, for fixtures and examples.

use super::{write_uleb128, ENDIAN_CONSTANT, HEADER_SIZE};

const ACC_PUBLIC: u32 = 0x1;
const ACC_ABSTRACT: u32 = 0x400;

#[derive(Debug, Clone, Default)]
pub struct ClassBuilder {
    static_fields: u32,
    direct: Vec<Option<Vec<u16>>>,
    virtual_: Vec<Option<Vec<u16>>>,
}

impl ClassBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds encoded static fields; they carry no code but must be skipped by readers.
    pub fn static_fields(mut self, n: u32) -> Self {
        self.static_fields = n;
        self
    }

    pub fn direct_method(mut self, insns: Vec<u16>) -> Self {
        self.direct.push(Some(insns));
        self
    }

    pub fn virtual_method(mut self, insns: Vec<u16>) -> Self {
        self.virtual_.push(Some(insns));
        self
    }

    pub fn abstract_virtual_method(mut self) -> Self {
        self.virtual_.push(None);
        self
    }

    fn code_bodies(&self) -> impl Iterator<Item = &Vec<u16>> {
        self.direct.iter().chain(self.virtual_.iter()).flatten()
    }
}

/// Layout: header, class_defs, code items (4-aligned), then class_data items.
#[derive(Debug, Clone)]
pub struct DexBuilder {
    version: u16,
    classes: Vec<ClassBuilder>,
}

impl Default for DexBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl DexBuilder {
    pub fn new() -> Self {
        Self {
            version: 35,
            classes: Vec::new(),
        }
    }

    pub fn version(mut self, version: u16) -> Self {
        self.version = version;
        self
    }

    pub fn class(mut self, class: ClassBuilder) -> Self {
        self.classes.push(class);
        self
    }

    pub fn build(&self) -> Vec<u8> {
        let mut out = vec![0u8; HEADER_SIZE];
        out[..8].copy_from_slice(format!("dex\n{:03}\0", self.version).as_bytes());

        let class_defs_off = out.len();
        out.resize(class_defs_off + 32 * self.classes.len(), 0);

        while !out.len().is_multiple_of(4) {
            out.push(0);
        }
        let data_off = out.len();
        let mut code_offs: Vec<Vec<u32>> = Vec::new();
        for class in &self.classes {
            let mut offs = Vec::new();
            for insns in class.code_bodies() {
                while !out.len().is_multiple_of(4) {
                    out.push(0);
                }
                offs.push(out.len() as u32);
                out.extend_from_slice(&1u16.to_le_bytes()); // registers_size
                out.extend_from_slice(&0u16.to_le_bytes()); // ins_size
                out.extend_from_slice(&0u16.to_le_bytes()); // outs_size
                out.extend_from_slice(&0u16.to_le_bytes()); // tries_size
                out.extend_from_slice(&0u32.to_le_bytes()); // debug_info_off
                out.extend_from_slice(&(insns.len() as u32).to_le_bytes());
                for unit in insns {
                    out.extend_from_slice(&unit.to_le_bytes());
                }
            }
            code_offs.push(offs);
        }

        for (i, (class, offs)) in self.classes.iter().zip(&code_offs).enumerate() {
            let data_item = out.len() as u32;
            let mut offs = offs.iter();
            write_uleb128(&mut out, class.static_fields);
            write_uleb128(&mut out, 0);
            write_uleb128(&mut out, class.direct.len() as u32);
            write_uleb128(&mut out, class.virtual_.len() as u32);
            for f in 0..class.static_fields {
                write_uleb128(&mut out, u32::from(f > 0));
                write_uleb128(&mut out, ACC_PUBLIC);
            }
            for list in [&class.direct, &class.virtual_] {
                for (m, body) in list.iter().enumerate() {
                    write_uleb128(&mut out, u32::from(m > 0));
                    match body {
                        Some(_) => {
                            write_uleb128(&mut out, ACC_PUBLIC);
                            write_uleb128(&mut out, *offs.next().expect("one offset per body"));
                        }
                        None => {
                            write_uleb128(&mut out, ACC_PUBLIC | ACC_ABSTRACT);
                            write_uleb128(&mut out, 0);
                        }
                    }
                }
            }
            let def = class_defs_off + 32 * i;
            out[def..def + 4].copy_from_slice(&(i as u32).to_le_bytes());
            out[def + 4..def + 8].copy_from_slice(&ACC_PUBLIC.to_le_bytes());
            out[def + 8..def + 12].copy_from_slice(&u32::MAX.to_le_bytes()); // NO_INDEX superclass
            out[def + 16..def + 20].copy_from_slice(&u32::MAX.to_le_bytes()); // NO_INDEX source file
            out[def + 24..def + 28].copy_from_slice(&data_item.to_le_bytes());
        }

        let put = |out: &mut Vec<u8>, at: usize, v: u32| {
            out[at..at + 4].copy_from_slice(&v.to_le_bytes());
        };
        let file_size = out.len() as u32;
        put(&mut out, 0x20, file_size);
        put(&mut out, 0x24, HEADER_SIZE as u32);
        put(&mut out, 0x28, ENDIAN_CONSTANT);
        if !self.classes.is_empty() {
            put(&mut out, 0x60, self.classes.len() as u32);
            put(&mut out, 0x64, class_defs_off as u32);
        }
        put(&mut out, 0x68, file_size - data_off as u32);
        put(&mut out, 0x6c, data_off as u32);
        let checksum = adler2::adler32_slice(&out[12..]);
        put(&mut out, 0x08, checksum);
        out
    }
}
