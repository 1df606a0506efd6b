use super::DexError;

const CONTINUATION: u8 = 0x80;
const MAX_BYTES: usize = 5;

/// Decodes an unsigned LEB128 value starting at `offset`.
///
/// Returns the value and the offset just past the last consumed byte.
pub fn read_uleb128(bytes: &[u8], offset: usize) -> Result<(u32, usize), DexError> {
    let mut value: u32 = 0;
    for i in 0..MAX_BYTES {
        let pos = offset + i;
        let byte = *bytes
            .get(pos)
            .ok_or(DexError::UnterminatedUleb128 { offset })?;
        let low = u32::from(byte & !CONTINUATION);
        // the fifth byte only has room for four payload bits
        if i == MAX_BYTES - 1 && byte & 0xf0 != 0 {
            return Err(DexError::OverlongUleb128 { offset });
        }
        value |= low << (7 * i);
        if byte & CONTINUATION == 0 {
            return Ok((value, pos + 1));
        }
    }
    Err(DexError::OverlongUleb128 { offset })
}

/// Encodes `value` as unsigned LEB128 into `out`.
pub fn write_uleb128(out: &mut Vec<u8>, mut value: u32) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | CONTINUATION);
    }
}
