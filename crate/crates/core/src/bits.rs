//! MSB-first bit packing shared by the identity, challenge and frame formats.

/// Appends fixed-width big-endian fields to a byte buffer.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity_bits(bits: usize) -> Self {
        BitWriter {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            bit_len: 0,
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn push_bit(&mut self, bit: bool) {
        let offset = self.bit_len % 8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.bit_len += 1;
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn push(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0);
        let mut remaining = width;
        while remaining > 0 {
            let offset = (self.bit_len % 8) as u32;
            if offset == 0 {
                self.bytes.push(0);
            }
            let room = 8 - offset;
            let take = room.min(remaining);
            let chunk = ((value >> (remaining - take)) & ((1u64 << take) - 1)) as u8;
            *self.bytes.last_mut().unwrap() |= chunk << (room - take);
            remaining -= take;
            self.bit_len += take as usize;
        }
    }

    pub fn push_bytes(&mut self, data: &[u8]) {
        if self.bit_len.is_multiple_of(8) {
            self.bytes.extend_from_slice(data);
            self.bit_len += data.len() * 8;
        } else {
            for &b in data {
                self.push(b as u64, 8);
            }
        }
    }

    pub fn push_bits(&mut self, bits: &[bool]) {
        for &b in bits {
            self.push_bit(b);
        }
    }

    /// Packed bytes, zero-padded to a byte boundary.
    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads fixed-width big-endian fields from a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    limit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            pos: 0,
            limit: bytes.len() * 8,
        }
    }

    /// Reader over the first `bit_len` bits only.
    pub fn with_bit_len(bytes: &'a [u8], bit_len: usize) -> Self {
        BitReader {
            bytes,
            pos: 0,
            limit: bit_len.min(bytes.len() * 8),
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn seek(&mut self, pos: usize) {
        self.pos = pos.min(self.limit);
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.pos
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        if self.pos >= self.limit {
            return None;
        }
        let bit = get_bit(self.bytes, self.pos);
        self.pos += 1;
        Some(bit)
    }

    pub fn read(&mut self, width: u32) -> Option<u64> {
        debug_assert!(width <= 64);
        if self.remaining() < width as usize {
            return None;
        }
        let mut value = 0u64;
        let mut remaining = width;
        while remaining > 0 {
            let offset = (self.pos % 8) as u32;
            let room = 8 - offset;
            let take = room.min(remaining);
            let byte = self.bytes[self.pos / 8];
            let chunk = (byte >> (room - take)) & (((1u16 << take) - 1) as u8);
            value = (value << take) | chunk as u64;
            remaining -= take;
            self.pos += take as usize;
        }
        Some(value)
    }

    pub fn read_bytes(&mut self, n: usize) -> Option<Vec<u8>> {
        if self.remaining() < n * 8 {
            return None;
        }
        if self.pos.is_multiple_of(8) {
            let start = self.pos / 8;
            self.pos += n * 8;
            return Some(self.bytes[start..start + n].to_vec());
        }
        (0..n).map(|_| self.read(8).map(|b| b as u8)).collect()
    }

    /// True when every bit from the cursor to the end of the buffer is zero.
    pub fn rest_is_zero(&self) -> bool {
        (self.pos..self.bytes.len() * 8).all(|i| !get_bit(self.bytes, i))
    }
}

#[inline]
pub fn get_bit(bytes: &[u8], i: usize) -> bool {
    bytes[i / 8] & (0x80 >> (i % 8)) != 0
}

#[inline]
pub fn flip_bit(bytes: &mut [u8], i: usize) {
    bytes[i / 8] ^= 0x80 >> (i % 8);
}

/// Expands a string of `'0'`/`'1'` characters; anything else is skipped.
pub fn bits_from_str(s: &str) -> Vec<bool> {
    s.chars()
        .filter_map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packs_msb_first_with_zero_padding() {
        let mut w = BitWriter::new();
        w.push(0b101, 3);
        w.push(0b1, 1);
        w.push(0b11, 2);
        assert_eq!(w.bit_len(), 6);
        assert_eq!(w.into_bytes(), vec![0b1011_1100]);
    }

    #[test]
    fn reader_stops_at_limit() {
        let data = [0xffu8, 0x00];
        let mut r = BitReader::with_bit_len(&data, 10);
        assert_eq!(r.read(8), Some(0xff));
        assert_eq!(r.read(3), None);
        assert_eq!(r.read(2), Some(0));
        assert_eq!(r.read_bit(), None);
    }

    #[test]
    fn rest_is_zero_detects_garbage() {
        let data = [0b1010_0001u8];
        let mut r = BitReader::new(&data);
        r.read(4);
        assert!(!r.rest_is_zero());
        r.read(3);
        assert!(!r.rest_is_zero());
        r.read(1);
        assert!(r.rest_is_zero());
    }

    proptest! {
        #[test]
        fn fields_round_trip(fields in prop::collection::vec((1u32..=64, any::<u64>()), 0..40)) {
            let fields: Vec<(u32, u64)> = fields
                .into_iter()
                .map(|(w, v)| (w, if w == 64 { v } else { v & ((1u64 << w) - 1) }))
                .collect();
            let mut w = BitWriter::new();
            for &(width, v) in &fields {
                w.push(v, width);
            }
            let total: usize = fields.iter().map(|f| f.0 as usize).sum();
            prop_assert_eq!(w.bit_len(), total);
            let bytes = w.into_bytes();
            prop_assert_eq!(bytes.len(), total.div_ceil(8));
            let mut r = BitReader::new(&bytes);
            for &(width, v) in &fields {
                prop_assert_eq!(r.read(width), Some(v));
            }
            prop_assert!(r.rest_is_zero());
        }
    }
}
