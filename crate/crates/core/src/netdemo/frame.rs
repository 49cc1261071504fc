//! Bit-level frame: sync ‖ pilot ‖ len16 ‖ payload ‖ CRC-32.
//!
//! Frames are packed MSB-first and zero-padded to a byte boundary.

use std::sync::OnceLock;

use thiserror::Error;

use crate::bits::{get_bit, BitReader, BitWriter};

pub const BARKER13: [bool; 13] = [
    true, true, true, true, true, false, false, true, true, false, true, false, true,
];
pub const SYNC_BITS: usize = 26;
pub const PILOT_BITS: usize = 128;
pub const LEN_BITS: usize = 16;
pub const CRC_BITS: usize = 32;
/// Bits preceding the payload.
pub const HEADER_BITS: usize = SYNC_BITS + PILOT_BITS + LEN_BITS;
/// Everything except the payload.
pub const OVERHEAD_BITS: usize = HEADER_BITS + CRC_BITS;
pub const MAX_PAYLOAD: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("sync pattern not found")]
    SyncNotFound,
    #[error("pilot sequence mismatch")]
    PilotMismatch,
    #[error("CRC mismatch")]
    CrcMismatch,
    #[error("frame truncated: need {needed} bits, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("payload of {0} bytes exceeds the 16-bit length field")]
    PayloadTooLarge(usize),
    #[error("malformed PDU: {0}")]
    Malformed(String),
}

impl FrameError {
    /// Short label for statistics.
    pub fn kind(&self) -> &'static str {
        match self {
            FrameError::SyncNotFound => "sync",
            FrameError::PilotMismatch => "pilot",
            FrameError::CrcMismatch => "crc",
            FrameError::Truncated { .. } => "truncated",
            FrameError::PayloadTooLarge(_) => "too-large",
            FrameError::Malformed(_) => "malformed",
        }
    }
}

/// Barker-13 twice.
pub fn sync_bits() -> [bool; SYNC_BITS] {
    let mut s = [false; SYNC_BITS];
    s[..13].copy_from_slice(&BARKER13);
    s[13..].copy_from_slice(&BARKER13);
    s
}

/// One period of an m-sequence from the recurrence
/// `s[n+7] = XOR of s[n+t]` over `taps`, all-ones initial state.
pub fn lfsr7(taps: &[usize]) -> [bool; 127] {
    let mut s = [false; 127 + 7];
    s[..7].fill(true);
    for n in 0..127 {
        s[n + 7] = taps.iter().fold(false, |acc, &t| acc ^ s[n + t]);
    }
    let mut out = [false; 127];
    out.copy_from_slice(&s[..127]);
    out
}

/// Preferred pair for x^7+x^3+1 and x^7+x^3+x^2+x+1.
pub fn gold_pair() -> ([bool; 127], [bool; 127]) {
    (lfsr7(&[0, 3]), lfsr7(&[0, 1, 2, 3]))
}

/// The 127-bit Gold sequence (zero relative shift) followed by one zero bit.
pub fn pilot_bits() -> &'static [bool; PILOT_BITS] {
    static PILOT: OnceLock<[bool; PILOT_BITS]> = OnceLock::new();
    PILOT.get_or_init(|| {
        let (a, b) = gold_pair();
        let mut p = [false; PILOT_BITS];
        for i in 0..127 {
            p[i] = a[i] ^ b[i];
        }
        p
    })
}

fn pack(bits: &[bool]) -> u128 {
    bits.iter().fold(0u128, |acc, &b| acc << 1 | b as u128)
}

fn sync_word() -> u64 {
    pack(&sync_bits()) as u64
}

fn pilot_word() -> u128 {
    pack(pilot_bits())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedFrame {
    pub bytes: Vec<u8>,
    /// Significant bits; the rest of the last byte is padding.
    pub bit_len: usize,
}

impl EncodedFrame {
    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.bit_len).map(|i| get_bit(&self.bytes, i))
    }
}

pub fn frame_bits_for_payload(payload_len: usize) -> usize {
    OVERHEAD_BITS + 8 * payload_len
}

fn crc(len: u16, payload: &[u8]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(&len.to_be_bytes());
    h.update(payload);
    h.finalize()
}

pub fn encode(payload: &[u8]) -> Result<EncodedFrame, FrameError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(FrameError::PayloadTooLarge(payload.len()));
    }
    let len = payload.len() as u16;
    let mut w = BitWriter::with_capacity_bits(frame_bits_for_payload(payload.len()));
    w.push(sync_word(), SYNC_BITS as u32);
    let pilot = pilot_word();
    w.push((pilot >> 64) as u64, 64);
    w.push(pilot as u64, 64);
    w.push(len as u64, LEN_BITS as u32);
    w.push_bytes(payload);
    w.push(crc(len, payload) as u64, CRC_BITS as u32);
    let bit_len = w.bit_len();
    Ok(EncodedFrame {
        bytes: w.into_bytes(),
        bit_len,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedFrame {
    pub payload: Vec<u8>,
    /// Bit offset of the sync pattern.
    pub start: usize,
    /// Bit offset just past the CRC.
    pub end: usize,
}

/// Scans `bytes[..bit_len]` for the sync pattern and decodes the first
/// frame whose pilot matches.
pub fn decode(bytes: &[u8], bit_len: usize) -> Result<DecodedFrame, FrameError> {
    let bit_len = bit_len.min(bytes.len() * 8);
    let sync = sync_word();
    let pilot = pilot_word();
    let mut sync_seen = false;
    let mut r = BitReader::with_bit_len(bytes, bit_len);
    for start in 0..=bit_len.saturating_sub(SYNC_BITS) {
        r.seek(start);
        if r.read(SYNC_BITS as u32) != Some(sync) {
            continue;
        }
        sync_seen = true;
        let (Some(hi), Some(lo)) = (r.read(64), r.read(64)) else {
            break;
        };
        if ((hi as u128) << 64 | lo as u128) != pilot {
            continue;
        }
        let Some(len) = r.read(LEN_BITS as u32) else {
            return Err(FrameError::Truncated {
                needed: start + HEADER_BITS,
                available: bit_len,
            });
        };
        let needed = start + frame_bits_for_payload(len as usize);
        if needed > bit_len {
            return Err(FrameError::Truncated {
                needed,
                available: bit_len,
            });
        }
        let payload = r.read_bytes(len as usize).expect("length checked");
        let got = r.read(CRC_BITS as u32).expect("length checked") as u32;
        if got != crc(len as u16, &payload) {
            return Err(FrameError::CrcMismatch);
        }
        return Ok(DecodedFrame {
            payload,
            start,
            end: needed,
        });
    }
    Err(if sync_seen {
        FrameError::PilotMismatch
    } else {
        FrameError::SyncNotFound
    })
}

/// Total byte length of a frame starting at bit 0, read from the length
/// field in its first `HEADER_BITS` bits.
pub fn byte_len_from_header(header: &[u8]) -> Option<usize> {
    let mut r = BitReader::new(header);
    r.seek(SYNC_BITS + PILOT_BITS);
    let len = r.read(LEN_BITS as u32)? as usize;
    Some(frame_bits_for_payload(len).div_ceil(8))
}

pub const HEADER_BYTES: usize = HEADER_BITS.div_ceil(8);
