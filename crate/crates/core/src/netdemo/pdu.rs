//! PDU payload: msg_type(1) ‖ seq(3) ‖ m(1) ‖ k(1) ‖ delta(1) ‖ body.

use thiserror::Error;

use super::frame::{self, EncodedFrame, FrameError, MAX_PAYLOAD};
use crate::code::{Challenge, CodeError, CodeParams};

pub const HEADER_LEN: usize = 7;
pub const SEQ_MODULUS: u32 = 1 << 24;
/// Identity chunks carry a 4-byte offset ahead of the data.
pub const MAX_CHUNK: usize = MAX_PAYLOAD - HEADER_LEN - 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Challenge = 1,
    IdentityXfer = 2,
    Verdict = 3,
}

impl TryFrom<u8> for MsgType {
    type Error = PduError;

    fn try_from(v: u8) -> Result<Self, PduError> {
        match v {
            1 => Ok(MsgType::Challenge),
            2 => Ok(MsgType::IdentityXfer),
            3 => Ok(MsgType::Verdict),
            other => Err(PduError::UnknownType(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Verdict {
    Reject = 0,
    Accept = 1,
    /// The verifier dropped the frame (sync, pilot, CRC or parse failure).
    FrameError = 2,
    /// Intermediate identity chunk received.
    Ack = 3,
}

impl TryFrom<u8> for Verdict {
    type Error = PduError;

    fn try_from(v: u8) -> Result<Self, PduError> {
        match v {
            0 => Ok(Verdict::Reject),
            1 => Ok(Verdict::Accept),
            2 => Ok(Verdict::FrameError),
            3 => Ok(Verdict::Ack),
            other => Err(PduError::BadVerdict(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PduError {
    #[error("PDU shorter than its header")]
    Short,
    #[error("unknown message type {0}")]
    UnknownType(u8),
    #[error("unknown verdict code {0}")]
    BadVerdict(u8),
    #[error("sequence number {0} does not fit in 24 bits")]
    SeqOverflow(u32),
    #[error("parameters {0} do not fit the one-byte fields")]
    ParamsOutOfRange(CodeParams),
    #[error("body length {got} inconsistent with message type (expected {expected})")]
    BodyLength { expected: usize, got: usize },
    #[error("identity chunk of {0} bytes exceeds the PDU cap")]
    ChunkTooLarge(usize),
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PduBody {
    Challenge(Challenge),
    IdentityChunk { offset: u32, data: Vec<u8> },
    Verdict(Verdict),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PduMessage {
    pub seq: u32,
    pub params: CodeParams,
    pub body: PduBody,
}

impl PduMessage {
    pub fn msg_type(&self) -> MsgType {
        match self.body {
            PduBody::Challenge(_) => MsgType::Challenge,
            PduBody::IdentityChunk { .. } => MsgType::IdentityXfer,
            PduBody::Verdict(_) => MsgType::Verdict,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, PduError> {
        if self.seq >= SEQ_MODULUS {
            return Err(PduError::SeqOverflow(self.seq));
        }
        let p = self.params;
        if p.k() > 255 || p.delta() > 255 {
            return Err(PduError::ParamsOutOfRange(p));
        }
        let mut out = Vec::with_capacity(HEADER_LEN + p.challenge_bytes());
        out.push(self.msg_type() as u8);
        out.extend_from_slice(&self.seq.to_be_bytes()[1..]);
        out.extend_from_slice(&[p.m() as u8, p.k() as u8, p.delta() as u8]);
        match &self.body {
            PduBody::Challenge(ch) => out.extend(ch.to_bytes(&p)),
            PduBody::IdentityChunk { offset, data } => {
                if data.len() > MAX_CHUNK {
                    return Err(PduError::ChunkTooLarge(data.len()));
                }
                out.extend_from_slice(&offset.to_be_bytes());
                out.extend_from_slice(data);
            }
            PduBody::Verdict(v) => out.push(*v as u8),
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PduError> {
        if bytes.len() < HEADER_LEN {
            return Err(PduError::Short);
        }
        let msg_type = MsgType::try_from(bytes[0])?;
        let seq = u32::from_be_bytes([0, bytes[1], bytes[2], bytes[3]]);
        let params = CodeParams::new(bytes[4] as u32, bytes[5] as u32, bytes[6] as u32)?;
        let body = &bytes[HEADER_LEN..];
        let body = match msg_type {
            MsgType::Challenge => {
                let expected = params.challenge_bytes();
                if body.len() != expected {
                    return Err(PduError::BodyLength {
                        expected,
                        got: body.len(),
                    });
                }
                PduBody::Challenge(Challenge::from_bytes(&params, body)?)
            }
            MsgType::IdentityXfer => {
                if body.len() < 4 {
                    return Err(PduError::BodyLength {
                        expected: 4,
                        got: body.len(),
                    });
                }
                PduBody::IdentityChunk {
                    offset: u32::from_be_bytes(body[..4].try_into().unwrap()),
                    data: body[4..].to_vec(),
                }
            }
            MsgType::Verdict => {
                if body.len() != 1 {
                    return Err(PduError::BodyLength {
                        expected: 1,
                        got: body.len(),
                    });
                }
                PduBody::Verdict(Verdict::try_from(body[0])?)
            }
        };
        Ok(PduMessage { seq, params, body })
    }
}

pub fn frame_encode(pdu: &PduMessage) -> Result<EncodedFrame, FrameError> {
    let payload = pdu.to_bytes().map_err(|e| FrameError::Malformed(e.to_string()))?;
    frame::encode(&payload)
}

pub fn frame_decode(bytes: &[u8], bit_len: usize) -> Result<PduMessage, FrameError> {
    let decoded = frame::decode(bytes, bit_len)?;
    PduMessage::from_bytes(&decoded.payload).map_err(|e| FrameError::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::flip_bit;
    use crate::code::{IdCode, Identity};
    use crate::gf2m::Backend;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pdu(rng: &mut ChaCha8Rng) -> PduMessage {
        let grid = [(2, 2, 1), (4, 3, 2), (8, 3, 2), (13, 7, 5)];
        let (m, k, d) = grid[rng.gen_range(0..grid.len())];
        let params = CodeParams::new(m, k, d).unwrap();
        let seq = rng.gen_range(0..SEQ_MODULUS);
        let body = match rng.gen_range(0..3) {
            0 => {
                let code = IdCode::new(params, Backend::Polynomial).unwrap();
                let (r1, r2) = code.sample_randomness(rng);
                let tag = crate::gf2m::FieldElem(rng.gen_range(0..params.q()) as u16);
                PduBody::Challenge(Challenge { r1, r2, tag })
            }
            1 => PduBody::IdentityChunk {
                offset: rng.gen(),
                data: (0..rng.gen_range(0..100)).map(|_| rng.gen()).collect(),
            },
            _ => PduBody::Verdict(Verdict::try_from(rng.gen_range(0..4u8)).unwrap()),
        };
        PduMessage { seq, params, body }
    }

    #[test]
    fn frame_round_trip_random_pdus() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let pdu = random_pdu(&mut rng);
            let f = frame_encode(&pdu).unwrap();
            assert_eq!(frame_decode(&f.bytes, f.bit_len).unwrap(), pdu);
        }
    }

    #[test]
    fn challenge_frame_size_at_221() {
        let params = CodeParams::new(2, 2, 1).unwrap();
        let code = IdCode::new(params, Backend::Zech).unwrap();
        let id = Identity::zero(params).unwrap();
        let ch = code.generate_challenge(&id, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let pdu = PduMessage {
            seq: 0,
            params,
            body: PduBody::Challenge(ch),
        };
        let f = frame_encode(&pdu).unwrap();
        assert_eq!(f.bit_len, 266);
    }

    #[test]
    fn payload_flips_fail_crc() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let pdu = random_pdu(&mut rng);
        let f = frame_encode(&pdu).unwrap();
        for i in frame::HEADER_BITS..f.bit_len {
            let mut bytes = f.bytes.clone();
            flip_bit(&mut bytes, i);
            assert_eq!(frame_decode(&bytes, f.bit_len), Err(FrameError::CrcMismatch));
        }
    }

    #[test]
    fn malformed_payloads() {
        assert_eq!(PduMessage::from_bytes(&[1, 0, 0]), Err(PduError::Short));
        assert_eq!(
            PduMessage::from_bytes(&[9, 0, 0, 0, 2, 2, 1]),
            Err(PduError::UnknownType(9))
        );
        assert!(matches!(
            PduMessage::from_bytes(&[1, 0, 0, 0, 2, 2, 1]),
            Err(PduError::BodyLength { expected: 1, got: 0 })
        ));
        assert!(matches!(
            PduMessage::from_bytes(&[3, 0, 0, 0, 2, 2, 1, 7]),
            Err(PduError::BadVerdict(7))
        ));
        assert!(matches!(
            PduMessage::from_bytes(&[3, 0, 0, 0, 2, 2, 2, 1]),
            Err(PduError::Code(_))
        ));
        let f = frame::encode(&[9, 0, 0, 0, 2, 2, 1]).unwrap();
        assert!(matches!(frame_decode(&f.bytes, f.bit_len), Err(FrameError::Malformed(_))));
        let pdu = PduMessage {
            seq: SEQ_MODULUS,
            params: CodeParams::new(2, 2, 1).unwrap(),
            body: PduBody::Verdict(Verdict::Accept),
        };
        assert_eq!(pdu.to_bytes(), Err(PduError::SeqOverflow(SEQ_MODULUS)));
    }
}
