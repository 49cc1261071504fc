//! Sender/verifier identification over TCP with a bit-level frame format
//! and an optional bit-flip channel in front of the verifier's deframer.

pub mod channel;
pub mod frame;
pub mod pdu;
pub mod session;

pub use channel::{frame_error_prob, BitFlipChannel};
pub use frame::{EncodedFrame, FrameError};
pub use pdu::{frame_decode, frame_encode, MsgType, PduBody, PduMessage, Verdict};
pub use session::{
    run_sender, sender_frames, spawn_verifier, NetError, SendMode, SenderConfig, SessionStats,
    VerifierConfig, VerifierHandle,
};
