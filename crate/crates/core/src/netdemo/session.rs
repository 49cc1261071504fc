//! Stop-and-wait sender and multi-connection verifier over TCP.
//!
//! The verifier reads each frame off the stream using the length field as
//! sent, then runs the bit-flip channel over the frame before decoding.
//! Dropped frames are answered with a `FrameError` verdict carrying the
//! sequence number the connection expected next.

use std::fmt;
use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::channel::BitFlipChannel;
use super::frame::{self, EncodedFrame, FrameError, HEADER_BYTES};
use super::pdu::{frame_decode, frame_encode, PduBody, PduMessage, Verdict, MAX_CHUNK, SEQ_MODULUS};
use crate::code::{CodeError, CodeParams, IdCode, Identity};
use crate::gf2m::Backend;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);
const POLL_INTERVAL: Duration = Duration::from_millis(50);

#[derive(Debug, Error)]
pub enum NetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("timed out waiting for a verdict")]
    Timeout,
    #[error("connection closed mid-frame")]
    Closed,
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("invalid channel: {0}")]
    Channel(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SendMode {
    /// One challenge per exchange.
    #[default]
    Identify,
    /// The full identity, chunked, per exchange.
    TransmitIdentity,
}

impl SendMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SendMode::Identify => "identify",
            SendMode::TransmitIdentity => "transmit-identity",
        }
    }
}

impl fmt::Display for SendMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SendMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identify" => Ok(SendMode::Identify),
            "transmit-identity" | "transmit" => Ok(SendMode::TransmitIdentity),
            other => Err(format!("unknown mode {other:?} (identify, transmit-identity)")),
        }
    }
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Reject => "reject",
            Verdict::Accept => "accept",
            Verdict::FrameError => "frame-error",
            Verdict::Ack => "ack",
        }
    }
}

/// One challenge (or one identity transfer) and its final verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exchange {
    pub seq: u32,
    pub verdict: Verdict,
    /// From challenge generation to verdict receipt.
    pub latency_ns: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionStats {
    pub frames_sent: u64,
    pub frames_received: u64,
    pub accepts: u64,
    pub rejects: u64,
    pub frame_drops: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    /// Sender side only.
    pub exchanges: Vec<Exchange>,
}

impl SessionStats {
    /// Every non-accept, which is a false reject when both ends hold the
    /// same identity.
    pub fn false_rejects(&self) -> u64 {
        self.rejects + self.frame_drops
    }

    pub fn latencies_ns(&self) -> Vec<u64> {
        self.exchanges.iter().map(|e| e.latency_ns).collect()
    }

    fn record(&mut self, v: Verdict) {
        match v {
            Verdict::Accept => self.accepts += 1,
            Verdict::Reject => self.rejects += 1,
            Verdict::FrameError => self.frame_drops += 1,
            Verdict::Ack => {}
        }
    }
}

pub fn write_stats_csv<W: Write>(stats: &SessionStats, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["exchange", "seq", "verdict", "latency_ns"])?;
    for (i, e) in stats.exchanges.iter().enumerate() {
        w.write_record([
            i.to_string(),
            e.seq.to_string(),
            e.verdict.as_str().to_string(),
            e.latency_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Fills `buf`. `Ok(false)` on a clean end of stream before the first byte.
/// With `stop`, read timeouts poll the flag; without it they are fatal.
fn read_full(stream: &mut TcpStream, buf: &mut [u8], stop: Option<&AtomicBool>) -> Result<bool, NetError> {
    let mut filled = 0;
    while filled < buf.len() {
        match stream.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(NetError::Closed),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                match stop {
                    Some(flag) if !flag.load(Ordering::Relaxed) => {}
                    Some(_) => return Err(NetError::Closed),
                    None => return Err(NetError::Timeout),
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

/// Reads one frame as sent. Returns the bytes and the significant bit
/// length, or `None` at end of stream.
pub fn read_frame(
    stream: &mut TcpStream,
    stop: Option<&AtomicBool>,
) -> Result<Option<(Vec<u8>, usize)>, NetError> {
    let mut buf = vec![0u8; HEADER_BYTES];
    if !read_full(stream, &mut buf, stop)? {
        return Ok(None);
    }
    let total = frame::byte_len_from_header(&buf).ok_or(NetError::Closed)?;
    let payload_len = (total * 8 - frame::OVERHEAD_BITS) / 8;
    buf.resize(total, 0);
    if !read_full(stream, &mut buf[HEADER_BYTES..], stop)? {
        return Err(NetError::Closed);
    }
    Ok(Some((buf, frame::frame_bits_for_payload(payload_len))))
}

pub fn default_backend(params: CodeParams) -> Backend {
    if params.zech_regime() {
        Backend::Zech
    } else {
        Backend::Polynomial
    }
}

#[derive(Debug, Clone)]
pub struct VerifierConfig {
    pub identity: Identity,
    pub flip_prob: f64,
    pub seed: u64,
    pub backend: Backend,
}

impl VerifierConfig {
    pub fn new(identity: Identity) -> Self {
        let backend = default_backend(identity.params());
        VerifierConfig {
            identity,
            flip_prob: 0.0,
            seed: 0,
            backend,
        }
    }
}

struct Shared {
    code: IdCode,
    identity: Identity,
    identity_bytes: Vec<u8>,
    flip_prob: f64,
    seed: u64,
    stop: AtomicBool,
    stats: Mutex<SessionStats>,
}

pub struct VerifierHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    accept_thread: Option<JoinHandle<()>>,
}

impl VerifierHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stats(&self) -> SessionStats {
        self.shared.stats.lock().unwrap().clone()
    }

    /// Stops accepting, waits for open connections to wind down and
    /// returns the aggregate statistics.
    pub fn stop(mut self) -> SessionStats {
        self.shared.stop.store(true, Ordering::Relaxed);
        if let Some(t) = self.accept_thread.take() {
            let _ = t.join();
        }
        self.stats()
    }

    /// Blocks until the accept loop ends.
    pub fn join(mut self) -> SessionStats {
        if let Some(t) = self.accept_thread.take() {
            let _ = t.join();
        }
        self.stats()
    }
}

impl Drop for VerifierHandle {
    fn drop(&mut self) {
        self.shared.stop.store(true, Ordering::Relaxed);
        if let Some(t) = self.accept_thread.take() {
            let _ = t.join();
        }
    }
}

pub fn spawn_verifier<A: ToSocketAddrs>(addr: A, cfg: VerifierConfig) -> Result<VerifierHandle, NetError> {
    BitFlipChannel::new(cfg.flip_prob, cfg.seed).map_err(|e| NetError::Channel(e.to_string()))?;
    let code = IdCode::new(cfg.identity.params(), cfg.backend)?;
    let listener = TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let local = listener.local_addr()?;
    let shared = Arc::new(Shared {
        code,
        identity_bytes: cfg.identity.to_bytes(),
        identity: cfg.identity,
        flip_prob: cfg.flip_prob,
        seed: cfg.seed,
        stop: AtomicBool::new(false),
        stats: Mutex::new(SessionStats::default()),
    });
    let accept_shared = Arc::clone(&shared);
    let accept_thread = thread::spawn(move || accept_loop(listener, accept_shared));
    Ok(VerifierHandle {
        addr: local,
        shared,
        accept_thread: Some(accept_thread),
    })
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    let next_conn = AtomicU64::new(0);
    let mut workers = Vec::new();
    while !shared.stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, _)) => {
                let conn = next_conn.fetch_add(1, Ordering::Relaxed);
                let shared = Arc::clone(&shared);
                workers.push(thread::spawn(move || {
                    let _ = serve_connection(stream, &shared, conn);
                }));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(2)),
            Err(_) => thread::sleep(Duration::from_millis(2)),
        }
        workers.retain(|w| !w.is_finished());
    }
    for w in workers {
        let _ = w.join();
    }
}

struct ConnState {
    expected_seq: u32,
    xfer: Vec<u8>,
}

impl ConnState {
    fn handle(&mut self, shared: &Shared, pdu: PduMessage) -> Verdict {
        if pdu.params != shared.code.params() {
            return Verdict::FrameError;
        }
        match pdu.body {
            PduBody::Challenge(ch) => match shared.code.verify_challenge(&shared.identity, &ch) {
                Ok(r) if r.accepted => Verdict::Accept,
                Ok(_) => Verdict::Reject,
                Err(_) => Verdict::FrameError,
            },
            PduBody::IdentityChunk { offset, data } => {
                if offset as usize != self.xfer.len() {
                    self.xfer.clear();
                    return Verdict::FrameError;
                }
                self.xfer.extend_from_slice(&data);
                let total = shared.identity_bytes.len();
                if self.xfer.len() < total {
                    return Verdict::Ack;
                }
                let same = self.xfer == shared.identity_bytes;
                self.xfer.clear();
                if same {
                    Verdict::Accept
                } else {
                    Verdict::Reject
                }
            }
            PduBody::Verdict(_) => Verdict::FrameError,
        }
    }
}

fn serve_connection(mut stream: TcpStream, shared: &Shared, conn: u64) -> Result<(), NetError> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(POLL_INTERVAL))?;
    let mut channel = BitFlipChannel::with_stream(shared.flip_prob, shared.seed, conn)
        .map_err(|e| NetError::Channel(e.to_string()))?;
    let params = shared.code.params();
    let mut state = ConnState {
        expected_seq: 0,
        xfer: Vec::new(),
    };
    while let Some((mut bytes, bit_len)) = read_frame(&mut stream, Some(&shared.stop))? {
        let wire_len = bytes.len() as u64;
        channel.apply(&mut bytes, bit_len);
        let (seq, verdict) = match frame_decode(&bytes, bit_len) {
            Ok(pdu) => (pdu.seq, state.handle(shared, pdu)),
            Err(_) => {
                state.xfer.clear();
                (state.expected_seq, Verdict::FrameError)
            }
        };
        state.expected_seq = (seq + 1) % SEQ_MODULUS;
        let reply = frame_encode(&PduMessage {
            seq,
            params,
            body: PduBody::Verdict(verdict),
        })?;
        stream.write_all(&reply.bytes)?;
        let mut stats = shared.stats.lock().unwrap();
        stats.frames_received += 1;
        stats.bytes_received += wire_len;
        stats.frames_sent += 1;
        stats.bytes_sent += reply.bytes.len() as u64;
        stats.record(verdict);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SenderConfig {
    pub mode: SendMode,
    pub count: u64,
    pub seed: u64,
    pub timeout: Duration,
    pub backend: Backend,
}

impl SenderConfig {
    pub fn new(params: CodeParams, mode: SendMode, count: u64, seed: u64) -> Self {
        SenderConfig {
            mode,
            count,
            seed,
            timeout: DEFAULT_TIMEOUT,
            backend: default_backend(params),
        }
    }
}

/// Produces the PDUs of each exchange in wire order.
pub struct ExchangeGen<'a> {
    code: IdCode,
    identity: &'a Identity,
    identity_bytes: Vec<u8>,
    rng: ChaCha8Rng,
    mode: SendMode,
    remaining: u64,
    next_seq: u32,
}

impl<'a> ExchangeGen<'a> {
    pub fn new(identity: &'a Identity, cfg: &SenderConfig) -> Result<Self, NetError> {
        let code = IdCode::new(identity.params(), cfg.backend)?;
        let identity_bytes = match cfg.mode {
            SendMode::TransmitIdentity => identity.to_bytes(),
            SendMode::Identify => Vec::new(),
        };
        Ok(ExchangeGen {
            code,
            identity,
            identity_bytes,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            mode: cfg.mode,
            remaining: cfg.count,
            next_seq: 0,
        })
    }

    fn seq(&mut self) -> u32 {
        let s = self.next_seq;
        self.next_seq = (s + 1) % SEQ_MODULUS;
        s
    }
}

impl Iterator for ExchangeGen<'_> {
    type Item = Result<Vec<PduMessage>, NetError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let params = self.code.params();
        Some(match self.mode {
            SendMode::Identify => self
                .code
                .generate_challenge(self.identity, &mut self.rng)
                .map_err(NetError::from)
                .map(|ch| {
                    vec![PduMessage {
                        seq: self.seq(),
                        params,
                        body: PduBody::Challenge(ch),
                    }]
                }),
            SendMode::TransmitIdentity => {
                let chunks: Vec<(u32, Vec<u8>)> = self
                    .identity_bytes
                    .chunks(MAX_CHUNK)
                    .enumerate()
                    .map(|(i, c)| ((i * MAX_CHUNK) as u32, c.to_vec()))
                    .collect();
                Ok(chunks
                    .into_iter()
                    .map(|(offset, data)| PduMessage {
                        seq: self.seq(),
                        params,
                        body: PduBody::IdentityChunk { offset, data },
                    })
                    .collect())
            }
        })
    }
}

/// The frames `run_sender` would put on the wire, in order, assuming no
/// exchange is cut short by a dropped frame.
pub fn sender_frames(identity: &Identity, cfg: &SenderConfig) -> Result<Vec<EncodedFrame>, NetError> {
    let mut out = Vec::new();
    for exchange in ExchangeGen::new(identity, cfg)? {
        for pdu in exchange? {
            out.push(frame_encode(&pdu)?);
        }
    }
    Ok(out)
}

pub fn run_sender<A: ToSocketAddrs>(
    addr: A,
    identity: &Identity,
    cfg: &SenderConfig,
) -> Result<SessionStats, NetError> {
    let mut stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(cfg.timeout))?;
    let mut stats = SessionStats::default();
    let mut gen = ExchangeGen::new(identity, cfg)?;
    loop {
        let start = Instant::now();
        let Some(pdus) = gen.next() else { break };
        let pdus = pdus?;
        let first_seq = pdus.first().map(|p| p.seq).unwrap_or(0);
        let last = pdus.len().saturating_sub(1);
        let mut final_verdict = Verdict::FrameError;
        for (i, pdu) in pdus.iter().enumerate() {
            let f = frame_encode(pdu)?;
            stream.write_all(&f.bytes)?;
            stats.frames_sent += 1;
            stats.bytes_sent += f.bytes.len() as u64;
            let (bytes, bit_len) = read_frame(&mut stream, None)?.ok_or(NetError::Closed)?;
            stats.frames_received += 1;
            stats.bytes_received += bytes.len() as u64;
            let reply = frame_decode(&bytes, bit_len)?;
            let PduBody::Verdict(v) = reply.body else {
                return Err(NetError::Protocol("expected a verdict".into()));
            };
            if reply.seq != pdu.seq {
                return Err(NetError::Protocol(format!(
                    "verdict for seq {} while waiting on {}",
                    reply.seq, pdu.seq
                )));
            }
            final_verdict = v;
            match (v, i == last) {
                (Verdict::Ack, false) => continue,
                (Verdict::Ack, true) => {
                    return Err(NetError::Protocol("ack on the final frame".into()))
                }
                (_, _) => break,
            }
        }
        stats.record(final_verdict);
        stats.exchanges.push(Exchange {
            seq: first_seq,
            verdict: final_verdict,
            latency_ns: start.elapsed().as_nanos() as u64,
        });
    }
    Ok(stats)
}
