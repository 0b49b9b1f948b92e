//! Framed binary protocol between prover and verifier.
//!
//! ```text
//! +------+------+---------+----------+-------------+---------+
//! | 0x50 | 0x41 | version | msg_type | payload_len | payload |
//! |  'P' |  'A' |  0x01   |  1 byte  |  u32 BE     |  bytes  |
//! +------+------+---------+----------+-------------+---------+
//! ```
//!
//! All integers are big-endian. Payloads are capped at 1 MiB.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::fingerprint::{DiffVector, WeightVector};
use crate::perm::Permutation;
use crate::protocol::{Challenge, CommitMode, Commitment, RejectReason, Response, Scheme, Verdict};

pub mod keyfile;
pub mod net;
pub mod transcript;

pub const MAGIC: [u8; 2] = *b"PA";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 8;
pub const MAX_PAYLOAD: u32 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    Hello = 0x01,
    Commit = 0x02,
    Challenge = 0x03,
    Response = 0x04,
    RoundResult = 0x05,
    SessionResult = 0x06,
    Abort = 0x07,
}

impl MessageType {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x01 => MessageType::Hello,
            0x02 => MessageType::Commit,
            0x03 => MessageType::Challenge,
            0x04 => MessageType::Response,
            0x05 => MessageType::RoundResult,
            0x06 => MessageType::SessionResult,
            0x07 => MessageType::Abort,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum AbortReason {
    Decode = 0x01,
    UnexpectedMessage = 0x02,
    SchemeMismatch = 0x03,
    Timeout = 0x04,
    Protocol = 0x05,
    Transport = 0x06,
    Other = 0xff,
}

impl AbortReason {
    pub fn from_byte(b: u8) -> Self {
        match b {
            0x01 => AbortReason::Decode,
            0x02 => AbortReason::UnexpectedMessage,
            0x03 => AbortReason::SchemeMismatch,
            0x04 => AbortReason::Timeout,
            0x05 => AbortReason::Protocol,
            0x06 => AbortReason::Transport,
            _ => AbortReason::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Hello {
        scheme: Scheme,
        mode: CommitMode,
        rounds: u32,
    },
    Commit {
        round: u32,
        series_index: Option<u32>,
        commitment: Commitment,
    },
    Challenge(Challenge),
    Response {
        round: u32,
        response: Response,
    },
    RoundResult {
        round: u32,
        verdict: Verdict,
    },
    SessionResult {
        accepted: bool,
        rounds: u32,
        rounds_accepted: u32,
    },
    Abort {
        reason: AbortReason,
        detail: String,
    },
}

impl Message {
    pub fn msg_type(&self) -> MessageType {
        match self {
            Message::Hello { .. } => MessageType::Hello,
            Message::Commit { .. } => MessageType::Commit,
            Message::Challenge(_) => MessageType::Challenge,
            Message::Response { .. } => MessageType::Response,
            Message::RoundResult { .. } => MessageType::RoundResult,
            Message::SessionResult { .. } => MessageType::SessionResult,
            Message::Abort { .. } => MessageType::Abort,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 2]),
    #[error("unsupported version {0:#04x}")]
    BadVersion(u8),
    #[error("truncated frame: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("payload of {0} bytes exceeds the 1 MiB cap")]
    Oversize(u32),
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error("malformed payload: {0}")]
    BadPayload(String),
}

fn bad(msg: impl Into<String>) -> DecodeError {
    DecodeError::BadPayload(msg.into())
}

/// Cursor over a payload that turns every short read into `BadPayload`.
struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() < n {
            return Err(bad(format!("need {n} more bytes, have {}", self.buf.len())));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, DecodeError> {
        let b = self.take(8)?;
        Ok(u64::from_be_bytes(b.try_into().expect("8 bytes")))
    }

    fn advance(&mut self, n: usize) {
        self.buf = &self.buf[n..];
    }

    fn finish(self) -> Result<(), DecodeError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(bad(format!("{} trailing bytes", self.buf.len())))
        }
    }
}

const COMMIT_SUM: u8 = 0x00;
const COMMIT_ORDERING: u8 = 0x01;
const COMMIT_DIFF: u8 = 0x02;
const RESPONSE_PERM: u8 = 0x00;
const RESPONSE_BYTES: u8 = 0x01;

/// Tag byte followed by the value: `u64` sum, or a binary vector.
pub fn encode_commitment(c: &Commitment) -> Vec<u8> {
    match c {
        Commitment::Sum(s) => {
            let mut out = vec![COMMIT_SUM];
            out.extend_from_slice(&s.to_be_bytes());
            out
        }
        Commitment::Ordering(v) => [vec![COMMIT_ORDERING], v.to_bytes()].concat(),
        Commitment::Diff(d) => [vec![COMMIT_DIFF], d.to_bytes()].concat(),
    }
}

fn read_commitment(r: &mut Reader<'_>) -> Result<Commitment, DecodeError> {
    match r.u8()? {
        COMMIT_SUM => Ok(Commitment::Sum(r.u64()?)),
        COMMIT_ORDERING => {
            let (v, used) = WeightVector::from_bytes(r.buf).map_err(|e| bad(e.to_string()))?;
            r.advance(used);
            Ok(Commitment::Ordering(v))
        }
        COMMIT_DIFF => {
            let (d, used) = DiffVector::from_bytes(r.buf).map_err(|e| bad(e.to_string()))?;
            r.advance(used);
            Ok(Commitment::Diff(d))
        }
        t => Err(bad(format!("unknown commitment tag {t:#04x}"))),
    }
}

pub fn decode_commitment(bytes: &[u8]) -> Result<Commitment, DecodeError> {
    let mut r = Reader { buf: bytes };
    let c = read_commitment(&mut r)?;
    r.finish()?;
    Ok(c)
}

/// Tag byte followed by a binary permutation or a binary vector.
pub fn encode_response(resp: &Response) -> Vec<u8> {
    match resp {
        Response::Perm(p) => [vec![RESPONSE_PERM], p.to_bytes()].concat(),
        Response::Bytes(v) => [vec![RESPONSE_BYTES], v.to_bytes()].concat(),
    }
}

fn read_response(r: &mut Reader<'_>) -> Result<Response, DecodeError> {
    match r.u8()? {
        RESPONSE_PERM => {
            let (p, used) = Permutation::from_bytes(r.buf).map_err(|e| bad(e.to_string()))?;
            r.advance(used);
            Ok(Response::Perm(p))
        }
        RESPONSE_BYTES => {
            let (v, used) = WeightVector::from_bytes(r.buf).map_err(|e| bad(e.to_string()))?;
            r.advance(used);
            Ok(Response::Bytes(v))
        }
        t => Err(bad(format!("unknown response tag {t:#04x}"))),
    }
}

pub fn decode_response(bytes: &[u8]) -> Result<Response, DecodeError> {
    let mut r = Reader { buf: bytes };
    let resp = read_response(&mut r)?;
    r.finish()?;
    Ok(resp)
}

fn scheme_byte(s: Scheme) -> u8 {
    match s {
        Scheme::A => 0x01,
        Scheme::B => 0x02,
    }
}

fn mode_byte(m: CommitMode) -> u8 {
    match m {
        CommitMode::Scalar => 0x00,
        CommitMode::FullVector => 0x01,
    }
}

fn verdict_byte(v: Verdict) -> u8 {
    match v {
        Verdict::Accept => 0,
        Verdict::Reject(r) => r.code(),
    }
}

fn encode_payload(msg: &Message) -> Vec<u8> {
    let mut out = Vec::new();
    match msg {
        Message::Hello {
            scheme,
            mode,
            rounds,
        } => {
            out.push(scheme_byte(*scheme));
            out.push(mode_byte(*mode));
            out.extend_from_slice(&rounds.to_be_bytes());
        }
        Message::Commit {
            round,
            series_index,
            commitment,
        } => {
            out.extend_from_slice(&round.to_be_bytes());
            let idx = series_index.map_or(0, |i| i as u16);
            out.extend_from_slice(&idx.to_be_bytes());
            out.extend(encode_commitment(commitment));
        }
        Message::Challenge(c) => out.push(c.bit()),
        Message::Response { round, response } => {
            out.extend_from_slice(&round.to_be_bytes());
            out.extend(encode_response(response));
        }
        Message::RoundResult { round, verdict } => {
            out.extend_from_slice(&round.to_be_bytes());
            out.push(verdict_byte(*verdict));
        }
        Message::SessionResult {
            accepted,
            rounds,
            rounds_accepted,
        } => {
            out.push(u8::from(*accepted));
            out.extend_from_slice(&rounds.to_be_bytes());
            out.extend_from_slice(&rounds_accepted.to_be_bytes());
        }
        Message::Abort { reason, detail } => {
            out.push(*reason as u8);
            out.extend_from_slice(detail.as_bytes());
        }
    }
    out
}

fn decode_payload(ty: MessageType, payload: &[u8]) -> Result<Message, DecodeError> {
    let mut r = Reader { buf: payload };
    let msg = match ty {
        MessageType::Hello => {
            let scheme = match r.u8()? {
                0x01 => Scheme::A,
                0x02 => Scheme::B,
                s => return Err(bad(format!("unknown scheme {s:#04x}"))),
            };
            let mode = match r.u8()? {
                0x00 => CommitMode::Scalar,
                0x01 => CommitMode::FullVector,
                m => return Err(bad(format!("unknown commit mode {m:#04x}"))),
            };
            let rounds = r.u32()?;
            if rounds == 0 {
                return Err(bad("zero rounds"));
            }
            Message::Hello {
                scheme,
                mode,
                rounds,
            }
        }
        MessageType::Commit => {
            let round = r.u32()?;
            let series_index = match r.u16()? {
                0 => None,
                i => Some(u32::from(i)),
            };
            let commitment = read_commitment(&mut r)?;
            Message::Commit {
                round,
                series_index,
                commitment,
            }
        }
        MessageType::Challenge => {
            let b = r.u8()?;
            Message::Challenge(Challenge::try_from(b).map_err(|e| bad(e.to_string()))?)
        }
        MessageType::Response => {
            let round = r.u32()?;
            let response = read_response(&mut r)?;
            Message::Response { round, response }
        }
        MessageType::RoundResult => {
            let round = r.u32()?;
            let verdict = match r.u8()? {
                0 => Verdict::Accept,
                c => Verdict::Reject(
                    RejectReason::from_code(c)
                        .ok_or_else(|| bad(format!("unknown reject code {c}")))?,
                ),
            };
            Message::RoundResult { round, verdict }
        }
        MessageType::SessionResult => {
            let accepted = match r.u8()? {
                0 => false,
                1 => true,
                b => return Err(bad(format!("bad verdict byte {b}"))),
            };
            let rounds = r.u32()?;
            let rounds_accepted = r.u32()?;
            Message::SessionResult {
                accepted,
                rounds,
                rounds_accepted,
            }
        }
        MessageType::Abort => {
            let reason = AbortReason::from_byte(r.u8()?);
            let rest = r.take(r.buf.len())?;
            let detail =
                String::from_utf8(rest.to_vec()).map_err(|_| bad("abort detail is not UTF-8"))?;
            Message::Abort { reason, detail }
        }
    };
    r.finish()?;
    Ok(msg)
}

pub fn encode_frame(msg: &Message) -> Vec<u8> {
    let payload = encode_payload(msg);
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(msg.msg_type() as u8);
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend(payload);
    out
}

/// Validates a frame header, returning the message type and payload length.
pub fn decode_header(h: &[u8; HEADER_LEN]) -> Result<(MessageType, usize), DecodeError> {
    if h[..2] != MAGIC {
        return Err(DecodeError::BadMagic([h[0], h[1]]));
    }
    if h[2] != VERSION {
        return Err(DecodeError::BadVersion(h[2]));
    }
    let len = u32::from_be_bytes([h[4], h[5], h[6], h[7]]);
    if len > MAX_PAYLOAD {
        return Err(DecodeError::Oversize(len));
    }
    let ty = MessageType::from_byte(h[3]).ok_or(DecodeError::UnknownType(h[3]))?;
    Ok((ty, len as usize))
}

/// Decodes one frame from the front of `bytes`; returns the message and the
/// number of bytes consumed.
pub fn decode_frame(bytes: &[u8]) -> Result<(Message, usize), DecodeError> {
    let header: &[u8; HEADER_LEN] = bytes
        .get(..HEADER_LEN)
        .and_then(|h| h.try_into().ok())
        .ok_or(DecodeError::Truncated {
            needed: HEADER_LEN,
            have: bytes.len(),
        })?;
    let (ty, len) = decode_header(header)?;
    let payload = bytes
        .get(HEADER_LEN..HEADER_LEN + len)
        .ok_or(DecodeError::Truncated {
            needed: HEADER_LEN + len,
            have: bytes.len(),
        })?;
    Ok((decode_payload(ty, payload)?, HEADER_LEN + len))
}

#[derive(Debug, Error)]
pub enum FrameIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

pub fn write_frame<W: Write + ?Sized>(w: &mut W, msg: &Message) -> io::Result<()> {
    w.write_all(&encode_frame(msg))?;
    w.flush()
}

/// Reads exactly one frame. The payload length is checked against the cap
/// before anything is allocated.
pub fn read_frame<R: Read + ?Sized>(r: &mut R) -> Result<Message, FrameIoError> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    let (ty, len) = decode_header(&header)?;
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    Ok(decode_payload(ty, &payload)?)
}
