//! Multi-round sessions: the verifier state machine, and drivers that run
//! either side over a [`Channel`] or both sides in-process.
//!
//! Message flow for a session of `k` rounds:
//!
//! ```text
//! verifier                         prover
//!    | -------- HELLO ------------->  |
//!    | <------- COMMIT -------------  |  \
//!    | -------- CHALLENGE --------->  |   | repeated k times
//!    | <------- RESPONSE -----------  |   |
//!    | -------- ROUND_RESULT ------>  |  /
//!    | -------- SESSION_RESULT ---->  |
//! ```
//!
//! Either side may send ABORT at any point. An abort is a transport or
//! framing failure and is reported separately from a cryptographic reject.

use std::io;
use std::sync::mpsc;
use std::time::Duration;

use rand::RngCore;
use thiserror::Error;

use crate::protocol::{
    Challenge, Commitment, ProtocolError, Prover, PublicKey, Response, RoundTranscript, Scheme,
    SessionPolicy, Verdict,
};
use crate::wire::transcript::TranscriptLog;
use crate::wire::{AbortReason, DecodeError, Message};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("peer closed the connection")]
    Closed,
    #[error("timed out waiting for a frame")]
    Timeout,
    #[error(transparent)]
    Io(io::Error),
    #[error("frame decode failed: {0}")]
    Decode(#[from] DecodeError),
}

impl ChannelError {
    pub fn abort_reason(&self) -> AbortReason {
        match self {
            ChannelError::Timeout => AbortReason::Timeout,
            ChannelError::Decode(_) => AbortReason::Decode,
            ChannelError::Closed | ChannelError::Io(_) => AbortReason::Transport,
        }
    }
}

/// An ordered, reliable message pipe.
pub trait Channel {
    fn send(&mut self, msg: &Message) -> Result<(), ChannelError>;
    fn recv(&mut self) -> Result<Message, ChannelError>;
}

/// In-process channel end, for tests and local simulation.
pub struct MemChannel {
    tx: mpsc::Sender<Message>,
    rx: mpsc::Receiver<Message>,
    timeout: Duration,
}

/// Two connected channel ends.
pub fn mem_channel_pair(timeout: Duration) -> (MemChannel, MemChannel) {
    let (tx_a, rx_b) = mpsc::channel();
    let (tx_b, rx_a) = mpsc::channel();
    (
        MemChannel {
            tx: tx_a,
            rx: rx_a,
            timeout,
        },
        MemChannel {
            tx: tx_b,
            rx: rx_b,
            timeout,
        },
    )
}

impl Channel for MemChannel {
    fn send(&mut self, msg: &Message) -> Result<(), ChannelError> {
        self.tx.send(msg.clone()).map_err(|_| ChannelError::Closed)
    }

    fn recv(&mut self) -> Result<Message, ChannelError> {
        self.rx.recv_timeout(self.timeout).map_err(|e| match e {
            mpsc::RecvTimeoutError::Timeout => ChannelError::Timeout,
            mpsc::RecvTimeoutError::Disconnected => ChannelError::Closed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Accept,
    Reject,
    Abort { reason: AbortReason, detail: String },
}

#[derive(Debug, Clone)]
pub struct SessionResult {
    pub outcome: Outcome,
    pub transcripts: Vec<RoundTranscript>,
}

impl SessionResult {
    /// 0 accept, 1 reject, 3 abort.
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            Outcome::Accept => 0,
            Outcome::Reject => 1,
            Outcome::Abort { .. } => 3,
        }
    }

    pub fn is_accept(&self) -> bool {
        self.outcome == Outcome::Accept
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unexpected message: {0}")]
    Unexpected(String),
    #[error("peer uses scheme {peer}, local key is scheme {local}")]
    SchemeMismatch { local: Scheme, peer: Scheme },
    #[error("peer aborted ({reason:?}): {detail}")]
    PeerAbort { reason: AbortReason, detail: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl SessionError {
    fn abort_reason(&self) -> AbortReason {
        match self {
            SessionError::Unexpected(_) => AbortReason::UnexpectedMessage,
            SessionError::SchemeMismatch { .. } => AbortReason::SchemeMismatch,
            SessionError::PeerAbort { reason, .. } => *reason,
            SessionError::Channel(e) => e.abort_reason(),
            SessionError::Protocol(_) => AbortReason::Protocol,
        }
    }

    fn into_outcome(self) -> Outcome {
        Outcome::Abort {
            reason: self.abort_reason(),
            detail: self.to_string(),
        }
    }
}

struct Pending {
    round: u32,
    series_index: Option<u32>,
    commitment: Commitment,
    challenge: Challenge,
}

/// Verifier side of one session. Holds only the public key.
pub struct VerifierSession<'k> {
    key: &'k PublicKey,
    policy: SessionPolicy,
    next_round: u32,
    pending: Option<Pending>,
    transcripts: Vec<RoundTranscript>,
}

impl<'k> VerifierSession<'k> {
    pub fn new(key: &'k PublicKey, policy: SessionPolicy) -> Self {
        VerifierSession {
            key,
            policy,
            next_round: 1,
            pending: None,
            transcripts: Vec::new(),
        }
    }

    pub fn hello(&self) -> Message {
        Message::Hello {
            scheme: self.key.scheme(),
            mode: self.policy.mode,
            rounds: self.policy.rounds,
        }
    }

    pub fn is_done(&self) -> bool {
        self.next_round > self.policy.rounds
    }

    /// Records the commitment and draws the challenge bit.
    pub fn on_commit<R: RngCore + ?Sized>(
        &mut self,
        round: u32,
        series_index: Option<u32>,
        commitment: Commitment,
        rng: &mut R,
    ) -> Result<Challenge, SessionError> {
        if self.pending.is_some() || self.is_done() || round != self.next_round {
            return Err(SessionError::Unexpected(format!(
                "commit for round {round}, expected round {}",
                self.next_round
            )));
        }
        let challenge = Challenge::random(rng);
        self.pending = Some(Pending {
            round,
            series_index,
            commitment,
            challenge,
        });
        Ok(challenge)
    }

    pub fn on_response(
        &mut self,
        round: u32,
        response: Response,
    ) -> Result<&RoundTranscript, SessionError> {
        let pending = match self.pending.take() {
            Some(p) if p.round == round => p,
            _ => {
                return Err(SessionError::Unexpected(format!(
                    "response for round {round} without matching commit"
                )))
            }
        };
        let verdict = self.key.verify(
            pending.series_index,
            &pending.commitment,
            pending.challenge,
            &response,
        );
        self.transcripts.push(RoundTranscript {
            scheme: self.key.scheme(),
            round,
            series_index: pending.series_index,
            commitment: pending.commitment,
            challenge: pending.challenge,
            response,
            verdict,
        });
        self.next_round += 1;
        Ok(self.transcripts.last().expect("just pushed"))
    }

    pub fn rounds_accepted(&self) -> u32 {
        self.transcripts
            .iter()
            .filter(|t| t.verdict.is_accept())
            .count() as u32
    }

    /// Accepts iff all rounds ran and every one accepted.
    pub fn finish(self) -> SessionResult {
        let all = self.is_done() && self.transcripts.iter().all(|t| t.verdict.is_accept());
        SessionResult {
            outcome: if all {
                Outcome::Accept
            } else {
                Outcome::Reject
            },
            transcripts: self.transcripts,
        }
    }
}

/// Runs both parties in-process without any framing.
pub fn run_local(
    prover: &mut dyn Prover,
    key: &PublicKey,
    policy: SessionPolicy,
    prover_rng: &mut dyn RngCore,
    verifier_rng: &mut dyn RngCore,
) -> Result<SessionResult, SessionError> {
    if prover.scheme() != key.scheme() {
        return Err(SessionError::SchemeMismatch {
            local: key.scheme(),
            peer: prover.scheme(),
        });
    }
    let mut v = VerifierSession::new(key, policy);
    for round in 1..=policy.rounds {
        let c = prover.commit(round, policy.mode, prover_rng)?;
        let challenge = v.on_commit(round, c.series_index, c.commitment, verifier_rng)?;
        let response = prover.respond(challenge)?;
        v.on_response(round, response)?;
    }
    Ok(v.finish())
}

fn recv_or_abort<C: Channel + ?Sized>(chan: &mut C) -> Result<Message, SessionError> {
    match chan.recv()? {
        Message::Abort { reason, detail } => Err(SessionError::PeerAbort { reason, detail }),
        m => Ok(m),
    }
}

/// Verifier side over a channel. Every round is logged to `log` if given.
pub fn run_verifier<C: Channel + ?Sized>(
    chan: &mut C,
    key: &PublicKey,
    policy: SessionPolicy,
    rng: &mut dyn RngCore,
    mut log: Option<&mut TranscriptLog>,
) -> SessionResult {
    let mut v = VerifierSession::new(key, policy);
    let res = (|| -> Result<(), SessionError> {
        chan.send(&v.hello())?;
        while !v.is_done() {
            let (round, series_index, commitment) = match recv_or_abort(chan)? {
                Message::Commit {
                    round,
                    series_index,
                    commitment,
                } => (round, series_index, commitment),
                m => {
                    return Err(SessionError::Unexpected(format!(
                        "{:?} instead of COMMIT",
                        m.msg_type()
                    )))
                }
            };
            let challenge = v.on_commit(round, series_index, commitment, rng)?;
            chan.send(&Message::Challenge(challenge))?;
            let (r, response) = match recv_or_abort(chan)? {
                Message::Response { round, response } => (round, response),
                m => {
                    return Err(SessionError::Unexpected(format!(
                        "{:?} instead of RESPONSE",
                        m.msg_type()
                    )))
                }
            };
            let t = v.on_response(r, response)?;
            if let Some(log) = log.as_deref_mut() {
                log.append(t);
            }
            chan.send(&Message::RoundResult {
                round: t.round,
                verdict: t.verdict,
            })?;
        }
        Ok(())
    })();
    match res {
        Ok(()) => {
            let accepted = v.rounds_accepted();
            let result = v.finish();
            let _ = chan.send(&Message::SessionResult {
                accepted: result.is_accept(),
                rounds: policy.rounds,
                rounds_accepted: accepted,
            });
            result
        }
        Err(e) => {
            if !matches!(e, SessionError::PeerAbort { .. } | SessionError::Channel(_)) {
                let _ = chan.send(&Message::Abort {
                    reason: e.abort_reason(),
                    detail: e.to_string(),
                });
            }
            SessionResult {
                outcome: e.into_outcome(),
                transcripts: v.finish().transcripts,
            }
        }
    }
}

/// Prover side over a channel. The verifier's policy arrives in HELLO.
pub fn run_prover<C: Channel + ?Sized>(
    chan: &mut C,
    prover: &mut dyn Prover,
    rng: &mut dyn RngCore,
) -> SessionResult {
    let mut transcripts = Vec::new();
    let res = (|| -> Result<Outcome, SessionError> {
        let (scheme, mode, rounds) = match recv_or_abort(chan)? {
            Message::Hello {
                scheme,
                mode,
                rounds,
            } => (scheme, mode, rounds),
            m => {
                return Err(SessionError::Unexpected(format!(
                    "{:?} instead of HELLO",
                    m.msg_type()
                )))
            }
        };
        if scheme != prover.scheme() {
            return Err(SessionError::SchemeMismatch {
                local: prover.scheme(),
                peer: scheme,
            });
        }
        for round in 1..=rounds {
            let c = prover.commit(round, mode, rng)?;
            chan.send(&Message::Commit {
                round,
                series_index: c.series_index,
                commitment: c.commitment.clone(),
            })?;
            let challenge = match recv_or_abort(chan)? {
                Message::Challenge(ch) => ch,
                m => {
                    return Err(SessionError::Unexpected(format!(
                        "{:?} instead of CHALLENGE",
                        m.msg_type()
                    )))
                }
            };
            let response = prover.respond(challenge)?;
            chan.send(&Message::Response {
                round,
                response: response.clone(),
            })?;
            let verdict = match recv_or_abort(chan)? {
                Message::RoundResult { round: r, verdict } if r == round => verdict,
                m => {
                    return Err(SessionError::Unexpected(format!(
                        "{:?} instead of ROUND_RESULT",
                        m.msg_type()
                    )))
                }
            };
            transcripts.push(RoundTranscript {
                scheme,
                round,
                series_index: c.series_index,
                commitment: c.commitment,
                challenge,
                response,
                verdict,
            });
        }
        match recv_or_abort(chan)? {
            Message::SessionResult { accepted: true, .. } => Ok(Outcome::Accept),
            Message::SessionResult {
                accepted: false, ..
            } => Ok(Outcome::Reject),
            m => Err(SessionError::Unexpected(format!(
                "{:?} instead of SESSION_RESULT",
                m.msg_type()
            ))),
        }
    })();
    let outcome = res.unwrap_or_else(|e| {
        if !matches!(e, SessionError::PeerAbort { .. } | SessionError::Channel(_)) {
            let _ = chan.send(&Message::Abort {
                reason: e.abort_reason(),
                detail: e.to_string(),
            });
        }
        e.into_outcome()
    });
    SessionResult {
        outcome,
        transcripts,
    }
}

/// Live verdict of a transcript sequence, as a verifier would compute it.
pub fn verdict_of(transcripts: &[RoundTranscript], rounds: u32) -> Outcome {
    if transcripts.len() == rounds as usize
        && transcripts.iter().all(|t| t.verdict == Verdict::Accept)
    {
        Outcome::Accept
    } else {
        Outcome::Reject
    }
}
