//! Three-move identification rounds: the prover commits to a randomized
//! ordering, the verifier flips a challenge bit, the prover answers.
//!
//! Two schemes are provided:
//!
//! * [`scheme_a`]: the secret is a permutation `pi`; the public key is a
//!   public permutation `Pi` and two byte vectors `B` and `C = sigma(B)`
//!   with `sigma = pi Pi pi^-1`.
//! * [`scheme_b`]: the secret is `X = SHA-512(password)`; the public key is
//!   a degree-64 permutation of order at least 32 and the 32-entry series of
//!   XOR difference vectors of `X` under its powers.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::fingerprint::{DiffVector, FingerprintError, WeightVector};
use crate::perm::{PermError, Permutation};

pub mod cheat;
pub mod scheme_a;
pub mod scheme_b;

pub use scheme_a::{KeyPairA, ProverA, PublicKeyA, SecretKeyA};
pub use scheme_b::{KeyPairB, ProverB, PublicKeyB, SecretKeyB};

/// Default number of rounds per session; soundness error `2^-80`.
pub const DEFAULT_ROUNDS: u32 = 80;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("challenge must be 0 or 1, got {0}")]
    UnknownChallenge(u8),
    #[error("respond called without a pending commitment")]
    NotCommitted,
    #[error("password must not be empty")]
    EmptyPassword,
    #[error("public permutation must have degree {expected}, got {actual}")]
    Degree { expected: usize, actual: usize },
    #[error("public permutation has order {0}, need at least {min}", min = scheme_b::MIN_ORDER)]
    OrderTooSmall(String),
    #[error("series index {0} outside 1..=32")]
    SeriesIndex(u32),
    #[error("round index must be at least 1")]
    ZeroRound,
    #[error("key does not belong to scheme {0}")]
    WrongScheme(Scheme),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    A,
    B,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::A => "A",
            Scheme::B => "B",
        })
    }
}

/// How Scheme A commits to the randomized ordering `B' = R(B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CommitMode {
    /// Only `diff_sum(B')` is sent.
    #[default]
    Scalar,
    /// `B'` itself is sent.
    FullVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Challenge {
    Zero,
    One,
}

impl Challenge {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        if rng.next_u32() & 1 == 0 {
            Challenge::Zero
        } else {
            Challenge::One
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Challenge::Zero => 0,
            Challenge::One => 1,
        }
    }
}

impl TryFrom<u8> for Challenge {
    type Error = ProtocolError;

    fn try_from(b: u8) -> Result<Self, Self::Error> {
        match b {
            0 => Ok(Challenge::Zero),
            1 => Ok(Challenge::One),
            other => Err(ProtocolError::UnknownChallenge(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Commitment {
    /// Scheme A, scalar mode.
    Sum(u64),
    /// Scheme A, full-vector mode.
    Ordering(WeightVector),
    /// Scheme B.
    Diff(DiffVector),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Perm(Permutation),
    Bytes(WeightVector),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// Recomputed fingerprint differs from the commitment.
    Mismatch = 1,
    ResponseKind = 2,
    CommitmentKind = 3,
    /// Degree, length or width does not match the public key.
    Shape = 4,
    SeriesIndex = 5,
}

impl RejectReason {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => RejectReason::Mismatch,
            2 => RejectReason::ResponseKind,
            3 => RejectReason::CommitmentKind,
            4 => RejectReason::Shape,
            5 => RejectReason::SeriesIndex,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("accept"),
            Verdict::Reject(r) => write!(f, "reject({r:?})"),
        }
    }
}

/// Everything exchanged in one round, plus the verifier's decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTranscript {
    pub scheme: Scheme,
    pub round: u32,
    /// Scheme B only: which power of the public permutation was used.
    pub series_index: Option<u32>,
    pub commitment: Commitment,
    pub challenge: Challenge,
    pub response: Response,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionPolicy {
    pub rounds: u32,
    pub mode: CommitMode,
}

impl Default for SessionPolicy {
    fn default() -> Self {
        SessionPolicy {
            rounds: DEFAULT_ROUNDS,
            mode: CommitMode::Scalar,
        }
    }
}

impl SessionPolicy {
    pub fn with_rounds(rounds: u32) -> Self {
        SessionPolicy {
            rounds: rounds.max(1),
            ..Default::default()
        }
    }
}

/// Public key of either scheme; all a verifier ever needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublicKey {
    A(PublicKeyA),
    B(PublicKeyB),
}

impl PublicKey {
    pub fn scheme(&self) -> Scheme {
        match self {
            PublicKey::A(_) => Scheme::A,
            PublicKey::B(_) => Scheme::B,
        }
    }

    /// Checks a complete round against this key.
    pub fn verify(
        &self,
        series_index: Option<u32>,
        commitment: &Commitment,
        challenge: Challenge,
        response: &Response,
    ) -> Verdict {
        match self {
            PublicKey::A(pk) => {
                if series_index.is_some() {
                    return Verdict::Reject(RejectReason::SeriesIndex);
                }
                scheme_a::verifier_check_a(pk, commitment, challenge, response)
            }
            PublicKey::B(pk) => match series_index {
                Some(i) => scheme_b::verifier_check_b(pk, i, commitment, challenge, response),
                None => Verdict::Reject(RejectReason::SeriesIndex),
            },
        }
    }

    /// Re-runs verification over a recorded round, ignoring its stored verdict.
    pub fn reverify(&self, t: &RoundTranscript) -> Verdict {
        if t.scheme != self.scheme() {
            return Verdict::Reject(RejectReason::CommitmentKind);
        }
        self.verify(t.series_index, &t.commitment, t.challenge, &t.response)
    }
}

/// What the prover sends in the first move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitMessage {
    pub series_index: Option<u32>,
    pub commitment: Commitment,
}

/// The prover's side of a round, honest or not.
pub trait Prover: Send {
    fn scheme(&self) -> Scheme;

    fn commit(
        &mut self,
        round: u32,
        mode: CommitMode,
        rng: &mut dyn RngCore,
    ) -> Result<CommitMessage, ProtocolError>;

    fn respond(&mut self, challenge: Challenge) -> Result<Response, ProtocolError>;
}
