//! Conjugation scheme over byte vectors.
//!
//! Key generation draws a byte string `b`, a secret permutation `pi` and a
//! public permutation `Pi`, sets `sigma = pi Pi pi^-1`, and publishes
//! `B = pi(b)` and `C = sigma(B)` together with `Pi`.
//!
//! A round commits to `B' = R(B)` for a fresh random `R`. Challenge 0 is
//! answered with `R`; challenge 1 with `tau = R sigma^-1`, which maps `C`
//! onto the same ordering because `tau(C) = R(sigma^-1(sigma(B))) = R(B)`.

use rand::{Rng, RngCore};

use super::{
    Challenge, CommitMessage, CommitMode, Commitment, ProtocolError, Prover, RejectReason,
    Response, Scheme, Verdict,
};
use crate::fingerprint::{diff_sum, WeightVector};
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKeyA {
    pub pi_pub: Permutation,
    pub b: WeightVector,
    pub c: WeightVector,
}

impl PublicKeyA {
    pub fn degree(&self) -> usize {
        self.b.len()
    }

    pub fn width_bits(&self) -> u32 {
        self.b.width_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKeyA {
    pub pi: Permutation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPairA {
    pub secret: SecretKeyA,
    pub public: PublicKeyA,
}

impl KeyPairA {
    /// Builds the key pair from explicit components.
    pub fn from_parts(
        b: &WeightVector,
        pi: Permutation,
        pi_pub: Permutation,
    ) -> Result<Self, ProtocolError> {
        let sigma = conjugate(&pi, &pi_pub)?;
        let big_b = b.permuted(&pi)?;
        let c = big_b.permuted(&sigma)?;
        Ok(KeyPairA {
            secret: SecretKeyA { pi },
            public: PublicKeyA {
                pi_pub,
                b: big_b,
                c,
            },
        })
    }

    /// Pairs a stored secret with its public key, checking degrees.
    pub fn assemble(secret: SecretKeyA, public: PublicKeyA) -> Result<Self, ProtocolError> {
        if secret.pi.degree() != public.degree() || public.pi_pub.degree() != public.degree() {
            return Err(ProtocolError::Degree {
                expected: public.degree(),
                actual: secret.pi.degree(),
            });
        }
        Ok(KeyPairA { secret, public })
    }

    /// `sigma = pi Pi pi^-1`, recomputed from the secret.
    pub fn sigma(&self) -> Permutation {
        conjugate(&self.secret.pi, &self.public.pi_pub).expect("degrees checked at construction")
    }

    /// True when `C = sigma(B)` holds for the stored secret.
    pub fn is_consistent(&self) -> bool {
        self.public.b.permuted(&self.sigma()).ok().as_ref() == Some(&self.public.c)
    }
}

fn conjugate(pi: &Permutation, pi_pub: &Permutation) -> Result<Permutation, ProtocolError> {
    Ok(pi.compose(pi_pub)?.compose(&pi.inverse())?)
}

pub fn keygen_a<R: Rng + ?Sized>(
    n: usize,
    width_bits: u32,
    rng: &mut R,
) -> Result<KeyPairA, ProtocolError> {
    if n < 2 {
        return Err(ProtocolError::Degree {
            expected: 2,
            actual: n,
        });
    }
    let b = WeightVector::random(n, width_bits, rng)?;
    let pi = Permutation::random(n, rng)?;
    let pi_pub = Permutation::random(n, rng)?;
    KeyPairA::from_parts(&b, pi, pi_pub)
}

fn commitment_for(ordering: WeightVector, mode: CommitMode) -> Commitment {
    match mode {
        CommitMode::Scalar => Commitment::Sum(diff_sum(&ordering)),
        CommitMode::FullVector => Commitment::Ordering(ordering),
    }
}

/// Draws `R` and commits to `R(B)`. Returns the prover's state `R`.
pub fn prover_commit_a<R: Rng + ?Sized>(
    public: &PublicKeyA,
    mode: CommitMode,
    rng: &mut R,
) -> Result<(Permutation, Commitment), ProtocolError> {
    let r = Permutation::random(public.degree(), rng)?;
    let commitment = commit_with(public, &r, mode)?;
    Ok((r, commitment))
}

/// Commitment for a given `R`; the verifier's own recomputation on challenge 0.
pub fn commit_with(
    public: &PublicKeyA,
    r: &Permutation,
    mode: CommitMode,
) -> Result<Commitment, ProtocolError> {
    Ok(commitment_for(public.b.permuted(r)?, mode))
}

pub fn prover_respond_a(
    kp: &KeyPairA,
    r: &Permutation,
    challenge: Challenge,
) -> Result<Permutation, ProtocolError> {
    match challenge {
        Challenge::Zero => Ok(r.clone()),
        Challenge::One => Ok(r.compose(&kp.sigma().inverse())?),
    }
}

/// Challenge 0 recomputes the commitment from `response(B)`, challenge 1
/// from `response(C)`.
pub fn verifier_check_a(
    public: &PublicKeyA,
    commitment: &Commitment,
    challenge: Challenge,
    response: &Response,
) -> Verdict {
    let Response::Perm(resp) = response else {
        return Verdict::Reject(RejectReason::ResponseKind);
    };
    if resp.degree() != public.degree() {
        return Verdict::Reject(RejectReason::Shape);
    }
    let source = match challenge {
        Challenge::Zero => &public.b,
        Challenge::One => &public.c,
    };
    let ordering = source.permuted(resp).expect("degree checked above");
    let ok = match commitment {
        Commitment::Sum(s) => diff_sum(&ordering) == *s,
        Commitment::Ordering(v) => {
            if v.len() != ordering.len() || v.width_bits() != ordering.width_bits() {
                return Verdict::Reject(RejectReason::Shape);
            }
            *v == ordering
        }
        Commitment::Diff(_) => return Verdict::Reject(RejectReason::CommitmentKind),
    };
    if ok {
        Verdict::Accept
    } else {
        Verdict::Reject(RejectReason::Mismatch)
    }
}

/// Honest Scheme A prover.
pub struct ProverA {
    key: KeyPairA,
    sigma_inv: Permutation,
    pending: Option<Permutation>,
}

impl ProverA {
    pub fn new(key: KeyPairA) -> Self {
        let sigma_inv = key.sigma().inverse();
        ProverA {
            key,
            sigma_inv,
            pending: None,
        }
    }
}

impl Prover for ProverA {
    fn scheme(&self) -> Scheme {
        Scheme::A
    }

    fn commit(
        &mut self,
        _round: u32,
        mode: CommitMode,
        rng: &mut dyn RngCore,
    ) -> Result<CommitMessage, ProtocolError> {
        let (r, commitment) = prover_commit_a(&self.key.public, mode, rng)?;
        self.pending = Some(r);
        Ok(CommitMessage {
            series_index: None,
            commitment,
        })
    }

    fn respond(&mut self, challenge: Challenge) -> Result<Response, ProtocolError> {
        let r = self.pending.take().ok_or(ProtocolError::NotCommitted)?;
        let resp = match challenge {
            Challenge::Zero => r,
            Challenge::One => r.compose(&self.sigma_inv)?,
        };
        Ok(Response::Perm(resp))
    }
}
