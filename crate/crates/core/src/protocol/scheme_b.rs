//! Password-derived XOR scheme.
//!
//! The secret is the 64-byte string `X = SHA-512(password)`; nothing is
//! stored, the prover re-derives `X` at login. The public key is a
//! degree-64 permutation `pi` of order at least 32 together with
//! `alpha_i = dx(pi^i(X))` for `i = 1..=32`, where `dx` is the cyclic XOR
//! difference vector.
//!
//! Round `k` uses series index `i = ((k - 1) mod 32) + 1`. The prover draws
//! 64 random bytes `R` and commits to `gamma = dx(pi^i(R))`. Challenge 0 is
//! answered with `R`, challenge 1 with `R ^ X`; since `dx` and the
//! permutation action are both XOR-linear, `dx(pi^i(R ^ X)) = gamma ^ alpha_i`.

use num_bigint::BigUint;
use rand::{Rng, RngCore};
use sha2::{Digest, Sha512};
use zeroize::Zeroize;

use super::{
    Challenge, CommitMessage, CommitMode, Commitment, ProtocolError, Prover, RejectReason,
    Response, Scheme, Verdict,
};
use crate::fingerprint::{diff_vector_xor, series, DiffVector, Series, SeriesKind, WeightVector};
use crate::perm::Permutation;

pub const DEGREE: usize = 64;
pub const SERIES_LEN: u32 = 32;
pub const MIN_ORDER: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKeyB {
    pub pi: Permutation,
    /// `alpha[i - 1]` is the entry for exponent `i`.
    pub alpha: Vec<DiffVector>,
}

impl PublicKeyB {
    pub fn alpha(&self, index: u32) -> Option<&DiffVector> {
        let i = usize::try_from(index).ok()?.checked_sub(1)?;
        self.alpha.get(i)
    }
}

/// The password-derived secret. Zeroed on drop.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKeyB {
    x: WeightVector,
}

impl std::fmt::Debug for SecretKeyB {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecretKeyB(..)")
    }
}

impl SecretKeyB {
    pub fn from_password(password: &[u8]) -> Result<Self, ProtocolError> {
        if password.is_empty() {
            return Err(ProtocolError::EmptyPassword);
        }
        let mut digest = Sha512::digest(password);
        let x = WeightVector::from_bytes_u8(&digest)?;
        digest.as_mut_slice().zeroize();
        Ok(SecretKeyB { x })
    }

    /// Wraps an explicit 64-byte secret (cached key files, tests).
    pub fn from_vector(x: WeightVector) -> Result<Self, ProtocolError> {
        if x.len() != DEGREE || x.width_bits() != 8 {
            return Err(ProtocolError::Degree {
                expected: DEGREE,
                actual: x.len(),
            });
        }
        Ok(SecretKeyB { x })
    }

    pub fn x(&self) -> &WeightVector {
        &self.x
    }
}

impl Drop for SecretKeyB {
    fn drop(&mut self) {
        self.x.values_mut().zeroize();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPairB {
    pub secret: SecretKeyB,
    pub public: PublicKeyB,
}

/// Draws degree-64 permutations until one has order at least 32.
/// Returns the permutation and the number of draws.
pub fn draw_public_permutation<R: Rng + ?Sized>(rng: &mut R) -> (Permutation, u32) {
    let min = BigUint::from(MIN_ORDER);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let p = Permutation::random(DEGREE, rng).expect("degree 64 is valid");
        if p.order() >= min {
            return (p, attempts);
        }
    }
}

pub fn public_key_for(secret: &SecretKeyB, pi: Permutation) -> Result<PublicKeyB, ProtocolError> {
    if pi.degree() != DEGREE {
        return Err(ProtocolError::Degree {
            expected: DEGREE,
            actual: pi.degree(),
        });
    }
    let order = pi.order();
    if order < BigUint::from(MIN_ORDER) {
        return Err(ProtocolError::OrderTooSmall(order.to_string()));
    }
    let Series::XorVector(alpha) =
        series(&secret.x, &pi, SERIES_LEN as usize, SeriesKind::XorVector)?
    else {
        unreachable!("xor kind requested")
    };
    Ok(PublicKeyB { pi, alpha })
}

pub fn keygen_b<R: Rng + ?Sized>(password: &[u8], rng: &mut R) -> Result<KeyPairB, ProtocolError> {
    let secret = SecretKeyB::from_password(password)?;
    let (pi, _) = draw_public_permutation(rng);
    let public = public_key_for(&secret, pi)?;
    Ok(KeyPairB { secret, public })
}

/// Re-derives the key pair from the password and an already published
/// permutation.
pub fn keygen_b_with_pi(password: &[u8], pi: Permutation) -> Result<KeyPairB, ProtocolError> {
    let secret = SecretKeyB::from_password(password)?;
    let public = public_key_for(&secret, pi)?;
    Ok(KeyPairB { secret, public })
}

pub fn series_index(round: u32) -> Result<u32, ProtocolError> {
    if round == 0 {
        return Err(ProtocolError::ZeroRound);
    }
    Ok((round - 1) % SERIES_LEN + 1)
}

/// `dx(pi^i(v))`.
pub fn fingerprint_at(
    public: &PublicKeyB,
    index: u32,
    v: &WeightVector,
) -> Result<DiffVector, ProtocolError> {
    let p = public.pi.power(u64::from(index));
    Ok(diff_vector_xor(&v.permuted(&p)?))
}

pub fn prover_commit_b<R: Rng + ?Sized>(
    public: &PublicKeyB,
    round: u32,
    rng: &mut R,
) -> Result<(WeightVector, u32, DiffVector), ProtocolError> {
    let i = series_index(round)?;
    let r = WeightVector::random(DEGREE, 8, rng)?;
    let gamma = fingerprint_at(public, i, &r)?;
    Ok((r, i, gamma))
}

pub fn prover_respond_b(
    kp: &KeyPairB,
    r: &WeightVector,
    challenge: Challenge,
) -> Result<WeightVector, ProtocolError> {
    match challenge {
        Challenge::Zero => Ok(r.clone()),
        Challenge::One => Ok(r.xor(&kp.secret.x)?),
    }
}

/// Uses only the public key: `X` never enters verification.
pub fn verifier_check_b(
    public: &PublicKeyB,
    index: u32,
    commitment: &Commitment,
    challenge: Challenge,
    response: &Response,
) -> Verdict {
    let Commitment::Diff(gamma) = commitment else {
        return Verdict::Reject(RejectReason::CommitmentKind);
    };
    let Response::Bytes(resp) = response else {
        return Verdict::Reject(RejectReason::ResponseKind);
    };
    let Some(alpha) = public.alpha(index) else {
        return Verdict::Reject(RejectReason::SeriesIndex);
    };
    if resp.len() != DEGREE
        || resp.width_bits() != 8
        || gamma.len() != DEGREE
        || gamma.width_bits() != 8
    {
        return Verdict::Reject(RejectReason::Shape);
    }
    let got = fingerprint_at(public, index, resp).expect("shape checked above");
    let expected = match challenge {
        Challenge::Zero => gamma.clone(),
        Challenge::One => gamma.xor(alpha).expect("shape checked above"),
    };
    if got == expected {
        Verdict::Accept
    } else {
        Verdict::Reject(RejectReason::Mismatch)
    }
}

/// Honest Scheme B prover.
pub struct ProverB {
    key: KeyPairB,
    pending: Option<WeightVector>,
}

impl ProverB {
    pub fn new(key: KeyPairB) -> Self {
        ProverB { key, pending: None }
    }
}

impl Drop for ProverB {
    fn drop(&mut self) {
        if let Some(r) = self.pending.as_mut() {
            r.values_mut().zeroize();
        }
    }
}

impl Prover for ProverB {
    fn scheme(&self) -> Scheme {
        Scheme::B
    }

    fn commit(
        &mut self,
        round: u32,
        _mode: CommitMode,
        rng: &mut dyn RngCore,
    ) -> Result<CommitMessage, ProtocolError> {
        let (r, i, gamma) = prover_commit_b(&self.key.public, round, rng)?;
        self.pending = Some(r);
        Ok(CommitMessage {
            series_index: Some(i),
            commitment: Commitment::Diff(gamma),
        })
    }

    fn respond(&mut self, challenge: Challenge) -> Result<Response, ProtocolError> {
        let r = self.pending.take().ok_or(ProtocolError::NotCommitted)?;
        Ok(Response::Bytes(prover_respond_b(&self.key, &r, challenge)?))
    }
}
