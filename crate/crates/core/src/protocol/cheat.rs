//! Provers that do not hold the secret. They exist to measure soundness.
//!
//! A one-sided cheater prepares a commitment it can open for exactly one
//! challenge value, so it survives each round with probability 1/2.

use rand::RngCore;

use super::scheme_a::{commit_with, PublicKeyA};
use super::scheme_b::{fingerprint_at, series_index, PublicKeyB, DEGREE};
use super::{
    Challenge, CommitMessage, CommitMode, Commitment, ProtocolError, Prover, Response, Scheme,
};
use crate::fingerprint::WeightVector;
use crate::perm::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheatStrategy {
    /// Commit honestly to a random ordering; can only answer challenge 0.
    GuessZero,
    /// Commit to an ordering derived from the public `C` (Scheme A) or
    /// shifted by `alpha_i` (Scheme B); can only answer challenge 1.
    GuessOne,
}

/// Scheme A impostor holding only `(Pi, B, C)`.
pub struct CheaterA {
    public: PublicKeyA,
    strategy: CheatStrategy,
    pending: Option<Permutation>,
}

impl CheaterA {
    pub fn new(public: PublicKeyA, strategy: CheatStrategy) -> Self {
        CheaterA {
            public,
            strategy,
            pending: None,
        }
    }
}

impl Prover for CheaterA {
    fn scheme(&self) -> Scheme {
        Scheme::A
    }

    fn commit(
        &mut self,
        _round: u32,
        mode: CommitMode,
        rng: &mut dyn RngCore,
    ) -> Result<CommitMessage, ProtocolError> {
        let z = Permutation::random(self.public.degree(), rng)?;
        let commitment = match self.strategy {
            CheatStrategy::GuessZero => commit_with(&self.public, &z, mode)?,
            CheatStrategy::GuessOne => {
                let ordering = self.public.c.permuted(&z)?;
                match mode {
                    CommitMode::Scalar => Commitment::Sum(crate::fingerprint::diff_sum(&ordering)),
                    CommitMode::FullVector => Commitment::Ordering(ordering),
                }
            }
        };
        self.pending = Some(z);
        Ok(CommitMessage {
            series_index: None,
            commitment,
        })
    }

    fn respond(&mut self, _challenge: Challenge) -> Result<Response, ProtocolError> {
        let z = self.pending.take().ok_or(ProtocolError::NotCommitted)?;
        Ok(Response::Perm(z))
    }
}

/// Scheme B impostor holding only `(pi, alpha)`.
pub struct CheaterB {
    public: PublicKeyB,
    strategy: CheatStrategy,
    pending: Option<WeightVector>,
}

impl CheaterB {
    pub fn new(public: PublicKeyB, strategy: CheatStrategy) -> Self {
        CheaterB {
            public,
            strategy,
            pending: None,
        }
    }
}

impl Prover for CheaterB {
    fn scheme(&self) -> Scheme {
        Scheme::B
    }

    fn commit(
        &mut self,
        round: u32,
        _mode: CommitMode,
        rng: &mut dyn RngCore,
    ) -> Result<CommitMessage, ProtocolError> {
        let i = series_index(round)?;
        let z = WeightVector::random(DEGREE, 8, rng)?;
        let mut gamma = fingerprint_at(&self.public, i, &z)?;
        if self.strategy == CheatStrategy::GuessOne {
            let alpha = self.public.alpha(i).expect("index in 1..=32");
            gamma = gamma.xor(alpha)?;
        }
        self.pending = Some(z);
        Ok(CommitMessage {
            series_index: Some(i),
            commitment: Commitment::Diff(gamma),
        })
    }

    fn respond(&mut self, _challenge: Challenge) -> Result<Response, ProtocolError> {
        let z = self.pending.take().ok_or(ProtocolError::NotCommitted)?;
        Ok(Response::Bytes(z))
    }
}

/// A vector `Y` with `dx(pi^i(Y)) = alpha_i`, computed from public data
/// alone by integrating `alpha_i` and undoing `pi^i`.
///
/// Any such `Y` answers challenge 1 at index `i` exactly as `X` does, so a
/// prover holding the 32 vectors passes every Scheme B round. This is a
/// structural weakness of the XOR construction.
pub fn equivalent_secret_b(
    public: &PublicKeyB,
    index: u32,
    start: u8,
) -> Result<WeightVector, ProtocolError> {
    let alpha = public
        .alpha(index)
        .ok_or(ProtocolError::SeriesIndex(index))?;
    let w = alpha.integrate(u32::from(start));
    let undo = public.pi.power(u64::from(index)).inverse();
    Ok(w.permuted(&undo)?)
}

/// Scheme B prover that uses [`equivalent_secret_b`] instead of `X`.
pub struct ForgerB {
    public: PublicKeyB,
    pending: Option<(WeightVector, u32)>,
}

impl ForgerB {
    pub fn new(public: PublicKeyB) -> Self {
        ForgerB {
            public,
            pending: None,
        }
    }
}

impl Prover for ForgerB {
    fn scheme(&self) -> Scheme {
        Scheme::B
    }

    fn commit(
        &mut self,
        round: u32,
        _mode: CommitMode,
        rng: &mut dyn RngCore,
    ) -> Result<CommitMessage, ProtocolError> {
        let i = series_index(round)?;
        let r = WeightVector::random(DEGREE, 8, rng)?;
        let gamma = fingerprint_at(&self.public, i, &r)?;
        self.pending = Some((r, i));
        Ok(CommitMessage {
            series_index: Some(i),
            commitment: Commitment::Diff(gamma),
        })
    }

    fn respond(&mut self, challenge: Challenge) -> Result<Response, ProtocolError> {
        let (r, i) = self.pending.take().ok_or(ProtocolError::NotCommitted)?;
        Ok(Response::Bytes(match challenge {
            Challenge::Zero => r,
            Challenge::One => r.xor(&equivalent_secret_b(&self.public, i, 0)?)?,
        }))
    }
}
