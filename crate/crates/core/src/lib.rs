//! Identification protocols keyed by permutations.
//!
//! A secret permutation reorders a public vector of vertex weights; the
//! public evidence is a fingerprint of the resulting cyclic ordering (a sum
//! of neighbour differences, a XOR difference vector, a concatenated label
//! string, or a sum of 2x2 matrix products). Authentication is the usual
//! commit / challenge-bit / response game repeated for many rounds.
//!
//! * [`perm`]: permutation arithmetic and its action on vectors
//! * [`fingerprint`]: the fingerprints and their series under powers
//! * [`protocol`]: both schemes as prover/verifier state machines
//! * [`session`]: multi-round sessions over a message channel
//! * [`wire`]: frames, key files, transcript logs, TCP transport
//! * [`analysis`]: counting formulas, parameter sizing, brute-force attacks

pub mod analysis;
pub mod fingerprint;
pub mod perm;
pub mod protocol;
pub mod session;
pub mod wire;

pub use fingerprint::{diff_sum, diff_vector_xor, DiffVector, Series, SeriesKind, WeightVector};
pub use perm::Permutation;
pub use protocol::{Challenge, CommitMode, PublicKey, Scheme, SessionPolicy, Verdict};
