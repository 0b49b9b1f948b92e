#![allow(dead_code)]

use permauth::perm::Permutation;
use permauth::protocol::{
    Challenge, CommitMode, Commitment, RejectReason, Response, Scheme, Verdict,
};
use permauth::wire::{AbortReason, Message};
use permauth::{DiffVector, WeightVector};
use rand::Rng;

pub fn random_vector<R: Rng>(rng: &mut R) -> WeightVector {
    let width = [8, 16, 24, 32][rng.random_range(0..4)];
    let n = rng.random_range(2..80);
    WeightVector::random(n, width, rng).unwrap()
}

pub fn random_message<R: Rng>(rng: &mut R) -> Message {
    let round = rng.random_range(1..=u32::MAX);
    match rng.random_range(0..7) {
        0 => Message::Hello {
            scheme: if rng.random() { Scheme::A } else { Scheme::B },
            mode: if rng.random() {
                CommitMode::Scalar
            } else {
                CommitMode::FullVector
            },
            rounds: rng.random_range(1..=u32::MAX),
        },
        1 => {
            let commitment = match rng.random_range(0..3) {
                0 => Commitment::Sum(rng.random()),
                1 => Commitment::Ordering(random_vector(rng)),
                _ => {
                    let v = random_vector(rng);
                    Commitment::Diff(
                        DiffVector::new(v.width_bits(), v.as_slice().to_vec()).unwrap(),
                    )
                }
            };
            Message::Commit {
                round,
                series_index: if rng.random() {
                    None
                } else {
                    Some(rng.random_range(1..=u16::MAX as u32))
                },
                commitment,
            }
        }
        2 => Message::Challenge(if rng.random() {
            Challenge::Zero
        } else {
            Challenge::One
        }),
        3 => Message::Response {
            round,
            response: if rng.random() {
                Response::Perm(Permutation::random(rng.random_range(1..200), rng).unwrap())
            } else {
                Response::Bytes(random_vector(rng))
            },
        },
        4 => Message::RoundResult {
            round,
            verdict: if rng.random() {
                Verdict::Accept
            } else {
                Verdict::Reject(RejectReason::from_code(rng.random_range(1..=5)).unwrap())
            },
        },
        5 => Message::SessionResult {
            accepted: rng.random(),
            rounds: rng.random(),
            rounds_accepted: rng.random(),
        },
        _ => Message::Abort {
            reason: [
                AbortReason::Decode,
                AbortReason::UnexpectedMessage,
                AbortReason::SchemeMismatch,
                AbortReason::Timeout,
                AbortReason::Protocol,
                AbortReason::Transport,
                AbortReason::Other,
            ][rng.random_range(0..7)],
            detail: (0..rng.random_range(0..40))
                .map(|_| rng.random_range('a'..='z'))
                .collect(),
        },
    }
}

/// All 24 permutations of degree 4, in a fixed order.
pub fn s4() -> Vec<Permutation> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if let Ok(p) = Permutation::from_mapping([a, b, c, d]) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Pearson statistic of `counts` against the uniform distribution.
pub fn chi_square(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// Upper 0.001 critical value of chi-square with 23 degrees of freedom.
pub const CHI2_23_P001: f64 = 49.728;
