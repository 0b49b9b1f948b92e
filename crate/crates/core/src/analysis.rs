//! Counting arguments, parameter sizing, and desk-scale attacks.
//!
//! Counts are exact big integers; bit exponents are reported as `f64`,
//! which is plenty at these magnitudes.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::fingerprint::{series, FingerprintError, Series, SeriesKind, WeightVector};
use crate::perm::{PermError, Permutation};

/// Largest degree [`brute_force_recover`] will enumerate (`10! = 3,628,800`).
pub const MAX_BRUTE_FORCE_DEGREE: usize = 10;

/// Figures as originally quoted for the `n = 64` parameter set, printed
/// next to the recomputed values.
pub mod quoted {
    pub const KEYSPACE_BITS: f64 = 300.0;
    pub const PARTITION_BITS: f64 = 1600.0;
    pub const SERIES_LEN: u64 = 10;
    pub const TRANSMITTED_BITS: u64 = 300;
    pub const BIRTHDAY_BITS_EDGES: u32 = 22;
    pub const BIRTHDAY_BITS_LABELS: u32 = 24;
    pub const GRAPH_EXPONENT: i64 = -1952;
    pub const COMBINED_EXPONENT: i64 = -3968;
    pub const COMBINED_PROBABILITY: &str = "0.014176";
    pub const EXISTING_GRAPH_PROBABILITY: &str = "1/56960 bit = 1e-17088";
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("number of parts must be at least 1")]
    ZeroParts,
    #[error("degree {0} too small, need at least 2")]
    Degree(usize),
    #[error("brute force refused: degree {0} exceeds {MAX_BRUTE_FORCE_DEGREE} ({0}! candidates)")]
    TooLarge(usize),
    #[error("need at least one trial")]
    NoTrials,
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// Exact `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        // acc * (n-k+i) is divisible by i since acc = C(n-k+i-1, i-1)
        acc = acc * BigUint::from(n - k + i) / BigUint::from(i);
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `log2(x)` for a positive big integer, from its leading 64 bits.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return x.to_u64().expect("fits").to_f64().expect("finite").log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits");
    (top as f64).log2() + shift as f64
}

/// Ordered ways to write `p` as a sum of `q` positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionCount {
    pub p: u64,
    pub q: u64,
    pub count: BigUint,
    pub bit_length: u64,
}

pub fn n_partitions(p: u64, q: u64) -> Result<PartitionCount, AnalysisError> {
    if q == 0 {
        return Err(AnalysisError::ZeroParts);
    }
    let count = if p < q {
        BigUint::zero()
    } else {
        binomial(p - 1, q - 1)
    };
    let bit_length = count.bits();
    Ok(PartitionCount {
        p,
        q,
        count,
        bit_length,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterReport {
    pub n: usize,
    pub edge_count: u64,
    pub keyspace_bits: f64,
    pub weight_bits: u32,
    pub sum_bits: u32,
    pub series_length_required: u64,
    pub transmitted_bits: u64,
    pub birthday_weight_bits: u32,
}

pub fn edge_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// `log2(n!)` from the exact factorial.
pub fn keyspace_bits(n: usize) -> f64 {
    log2_big(&factorial(n as u64))
}

/// Series entries of `sum_bits` each needed to cover `keyspace_bits`.
pub fn series_length_required(keyspace_bits: f64, sum_bits: u32) -> u64 {
    if sum_bits == 0 {
        return 0;
    }
    (keyspace_bits / f64::from(sum_bits)).ceil() as u64
}

/// Weight width at which all `n(n-1)/2` edge values are likely distinct:
/// `ceil(2 log2(edges))`.
pub fn birthday_weight_bits(n: usize) -> u32 {
    let e = edge_count(n);
    if e <= 1 {
        return 0;
    }
    (2.0 * (e as f64).log2()).ceil() as u32
}

pub fn parameter_report(
    n: usize,
    weight_bits: u32,
    sum_bits: u32,
) -> Result<ParameterReport, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::Degree(n));
    }
    let keyspace_bits = keyspace_bits(n);
    let series_length_required = series_length_required(keyspace_bits, sum_bits);
    Ok(ParameterReport {
        n,
        edge_count: edge_count(n),
        keyspace_bits,
        weight_bits,
        sum_bits,
        series_length_required,
        transmitted_bits: series_length_required * u64::from(sum_bits),
        birthday_weight_bits: birthday_weight_bits(n),
    })
}

/// Log2 probabilities for random weighted edge sets, with distances of
/// `x_bits` bits and `A = N(2^x_bits - 1, n - 1)` partitions of a distance.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphProbabilityReport {
    pub n: usize,
    pub x_bits: u32,
    pub edges: u64,
    /// `log2 A`.
    pub partition_bits: f64,
    /// `log2(x^n / x^E)`: a random edge set is realised by vertex weights.
    pub graph_exponent: f64,
    /// `log2(A / x^E)`: a random edge set contains a partition of the distance.
    pub containment_exponent: f64,
    /// Both of the above.
    pub combined_exponent: f64,
    /// `log2(A / x^(E - n))`: a given graph already contains a partition.
    pub existing_graph_exponent: f64,
    /// Fewer edges than vertices' worth of freedom; the estimates say nothing.
    pub degenerate: bool,
}

pub fn graph_probability_report(
    n: usize,
    x_bits: u32,
) -> Result<GraphProbabilityReport, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::Degree(n));
    }
    let e = edge_count(n);
    let x = f64::from(x_bits);
    let distance = (BigUint::one() << x_bits) - BigUint::one();
    let a = n_partitions(distance.to_u64().unwrap_or(u64::MAX), n as u64 - 1)?;
    let partition_bits = log2_big(&a.count);
    let graph_exponent = (n as f64 - e as f64) * x;
    let containment_exponent = partition_bits - e as f64 * x;
    Ok(GraphProbabilityReport {
        n,
        x_bits,
        edges: e,
        partition_bits,
        graph_exponent,
        containment_exponent,
        combined_exponent: graph_exponent + containment_exponent,
        existing_graph_exponent: partition_bits + graph_exponent,
        degenerate: graph_exponent >= 0.0,
    })
}

#[derive(Debug, Clone)]
pub struct AttackResult {
    pub candidates: Vec<Permutation>,
    /// Permutations examined.
    pub trials: u64,
    pub elapsed: Duration,
}

/// Steps `v` to the next permutation in lexicographic order.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Every permutation whose series over `base` equals `observed`.
pub fn brute_force_recover(
    base: &WeightVector,
    observed: &Series,
) -> Result<AttackResult, AnalysisError> {
    let n = base.len();
    if n > MAX_BRUTE_FORCE_DEGREE {
        return Err(AnalysisError::TooLarge(n));
    }
    let len = observed.len();
    let kind = observed.kind();
    let start = Instant::now();
    let mut mapping: Vec<usize> = (0..n).collect();
    let mut candidates = Vec::new();
    let mut trials = 0;
    loop {
        trials += 1;
        let p = Permutation::from_mapping(mapping.iter().copied())?;
        if series(base, &p, len, kind)? == *observed {
            candidates.push(p);
        }
        if !next_permutation(&mut mapping) {
            break;
        }
    }
    Ok(AttackResult {
        candidates,
        trials,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CollisionReport {
    pub trials: u64,
    /// Pairs whose first difference sum agrees.
    pub scalar_collisions: u64,
    /// Pairs whose whole length-`L` series agrees.
    pub series_collisions: u64,
}

impl CollisionReport {
    pub fn scalar_rate(&self) -> f64 {
        self.scalar_collisions as f64 / self.trials.max(1) as f64
    }

    pub fn series_rate(&self) -> f64 {
        self.series_collisions as f64 / self.trials.max(1) as f64
    }
}

/// `(scalar collision, series collision)` for one pair over `base`.
pub fn pair_collides(
    base: &WeightVector,
    p: &Permutation,
    q: &Permutation,
    len: usize,
) -> Result<(bool, bool), AnalysisError> {
    let Series::IntSum(sp) = series(base, p, len, SeriesKind::IntSum)? else {
        unreachable!()
    };
    let Series::IntSum(sq) = series(base, q, len, SeriesKind::IntSum)? else {
        unreachable!()
    };
    Ok((sp[0] == sq[0], sp == sq))
}

/// Draws a fresh base of `weight_bits`-bit weights and a pair of distinct
/// permutations per trial, and counts agreeing difference-sum series.
pub fn collision_stats<R: Rng + ?Sized>(
    n: usize,
    weight_bits: u32,
    len: usize,
    trials: u64,
    rng: &mut R,
) -> Result<CollisionReport, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::Degree(n));
    }
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    let mut report = CollisionReport {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let base = WeightVector::random_bounded(n, weight_bits, rng)?;
        let p = Permutation::random(n, rng)?;
        let q = loop {
            let q = Permutation::random(n, rng)?;
            if q != p {
                break q;
            }
        };
        let (scalar, full) = pair_collides(&base, &p, &q, len)?;
        report.scalar_collisions += u64::from(scalar);
        report.series_collisions += u64::from(full);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// Counts compositions of `p` into `q` positive parts by recursion.
    fn compositions(p: u64, q: u64) -> u64 {
        match (p, q) {
            (0, 0) => 1,
            (_, 0) => 0,
            _ => (1..=p).map(|first| compositions(p - first, q - 1)).sum(),
        }
    }

    #[test]
    fn partition_examples() {
        assert_eq!(n_partitions(4, 2).unwrap().count, BigUint::from(3u32));
        assert_eq!(n_partitions(3, 2).unwrap().count, BigUint::from(2u32));
        for p in 1..30 {
            assert_eq!(n_partitions(p, 1).unwrap().count, BigUint::one());
        }
        assert!(n_partitions(2, 5).unwrap().count.is_zero());
        assert!(n_partitions(5, 0).is_err());
    }

    #[test]
    fn partitions_match_enumeration() {
        for p in 1..=12 {
            for q in 1..=p {
                let got = n_partitions(p, q).unwrap().count;
                assert_eq!(got, BigUint::from(compositions(p, q)), "N({p},{q})");
            }
        }
    }

    #[test]
    fn binomial_symmetry_and_pascal() {
        for n in 0..40u64 {
            for k in 0..=n {
                assert_eq!(binomial(n, k), binomial(n, n - k));
                if n > 0 && k > 0 && k < n {
                    assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
                }
            }
        }
        assert!(binomial(3, 4).is_zero());
    }

    #[test]
    fn large_partition_bit_length() {
        let a = n_partitions(1_073_741_823, 63).unwrap();
        let rel = (a.bit_length as f64 - 1600.0).abs() / 1600.0;
        assert!(rel <= 0.05, "bit length {}", a.bit_length);
    }

    #[test]
    fn n64_parameters() {
        let r = parameter_report(64, 24, 30).unwrap();
        assert_eq!(r.edge_count, 2016);
        assert!(
            (295.9..=296.1).contains(&r.keyspace_bits),
            "{}",
            r.keyspace_bits
        );
        assert_eq!(r.series_length_required, 10);
        assert_eq!(r.transmitted_bits, 300);
        assert_eq!(r.birthday_weight_bits, 22);
        assert_eq!(series_length_required(300.0, 30), 10);
    }

    #[test]
    fn keyspace_bits_bracketed_by_bit_length() {
        for n in 2..=128 {
            let bl = factorial(n as u64).bits() as f64;
            let k = keyspace_bits(n);
            assert!(bl - 1.0 <= k && k <= bl, "n={n}: {k} vs {bl}");
        }
    }

    #[test]
    fn log2_big_matches_small_values() {
        for x in [1u64, 2, 3, 1000, u64::MAX] {
            assert!((log2_big(&BigUint::from(x)) - (x as f64).log2()).abs() < 1e-9);
        }
        let big = BigUint::one() << 500u32;
        assert!((log2_big(&big) - 500.0).abs() < 1e-9);
    }

    #[test]
    fn graph_probability_n64() {
        let r = graph_probability_report(64, 30).unwrap();
        assert_eq!(r.graph_exponent, -1952.0 * 30.0);
        let combined_expected = r.partition_bits - 3968.0 * 30.0;
        assert!((r.combined_exponent - combined_expected).abs() < 1e-6);
        assert!(!r.degenerate);

        let small = graph_probability_report(2, 30).unwrap();
        assert_eq!(small.graph_exponent, 30.0);
        assert!(small.degenerate);
    }

    #[test]
    fn next_permutation_enumerates_all() {
        let mut v = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(v, vec![3, 2, 1, 0]);
    }

    #[test]
    fn brute_force_small() {
        let base = WeightVector::new(8, vec![5, 1, 9]).unwrap();
        let pi = Permutation::from_mapping([2, 0, 1]).unwrap();
        let observed = series(&base, &pi, 3, SeriesKind::IntSum).unwrap();
        let res = brute_force_recover(&base, &observed).unwrap();
        assert_eq!(res.trials, 6);
        assert!(res.candidates.contains(&pi));
        // at n = 3 every cyclic order has the same perimeter
        assert_eq!(res.candidates.len(), 6);

        let id = Permutation::identity(3).unwrap();
        let own = series(&base, &id, 2, SeriesKind::XorVector).unwrap();
        assert!(brute_force_recover(&base, &own)
            .unwrap()
            .candidates
            .contains(&id));
    }

    #[test]
    fn brute_force_refuses_large_degree() {
        let base = WeightVector::zeros(11, 8).unwrap();
        let s = Series::IntSum(vec![0]);
        assert!(matches!(
            brute_force_recover(&base, &s),
            Err(AnalysisError::TooLarge(11))
        ));
    }

    #[test]
    fn collision_controls() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let base = WeightVector::random(8, 24, &mut rng).unwrap();
        let p = Permutation::random(8, &mut rng).unwrap();
        assert_eq!(pair_collides(&base, &p, &p, 5).unwrap(), (true, true));

        let tiny = collision_stats(4, 2, 1, 2000, &mut rng).unwrap();
        assert!(tiny.series_rate() > 0.1, "{tiny:?}");
        assert_eq!(tiny.scalar_collisions, tiny.series_collisions);
    }

    #[test]
    fn longer_series_never_collide_more() {
        let rates: Vec<u64> = (1..=4)
            .map(|len| {
                let mut rng = ChaCha20Rng::seed_from_u64(77);
                collision_stats(6, 4, len, 3000, &mut rng)
                    .unwrap()
                    .series_collisions
            })
            .collect();
        assert!(rates.windows(2).all(|w| w[0] >= w[1]), "{rates:?}");
        assert!(rates[0] > 0);
    }
}
