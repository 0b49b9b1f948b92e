//! Permutations of `{0, .., n-1}` and their action on vectors.
//!
//! A permutation acts on a vector by *pulling*: `apply(p, v)[i] = v[p[i]]`,
//! i.e. slot `i` of the result is read from slot `p[i]` of the input.
//! Composition is defined so that the action is compatible with it:
//! `apply(compose(p, q), v) == apply(p, apply(q, v))`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use thiserror::Error;

/// Largest supported degree; indices are 16-bit on the wire.
pub const MAX_DEGREE: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("invalid degree {0} (must be in 1..={MAX_DEGREE})")]
    InvalidDegree(usize),
    #[error("mapping is not a bijection: index {0} out of range or repeated")]
    NotBijective(usize),
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("malformed permutation encoding: {0}")]
    Malformed(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<u16>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({:?})", self.mapping)
    }
}

impl Permutation {
    /// Validates `mapping` and wraps it.
    pub fn from_mapping<I>(mapping: I) -> Result<Self, PermError>
    where
        I: IntoIterator<Item = usize>,
    {
        let raw: Vec<usize> = mapping.into_iter().collect();
        let n = raw.len();
        if n == 0 || n > MAX_DEGREE {
            return Err(PermError::InvalidDegree(n));
        }
        let mut seen = vec![false; n];
        for &x in &raw {
            if x >= n || seen[x] {
                return Err(PermError::NotBijective(x));
            }
            seen[x] = true;
        }
        Ok(Permutation {
            mapping: raw.into_iter().map(|x| x as u16).collect(),
        })
    }

    pub fn identity(n: usize) -> Result<Self, PermError> {
        if n == 0 || n > MAX_DEGREE {
            return Err(PermError::InvalidDegree(n));
        }
        Ok(Permutation {
            mapping: (0..n).map(|i| i as u16).collect(),
        })
    }

    /// Draws a uniformly random permutation of degree `n` (Fisher-Yates).
    ///
    /// `gen_range` uses rejection sampling internally, so every swap index is
    /// unbiased and all `n!` outcomes are equally likely.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, PermError> {
        let mut p = Self::identity(n)?;
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            p.mapping.swap(i, j);
        }
        Ok(p)
    }

    /// A single `n`-cycle `i -> i+1 mod n`. Applying it rotates a vector left by one.
    pub fn rotation(n: usize) -> Result<Self, PermError> {
        Self::from_mapping((0..n).map(|i| (i + 1) % n.max(1)))
    }

    pub fn degree(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.mapping.iter().map(|&x| x as usize)
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.mapping[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.mapping
            .iter()
            .enumerate()
            .all(|(i, &x)| i == x as usize)
    }

    fn check_degree(&self, other: usize) -> Result<(), PermError> {
        if self.degree() != other {
            return Err(PermError::DegreeMismatch {
                left: self.degree(),
                right: other,
            });
        }
        Ok(())
    }

    /// `compose(p, q)` acts as "first `q`, then `p`".
    pub fn compose(&self, q: &Permutation) -> Result<Permutation, PermError> {
        self.check_degree(q.degree())?;
        Ok(Permutation {
            mapping: self
                .mapping
                .iter()
                .map(|&i| q.mapping[i as usize])
                .collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u16; self.degree()];
        for (i, &x) in self.mapping.iter().enumerate() {
            inv[x as usize] = i as u16;
        }
        Permutation { mapping: inv }
    }

    /// `result[i] = v[self[i]]`.
    pub fn apply<T: Clone>(&self, v: &[T]) -> Result<Vec<T>, PermError> {
        self.check_degree(v.len())?;
        Ok(self
            .mapping
            .iter()
            .map(|&i| v[i as usize].clone())
            .collect())
    }

    /// Cycle decomposition, each cycle listed from its smallest element.
    /// Fixed points are included as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.get(i);
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles().iter().map(Vec::len).collect()
    }

    /// Least `k >= 1` with `p^k = id`: the lcm of the cycle lengths.
    pub fn order(&self) -> BigUint {
        self.cycle_lengths()
            .into_iter()
            .fold(BigUint::one(), |acc, len| acc.lcm(&BigUint::from(len)))
    }

    /// `p^k`, computed per cycle by stepping `k mod len` positions.
    pub fn power(&self, k: u64) -> Permutation {
        self.power_big(&BigUint::from(k))
    }

    pub fn power_big(&self, k: &BigUint) -> Permutation {
        let mut out = vec![0u16; self.degree()];
        for cycle in self.cycles() {
            let len = cycle.len();
            let shift = (k % len).to_usize().unwrap_or(0);
            for (pos, &i) in cycle.iter().enumerate() {
                out[i] = cycle[(pos + shift) % len] as u16;
            }
        }
        Permutation { mapping: out }
    }

    /// Binary form: degree then each index, all 16-bit big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + 2 * self.degree());
        out.extend_from_slice(&(self.degree() as u16).to_be_bytes());
        for &x in &self.mapping {
            out.extend_from_slice(&x.to_be_bytes());
        }
        out
    }

    /// Parses the binary form from the front of `bytes`, returning the
    /// permutation and the number of bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Permutation, usize), PermError> {
        let short = || PermError::Malformed("truncated binary permutation".into());
        let head = bytes.get(..2).ok_or_else(short)?;
        let n = u16::from_be_bytes([head[0], head[1]]) as usize;
        let body = bytes.get(2..2 + 2 * n).ok_or_else(short)?;
        let p = Self::from_mapping(
            body.chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as usize),
        )?;
        Ok((p, 2 + 2 * n))
    }
}

/// Text form `perm:<degree>:<i0>,<i1>,...`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "perm:{}:", self.degree())?;
        for (k, x) in self.mapping.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = PermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| PermError::Malformed(m.to_string());
        let rest = s
            .trim()
            .strip_prefix("perm:")
            .ok_or_else(|| bad("missing perm: prefix"))?;
        let (deg, body) = rest.split_once(':').ok_or_else(|| bad("missing degree"))?;
        let deg: usize = deg.parse().map_err(|_| bad("degree is not a number"))?;
        let mapping = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| bad("index is not a number"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if mapping.len() != deg {
            return Err(bad("degree does not match number of indices"));
        }
        Self::from_mapping(mapping)
    }
}
