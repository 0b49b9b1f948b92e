//! Order-sensitive fingerprints of a vertex labeling walked around its
//! perimeter (the closed cycle `0 -> 1 -> .. -> n-1 -> 0`).

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::perm::{PermError, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("unsupported element width {0} bits (expected 8, 16, 24 or 32)")]
    Width(u32),
    #[error("vector too short: {0} elements, need at least 2")]
    TooShort(usize),
    #[error("element {value:#x} does not fit in {width} bits")]
    Overflow { value: u32, width: u8 },
    #[error("width mismatch: {0} vs {1} bits")]
    WidthMismatch(u8, u8),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(char),
    #[error("series length must be at least 1")]
    EmptySeries,
    #[error("malformed vector encoding: {0}")]
    Malformed(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

fn check_width(width_bits: u32) -> Result<u8, FingerprintError> {
    match width_bits {
        8 | 16 | 24 | 32 => Ok(width_bits as u8),
        w => Err(FingerprintError::Width(w)),
    }
}

fn mask(width: u8) -> u64 {
    (1u64 << width) - 1
}

/// Shared storage for [`WeightVector`] and [`DiffVector`]: fixed-width
/// unsigned elements with a hex text form and a length-prefixed binary form.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Elements {
    width: u8,
    values: Vec<u32>,
}

impl Elements {
    fn new(width_bits: u32, values: Vec<u32>) -> Result<Self, FingerprintError> {
        let width = check_width(width_bits)?;
        if values.len() < 2 {
            return Err(FingerprintError::TooShort(values.len()));
        }
        if let Some(&value) = values.iter().find(|&&v| u64::from(v) > mask(width)) {
            return Err(FingerprintError::Overflow { value, width });
        }
        Ok(Elements { width, values })
    }

    fn byte_width(&self) -> usize {
        self.width as usize / 8
    }

    fn xor(&self, other: &Elements) -> Result<Elements, FingerprintError> {
        if self.width != other.width {
            return Err(FingerprintError::WidthMismatch(self.width, other.width));
        }
        if self.values.len() != other.values.len() {
            return Err(FingerprintError::LengthMismatch(
                self.values.len(),
                other.values.len(),
            ));
        }
        Ok(Elements {
            width: self.width,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    fn raw_bytes(&self) -> Vec<u8> {
        let bw = self.byte_width();
        self.values
            .iter()
            .flat_map(|v| v.to_be_bytes()[4 - bw..].to_vec())
            .collect()
    }

    fn from_raw_bytes(width_bits: u32, bytes: &[u8]) -> Result<Self, FingerprintError> {
        let width = check_width(width_bits)?;
        let bw = width as usize / 8;
        if !bytes.len().is_multiple_of(bw) {
            return Err(FingerprintError::Malformed(format!(
                "{} bytes is not a multiple of the element width",
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(bw)
            .map(|c| c.iter().fold(0u32, |acc, &b| (acc << 8) | u32::from(b)))
            .collect();
        Self::new(width_bits, values)
    }

    fn to_text(&self) -> String {
        format!("wv:{}:{}", self.width, hex::encode(self.raw_bytes()))
    }

    fn from_text(s: &str) -> Result<Self, FingerprintError> {
        let bad = |m: &str| FingerprintError::Malformed(m.to_string());
        let rest = s
            .trim()
            .strip_prefix("wv:")
            .ok_or_else(|| bad("missing wv: prefix"))?;
        let (w, body) = rest.split_once(':').ok_or_else(|| bad("missing width"))?;
        let w: u32 = w.parse().map_err(|_| bad("width is not a number"))?;
        let bytes = hex::decode(body).map_err(|e| bad(&e.to_string()))?;
        Self::from_raw_bytes(w, &bytes)
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.width];
        out.extend_from_slice(&(self.values.len() as u16).to_be_bytes());
        out.extend(self.raw_bytes());
        out
    }

    fn from_bytes(bytes: &[u8]) -> Result<(Self, usize), FingerprintError> {
        let short = || FingerprintError::Malformed("truncated binary vector".into());
        let head = bytes.get(..3).ok_or_else(short)?;
        let width = u32::from(head[0]);
        check_width(width)?;
        let count = u16::from_be_bytes([head[1], head[2]]) as usize;
        let len = count * (width as usize / 8);
        let body = bytes.get(3..3 + len).ok_or_else(short)?;
        Ok((Self::from_raw_bytes(width, body)?, 3 + len))
    }
}

/// Vertex weights of the implicit complete graph, in perimeter order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeightVector(Elements);

/// Cyclic vector of XOR differences between perimeter neighbours.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DiffVector(Elements);

macro_rules! vector_common {
    ($ty:ident, $label:literal) => {
        impl $ty {
            pub fn new(width_bits: u32, values: Vec<u32>) -> Result<Self, FingerprintError> {
                Elements::new(width_bits, values).map($ty)
            }

            pub fn width_bits(&self) -> u32 {
                u32::from(self.0.width)
            }

            pub fn len(&self) -> usize {
                self.0.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.values.is_empty()
            }

            pub fn as_slice(&self) -> &[u32] {
                &self.0.values
            }

            /// Elementwise XOR; widths and lengths must agree.
            pub fn xor(&self, other: &$ty) -> Result<$ty, FingerprintError> {
                self.0.xor(&other.0).map($ty)
            }

            /// Binary form: width byte, 16-bit big-endian count, then the
            /// big-endian fixed-width elements. Returns the bytes consumed.
            pub fn to_bytes(&self) -> Vec<u8> {
                self.0.to_bytes()
            }

            pub fn from_bytes(bytes: &[u8]) -> Result<(Self, usize), FingerprintError> {
                Elements::from_bytes(bytes).map(|(e, used)| ($ty(e), used))
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.to_text())
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($label, "({})"), self.0.to_text())
            }
        }

        impl FromStr for $ty {
            type Err = FingerprintError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Elements::from_text(s).map($ty)
            }
        }
    };
}

vector_common!(WeightVector, "WeightVector");
vector_common!(DiffVector, "DiffVector");

impl WeightVector {
    pub fn from_bytes_u8(bytes: &[u8]) -> Result<Self, FingerprintError> {
        Self::new(8, bytes.iter().map(|&b| u32::from(b)).collect())
    }

    pub fn zeros(n: usize, width_bits: u32) -> Result<Self, FingerprintError> {
        Self::new(width_bits, vec![0; n])
    }

    /// Uniform elements of the full width.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        width_bits: u32,
        rng: &mut R,
    ) -> Result<Self, FingerprintError> {
        let width = check_width(width_bits)?;
        let m = mask(width) as u32;
        Self::new(
            width_bits,
            (0..n).map(|_| rng.random::<u32>() & m).collect(),
        )
    }

    /// Uniform elements below `2^value_bits`, stored at the smallest
    /// supported width that holds them. Used for deliberately tiny ranges.
    pub fn random_bounded<R: Rng + ?Sized>(
        n: usize,
        value_bits: u32,
        rng: &mut R,
    ) -> Result<Self, FingerprintError> {
        if value_bits == 0 || value_bits > 32 {
            return Err(FingerprintError::Width(value_bits));
        }
        let storage = value_bits.div_ceil(8) * 8;
        let m = mask(value_bits as u8) as u32;
        Self::new(storage, (0..n).map(|_| rng.random::<u32>() & m).collect())
    }

    pub fn permuted(&self, p: &Permutation) -> Result<Self, FingerprintError> {
        Ok(WeightVector(Elements {
            width: self.0.width,
            values: p.apply(&self.0.values)?,
        }))
    }

    pub fn reversed(&self) -> Self {
        let mut e = self.0.clone();
        e.values.reverse();
        WeightVector(e)
    }

    /// Raw big-endian element bytes (for width 8, the byte string itself).
    pub fn raw_bytes(&self) -> Vec<u8> {
        self.0.raw_bytes()
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<u32> {
        &mut self.0.values
    }
}

impl DiffVector {
    /// XOR of all components; always zero for a vector produced by
    /// [`diff_vector_xor`].
    pub fn fold_xor(&self) -> u32 {
        self.0.values.iter().fold(0, |a, b| a ^ b)
    }

    pub fn rotated_left(&self, k: usize) -> Self {
        let mut e = self.0.clone();
        let n = e.values.len();
        e.values.rotate_left(k % n);
        DiffVector(e)
    }

    /// Integrates the differences back to a vector whose first element is
    /// `start`: the unique `w` with `w[0] = start` and `diff_vector_xor(w) = self`.
    /// Only meaningful when [`DiffVector::fold_xor`] is zero.
    pub fn integrate(&self, start: u32) -> WeightVector {
        let mut values = Vec::with_capacity(self.len());
        let mut cur = start & mask(self.0.width) as u32;
        for d in &self.0.values {
            values.push(cur);
            cur ^= d;
        }
        WeightVector(Elements {
            width: self.0.width,
            values,
        })
    }
}

/// Sum of absolute differences between perimeter neighbours, wrapping
/// from the last element back to the first.
pub fn diff_sum(w: &WeightVector) -> u64 {
    let v = w.as_slice();
    let n = v.len();
    (0..n)
        .map(|i| u64::from(v[(i + 1) % n].abs_diff(v[i])))
        .sum()
}

/// `d[i] = w[i+1 mod n] ^ w[i]`.
pub fn diff_vector_xor(w: &WeightVector) -> DiffVector {
    let v = w.as_slice();
    let n = v.len();
    DiffVector(Elements {
        width: w.0.width,
        values: (0..n).map(|i| v[(i + 1) % n] ^ v[i]).collect(),
    })
}

/// Concatenation of the two-symbol edge labels along the perimeter of the
/// permuted labeling. Length is `2n` symbols.
pub fn string_fingerprint(labels: &[char], p: &Permutation) -> Result<String, FingerprintError> {
    let mut seen = HashSet::with_capacity(labels.len());
    if let Some(&dup) = labels.iter().find(|c| !seen.insert(**c)) {
        return Err(FingerprintError::DuplicateLabel(dup));
    }
    let order = p.apply(labels)?;
    let n = order.len();
    let mut s = String::with_capacity(2 * n);
    for i in 0..n {
        s.push(order[i]);
        s.push(order[(i + 1) % n]);
    }
    Ok(s)
}

/// 2x2 matrix over `Z / 2^16`, row major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Mat2(pub [[u16; 2]; 2]);

pub type MatrixFingerprint = Mat2;

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1, 0], [0, 1]]);
    pub const ZERO: Mat2 = Mat2([[0, 0], [0, 0]]);

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Mat2([[rng.random(), rng.random()], [rng.random(), rng.random()]])
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::ZERO;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][c].wrapping_add(rhs.0[r][c]);
            }
        }
        out
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let dot = |r: usize, c: usize| {
            a[r][0]
                .wrapping_mul(b[0][c])
                .wrapping_add(a[r][1].wrapping_mul(b[1][c]))
        };
        Mat2([[dot(0, 0), dot(0, 1)], [dot(1, 0), dot(1, 1)]])
    }
}

/// `sum_i M[i] * M[i+1 mod n]` over the permuted matrices, mod 2^16.
pub fn matrix_fingerprint(mats: &[Mat2], p: &Permutation) -> Result<Mat2, FingerprintError> {
    if mats.len() < 2 {
        return Err(FingerprintError::TooShort(mats.len()));
    }
    let m = p.apply(mats)?;
    let n = m.len();
    Ok((0..n).fold(Mat2::ZERO, |acc, i| acc + m[i] * m[(i + 1) % n]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    IntSum,
    XorVector,
}

/// Fingerprints of `p^1(base), p^2(base), ..`; the entry for exponent `i`
/// is at position `i - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Series {
    IntSum(Vec<u64>),
    XorVector(Vec<DiffVector>),
}

impl Series {
    pub fn kind(&self) -> SeriesKind {
        match self {
            Series::IntSum(_) => SeriesKind::IntSum,
            Series::XorVector(_) => SeriesKind::XorVector,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Series::IntSum(v) => v.len(),
            Series::XorVector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn series(
    base: &WeightVector,
    p: &Permutation,
    len: usize,
    kind: SeriesKind,
) -> Result<Series, FingerprintError> {
    if len == 0 {
        return Err(FingerprintError::EmptySeries);
    }
    if p.degree() != base.len() {
        return Err(FingerprintError::LengthMismatch(p.degree(), base.len()));
    }
    let mut cur = base.clone();
    let mut orderings = Vec::with_capacity(len);
    for _ in 0..len {
        cur = cur.permuted(p)?;
        orderings.push(cur.clone());
    }
    Ok(match kind {
        SeriesKind::IntSum => Series::IntSum(orderings.iter().map(diff_sum).collect()),
        SeriesKind::XorVector => Series::XorVector(orderings.iter().map(diff_vector_xor).collect()),
    })
}
