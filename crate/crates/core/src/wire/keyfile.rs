//! Line-oriented text key files. `#` starts a comment line; the first
//! non-comment line names the file kind, the rest are `key=value` pairs.
//!
//! ```text
//! permauth-a-pub v1          permauth-b-pub v1
//! n=64                       pi=perm:64:...
//! width=8                    alpha.1=wv:8:...
//! Pi=perm:64:...             ...
//! B=wv:8:...                 alpha.32=wv:8:...
//! C=wv:8:...
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use thiserror::Error;

use crate::fingerprint::{DiffVector, WeightVector};
use crate::perm::Permutation;
use crate::protocol::scheme_b::{self, DEGREE, MIN_ORDER, SERIES_LEN};
use crate::protocol::{PublicKey, PublicKeyA, PublicKeyB, SecretKeyA, SecretKeyB};

pub const A_PUB: &str = "permauth-a-pub v1";
pub const A_SEC: &str = "permauth-a-sec v1";
pub const B_PUB: &str = "permauth-b-pub v1";
pub const B_SEC: &str = "permauth-b-sec v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyFileError {
    #[error("empty key file")]
    Empty,
    #[error("unrecognised key file header `{0}`")]
    Header(String),
    #[error("line {0}: expected key=value")]
    Syntax(usize),
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error("inconsistent key: {0}")]
    Inconsistent(String),
}

struct Parsed<'a> {
    header: &'a str,
    fields: HashMap<&'a str, &'a str>,
}

fn parse(text: &str) -> Result<Parsed<'_>, KeyFileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or(KeyFileError::Empty)?;
    let mut fields = HashMap::new();
    for (no, line) in lines {
        let (k, v) = line.split_once('=').ok_or(KeyFileError::Syntax(no))?;
        fields.insert(k.trim(), v.trim());
    }
    Ok(Parsed { header, fields })
}

impl<'a> Parsed<'a> {
    fn get(&self, key: &str) -> Result<&'a str, KeyFileError> {
        self.fields
            .get(key)
            .copied()
            .ok_or_else(|| KeyFileError::Missing(key.to_string()))
    }

    fn typed<T: std::str::FromStr>(&self, key: &str) -> Result<T, KeyFileError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .parse()
            .map_err(|e: T::Err| KeyFileError::Field {
                field: key.to_string(),
                msg: e.to_string(),
            })
    }
}

pub fn format_public(key: &PublicKey) -> String {
    let mut s = String::new();
    match key {
        PublicKey::A(pk) => {
            let _ = writeln!(s, "{A_PUB}");
            let _ = writeln!(s, "n={}", pk.degree());
            let _ = writeln!(s, "width={}", pk.width_bits());
            let _ = writeln!(s, "Pi={}", pk.pi_pub);
            let _ = writeln!(s, "B={}", pk.b);
            let _ = writeln!(s, "C={}", pk.c);
        }
        PublicKey::B(pk) => {
            let _ = writeln!(s, "{B_PUB}");
            let _ = writeln!(s, "pi={}", pk.pi);
            for (i, a) in pk.alpha.iter().enumerate() {
                let _ = writeln!(s, "alpha.{}={}", i + 1, a);
            }
        }
    }
    s
}

fn sorted(v: &WeightVector) -> Vec<u32> {
    let mut x = v.as_slice().to_vec();
    x.sort_unstable();
    x
}

pub fn parse_public(text: &str) -> Result<PublicKey, KeyFileError> {
    let p = parse(text)?;
    match p.header {
        A_PUB => {
            let n: usize = p.typed("n")?;
            let width: u32 = p.typed("width")?;
            let pi_pub: Permutation = p.typed("Pi")?;
            let b: WeightVector = p.typed("B")?;
            let c: WeightVector = p.typed("C")?;
            if pi_pub.degree() != n || b.len() != n || c.len() != n {
                return Err(KeyFileError::Inconsistent(format!(
                    "degree n={n} disagrees with Pi, B or C"
                )));
            }
            if b.width_bits() != width || c.width_bits() != width {
                return Err(KeyFileError::Inconsistent(format!(
                    "width={width} disagrees with B or C"
                )));
            }
            if sorted(&b) != sorted(&c) {
                return Err(KeyFileError::Inconsistent(
                    "C is not a rearrangement of B".into(),
                ));
            }
            Ok(PublicKey::A(PublicKeyA { pi_pub, b, c }))
        }
        B_PUB => {
            let pi: Permutation = p.typed("pi")?;
            if pi.degree() != DEGREE {
                return Err(KeyFileError::Inconsistent(format!(
                    "pi has degree {}, need {DEGREE}",
                    pi.degree()
                )));
            }
            if pi.order() < BigUint::from(MIN_ORDER) {
                return Err(KeyFileError::Inconsistent(format!(
                    "pi has order {}, need {MIN_ORDER}",
                    pi.order()
                )));
            }
            let alpha = (1..=SERIES_LEN)
                .map(|i| {
                    let d: DiffVector = p.typed(&format!("alpha.{i}"))?;
                    if d.len() != DEGREE || d.width_bits() != 8 {
                        return Err(KeyFileError::Inconsistent(format!(
                            "alpha.{i} must be 64 bytes"
                        )));
                    }
                    Ok(d)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PublicKey::B(PublicKeyB { pi, alpha }))
        }
        other => Err(KeyFileError::Header(other.to_string())),
    }
}

pub fn format_secret_a(sk: &SecretKeyA) -> String {
    format!("{A_SEC}\npi={}\n", sk.pi)
}

pub fn parse_secret_a(text: &str) -> Result<SecretKeyA, KeyFileError> {
    let p = parse(text)?;
    if p.header != A_SEC {
        return Err(KeyFileError::Header(p.header.to_string()));
    }
    Ok(SecretKeyA { pi: p.typed("pi")? })
}

/// Optional cache of the password-derived secret. Holding this file is
/// equivalent to knowing the password.
pub fn format_secret_b(sk: &SecretKeyB) -> String {
    format!("{B_SEC}\nX={}\n", sk.x())
}

pub fn parse_secret_b(text: &str) -> Result<SecretKeyB, KeyFileError> {
    let p = parse(text)?;
    if p.header != B_SEC {
        return Err(KeyFileError::Header(p.header.to_string()));
    }
    let x: WeightVector = p.typed("X")?;
    scheme_b::SecretKeyB::from_vector(x).map_err(|e| KeyFileError::Field {
        field: "X".into(),
        msg: e.to_string(),
    })
}

/// The `pi=` permutation of a Scheme B public file, for re-deriving the
/// series from a password.
pub fn parse_pi(text: &str) -> Result<Permutation, KeyFileError> {
    parse(text)?.typed("pi")
}
