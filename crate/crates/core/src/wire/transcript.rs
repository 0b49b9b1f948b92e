//! Append-only transcript logs, one line per round:
//!
//! ```text
//! round=3 scheme=B series=3 commit=02... challenge=1 response=01... verdict=accept
//! ```
//!
//! `commit` and `response` are the hex of their wire encodings, so a log is
//! enough to re-run verification offline against the public key.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{decode_commitment, decode_response, encode_commitment, encode_response};
use crate::protocol::{Challenge, PublicKey, RejectReason, RoundTranscript, Scheme, Verdict};

pub const HEADER: &str = "# permauth transcript v1";

pub fn format_line(t: &RoundTranscript) -> String {
    let series = t
        .series_index
        .map_or_else(|| "-".to_string(), |i| i.to_string());
    let verdict = match t.verdict {
        Verdict::Accept => "accept".to_string(),
        Verdict::Reject(r) => format!("reject:{}", r.code()),
    };
    format!(
        "round={} scheme={} series={} commit={} challenge={} response={} verdict={}",
        t.round,
        t.scheme,
        series,
        hex::encode(encode_commitment(&t.commitment)),
        t.challenge.bit(),
        hex::encode(encode_response(&t.response)),
        verdict
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg}")]
pub struct LineError {
    /// Round number, when the line got far enough to name one.
    pub round: Option<u32>,
    pub msg: String,
}

pub fn parse_line(line: &str) -> Result<RoundTranscript, LineError> {
    let err = |round: Option<u32>, msg: String| LineError { round, msg };
    let field = |key: &str| -> Option<&str> {
        line.split_whitespace()
            .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
    };
    let need = |key: &str, round: Option<u32>| {
        field(key).ok_or_else(|| err(round, format!("missing field `{key}`")))
    };
    let r: u32 = need("round", None)?
        .parse()
        .map_err(|_| err(None, "round is not a number".into()))?;
    let round = Some(r);
    let scheme = match need("scheme", round)? {
        "A" => Scheme::A,
        "B" => Scheme::B,
        s => return Err(err(round, format!("unknown scheme `{s}`"))),
    };
    let series_index = match need("series", round)? {
        "-" => None,
        s => Some(
            s.parse()
                .map_err(|_| err(round, "series is not a number".into()))?,
        ),
    };
    let commit_bytes =
        hex::decode(need("commit", round)?).map_err(|e| err(round, format!("commit hex: {e}")))?;
    let commitment =
        decode_commitment(&commit_bytes).map_err(|e| err(round, format!("commit: {e}")))?;
    let challenge = need("challenge", round)?
        .parse::<u8>()
        .ok()
        .and_then(|b| Challenge::try_from(b).ok())
        .ok_or_else(|| err(round, "challenge must be 0 or 1".into()))?;
    let resp_bytes = hex::decode(need("response", round)?)
        .map_err(|e| err(round, format!("response hex: {e}")))?;
    let response =
        decode_response(&resp_bytes).map_err(|e| err(round, format!("response: {e}")))?;
    let verdict = match need("verdict", round)? {
        "accept" => Verdict::Accept,
        v => {
            let code = v
                .strip_prefix("reject")
                .map(|c| c.strip_prefix(':').unwrap_or("1"))
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| err(round, format!("bad verdict `{v}`")))?;
            Verdict::Reject(RejectReason::from_code(code).unwrap_or(RejectReason::Mismatch))
        }
    };
    Ok(RoundTranscript {
        scheme,
        round: r,
        series_index,
        commitment,
        challenge,
        response,
        verdict,
    })
}

/// Writer half. A log that cannot be opened or written is disabled with a
/// warning; the session itself carries on.
pub struct TranscriptLog {
    path: PathBuf,
    out: Option<BufWriter<File>>,
}

impl TranscriptLog {
    pub fn open(path: impl AsRef<Path>) -> Self {
        let path = path.as_ref().to_path_buf();
        let out = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                writeln!(w, "{HEADER}")?;
                w.flush()?;
                Ok(w)
            });
        match out {
            Ok(w) => TranscriptLog { path, out: Some(w) },
            Err(e) => {
                log::warn!("transcript log {} disabled: {e}", path.display());
                TranscriptLog { path, out: None }
            }
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.out.is_some()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, t: &RoundTranscript) {
        let Some(w) = self.out.as_mut() else { return };
        if let Err(e) = writeln!(w, "{}", format_line(t)).and_then(|_| w.flush()) {
            log::warn!("transcript log {} disabled: {e}", self.path.display());
            self.out = None;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogFailure {
    pub line: usize,
    pub round: Option<u32>,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct LogReport {
    pub rounds: usize,
    pub failures: Vec<LogFailure>,
    /// Rounds whose recorded verdict disagrees with the recomputed one.
    pub verdict_mismatches: Vec<u32>,
}

impl LogReport {
    pub fn passed(&self) -> bool {
        self.rounds > 0 && self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("transcript log contains no rounds")]
    Empty,
}

/// Re-verifies every round of a log against `key`.
pub fn verify_log(key: &PublicKey, text: &str) -> Result<LogReport, LogError> {
    let mut report = LogReport::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        report.rounds += 1;
        let fail = |round, reason| LogFailure {
            line: idx + 1,
            round,
            reason,
        };
        match parse_line(line) {
            Ok(t) => {
                let v = key.reverify(&t);
                if v != t.verdict {
                    report.verdict_mismatches.push(t.round);
                }
                if !v.is_accept() {
                    report
                        .failures
                        .push(fail(Some(t.round), format!("recomputed verdict {v}")));
                }
            }
            Err(e) => report.failures.push(fail(e.round, e.msg)),
        }
    }
    if report.rounds == 0 {
        return Err(LogError::Empty);
    }
    Ok(report)
}
