use std::io::Write;
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use anyhow::bail;
use permauth::protocol::cheat::{CheatStrategy, CheaterA, CheaterB, ForgerB};
use permauth::protocol::{Prover, ProverA, ProverB};
use permauth::session::{run_prover, run_verifier, Outcome, SessionResult};
use permauth::wire::net::TcpChannel;
use permauth::wire::transcript::{verify_log, LogError, TranscriptLog};
use permauth::{PublicKey, Scheme, SessionPolicy};

use crate::keys::{load_keypair_a, load_keypair_b, load_public, read_text};
use crate::{
    derive_rng, make_rng, CheatArg, ProveArgs, ServeArgs, VerifyArgs, EXIT_REJECT, EXIT_TRANSPORT,
    EXIT_USAGE,
};

fn describe(r: &SessionResult) -> String {
    let ok = r
        .transcripts
        .iter()
        .filter(|t| t.verdict.is_accept())
        .count();
    let n = r.transcripts.len();
    match &r.outcome {
        Outcome::Accept => format!("accept ({ok}/{n} rounds)"),
        Outcome::Reject => format!("reject ({ok}/{n} rounds)"),
        Outcome::Abort { reason, detail } => format!("abort: {reason:?} {detail}"),
    }
}

fn session_log(base: &Path, session: u64) -> PathBuf {
    let mut name = base.as_os_str().to_owned();
    name.push(format!(".{session}"));
    PathBuf::from(name)
}

fn verify_one(
    stream: TcpStream,
    key: &PublicKey,
    policy: SessionPolicy,
    timeout: Duration,
    log: Option<&Path>,
    rng: &mut dyn rand::RngCore,
) -> SessionResult {
    let peer = stream
        .peer_addr()
        .map(|a| a.to_string())
        .unwrap_or_default();
    let mut chan = match TcpChannel::from_tcp(stream, timeout) {
        Ok(c) => c,
        Err(e) => {
            return SessionResult {
                outcome: Outcome::Abort {
                    reason: permauth::wire::AbortReason::Transport,
                    detail: e.to_string(),
                },
                transcripts: Vec::new(),
            }
        }
    };
    let mut log = log.map(TranscriptLog::open);
    let r = run_verifier(&mut chan, key, policy, rng, log.as_mut());
    log::info!("session with {peer}: {}", describe(&r));
    r
}

pub fn serve(args: &ServeArgs, seed: Option<u64>) -> anyhow::Result<u8> {
    if args.rounds == 0 {
        bail!("--rounds must be positive");
    }
    let key = Arc::new(load_public(&args.pub_file)?);
    let policy = SessionPolicy {
        rounds: args.rounds,
        mode: args.mode.into(),
    };
    let timeout = Duration::from_secs(args.timeout_secs);
    let listener = match TcpListener::bind(&args.listen) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot listen on {}: {e}", args.listen);
            return Ok(EXIT_TRANSPORT);
        }
    };
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;
    let mut base = make_rng(seed);

    if args.once {
        let (stream, _) = match listener.accept() {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: accept failed: {e}");
                return Ok(EXIT_TRANSPORT);
            }
        };
        let mut rng = derive_rng(seed, 0, &mut base);
        let r = verify_one(stream, &key, policy, timeout, args.log.as_deref(), &mut rng);
        println!("session 0: {}", describe(&r));
        return Ok(r.exit_code() as u8);
    }

    for (k, conn) in (0u64..).zip(listener.incoming()) {
        let stream = match conn {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let key = Arc::clone(&key);
        let log = args.log.as_deref().map(|p| session_log(p, k));
        let mut rng = derive_rng(seed, k, &mut base);
        thread::spawn(move || {
            let r = verify_one(stream, &key, policy, timeout, log.as_deref(), &mut rng);
            println!("session {k}: {}", describe(&r));
        });
    }
    Ok(0)
}

fn build_prover(args: &ProveArgs, key: &PublicKey) -> anyhow::Result<Box<dyn Prover>> {
    let strategy = match args.cheat {
        CheatArg::Guess0 => Some(CheatStrategy::GuessZero),
        CheatArg::Guess1 => Some(CheatStrategy::GuessOne),
        CheatArg::None | CheatArg::Forge => None,
    };
    Ok(match (key, args.cheat, strategy) {
        (PublicKey::A(pk), _, Some(s)) => Box::new(CheaterA::new(pk.clone(), s)),
        (PublicKey::B(pk), _, Some(s)) => Box::new(CheaterB::new(pk.clone(), s)),
        (PublicKey::A(_), CheatArg::Forge, _) => bail!("--cheat forge applies to scheme B only"),
        (PublicKey::B(pk), CheatArg::Forge, _) => Box::new(ForgerB::new(pk.clone())),
        (PublicKey::A(pk), _, None) => {
            let Some(sec) = &args.sec else {
                bail!("scheme A needs --sec");
            };
            Box::new(ProverA::new(load_keypair_a(pk, sec)?))
        }
        (PublicKey::B(pk), _, None) => Box::new(ProverB::new(load_keypair_b(
            pk,
            args.sec.as_deref(),
            args.password_stdin,
        )?)),
    })
}

pub fn prove(args: &ProveArgs, seed: Option<u64>) -> anyhow::Result<u8> {
    let key = load_public(&args.pub_file)?;
    if let Some(s) = args.scheme {
        if Scheme::from(s) != key.scheme() {
            bail!(
                "--scheme {} does not match the public key (scheme {})",
                Scheme::from(s),
                key.scheme()
            );
        }
    }
    let mut prover = build_prover(args, &key)?;
    let mut chan = match TcpChannel::connect(&args.connect, Duration::from_secs(args.timeout_secs))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: cannot connect to {}: {e}", args.connect);
            return Ok(EXIT_TRANSPORT);
        }
    };
    let mut rng = make_rng(seed);
    let r = run_prover(&mut chan, prover.as_mut(), &mut rng);
    if let Some(path) = &args.log {
        let mut log = TranscriptLog::open(path);
        for t in &r.transcripts {
            log.append(t);
        }
    }
    println!("{}", describe(&r));
    Ok(r.exit_code() as u8)
}

pub fn verify_transcript(args: &VerifyArgs) -> anyhow::Result<u8> {
    let key = load_public(&args.pub_file)?;
    let text = read_text(&args.log)?;
    let report = match verify_log(&key, &text) {
        Ok(r) => r,
        Err(LogError::Empty) => {
            eprintln!("error: {} contains no rounds", args.log.display());
            return Ok(EXIT_USAGE);
        }
    };
    for f in &report.failures {
        match f.round {
            Some(r) => println!("round {r} failed (line {}): {}", f.line, f.reason),
            None => println!("line {} failed: {}", f.line, f.reason),
        }
    }
    for r in &report.verdict_mismatches {
        println!("round {r}: recorded verdict differs from recomputed verdict");
    }
    if report.passed() && report.verdict_mismatches.is_empty() {
        println!("{} rounds verified", report.rounds);
        Ok(0)
    } else {
        Ok(EXIT_REJECT)
    }
}
