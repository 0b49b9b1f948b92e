//! `permauth` command-line front end.
//!
//! Exit codes: 0 accept or success, 1 reject, 2 usage or input error,
//! 3 transport failure or abort.

mod analyze;
mod keys;
mod net;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permauth::CommitMode;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const EXIT_REJECT: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_TRANSPORT: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "permauth",
    version,
    about = "Permutation-keyed identification protocols"
)]
struct Cli {
    /// Seed for a deterministic ChaCha20 generator (also `PERMAUTH_SEED`).
    #[arg(long, global = true, env = "PERMAUTH_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a key pair.
    Keygen(KeygenArgs),
    /// Run the verifier on a TCP address.
    Serve(ServeArgs),
    /// Connect to a verifier and prove knowledge of a secret.
    Prove(ProveArgs),
    /// Re-check a logged session offline.
    VerifyTranscript(VerifyArgs),
    /// Parameter sizing and counting formulas.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Recover a small secret permutation from its difference-sum series.
    Attack(AttackArgs),
    /// Estimate series collision rates for random permutation pairs.
    Collide(CollideArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    A,
    B,
}

impl From<SchemeArg> for permauth::Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::A => permauth::Scheme::A,
            SchemeArg::B => permauth::Scheme::B,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
pub enum ModeArg {
    #[default]
    Scalar,
    Vector,
}

impl From<ModeArg> for CommitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Scalar => CommitMode::Scalar,
            ModeArg::Vector => CommitMode::FullVector,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CheatArg {
    #[default]
    None,
    Guess0,
    Guess1,
    /// Scheme B only: answer from the public series alone.
    Forge,
}

#[derive(Args, Debug)]
pub struct KeygenArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Public key file; standard output if omitted.
    #[arg(long)]
    pub pub_out: Option<PathBuf>,
    /// Secret key file. Required for scheme A; for scheme B it caches the
    /// password-derived secret and is optional.
    #[arg(long)]
    pub sec_out: Option<PathBuf>,
    /// Degree (scheme A).
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Weight width in bits (scheme A): 8, 16, 24 or 32.
    #[arg(long, default_value_t = 8)]
    pub width: u32,
    /// Read the password from standard input instead of prompting.
    #[arg(long)]
    pub password_stdin: bool,
    /// Reuse the public permutation from this file (scheme B): a public key
    /// file or a single `perm:64:...` line.
    #[arg(long)]
    pub pi_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub listen: String,
    #[arg(long = "pub")]
    pub pub_file: PathBuf,
    #[arg(long, default_value_t = permauth::protocol::DEFAULT_ROUNDS)]
    pub rounds: u32,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeArg,
    /// Transcript log. With several sessions each gets `<log>.<session>`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,
    /// Serve a single session and exit with its verdict.
    #[arg(long)]
    pub once: bool,
}

#[derive(Args, Debug)]
pub struct ProveArgs {
    #[arg(long)]
    pub connect: String,
    #[arg(long = "pub")]
    pub pub_file: PathBuf,
    /// Must agree with the public key file if given.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Secret key file (scheme A, or a cached scheme B secret).
    #[arg(long)]
    pub sec: Option<PathBuf>,
    /// Prompt for the password (scheme B).
    #[arg(long, conflicts_with_all = ["sec", "password_stdin"])]
    pub password: bool,
    /// Read the password from standard input (scheme B).
    #[arg(long, conflicts_with = "sec")]
    pub password_stdin: bool,
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,
    /// Play a dishonest prover instead.
    #[arg(long, value_enum, default_value_t)]
    pub cheat: CheatArg,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long = "pub")]
    pub pub_file: PathBuf,
    #[arg(long)]
    pub log: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCmd {
    /// Key-space size and required series length.
    Params {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 24)]
        weight_bits: u32,
        #[arg(long, default_value_t = 30)]
        sum_bits: u32,
        /// Print only computed `key=value` rows.
        #[arg(long)]
        machine: bool,
    },
    /// Ordered partitions of `p` into `q` positive parts.
    Partitions {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        machine: bool,
    },
    /// Log2 probabilities for random weighted edge sets.
    GraphProb {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        x_bits: u32,
        #[arg(long)]
        machine: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
pub enum KindArg {
    #[default]
    Sum,
    Xor,
}

#[derive(Args, Debug)]
pub struct AttackArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 24)]
    pub weight_bits: u32,
    #[arg(long, default_value_t = 3)]
    pub len: usize,
    #[arg(long, value_enum, default_value_t)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1)]
    pub trials: u32,
}

#[derive(Args, Debug)]
pub struct CollideArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 24)]
    pub weight_bits: u32,
    #[arg(long, default_value_t = 10)]
    pub len: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
}

/// Deterministic generator for `seed`, or one keyed from OS entropy.
pub fn make_rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_rng(&mut rand::rng()),
    }
}

/// Child generator for session `k` of a seeded run.
pub fn derive_rng(seed: Option<u64>, k: u64, base: &mut ChaCha20Rng) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s.wrapping_add(k)),
        None => ChaCha20Rng::from_rng(base),
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let seed = cli.seed;
    match cli.command {
        Command::Keygen(a) => keys::keygen(&a, seed),
        Command::Serve(a) => net::serve(&a, seed),
        Command::Prove(a) => net::prove(&a, seed),
        Command::VerifyTranscript(a) => net::verify_transcript(&a),
        Command::Analyze(c) => analyze::analyze(&c),
        Command::Attack(a) => analyze::attack(&a, seed),
        Command::Collide(a) => analyze::collide(&a, seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
