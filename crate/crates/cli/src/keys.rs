use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, Write};
use std::path::Path;

use anyhow::{bail, Context};
use permauth::perm::Permutation;
use permauth::protocol::scheme_a::{keygen_a, KeyPairA};
use permauth::protocol::scheme_b::{keygen_b, keygen_b_with_pi, public_key_for, KeyPairB};
use permauth::wire::keyfile;
use permauth::PublicKey;
use zeroize::Zeroizing;

use crate::{make_rng, KeygenArgs, SchemeArg};

/// Reads a password from one line of standard input, or prompts on the
/// terminal with echo off.
pub fn read_password(from_stdin: bool) -> anyhow::Result<Zeroizing<String>> {
    let mut pw = Zeroizing::new(String::new());
    if from_stdin {
        io::stdin()
            .lock()
            .read_line(&mut pw)
            .context("reading password from stdin")?;
        let trimmed = pw.trim_end_matches(['\r', '\n']).len();
        pw.truncate(trimmed);
    } else {
        pw = Zeroizing::new(rpassword::prompt_password("Password: ").context("reading password")?);
    }
    if pw.is_empty() {
        bail!("empty password");
    }
    Ok(pw)
}

fn write_secret(path: &Path, text: &str) -> anyhow::Result<()> {
    let mut opts = OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut f = opts
        .open(path)
        .with_context(|| format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn write_public(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_public(path: &Path) -> anyhow::Result<PublicKey> {
    keyfile::parse_public(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_pi(path: &Path) -> anyhow::Result<Permutation> {
    let text = read_text(path)?;
    if let Ok(p) = text.trim().parse() {
        return Ok(p);
    }
    keyfile::parse_pi(&text).with_context(|| format!("no permutation in {}", path.display()))
}

pub fn keygen(args: &KeygenArgs, seed: Option<u64>) -> anyhow::Result<u8> {
    let mut rng = make_rng(seed);
    match args.scheme {
        SchemeArg::A => {
            let Some(sec_out) = &args.sec_out else {
                bail!("scheme A needs --sec-out");
            };
            let kp = keygen_a(args.n, args.width, &mut rng)?;
            write_secret(sec_out, &keyfile::format_secret_a(&kp.secret))?;
            write_public(
                args.pub_out.as_deref(),
                &keyfile::format_public(&PublicKey::A(kp.public)),
            )?;
        }
        SchemeArg::B => {
            let pw = read_password(args.password_stdin)?;
            let kp = match &args.pi_file {
                Some(f) => keygen_b_with_pi(pw.as_bytes(), load_pi(f)?)?,
                None => keygen_b(pw.as_bytes(), &mut rng)?,
            };
            if let Some(sec_out) = &args.sec_out {
                write_secret(sec_out, &keyfile::format_secret_b(&kp.secret))?;
            }
            write_public(
                args.pub_out.as_deref(),
                &keyfile::format_public(&PublicKey::B(kp.public)),
            )?;
        }
    }
    Ok(0)
}

pub fn load_keypair_a(
    public: &permauth::protocol::PublicKeyA,
    sec: &Path,
) -> anyhow::Result<KeyPairA> {
    let secret = keyfile::parse_secret_a(&read_text(sec)?)?;
    let kp = KeyPairA::assemble(secret, public.clone())?;
    if !kp.is_consistent() {
        log::warn!("secret key does not match the public key; expect rejection");
    }
    Ok(kp)
}

pub fn load_keypair_b(
    public: &permauth::protocol::PublicKeyB,
    sec: Option<&Path>,
    password_stdin: bool,
) -> anyhow::Result<KeyPairB> {
    let kp = match sec {
        Some(path) => {
            let secret = keyfile::parse_secret_b(&read_text(path)?)?;
            let derived = public_key_for(&secret, public.pi.clone())?;
            KeyPairB {
                secret,
                public: derived,
            }
        }
        None => {
            let pw = read_password(password_stdin)?;
            keygen_b_with_pi(pw.as_bytes(), public.pi.clone())?
        }
    };
    if kp.public != *public {
        log::warn!("secret does not reproduce the public series; expect rejection");
    }
    Ok(KeyPairB {
        secret: kp.secret,
        public: public.clone(),
    })
}
