use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_permauth");

fn permauth(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("PERMAUTH_SEED")
        .output()
        .unwrap()
}

fn permauth_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .env_remove("PERMAUTH_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Starts `serve --once` on an ephemeral port and returns it with its address.
fn serve(pub_file: &Path, extra: &[&str]) -> (Child, String) {
    let mut child = Command::new(BIN)
        .args([
            "serve",
            "--listen",
            "127.0.0.1:0",
            "--once",
            "--pub",
            p(pub_file),
        ])
        .args(extra)
        .env_remove("PERMAUTH_SEED")
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.as_mut().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line
        .trim()
        .strip_prefix("listening on ")
        .expect("address line")
        .to_string();
    (child, addr)
}

#[test]
fn analyze_params_table() {
    let o = permauth(&[
        "analyze",
        "params",
        "--n",
        "64",
        "--weight-bits",
        "24",
        "--sum-bits",
        "30",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("edges=2016")), "{out}");
    assert!(out.lines().any(|l| l.starts_with("series_len=10")), "{out}");
    assert!(out.contains("quoted"));

    let machine = stdout(&permauth(&["analyze", "params", "--machine"]));
    assert!(
        machine.lines().all(|l| !l.contains(' ') && l.contains('=')),
        "{machine}"
    );
}

#[test]
fn analyze_partitions_and_graph() {
    let out = stdout(&permauth(&[
        "analyze",
        "partitions",
        "--p",
        "4",
        "--q",
        "2",
        "--machine",
    ]));
    assert!(
        out.contains("count=3\n") && out.contains("bits=2\n"),
        "{out}"
    );
    let out = stdout(&permauth(&["analyze", "graph-prob", "--machine"]));
    assert!(
        out.contains("edges=2016\n") && out.contains("graph_exponent_x=-1952.0\n"),
        "{out}"
    );
}

#[test]
fn usage_errors_exit_2() {
    let o = permauth(&["keygen", "--scheme", "a", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(
        permauth(&["analyze", "partitions", "--p", "3", "--q", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        permauth(&["keygen", "--scheme", "a"]).status.code(),
        Some(2)
    );
}

#[test]
fn keygen_b_is_deterministic_with_pi_file() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.pub");
    let o = permauth_stdin(
        &[
            "keygen",
            "--scheme",
            "b",
            "--password-stdin",
            "--pub-out",
            p(&first),
        ],
        "pw\n",
    );
    assert!(o.status.success());
    let alpha = |text: &str| {
        text.lines()
            .filter(|l| l.starts_with("alpha."))
            .map(String::from)
            .collect::<Vec<_>>()
    };
    let a1 = alpha(&fs::read_to_string(&first).unwrap());
    assert_eq!(a1.len(), 32);
    for _ in 0..2 {
        let o = permauth_stdin(
            &[
                "keygen",
                "--scheme",
                "b",
                "--password-stdin",
                "--pi-file",
                p(&first),
            ],
            "pw\n",
        );
        assert_eq!(alpha(&stdout(&o)), a1);
    }
    let other = permauth_stdin(
        &[
            "keygen",
            "--scheme",
            "b",
            "--password-stdin",
            "--pi-file",
            p(&first),
        ],
        "pw2\n",
    );
    assert_ne!(alpha(&stdout(&other)), a1);
}

#[test]
fn seeded_keygen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let pub_out = dir.path().join(format!("{tag}.pub"));
        let sec_out = dir.path().join(format!("{tag}.sec"));
        let o = Command::new(BIN)
            .args([
                "keygen",
                "--scheme",
                "a",
                "--n",
                "16",
                "--pub-out",
                p(&pub_out),
                "--sec-out",
                p(&sec_out),
            ])
            .env("PERMAUTH_SEED", "42")
            .output()
            .unwrap();
        assert!(o.status.success());
        (
            fs::read_to_string(pub_out).unwrap(),
            fs::read_to_string(sec_out).unwrap(),
        )
    };
    assert_eq!(run("x"), run("y"));
}

#[test]
fn honest_session_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_file, sec_file) = (dir.path().join("a.pub"), dir.path().join("a.sec"));
    assert!(permauth(&[
        "keygen",
        "--scheme",
        "a",
        "--pub-out",
        p(&pub_file),
        "--sec-out",
        p(&sec_file)
    ])
    .status
    .success());
    let log = dir.path().join("session.log");
    let (server, addr) = serve(&pub_file, &["--log", p(&log)]);
    let prover = permauth(&[
        "prove",
        "--connect",
        &addr,
        "--pub",
        p(&pub_file),
        "--sec",
        p(&sec_file),
    ]);
    let server = server.wait_with_output().unwrap();
    assert_eq!(prover.status.code(), Some(0), "{}", stdout(&prover));
    assert_eq!(server.status.code(), Some(0));

    let text = fs::read_to_string(&log).unwrap();
    let rounds: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rounds.len(), 80);
    assert!(rounds.iter().all(|l| l.ends_with("verdict=accept")));
    let o = permauth(&["verify-transcript", "--pub", p(&pub_file), "--log", p(&log)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("80 rounds verified"));
}

#[test]
fn scheme_b_session_with_password() {
    let dir = tempfile::tempdir().unwrap();
    let pub_file = dir.path().join("b.pub");
    let o = permauth_stdin(
        &[
            "keygen",
            "--scheme",
            "b",
            "--password-stdin",
            "--pub-out",
            p(&pub_file),
        ],
        "secret\n",
    );
    assert!(o.status.success());

    let (server, addr) = serve(&pub_file, &["--rounds", "40"]);
    let prover = permauth_stdin(
        &[
            "prove",
            "--connect",
            &addr,
            "--pub",
            p(&pub_file),
            "--scheme",
            "b",
            "--password-stdin",
        ],
        "secret\n",
    );
    assert_eq!(prover.status.code(), Some(0));
    assert_eq!(server.wait_with_output().unwrap().status.code(), Some(0));

    let (server, addr) = serve(&pub_file, &[]);
    let wrong = permauth_stdin(
        &[
            "prove",
            "--connect",
            &addr,
            "--pub",
            p(&pub_file),
            "--password-stdin",
        ],
        "guess\n",
    );
    assert_eq!(wrong.status.code(), Some(1));
    assert_eq!(server.wait_with_output().unwrap().status.code(), Some(1));
}

#[test]
fn cheating_prover_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_file, sec_file) = (dir.path().join("a.pub"), dir.path().join("a.sec"));
    permauth(&[
        "keygen",
        "--scheme",
        "a",
        "--width",
        "24",
        "--pub-out",
        p(&pub_file),
        "--sec-out",
        p(&sec_file),
    ]);
    for cheat in ["guess0", "guess1"] {
        let (server, addr) = serve(&pub_file, &["--mode", "vector"]);
        let o = permauth(&[
            "prove",
            "--connect",
            &addr,
            "--pub",
            p(&pub_file),
            "--cheat",
            cheat,
        ]);
        assert_eq!(o.status.code(), Some(1));
        assert_eq!(server.wait_with_output().unwrap().status.code(), Some(1));
    }
}

#[test]
fn transcript_mutation_and_empty_log() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_file, sec_file) = (dir.path().join("a.pub"), dir.path().join("a.sec"));
    permauth(&[
        "keygen",
        "--scheme",
        "a",
        "--pub-out",
        p(&pub_file),
        "--sec-out",
        p(&sec_file),
    ]);
    let log = dir.path().join("session.log");
    let (server, addr) = serve(&pub_file, &["--rounds", "10"]);
    let o = permauth(&[
        "prove",
        "--connect",
        &addr,
        "--pub",
        p(&pub_file),
        "--sec",
        p(&sec_file),
        "--log",
        p(&log),
    ]);
    assert_eq!(o.status.code(), Some(0));
    server.wait_with_output().unwrap();

    let text = fs::read_to_string(&log).unwrap();
    let target = text.lines().find(|l| l.starts_with("round=7 ")).unwrap();
    let at = target.find("response=").unwrap() + "response=".len() + 20;
    let mut edited = target.to_string();
    let digit = if &edited[at..at + 1] == "0" { "1" } else { "0" };
    edited.replace_range(at..at + 1, digit);
    let mutated = dir.path().join("mutated.log");
    fs::write(&mutated, text.replace(target, &edited)).unwrap();
    let o = permauth(&[
        "verify-transcript",
        "--pub",
        p(&pub_file),
        "--log",
        p(&mutated),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("round 7"), "{}", stdout(&o));

    let empty = dir.path().join("empty.log");
    fs::write(&empty, "# permauth transcript v1\n").unwrap();
    let o = permauth(&[
        "verify-transcript",
        "--pub",
        p(&pub_file),
        "--log",
        p(&empty),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_log_does_not_stop_session() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_file, sec_file) = (dir.path().join("a.pub"), dir.path().join("a.sec"));
    permauth(&[
        "keygen",
        "--scheme",
        "a",
        "--pub-out",
        p(&pub_file),
        "--sec-out",
        p(&sec_file),
    ]);
    let bad = dir.path().join("missing").join("x.log");
    let (server, addr) = serve(&pub_file, &["--log", p(&bad)]);
    let o = permauth(&[
        "prove",
        "--connect",
        &addr,
        "--pub",
        p(&pub_file),
        "--sec",
        p(&sec_file),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(server.wait_with_output().unwrap().status.code(), Some(0));
    assert!(!bad.exists());
}

#[test]
fn connection_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_file, sec_file) = (dir.path().join("a.pub"), dir.path().join("a.sec"));
    permauth(&[
        "keygen",
        "--scheme",
        "a",
        "--pub-out",
        p(&pub_file),
        "--sec-out",
        p(&sec_file),
    ]);
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap();
    let o = permauth(&[
        "prove",
        "--connect",
        &port.to_string(),
        "--pub",
        p(&pub_file),
        "--sec",
        p(&sec_file),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn scheme_b_forgery_from_public_key() {
    let dir = tempfile::tempdir().unwrap();
    let pub_file = dir.path().join("b.pub");
    permauth_stdin(
        &[
            "keygen",
            "--scheme",
            "b",
            "--password-stdin",
            "--pub-out",
            p(&pub_file),
        ],
        "pw\n",
    );
    let (server, addr) = serve(&pub_file, &[]);
    let o = permauth(&[
        "prove",
        "--connect",
        &addr,
        "--pub",
        p(&pub_file),
        "--cheat",
        "forge",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(server.wait_with_output().unwrap().status.code(), Some(0));
}

#[test]
fn attack_and_collide_report() {
    let out = stdout(&permauth(&["attack", "--seed", "9", "--trials", "5"]));
    assert!(out.contains("recovered=5/5"), "{out}");
    let out = stdout(&permauth(&["collide", "--seed", "9", "--trials", "500"]));
    assert!(out.contains("series_collisions=0"), "{out}");
}
