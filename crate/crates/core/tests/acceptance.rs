//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails or exceeds its time budget.

mod common;

use std::collections::HashSet;
use std::net::TcpListener;
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use permauth::analysis::{
    brute_force_recover, collision_stats, n_partitions, parameter_report, series_length_required,
};
use permauth::fingerprint::{diff_vector_xor, series, SeriesKind};
use permauth::perm::Permutation;
use permauth::protocol::cheat::{CheatStrategy, CheaterA, CheaterB};
use permauth::protocol::scheme_a::keygen_a;
use permauth::protocol::scheme_b::{keygen_b, keygen_b_with_pi, MIN_ORDER};
use permauth::protocol::{CommitMode, Prover, ProverA, ProverB, PublicKey, SessionPolicy};
use permauth::session::{run_local, run_prover, run_verifier, Outcome};
use permauth::wire::net::TcpChannel;
use permauth::wire::transcript::{verify_log, TranscriptLog};
use permauth::wire::{decode_frame, encode_frame};
use permauth::WeightVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Check = fn() -> Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    check: Check,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn compositions(p: u64, q: u64) -> u64 {
    match (p, q) {
        (0, 0) => 1,
        (_, 0) => 0,
        _ => (1..=p).map(|first| compositions(p - first, q - 1)).sum(),
    }
}

fn counting_exactness() -> Result<String, String> {
    let n42 = n_partitions(4, 2).map_err(|e| e.to_string())?.count;
    let n32 = n_partitions(3, 2).map_err(|e| e.to_string())?.count;
    ensure(n42 == BigUint::from(3u32), || format!("N(4,2) = {n42}"))?;
    ensure(n32 == BigUint::from(2u32), || format!("N(3,2) = {n32}"))?;
    let mut pairs = 0;
    for p in 1..=12 {
        for q in 1..=p {
            let got = n_partitions(p, q).map_err(|e| e.to_string())?.count;
            ensure(got == BigUint::from(compositions(p, q)), || {
                format!("N({p},{q}) = {got}")
            })?;
            pairs += 1;
        }
    }
    Ok(format!(
        "N(4,2)=3 N(3,2)=2; {pairs} (p,q) pairs match enumeration"
    ))
}

fn parameter_reproduction() -> Result<String, String> {
    let r = parameter_report(64, 24, 30).map_err(|e| e.to_string())?;
    ensure(r.edge_count == 2016, || format!("edges {}", r.edge_count))?;
    ensure((295.9..=296.1).contains(&r.keyspace_bits), || {
        format!("keyspace {}", r.keyspace_bits)
    })?;
    let len = series_length_required(300.0, 30);
    ensure(len == 10 && len * 30 == 300, || {
        format!("series length {len}")
    })?;
    ensure(r.birthday_weight_bits == 22, || {
        format!("birthday {}", r.birthday_weight_bits)
    })?;
    Ok(format!(
        "edges=2016 keyspace_bits={:.4} (quoted ~300) series_len=10 transmitted=300 birthday_bits=22",
        r.keyspace_bits
    ))
}

fn big_count_tolerance() -> Result<String, String> {
    let a = n_partitions(1_073_741_823, 63).map_err(|e| e.to_string())?;
    let rel = (a.bit_length as f64 - 1600.0).abs() / 1600.0;
    ensure(rel <= 0.05, || {
        format!("bit length {} off by {:.1}%", a.bit_length, rel * 100.0)
    })?;
    Ok(format!(
        "C(1073741822, 62) has {} bits ({:.2}% from 1600)",
        a.bit_length,
        rel * 100.0
    ))
}

fn completeness() -> Result<String, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(0xC0);
    let mut vrng = ChaCha20Rng::seed_from_u64(0xC1);
    let mut accepted = [0u32; 2];
    let mut indices = HashSet::new();
    for block in 0..20 {
        let mode = if block % 2 == 0 {
            CommitMode::Scalar
        } else {
            CommitMode::FullVector
        };
        let policy = SessionPolicy { rounds: 100, mode };

        let a = keygen_a(64, 8, &mut rng).map_err(|e| e.to_string())?;
        let key = PublicKey::A(a.public.clone());
        let r = run_local(&mut ProverA::new(a), &key, policy, &mut rng, &mut vrng)
            .map_err(|e| e.to_string())?;
        accepted[0] += r
            .transcripts
            .iter()
            .filter(|t| t.verdict.is_accept())
            .count() as u32;

        let pw: [u8; 12] = rng.random();
        let b = keygen_b(&pw, &mut rng).map_err(|e| e.to_string())?;
        let key = PublicKey::B(b.public.clone());
        let r = run_local(&mut ProverB::new(b), &key, policy, &mut rng, &mut vrng)
            .map_err(|e| e.to_string())?;
        accepted[1] += r
            .transcripts
            .iter()
            .filter(|t| t.verdict.is_accept())
            .count() as u32;
        indices.extend(r.transcripts.iter().filter_map(|t| t.series_index));
    }
    ensure(accepted == [2000, 2000], || {
        format!("accepted {accepted:?} of 2000 each")
    })?;
    ensure(indices.len() == 32, || {
        format!("only {} series indices used", indices.len())
    })?;
    Ok("A 2000/2000, B 2000/2000, all 32 series indices used".into())
}

fn accept_rate(
    prover: &mut dyn Prover,
    key: &PublicKey,
    mode: CommitMode,
    seed: u64,
) -> Result<f64, String> {
    let mut prng = ChaCha20Rng::seed_from_u64(seed);
    let mut vrng = ChaCha20Rng::seed_from_u64(seed ^ 0xFFFF);
    let policy = SessionPolicy {
        rounds: 10_000,
        mode,
    };
    let r = run_local(prover, key, policy, &mut prng, &mut vrng).map_err(|e| e.to_string())?;
    Ok(r.transcripts
        .iter()
        .filter(|t| t.verdict.is_accept())
        .count() as f64
        / 10_000.0)
}

fn soundness() -> Result<String, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x50);
    let a = keygen_a(64, 24, &mut rng).map_err(|e| e.to_string())?;
    let b = keygen_b(b"soundness", &mut rng).map_err(|e| e.to_string())?;
    let ka = PublicKey::A(a.public.clone());
    let kb = PublicKey::B(b.public.clone());
    let mut rates = Vec::new();
    for (k, strategy) in [CheatStrategy::GuessZero, CheatStrategy::GuessOne]
        .into_iter()
        .enumerate()
    {
        for mode in [CommitMode::Scalar, CommitMode::FullVector] {
            let rate = accept_rate(
                &mut CheaterA::new(a.public.clone(), strategy),
                &ka,
                mode,
                100 + k as u64,
            )?;
            ensure((0.48..=0.52).contains(&rate), || {
                format!("A {strategy:?} {mode:?}: {rate}")
            })?;
            rates.push(format!("A/{strategy:?}/{mode:?}={rate:.4}"));
        }
        let rate = accept_rate(
            &mut CheaterB::new(b.public.clone(), strategy),
            &kb,
            CommitMode::Scalar,
            200 + k as u64,
        )?;
        ensure((0.48..=0.52).contains(&rate), || {
            format!("B {strategy:?}: {rate}")
        })?;
        rates.push(format!("B/{strategy:?}={rate:.4}"));
    }
    let mut session_accepts = 0;
    let mut prng = ChaCha20Rng::seed_from_u64(0x51);
    let mut vrng = ChaCha20Rng::seed_from_u64(0x52);
    for s in 0..1000 {
        let strategy = if s % 2 == 0 {
            CheatStrategy::GuessZero
        } else {
            CheatStrategy::GuessOne
        };
        let policy = SessionPolicy::with_rounds(20);
        let ra = run_local(
            &mut CheaterA::new(a.public.clone(), strategy),
            &ka,
            policy,
            &mut prng,
            &mut vrng,
        )
        .map_err(|e| e.to_string())?;
        let rb = run_local(
            &mut CheaterB::new(b.public.clone(), strategy),
            &kb,
            policy,
            &mut prng,
            &mut vrng,
        )
        .map_err(|e| e.to_string())?;
        session_accepts += u32::from(ra.is_accept()) + u32::from(rb.is_accept());
    }
    ensure(session_accepts == 0, || {
        format!("{session_accepts} cheating sessions accepted")
    })?;
    Ok(format!(
        "{}; 0 of 2x1000 20-round cheating sessions accepted",
        rates.join(" ")
    ))
}

fn xor_linearity() -> Result<String, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x70);
    for _ in 0..1000 {
        let p = Permutation::random(64, &mut rng).map_err(|e| e.to_string())?;
        let i = rng.random_range(1..=32u64);
        let pi = p.power(i);
        let r = WeightVector::random(64, 8, &mut rng).map_err(|e| e.to_string())?;
        let x = WeightVector::random(64, 8, &mut rng).map_err(|e| e.to_string())?;
        let lhs = diff_vector_xor(&r.xor(&x).unwrap().permuted(&pi).unwrap());
        let rhs = diff_vector_xor(&r.permuted(&pi).unwrap())
            .xor(&diff_vector_xor(&x.permuted(&pi).unwrap()))
            .unwrap();
        ensure(lhs == rhs, || "linearity violated".into())?;
        let any = WeightVector::random(
            rng.random_range(2..200),
            [8, 16, 24, 32][rng.random_range(0..4)],
            &mut rng,
        )
        .map_err(|e| e.to_string())?;
        ensure(diff_vector_xor(&any).fold_xor() == 0, || {
            "telescoping violated".into()
        })?;
    }
    Ok("1000/1000 linear, 1000/1000 telescoping".into())
}

fn keygen_b_invariant() -> Result<String, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x80);
    let min = BigUint::from(MIN_ORDER);
    let mut smallest: Option<BigUint> = None;
    for k in 0..100u32 {
        let kp =
            keygen_b(format!("password-{k}").as_bytes(), &mut rng).map_err(|e| e.to_string())?;
        let order = kp.public.pi.order();
        ensure(order >= min, || format!("order {order}"))?;
        smallest = Some(smallest.map_or(order.clone(), |s| s.min(order)));
        let again = keygen_b_with_pi(format!("password-{k}").as_bytes(), kp.public.pi.clone())
            .map_err(|e| e.to_string())?;
        ensure(again.public.alpha == kp.public.alpha, || {
            "alpha not reproducible".into()
        })?;
    }
    Ok(format!(
        "100 keygens, smallest order {}, alpha re-derived identically",
        smallest.unwrap()
    ))
}

fn attack_oracle() -> Result<String, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x90);
    let mut hits = 0;
    let mut total = 0;
    for _ in 0..100 {
        let base = WeightVector::random(6, 24, &mut rng).map_err(|e| e.to_string())?;
        let pi = Permutation::random(6, &mut rng).map_err(|e| e.to_string())?;
        let observed = series(&base, &pi, 3, SeriesKind::IntSum).map_err(|e| e.to_string())?;
        let res = brute_force_recover(&base, &observed).map_err(|e| e.to_string())?;
        hits += u32::from(res.candidates.contains(&pi));
        total += res.candidates.len();
    }
    ensure(hits == 100, || {
        format!("true permutation recovered in {hits}/100")
    })?;
    Ok(format!(
        "100/100 contain the secret; mean candidate set size {:.2}",
        total as f64 / 100.0
    ))
}

fn collision_statistics() -> Result<String, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(0xA0);
    let r = collision_stats(64, 24, 10, 10_000, &mut rng).map_err(|e| e.to_string())?;
    ensure(r.series_collisions == 0, || {
        format!("{} series collisions", r.series_collisions)
    })?;
    Ok(format!(
        "10000 pairs: {} series collisions, {} single-sum collisions",
        r.series_collisions, r.scalar_collisions
    ))
}

fn wire_robustness() -> Result<String, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(0xB0);
    for _ in 0..1000 {
        let m = common::random_message(&mut rng);
        let bytes = encode_frame(&m);
        let (back, used) = decode_frame(&bytes).map_err(|e| e.to_string())?;
        ensure(back == m && used == bytes.len(), || {
            format!("round trip failed for {m:?}")
        })?;
    }
    let mut structured = 0;
    for k in 0..1000 {
        let bytes: Vec<u8> = if k % 2 == 0 {
            (0..rng.random_range(0..256))
                .map(|_| rng.random())
                .collect()
        } else {
            let mut b = encode_frame(&common::random_message(&mut rng));
            let pos = rng.random_range(0..b.len());
            b[pos] ^= rng.random_range(1..=255u8);
            b.truncate(rng.random_range(0..=b.len()));
            b
        };
        let outcome = std::panic::catch_unwind(|| decode_frame(&bytes).is_err());
        match outcome {
            Ok(true) => structured += 1,
            Ok(false) => {}
            Err(_) => return Err("decoder panicked".into()),
        }
    }

    // end-to-end over localhost TCP
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log_path = dir.path().join("session.log");
    let a = keygen_a(64, 8, &mut rng).map_err(|e| e.to_string())?;
    let key = PublicKey::A(a.public.clone());
    let listener = TcpListener::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    let server_key = key.clone();
    let server_log = log_path.clone();
    let server = thread::spawn(move || {
        let (stream, _) = listener.accept().expect("accept");
        let mut chan = TcpChannel::from_tcp(stream, Duration::from_secs(30)).expect("socket");
        let mut log = TranscriptLog::open(&server_log);
        run_verifier(
            &mut chan,
            &server_key,
            SessionPolicy::default(),
            &mut ChaCha20Rng::seed_from_u64(1),
            Some(&mut log),
        )
    });
    let mut chan = TcpChannel::connect(addr, Duration::from_secs(30)).map_err(|e| e.to_string())?;
    let prover_result = run_prover(
        &mut chan,
        &mut ProverA::new(a),
        &mut ChaCha20Rng::seed_from_u64(2),
    );
    let verifier_result = server.join().map_err(|_| "server panicked".to_string())?;
    ensure(verifier_result.outcome == Outcome::Accept, || {
        format!("verifier {:?}", verifier_result.outcome)
    })?;
    ensure(prover_result.outcome == Outcome::Accept, || {
        format!("prover {:?}", prover_result.outcome)
    })?;
    ensure(verifier_result.transcripts.len() == 80, || {
        "wrong round count".into()
    })?;
    let text = std::fs::read_to_string(&log_path).map_err(|e| e.to_string())?;
    let report = verify_log(&key, &text).map_err(|e| e.to_string())?;
    ensure(
        report.passed() && report.rounds == 80 && report.verdict_mismatches.is_empty(),
        || format!("offline re-verification: {report:?}"),
    )?;
    Ok(format!(
        "1000/1000 round trips; 1000 fuzz inputs, 0 panics ({structured} rejected); TCP session 80/80 accepted, log re-verified"
    ))
}

fn main() {
    let criteria = [
        Criterion {
            name: "counting exactness",
            budget: Some(Duration::from_secs(1)),
            check: counting_exactness,
        },
        Criterion {
            name: "parameter reproduction",
            budget: Some(Duration::from_secs(1)),
            check: parameter_reproduction,
        },
        Criterion {
            name: "big-count tolerance",
            budget: Some(Duration::from_secs(1)),
            check: big_count_tolerance,
        },
        Criterion {
            name: "completeness",
            budget: Some(Duration::from_secs(5)),
            check: completeness,
        },
        Criterion {
            name: "soundness statistics",
            budget: Some(Duration::from_secs(60)),
            check: soundness,
        },
        Criterion {
            name: "xor linearity and telescoping",
            budget: Some(Duration::from_secs(2)),
            check: xor_linearity,
        },
        Criterion {
            name: "scheme B keygen invariant",
            budget: None,
            check: keygen_b_invariant,
        },
        Criterion {
            name: "attack oracle validation",
            budget: Some(Duration::from_secs(120)),
            check: attack_oracle,
        },
        Criterion {
            name: "collision statistics",
            budget: None,
            check: collision_statistics,
        },
        Criterion {
            name: "wire robustness",
            budget: None,
            check: wire_robustness,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.check)();
        let elapsed = start.elapsed();
        let over = c.budget.is_some_and(|b| elapsed > b);
        let (tag, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => (
                "FAIL",
                format!("over time budget {:?}: {d}", c.budget.unwrap()),
            ),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "[{tag}] {:<32} {:>9.3}s  {detail}",
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {} failed",
        criteria.len() - failed,
        failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
