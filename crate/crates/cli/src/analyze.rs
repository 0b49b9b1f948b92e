use std::fmt::Display;

use permauth::analysis::{
    brute_force_recover, collision_stats, graph_probability_report, n_partitions, parameter_report,
    quoted,
};
use permauth::fingerprint::series;
use permauth::perm::Permutation;
use permauth::{SeriesKind, WeightVector};

use crate::{make_rng, AnalyzeCmd, AttackArgs, CollideArgs, KindArg};

/// `key=value` rows, with an optional previously quoted figure shown
/// alongside in human mode.
struct Table {
    machine: bool,
}

impl Table {
    fn row(&self, key: &str, value: impl Display) {
        println!("{key}={value}");
    }

    fn quoted(&self, key: &str, value: impl Display, quote: Option<impl Display>) {
        let cell = format!("{key}={value}");
        match quote {
            Some(q) if !self.machine => println!("{cell:<40} quoted: {q}"),
            _ => println!("{cell}"),
        }
    }
}

pub fn analyze(cmd: &AnalyzeCmd) -> anyhow::Result<u8> {
    match *cmd {
        AnalyzeCmd::Params {
            n,
            weight_bits,
            sum_bits,
            machine,
        } => {
            let t = Table { machine };
            let r = parameter_report(n, weight_bits, sum_bits)?;
            let q64 = n == 64;
            t.row("n", r.n);
            t.quoted("edges", r.edge_count, q64.then_some(2016));
            t.quoted(
                "keyspace_bits",
                format!("{:.4}", r.keyspace_bits),
                q64.then_some(quoted::KEYSPACE_BITS),
            );
            t.row("weight_bits", r.weight_bits);
            t.row("sum_bits", r.sum_bits);
            let q_series = q64 && sum_bits == 30;
            t.quoted(
                "series_len",
                r.series_length_required,
                q_series.then_some(quoted::SERIES_LEN),
            );
            t.quoted(
                "transmitted_bits",
                r.transmitted_bits,
                q_series.then_some(quoted::TRANSMITTED_BITS),
            );
            t.quoted(
                "birthday_weight_bits",
                r.birthday_weight_bits,
                q64.then(|| {
                    format!(
                        "{} (edge weights), {} (label weights)",
                        quoted::BIRTHDAY_BITS_EDGES,
                        quoted::BIRTHDAY_BITS_LABELS
                    )
                }),
            );
            if weight_bits < r.birthday_weight_bits && !machine {
                println!("# warning: {weight_bits}-bit weights are below the birthday bound");
            }
        }
        AnalyzeCmd::Partitions { p, q, machine } => {
            let t = Table { machine };
            let r = n_partitions(p, q)?;
            t.row("p", r.p);
            t.row("q", r.q);
            if r.bit_length <= 256 {
                t.row("count", &r.count);
            }
            let big = p == 1_073_741_823 && q == 63;
            t.quoted("bits", r.bit_length, big.then_some(quoted::PARTITION_BITS));
        }
        AnalyzeCmd::GraphProb { n, x_bits, machine } => {
            let t = Table { machine };
            let r = graph_probability_report(n, x_bits)?;
            let x = f64::from(x_bits);
            let q = n == 64 && x_bits == 30;
            t.row("n", r.n);
            t.row("x_bits", r.x_bits);
            t.row("edges", r.edges);
            t.row("partition_bits", format!("{:.3}", r.partition_bits));
            t.quoted(
                "graph_exponent_bits",
                format!("{:.1}", r.graph_exponent),
                q.then(|| {
                    format!(
                        "x^{} = {} bits",
                        quoted::GRAPH_EXPONENT,
                        quoted::GRAPH_EXPONENT * 30
                    )
                }),
            );
            t.row("graph_exponent_x", format!("{:.1}", r.graph_exponent / x));
            t.row(
                "containment_exponent_bits",
                format!("{:.1}", r.containment_exponent),
            );
            t.quoted(
                "combined_exponent_bits",
                format!("{:.1}", r.combined_exponent),
                q.then(|| {
                    format!(
                        "x^{}, probability {}",
                        quoted::COMBINED_EXPONENT,
                        quoted::COMBINED_PROBABILITY
                    )
                }),
            );
            t.quoted(
                "existing_graph_exponent_bits",
                format!("{:.1}", r.existing_graph_exponent),
                q.then_some(quoted::EXISTING_GRAPH_PROBABILITY),
            );
            t.row("degenerate", r.degenerate);
        }
    }
    Ok(0)
}

pub fn attack(args: &AttackArgs, seed: Option<u64>) -> anyhow::Result<u8> {
    let mut rng = make_rng(seed);
    let kind = match args.kind {
        KindArg::Sum => SeriesKind::IntSum,
        KindArg::Xor => SeriesKind::XorVector,
    };
    let mut found = 0;
    let mut candidates = 0;
    let mut elapsed = 0.0;
    for _ in 0..args.trials {
        let base = WeightVector::random(args.n, args.weight_bits, &mut rng)?;
        let secret = Permutation::random(args.n, &mut rng)?;
        let observed = series(&base, &secret, args.len, kind)?;
        let r = brute_force_recover(&base, &observed)?;
        found += u32::from(r.candidates.contains(&secret));
        candidates += r.candidates.len();
        elapsed += r.elapsed.as_secs_f64();
        if args.trials == 1 {
            println!("secret={secret}");
            println!("trials={}", r.trials);
            for c in &r.candidates {
                println!("candidate={c}");
            }
        }
    }
    println!("recovered={found}/{}", args.trials);
    println!(
        "mean_candidates={:.3}",
        candidates as f64 / f64::from(args.trials.max(1))
    );
    println!("seconds={elapsed:.3}");
    Ok(0)
}

pub fn collide(args: &CollideArgs, seed: Option<u64>) -> anyhow::Result<u8> {
    let mut rng = make_rng(seed);
    let r = collision_stats(args.n, args.weight_bits, args.len, args.trials, &mut rng)?;
    println!("trials={}", r.trials);
    println!("scalar_collisions={}", r.scalar_collisions);
    println!("scalar_rate={:.6}", r.scalar_rate());
    println!("series_collisions={}", r.series_collisions);
    println!("series_rate={:.6}", r.series_rate());
    Ok(0)
}
