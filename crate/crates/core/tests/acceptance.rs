//! Acceptance gate. Runs each criterion, prints one PASS/FAIL line per
//! criterion with its runtime, and exits nonzero if any failed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{keel, orbits, rewriting};
use num_traits::ToPrimitive;
use prestable_chow::engine::{chow_rank, hilbert_coeffs, rank_table, ChowQuery};
use prestable_chow::graph::graphs;
use prestable_chow::series::{expand_rational, Poly, RationalFunction};
use prestable_chow::strata::Locus;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Expected dimensions, rows by degree, columns n = 0..=4.
const RANK_TABLE: [[usize; 5]; 5] =
    [[1, 1, 1, 1, 1], [1, 2, 3, 4, 6], [3, 5, 9, 16, 33], [5, 12, 27, 62, 162], [13, 32, 84, 235, 739]];

fn dims(n: u32, locus: Locus, dmax: usize) -> Vec<usize> {
    hilbert_coeffs(n, &locus, dmax).unwrap().coefficients
}

fn expansion(f: &str, dmax: usize) -> Vec<usize> {
    let f: RationalFunction = f.parse().unwrap();
    f.expand(dmax).unwrap().iter().map(|c| c.to_integer().to_usize().unwrap()).collect()
}

fn rank_table_small() -> Outcome {
    let table = rank_table(&[0, 1, 2, 3, 4], &[0, 1, 2, 3, 4], &Locus::All).map_err(|e| e.to_string())?;
    for (d, row) in RANK_TABLE.iter().enumerate() {
        for (n, &want) in row.iter().enumerate() {
            let got = table.get(n as u32, d).map(|r| r.dimension);
            ensure!(got == Some(want), "n={n} d={d}: got {got:?}, want {want}");
        }
    }
    Ok("25 entries with n <= 4, d <= 4".into())
}

fn rank_table_extended() -> Outcome {
    let want = [27, 70, 166, 438, 1135, 3081];
    for (i, &w) in want.iter().enumerate() {
        let d = 5 + i;
        let got = chow_rank(&ChowQuery::new(0, d, Locus::All)).unwrap().dimension;
        ensure!(got == w, "n=0 d={d}: got {got}, want {w}");
    }
    let got = chow_rank(&ChowQuery::new(8, 2, Locus::All)).unwrap().dimension;
    ensure!(got == 1900, "n=8 d=2: got {got}, want 1900");
    Ok("n=0 through d=10 and n=8 d=2".into())
}

fn bounded_nodes() -> Outcome {
    let series = [(0, "1/(1-t^2)", 10), (1, "1/((1-t^2)(1-t))", 10), (2, "(t^4+1)/((1-t^2)^2(1-t))", 10)];
    for (e, f, dmax) in series {
        let got = dims(0, Locus::MaxNodes(e), dmax);
        let want = expansion(f, dmax);
        ensure!(got == want, "at most {e} nodes: got {got:?}, want {want:?}");
    }
    let got = dims(0, Locus::MaxNodes(3), 8);
    ensure!(got == [1, 1, 3, 5, 10, 15, 26, 36, 54], "at most 3 nodes: got {got:?}");
    Ok("e = 0, 1, 2 through t^10; e = 3 through t^8 ending 54".into())
}

fn semistable_and_chain() -> Outcome {
    let chain = dims(3, Locus::ChainT, 10);
    for d in 1..=10 {
        ensure!(chain[d] == 1 << (d - 1), "chain locus d={d}: got {}", chain[d]);
    }
    let two_t = Poly::from_ints(&[1, -2]);
    let want2: Vec<usize> = expand_rational(&Poly::from_ints(&[1]), &two_t, 8)
        .unwrap()
        .iter()
        .map(|c| c.to_integer().to_usize().unwrap())
        .collect();
    let got2 = dims(2, Locus::Semistable, 8);
    ensure!(got2 == want2, "semistable n=2: got {got2:?}, want {want2:?}");
    let want3: Vec<usize> = expand_rational(&Poly::from_ints(&[1, -1]).pow(3), &two_t.pow(3), 6)
        .unwrap()
        .iter()
        .map(|c| c.to_integer().to_usize().unwrap())
        .collect();
    let got3 = dims(3, Locus::Semistable, 6);
    ensure!(got3 == want3, "semistable n=3: got {got3:?}, want {want3:?}");
    Ok("chain locus d <= 10; semistable n=2 through t^8, n=3 through t^6".into())
}

fn degree_one() -> Outcome {
    let want = [6, 11, 23, 50];
    for (i, &w) in want.iter().enumerate() {
        let n = 4 + i as u32;
        let one_edge = graphs(n, 1);
        let unstable = one_edge.len() - one_edge.iter().filter(|g| g.is_stable()).count();
        ensure!(unstable == n as usize + 1, "n={n}: {unstable} strictly prestable one-edge graphs");
        let got = chow_rank(&ChowQuery::new(n, 1, Locus::All)).unwrap().dimension;
        ensure!(got == w, "n={n} d=1: got {got}, want {w}");
    }
    Ok("4 <= n <= 7".into())
}

fn properties() -> Outcome {
    let bad = orbits::relabelling_mismatches(1000, 0xacce97);
    ensure!(bad == 0, "{bad} canonical-key mismatches under relabelling");
    let (checked, bad) = orbits::sign_mismatches(2, 3, 3);
    ensure!(bad.is_empty(), "sign or vanishing mismatch: {}", bad[0]);
    let mut diffs = 0;
    for n in 0..=5 {
        for d in 1..=3 {
            let (count, in_span) = rewriting::reference_differences_in_span(n, d);
            ensure!(in_span, "reference-choice difference outside the relation span at n={n} d={d}");
            diffs += count;
        }
    }
    for n in 5..=6u32 {
        for d in 0..=(n as usize - 3) {
            let got = chow_rank(&ChowQuery::new(n, d, Locus::Stable)).unwrap().dimension;
            let want = keel::dimension(n, d);
            ensure!(got == want, "stable n={n} d={d}: got {got}, oracle {want}");
        }
    }
    Ok(format!("1000 relabellings, {checked} decorated strata, {diffs} reference differences, stable n=5,6"))
}

fn cli(jobs: usize, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_m0n-chow"))
        .env_remove("CHOW_CACHE_DIR")
        .arg("--jobs")
        .arg(jobs.to_string())
        .args(args)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 10] = [
        &["table", "--n", "0..4", "--d", "0..4"],
        &["table", "--n", "0", "--d", "5..10"],
        &["table", "--n", "8", "--d", "2"],
        &["hilbert", "--n", "0", "--locus", "max-nodes=0", "--dmax", "10"],
        &["hilbert", "--n", "0", "--locus", "max-nodes=1", "--dmax", "10"],
        &["hilbert", "--n", "0", "--locus", "max-nodes=2", "--dmax", "10"],
        &["hilbert", "--n", "0", "--locus", "max-nodes=3", "--dmax", "8"],
        &["hilbert", "--n", "3", "--locus", "chain-T", "--dmax", "10"],
        &["hilbert", "--n", "2", "--locus", "semistable", "--dmax", "8"],
        &["hilbert", "--n", "3", "--locus", "semistable", "--dmax", "6"],
    ];
    for args in runs {
        let one = cli(1, args);
        let four = cli(4, args);
        ensure!(one == four, "{args:?} differs between --jobs 1 and --jobs 4");
    }
    Ok("10 table/series runs byte-identical with --jobs 1 and 4".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 7] = [
        ("1  rank table n <= 4, d <= 4", rank_table_small, Duration::from_secs(600)),
        ("1  rank table extended (slow)", rank_table_extended, Duration::from_secs(600)),
        ("2  bounded-node Hilbert series", bounded_nodes, Duration::from_secs(120)),
        ("3  chain and semistable loci", semistable_and_chain, Duration::from_secs(300)),
        ("4  degree-one structure", degree_one, Duration::from_secs(600)),
        ("5  structural properties", properties, Duration::from_secs(600)),
        ("6  determinism across --jobs", determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}  [{elapsed:.1?}]  {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}  [{elapsed:.1?}]  {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
