//! Command-line front end: ranks, tables, Hilbert series, bases, relation
//! dumps and normalization of decorated strata.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use prestable_chow::cache::Cache;
use prestable_chow::engine::{parse_range, quotient_basis, ChowQuery, Engine, EngineOptions};
use prestable_chow::error::{Error, Result};
use prestable_chow::linalg::{Budget, SparseRatMatrix};
use prestable_chow::relations::{normalize_sum, wdvv_relations};
use prestable_chow::series::RationalFunction;
use prestable_chow::strata::{
    enumerate_basis, stratum_from_json_signed, verify_locus, Locus, MonomialStratum, StrataVector,
};

#[derive(Parser, Debug)]
#[command(name = "m0n-chow", version, about = "Chow groups of moduli of genus-zero prestable curves")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Result cache directory (defaults to $CHOW_CACHE_DIR when set)
    #[arg(long, global = true, value_name = "DIR")]
    cache: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true, value_name = "K")]
    jobs: Option<usize>,
    /// Time limit per computed cell, in seconds
    #[arg(long, global = true, value_name = "S")]
    max_seconds: Option<f64>,
    /// Skip cells with more generators than this
    #[arg(long, global = true, value_name = "G")]
    max_generators: Option<usize>,
    /// Only report ranks produced by exact elimination
    #[arg(long, global = true)]
    exact_only: bool,
    /// Also compute a modular rank with K random primes and cross-check it
    #[arg(long, global = true, value_name = "K")]
    modular: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimension of one graded piece
    Rank {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "all")]
        locus: Locus,
        /// Print the full result record as JSON
        #[arg(long)]
        json: bool,
    },
    /// Grid of dimensions, rows by degree and columns by marking count
    Table {
        /// Marking counts, `A..B` or a single number
        #[arg(long)]
        n: String,
        /// Degrees, `A..B` or a single number
        #[arg(long)]
        d: String,
        #[arg(long, default_value = "all")]
        locus: Locus,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
    },
    /// Dimensions in degrees 0..=dmax, optionally compared with a rational function
    Hilbert {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "all")]
        locus: Locus,
        #[arg(long)]
        dmax: usize,
        /// Rational function in t, e.g. "(1-t)/(1-2t)"
        #[arg(long, value_name = "NUM/DEN")]
        compare: Option<String>,
    },
    /// Normal-form generators, one JSON stratum per line
    Basis {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "all")]
        locus: Locus,
        /// Only the generators left without a pivot, a basis of the quotient
        #[arg(long)]
        basis_of_quotient: bool,
    },
    /// WDVV relations, as JSON lines or as a triplet matrix dump
    Relations {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "all")]
        locus: Locus,
        /// Write the matrix as triplets to PATH and column keys to PATH.cols
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
    },
    /// Rewrite a decorated stratum (or a list of monomials) in the normal-form basis
    Normalize {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
    },
    /// Check that a locus is closed under edge contraction
    VerifyLocus {
        #[arg(long)]
        locus: Locus,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        max_edges: usize,
    },
}

/// Partial output was produced but some cells hit a budget.
struct Incomplete;

fn engine(g: &Global) -> Engine {
    let cache = g.cache.clone().map(Cache::new).or_else(Cache::from_env);
    Engine::new(
        EngineOptions {
            max_seconds: g.max_seconds,
            max_generators: g.max_generators,
            modular_primes: g.modular,
            exact_only: g.exact_only,
        },
        cache,
    )
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<Option<Incomplete>> {
    let eng = engine(&cli.global);
    match cli.command {
        Command::Rank { n, d, locus, json } => {
            let r = eng.chow_rank(&ChowQuery::new(n, d, locus))?;
            if json {
                writeln!(out, "{}", serde_json::to_string(&r)?)?;
            } else {
                writeln!(out, "{}", r.dimension)?;
            }
            if r.provenance == prestable_chow::engine::RankProvenance::ModularLowerBound {
                return Ok(Some(Incomplete));
            }
        }
        Command::Table { n, d, locus, format } => {
            let ns: Vec<u32> = parse_range(&n)?.into_iter().map(|x| x as u32).collect();
            let ds = parse_range(&d)?;
            let t = eng.rank_table(&ns, &ds, &locus)?;
            match format {
                Format::Tsv => write!(out, "{}", t.to_tsv())?,
                Format::Json => write!(out, "{}", t.to_json_lines())?,
            }
            if !t.is_complete() {
                return Ok(Some(Incomplete));
            }
        }
        Command::Hilbert { n, locus, dmax, compare } => {
            let table = eng.hilbert_coeffs(n, &locus, dmax)?;
            let cmp = match &compare {
                Some(expr) => Some(table.compare(&expr.parse::<RationalFunction>()?)?),
                None => None,
            };
            match &cmp {
                None => writeln!(out, "d\tdim")?,
                Some(_) => writeln!(out, "d\tdim\texpected\tagree")?,
            }
            for (d, c) in table.coefficients.iter().enumerate() {
                match &cmp {
                    None => writeln!(out, "{d}\t{c}")?,
                    Some(x) => {
                        let e = &x.expected[d];
                        let agree = *e == prestable_chow::rational::int(*c as i64);
                        writeln!(out, "{d}\t{c}\t{e}\t{}", if agree { "yes" } else { "no" })?
                    }
                }
            }
            if let Some(x) = cmp {
                writeln!(out, "match\t{}", if x.matches { "yes" } else { "no" })?;
            }
        }
        Command::Basis { n, d, locus, basis_of_quotient } => {
            locus.check_n(n)?;
            let strata = if basis_of_quotient {
                let deadline = cli.global.max_seconds.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)));
                quotient_basis(&ChowQuery::new(n, d, locus), &Budget { deadline })?
            } else {
                enumerate_basis(n, d, &locus)
            };
            for s in strata {
                writeln!(out, "{}", serde_json::to_string(&s)?)?;
            }
        }
        Command::Relations { n, d, locus, dump } => {
            locus.check_n(n)?;
            let rels = wdvv_relations(n, d, &locus);
            match dump {
                None => {
                    for r in &rels {
                        writeln!(out, "{}", serde_json::to_string(r)?)?;
                    }
                }
                Some(path) => {
                    let basis = enumerate_basis(n, d, &locus);
                    let vectors: Vec<StrataVector> = rels.into_iter().map(|r| r.vector).collect();
                    let m = SparseRatMatrix::from_vectors(&vectors, &basis)?;
                    m.write_triplets(BufWriter::new(File::create(&path)?))?;
                    let mut cols = path.clone().into_os_string();
                    cols.push(".cols");
                    m.write_col_keys(BufWriter::new(File::create(PathBuf::from(cols))?))?;
                    writeln!(out, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
                }
            }
        }
        Command::Normalize { input } => {
            let text = std::fs::read_to_string(&input)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let v = normalize_value(&value)?;
            writeln!(out, "{}", serde_json::to_string(&v)?)?;
        }
        Command::VerifyLocus { locus, n, max_edges } => {
            writeln!(out, "{}", verify_locus(&locus, n, max_edges))?;
        }
    }
    Ok(None)
}

/// Accepts a monomial, a list of monomials, or a (possibly non-canonical)
/// normal-form stratum.
fn normalize_value(value: &serde_json::Value) -> Result<StrataVector> {
    if let Some(items) = value.as_array() {
        let ms = items
            .iter()
            .map(|x| serde_json::from_value::<MonomialStratum>(x.clone()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        return normalize_sum(&ms);
    }
    if value.get("exps").is_some() {
        let (s, sign) = stratum_from_json_signed(value)?;
        let mut v = StrataVector::new(s.n(), s.degree());
        v.add_term(s, prestable_chow::rational::int(sign as i64));
        return Ok(v);
    }
    let m: MonomialStratum = serde_json::from_value(value.clone())?;
    normalize_sum(&[m])
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget(_) => 3,
        Error::InvalidLocus(_)
        | Error::Parse(_)
        | Error::InvalidGraph(_)
        | Error::MalformedDecoration(_)
        | Error::UnsupportedKappa(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::ZeroConstantTerm => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(k) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(None), Ok(())) => ExitCode::SUCCESS,
        (Ok(Some(Incomplete)), _) => {
            eprintln!("m0n-chow: budget exhausted; output is partial");
            ExitCode::from(3)
        }
        (Err(e), _) => {
            eprintln!("m0n-chow: {e}");
            ExitCode::from(exit_code(&e))
        }
        (Ok(None), Err(e)) => {
            eprintln!("m0n-chow: {e}");
            ExitCode::from(1)
        }
    }
}
