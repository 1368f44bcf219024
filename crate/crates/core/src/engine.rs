//! Chow group dimensions: generators minus the rank of the relations.
//!
//! For a locus `U` the dimension of `CH^d(U)` is the number of normal-form
//! strata of degree `d` supported on `U` minus the rank of the WDVV
//! relations projected onto those strata.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::Cache;
use crate::error::{Error, Result};
use crate::linalg::{self, Budget, SparseRatMatrix};
use crate::relations::relations_from_base;
use crate::series::RationalFunction;
use crate::strata::{enumerate_basis, Locus, NormalFormStratum};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChowQuery {
    pub n: u32,
    pub degree: usize,
    pub locus: Locus,
}

impl ChowQuery {
    pub fn new(n: u32, degree: usize, locus: Locus) -> Self {
        Self { n, degree, locus }
    }
}

/// How the relation rank was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankProvenance {
    /// Exact elimination over the rationals.
    Exact,
    /// Modular rank that exact elimination confirmed.
    ModularConfirmed,
    /// Modular rank only; the relation rank is a lower bound.
    ModularLowerBound,
}

impl RankProvenance {
    pub fn as_str(self) -> &'static str {
        match self {
            RankProvenance::Exact => "exact",
            RankProvenance::ModularConfirmed => "modular-confirmed",
            RankProvenance::ModularLowerBound => "modular-lower-bound",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub basis_ms: u64,
    pub relations_ms: u64,
    pub rank_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChowResult {
    pub n: u32,
    pub degree: usize,
    pub locus: String,
    pub generators: usize,
    pub relation_rank: usize,
    pub dimension: usize,
    pub provenance: RankProvenance,
    pub timings: Timings,
}

#[derive(Clone, Debug, Default)]
pub struct EngineOptions {
    /// Wall-clock limit per computed cell.
    pub max_seconds: Option<f64>,
    /// Skip cells with more generators than this.
    pub max_generators: Option<usize>,
    /// Compute a modular rank with this many primes before exact elimination.
    pub modular_primes: Option<usize>,
    /// Never report a number that exact elimination has not produced.
    pub exact_only: bool,
}

/// Runs queries, consulting an optional result cache.
#[derive(Clone, Debug, Default)]
pub struct Engine {
    pub options: EngineOptions,
    pub cache: Option<Cache>,
}

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}

/// Strata of degree `d` on `locus` and the projected WDVV matrix. Strata
/// outside an open locus only produce relation terms outside it, so the
/// relations are generated from strata of degree `d - 1` on the locus.
pub fn relation_matrix(n: u32, d: usize, locus: &Locus) -> Result<(Vec<NormalFormStratum>, SparseRatMatrix)> {
    let basis = enumerate_basis(n, d, locus);
    let base = if d == 0 { Vec::new() } else { enumerate_basis(n, d - 1, locus) };
    let rels = relations_from_base(&base, locus);
    let vectors: Vec<_> = rels.into_iter().map(|r| r.vector).filter(|v| !v.is_zero()).collect();
    let m = SparseRatMatrix::from_vectors(&vectors, &basis)?;
    Ok((basis, m))
}

/// Generators whose columns carry no pivot after exact elimination of the
/// relation matrix; their classes form a basis of the graded piece.
pub fn quotient_basis(q: &ChowQuery, budget: &Budget) -> Result<Vec<NormalFormStratum>> {
    q.locus.check_n(q.n)?;
    let (basis, m) = relation_matrix(q.n, q.degree, &q.locus)?;
    let free = linalg::quotient_basis(&m, budget)?;
    Ok(free.into_iter().map(|c| basis[c].clone()).collect())
}

impl Engine {
    pub fn new(options: EngineOptions, cache: Option<Cache>) -> Self {
        Self { options, cache }
    }

    pub fn chow_rank(&self, q: &ChowQuery) -> Result<ChowResult> {
        q.locus.check_n(q.n)?;
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(q)) {
            if !(self.options.exact_only && hit.provenance == RankProvenance::ModularLowerBound) {
                return Ok(hit);
            }
        }
        let r = self.compute(q)?;
        if let Some(c) = &self.cache {
            if r.provenance != RankProvenance::ModularLowerBound {
                if let Err(e) = c.put(q, &r) {
                    log::warn!("could not write cache entry: {e}");
                }
            }
        }
        Ok(r)
    }

    fn compute(&self, q: &ChowQuery) -> Result<ChowResult> {
        let start = Instant::now();
        let budget = Budget { deadline: self.options.max_seconds.map(|s| start + Duration::from_secs_f64(s.max(0.0))) };
        let basis = enumerate_basis(q.n, q.degree, &q.locus);
        if let Some(max) = self.options.max_generators {
            if basis.len() > max {
                return Err(Error::Budget(format!("{} generators exceed the limit of {max}", basis.len())));
            }
        }
        let t_basis = start.elapsed();
        budget.check()?;
        let base = if q.degree == 0 { Vec::new() } else { enumerate_basis(q.n, q.degree - 1, &q.locus) };
        let vectors: Vec<_> =
            relations_from_base(&base, &q.locus).into_iter().map(|r| r.vector).filter(|v| !v.is_zero()).collect();
        let m = SparseRatMatrix::from_vectors(&vectors, &basis)?;
        let t_rel = start.elapsed();
        budget.check()?;
        let (relation_rank, provenance) = match self.options.modular_primes.filter(|_| !self.options.exact_only) {
            None => (linalg::rank_with(&m, linalg::PivotOrder::Markowitz, &budget)?, RankProvenance::Exact),
            Some(k) => {
                let modular = linalg::rank_modular(&m, k);
                match linalg::rank_with(&m, linalg::PivotOrder::Markowitz, &budget) {
                    Ok(exact) if exact == modular.rank => (exact, RankProvenance::ModularConfirmed),
                    Ok(exact) => (exact, RankProvenance::Exact),
                    Err(Error::Budget(_)) => (modular.rank, RankProvenance::ModularLowerBound),
                    Err(e) => return Err(e),
                }
            }
        };
        let t_rank = start.elapsed();
        Ok(ChowResult {
            n: q.n,
            degree: q.degree,
            locus: q.locus.to_string(),
            generators: basis.len(),
            relation_rank,
            dimension: basis.len() - relation_rank,
            provenance,
            timings: Timings { basis_ms: ms(t_basis), relations_ms: ms(t_rel - t_basis), rank_ms: ms(t_rank - t_rel) },
        })
    }

    pub fn hilbert_coeffs(&self, n: u32, locus: &Locus, dmax: usize) -> Result<HilbertTable> {
        locus.check_n(n)?;
        let results: Vec<Result<ChowResult>> =
            (0..=dmax).into_par_iter().map(|d| self.chow_rank(&ChowQuery::new(n, d, *locus))).collect();
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(HilbertTable {
            n,
            locus: locus.to_string(),
            coefficients: results.iter().map(|r| r.dimension).collect(),
            results,
        })
    }

    /// Grid of results for every `(n, d)`; cells that hit a budget are left empty.
    pub fn rank_table(&self, ns: &[u32], ds: &[usize], locus: &Locus) -> Result<RankTable> {
        for &n in ns {
            locus.check_n(n)?;
        }
        let cells: Vec<(usize, u32)> = ds.iter().flat_map(|&d| ns.iter().map(move |&n| (d, n))).collect();
        let results: Vec<Result<Option<ChowResult>>> = cells
            .par_iter()
            .map(|&(d, n)| match self.chow_rank(&ChowQuery::new(n, d, *locus)) {
                Ok(r) => Ok(Some(r)),
                Err(Error::Budget(msg)) => {
                    log::warn!("skipped n={n} d={d}: {msg}");
                    Ok(None)
                }
                Err(e) => Err(e),
            })
            .collect();
        let flat = results.into_iter().collect::<Result<Vec<_>>>()?;
        let cells = flat.chunks(ns.len().max(1)).map(|row| row.to_vec()).collect();
        Ok(RankTable { locus: locus.to_string(), ns: ns.to_vec(), ds: ds.to_vec(), cells })
    }
}

pub fn chow_rank(q: &ChowQuery) -> Result<ChowResult> {
    Engine::default().chow_rank(q)
}

pub fn hilbert_coeffs(n: u32, locus: &Locus, dmax: usize) -> Result<HilbertTable> {
    Engine::default().hilbert_coeffs(n, locus, dmax)
}

pub fn rank_table(ns: &[u32], ds: &[usize], locus: &Locus) -> Result<RankTable> {
    Engine::default().rank_table(ns, ds, locus)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertTable {
    pub n: u32,
    pub locus: String,
    pub coefficients: Vec<usize>,
    pub results: Vec<ChowResult>,
}

impl HilbertTable {
    /// Whether the coefficients agree with the expansion of `f`.
    pub fn compare(&self, f: &RationalFunction) -> Result<Comparison> {
        let expected = f.expand(self.coefficients.len().saturating_sub(1))?;
        let matches = expected.iter().zip(&self.coefficients).all(|(e, &c)| *e == crate::rational::int(c as i64));
        Ok(Comparison { expected, matches })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub expected: Vec<crate::rational::Rational>,
    pub matches: bool,
}

/// Dimensions indexed by degree (rows) and marking count (columns).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTable {
    pub locus: String,
    pub ns: Vec<u32>,
    pub ds: Vec<usize>,
    /// `cells[i][j]` is the result at `ds[i]`, `ns[j]`.
    pub cells: Vec<Vec<Option<ChowResult>>>,
}

#[derive(Serialize)]
struct CellJson<'a> {
    n: u32,
    d: usize,
    locus: &'a str,
    generators: usize,
    relation_rank: usize,
    dim: usize,
    provenance: RankProvenance,
}

impl RankTable {
    pub fn get(&self, n: u32, d: usize) -> Option<&ChowResult> {
        let i = self.ds.iter().position(|&x| x == d)?;
        let j = self.ns.iter().position(|&x| x == n)?;
        self.cells[i][j].as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().flatten().all(Option::is_some)
    }

    /// Tab-separated grid: header `d`, `n=..` columns; empty cells for skipped entries.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("d");
        for n in &self.ns {
            out.push_str(&format!("\tn={n}"));
        }
        out.push('\n');
        for (i, d) in self.ds.iter().enumerate() {
            out.push_str(&d.to_string());
            for cell in &self.cells[i] {
                out.push('\t');
                if let Some(r) = cell {
                    out.push_str(&r.dimension.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// One JSON object per computed cell, without timings.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.cells {
            for r in row.iter().flatten() {
                let cell = CellJson {
                    n: r.n,
                    d: r.degree,
                    locus: &r.locus,
                    generators: r.generators,
                    relation_rank: r.relation_rank,
                    dim: r.dimension,
                    provenance: r.provenance,
                };
                out.push_str(&serde_json::to_string(&cell).expect("cell serializes"));
                out.push('\n');
            }
        }
        out
    }
}

/// Parse `A..B` (inclusive) or a single number.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("expected A..B or a number, got {s:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranks() {
        let r = chow_rank(&ChowQuery::new(4, 1, Locus::All)).unwrap();
        assert_eq!((r.generators, r.relation_rank, r.dimension), (8, 2, 6));
        assert_eq!(r.provenance, RankProvenance::Exact);
        assert_eq!(chow_rank(&ChowQuery::new(0, 0, Locus::All)).unwrap().dimension, 1);
        assert!(chow_rank(&ChowQuery::new(2, 1, Locus::ChainT)).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_range("5").unwrap(), vec![5]);
        assert!(parse_range("3..1").is_err());
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn table_formats() {
        let t = rank_table(&[0, 1], &[0, 1, 2], &Locus::All).unwrap();
        assert_eq!(t.to_tsv(), "d\tn=0\tn=1\n0\t1\t1\n1\t1\t2\n2\t3\t5\n");
        let lines = t.to_json_lines();
        assert_eq!(lines.lines().count(), 6);
        let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
        assert_eq!(first["provenance"], "exact");
        assert_eq!(first["dim"], 1);
    }

    #[test]
    fn modular_mode_confirms() {
        let engine = Engine::new(EngineOptions { modular_primes: Some(2), ..Default::default() }, None);
        let r = engine.chow_rank(&ChowQuery::new(5, 1, Locus::All)).unwrap();
        assert_eq!(r.provenance, RankProvenance::ModularConfirmed);
        assert_eq!(r.dimension, 11);
    }

    #[test]
    fn generator_budget() {
        let engine = Engine::new(EngineOptions { max_generators: Some(3), ..Default::default() }, None);
        assert!(matches!(engine.chow_rank(&ChowQuery::new(4, 1, Locus::All)), Err(Error::Budget(_))));
        let t = engine.rank_table(&[0, 4], &[1], &Locus::All).unwrap();
        assert_eq!(t.to_tsv(), "d\tn=0\tn=4\n1\t1\t\n");
        assert!(!t.is_complete());
    }
}
