//! Exact sparse matrices over the rationals and their ranks.
//!
//! Rank is computed by sparse Gaussian elimination with Markowitz-style
//! pivot selection: repeatedly pivot in a column with the fewest nonzeros,
//! using the shortest row in that column. The matrix is first split into
//! independent blocks (rows linked by shared columns) which are eliminated
//! in parallel. The same elimination runs over prime fields for the
//! modular rank bound in [`modular`].

pub mod modular;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::io::{BufRead, Write};
use std::time::Instant;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::strata::{NormalFormStratum, StrataVector};

pub use modular::{rank_confirmed, rank_mod_p, rank_modular, rank_modular_with_primes, Certainty, ModularRank};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseRatMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rational>,
    col_keys: Vec<String>,
}

impl SparseRatMatrix {
    /// Zero matrix with column keys `"0"`, `"1"`, ...
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: BTreeMap::new(), col_keys: (0..cols).map(|c| c.to_string()).collect() }
    }

    pub fn with_keys(rows: usize, col_keys: Vec<String>) -> Result<Self> {
        let distinct: BTreeSet<&String> = col_keys.iter().collect();
        if distinct.len() != col_keys.len() {
            return Err(Error::ColumnKeyMismatch("duplicate column keys".into()));
        }
        Ok(Self { rows, cols: col_keys.len(), entries: BTreeMap::new(), col_keys })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// One row per vector, one column per stratum of `columns`.
    pub fn from_vectors(vectors: &[StrataVector], columns: &[NormalFormStratum]) -> Result<Self> {
        let index: HashMap<&NormalFormStratum, usize> = columns.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut m = Self::with_keys(vectors.len(), columns.iter().map(NormalFormStratum::id).collect())?;
        for (r, v) in vectors.iter().enumerate() {
            for (s, c) in v.terms() {
                let &col = index.get(s).ok_or_else(|| Error::ColumnKeyMismatch(format!("no column for {s}")))?;
                m.entries.insert((r, col), c.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn col_keys(&self) -> &[String] {
        &self.col_keys
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Set an entry; zero removes it. Panics when out of range.
    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        assert!(r < self.rows && c < self.cols, "entry ({r}, {c}) out of range");
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn push_row(&mut self, row: &[(usize, Rational)]) {
        self.rows += 1;
        for (c, v) in row {
            let cur = self.get(self.rows - 1, *c);
            self.set(self.rows - 1, *c, cur + v);
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|(&(r, c), v)| ((c, r), v.clone())).collect(),
            col_keys: (0..self.rows).map(|c| c.to_string()).collect(),
        }
    }

    pub fn row_vectors(&self) -> Vec<Vec<(usize, Rational)>> {
        let mut out = vec![Vec::new(); self.rows];
        for (&(r, c), v) in &self.entries {
            out[r].push((c, v.clone()));
        }
        out
    }

    /// Coordinate-triplet text: a `rows cols nnz` header, then `r c p/q` lines.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.rows, self.cols, self.entries.len())?;
        for (&(r, c), v) in &self.entries {
            writeln!(w, "{r} {c} {}", format_rational(v))?;
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))??;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [rows, cols, nnz] = nums[..] else {
            return Err(Error::Parse(format!("header must be `rows cols nnz`, got {header:?}")));
        };
        let mut m = Self::new(rows, cols);
        let mut count = 0;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [r, c, v] = parts[..] else {
                return Err(Error::Parse(format!("bad triplet {line:?}")));
            };
            let r: usize = r.parse().map_err(|_| Error::Parse(format!("bad row in {line:?}")))?;
            let c: usize = c.parse().map_err(|_| Error::Parse(format!("bad column in {line:?}")))?;
            if r >= rows || c >= cols || m.entries.contains_key(&(r, c)) {
                return Err(Error::Parse(format!("triplet {line:?} out of range or repeated")));
            }
            m.set(r, c, parse_rational(v)?);
            count += 1;
        }
        if count != nnz {
            return Err(Error::Parse(format!("header announces {nnz} entries, found {count}")));
        }
        Ok(m)
    }

    /// Column keys, one per line.
    pub fn write_col_keys<W: Write>(&self, mut w: W) -> Result<()> {
        for k in &self.col_keys {
            writeln!(w, "{k}")?;
        }
        Ok(())
    }
}

/// Arithmetic needed by the elimination.
pub(crate) trait Field: Sync {
    type E: Clone + Send + Sync;
    fn is_zero(&self, a: &Self::E) -> bool;
    /// `a - f * b`
    fn sub_mul(&self, a: &Self::E, f: &Self::E, b: &Self::E) -> Self::E;
    /// `-f * b`
    fn neg_mul(&self, f: &Self::E, b: &Self::E) -> Self::E;
    /// `a / b`, `b` nonzero
    fn div(&self, a: &Self::E, b: &Self::E) -> Self::E;
}

pub(crate) struct Rationals;

impl Field for Rationals {
    type E = Rational;

    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }

    fn sub_mul(&self, a: &Rational, f: &Rational, b: &Rational) -> Rational {
        a - f * b
    }

    fn neg_mul(&self, f: &Rational, b: &Rational) -> Rational {
        -(f * b)
    }

    fn div(&self, a: &Rational, b: &Rational) -> Rational {
        a / b
    }
}

/// How pivots are chosen. Results never depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotOrder {
    /// Fewest-nonzero column, then shortest row.
    #[default]
    Markowitz,
    /// Leftmost column, then lowest row index.
    Leftmost,
}

/// Limits checked during elimination.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn check(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(Error::Budget("time limit reached during elimination".into())),
            _ => Ok(()),
        }
    }
}

type Row<E> = Vec<(usize, E)>;

fn sub_rows<F: Field>(f: &F, a: &Row<F::E>, factor: &F::E, b: &Row<F::E>) -> Row<F::E> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            let x = f.neg_mul(factor, &b[j].1);
            out.push((b[j].0, x));
            j += 1;
        } else {
            let x = f.sub_mul(&a[i].1, factor, &b[j].1);
            if !f.is_zero(&x) {
                out.push((a[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Pivot columns of one block by sparse elimination, in pivot order. Rows
/// must be sorted by column and free of stored zeros.
pub(crate) fn eliminate<F: Field>(
    f: &F,
    mut rows: Vec<Row<F::E>>,
    ncols: usize,
    order: PivotOrder,
    budget: &Budget,
) -> Result<Vec<usize>> {
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ncols];
    for (r, row) in rows.iter().enumerate() {
        for (c, _) in row {
            col_rows[*c].insert(r);
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..ncols).filter(|&c| !col_rows[c].is_empty()).map(|c| Reverse((col_rows[c].len(), c))).collect();
    budget.check()?;
    let mut next_left = 0usize;
    let mut pivots = Vec::new();
    loop {
        let c = match order {
            PivotOrder::Markowitz => {
                let mut found = None;
                while let Some(Reverse((cnt, c))) = heap.pop() {
                    if cnt > 0 && col_rows[c].len() == cnt {
                        found = Some(c);
                        break;
                    }
                }
                match found {
                    Some(c) => c,
                    None => break,
                }
            }
            PivotOrder::Leftmost => {
                while next_left < ncols && col_rows[next_left].is_empty() {
                    next_left += 1;
                }
                if next_left == ncols {
                    break;
                }
                next_left
            }
        };
        if pivots.len() % 64 == 63 {
            budget.check()?;
        }
        let p = match order {
            PivotOrder::Markowitz => {
                *col_rows[c].iter().min_by_key(|&&r| (rows[r].len(), r)).expect("column is nonempty")
            }
            PivotOrder::Leftmost => *col_rows[c].iter().next().expect("column is nonempty"),
        };
        let pivot_row = std::mem::take(&mut rows[p]);
        for (cc, _) in &pivot_row {
            col_rows[*cc].remove(&p);
        }
        let pv = pivot_row.iter().find(|(cc, _)| *cc == c).expect("pivot entry").1.clone();
        let targets: Vec<usize> = col_rows[c].iter().copied().collect();
        for r in targets {
            let a = &rows[r];
            let ar = &a[a.binary_search_by_key(&c, |(cc, _)| *cc).expect("entry in column")].1;
            let factor = f.div(ar, &pv);
            let new = sub_rows(f, a, &factor, &pivot_row);
            let before: BTreeSet<usize> =
                pivot_row.iter().map(|(cc, _)| *cc).filter(|cc| col_rows[*cc].contains(&r)).collect();
            let after: BTreeSet<usize> = new.iter().map(|(cc, _)| *cc).collect();
            for (cc, _) in &pivot_row {
                let had = before.contains(cc);
                let has = after.contains(cc);
                if had && !has {
                    col_rows[*cc].remove(&r);
                } else if !had && has {
                    col_rows[*cc].insert(r);
                }
            }
            rows[r] = new;
        }
        if order == PivotOrder::Markowitz {
            for (cc, _) in &pivot_row {
                if !col_rows[*cc].is_empty() {
                    heap.push(Reverse((col_rows[*cc].len(), *cc)));
                }
            }
        }
        pivots.push(c);
    }
    Ok(pivots)
}

/// Split rows into blocks that share no column. Each block is returned with
/// columns renumbered densely, together with the original index of each
/// renumbered column.
pub(crate) fn blocks<E: Clone>(rows: Vec<Row<E>>, ncols: usize) -> Vec<(Vec<Row<E>>, Vec<usize>)> {
    let mut parent: Vec<usize> = (0..ncols).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for row in &rows {
        if let Some(&(first, _)) = row.first() {
            for (c, _) in &row[1..] {
                let (a, b) = (find(&mut parent, first), find(&mut parent, *c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut block_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out: Vec<(Vec<Row<E>>, BTreeMap<usize, usize>)> = Vec::new();
    for row in rows {
        let Some(&(first, _)) = row.first() else { continue };
        let root = find(&mut parent, first);
        let b = *block_of.entry(root).or_insert_with(|| {
            out.push((Vec::new(), BTreeMap::new()));
            out.len() - 1
        });
        let (brows, cmap) = &mut out[b];
        let renumbered = row
            .into_iter()
            .map(|(c, v)| {
                let next = cmap.len();
                (*cmap.entry(c).or_insert(next), v)
            })
            .collect::<Vec<_>>();
        brows.push(renumbered);
    }
    out.into_iter()
        .map(|(mut brows, cmap)| {
            for r in brows.iter_mut() {
                r.sort_by_key(|(c, _)| *c);
            }
            let mut original = vec![0; cmap.len()];
            for (orig, new) in cmap {
                original[new] = orig;
            }
            (brows, original)
        })
        .collect()
}

/// Pivot columns over all blocks, sorted.
pub(crate) fn pivot_cols<F: Field>(
    f: &F,
    rows: Vec<Row<F::E>>,
    ncols: usize,
    order: PivotOrder,
    budget: &Budget,
) -> Result<Vec<usize>>
where
    F::E: Send,
{
    let parts = blocks(rows, ncols);
    let per: Vec<Result<Vec<usize>>> = parts
        .into_par_iter()
        .map(|(brows, original)| {
            let local = eliminate(f, brows, original.len(), order, budget)?;
            Ok(local.into_iter().map(|c| original[c]).collect())
        })
        .collect();
    let mut all = Vec::new();
    for p in per {
        all.extend(p?);
    }
    all.sort_unstable();
    Ok(all)
}

pub(crate) fn rank_rows<F: Field>(
    f: &F,
    rows: Vec<Row<F::E>>,
    ncols: usize,
    order: PivotOrder,
    budget: &Budget,
) -> Result<usize>
where
    F::E: Send,
{
    Ok(pivot_cols(f, rows, ncols, order, budget)?.len())
}

/// Exact rank over the rationals.
pub fn rank(m: &SparseRatMatrix) -> usize {
    rank_with(m, PivotOrder::Markowitz, &Budget::default()).expect("no budget set")
}

pub fn rank_with(m: &SparseRatMatrix, order: PivotOrder, budget: &Budget) -> Result<usize> {
    rank_rows(&Rationals, m.row_vectors(), m.cols, order, budget)
}

/// Columns without a pivot after exact elimination. Their unit vectors
/// project to a basis of the quotient of the column space by the row span.
pub fn quotient_basis(m: &SparseRatMatrix, budget: &Budget) -> Result<Vec<usize>> {
    let pivots = pivot_cols(&Rationals, m.row_vectors(), m.cols, PivotOrder::Markowitz, budget)?;
    let pivots: BTreeSet<usize> = pivots.into_iter().collect();
    Ok((0..m.cols).filter(|c| !pivots.contains(c)).collect())
}

/// Whether `v` (indexed by column key) lies in the row span of `m`.
pub fn in_row_span(m: &SparseRatMatrix, v: &BTreeMap<String, Rational>) -> Result<bool> {
    let index: HashMap<&str, usize> = m.col_keys.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let mut row = Vec::new();
    for (k, x) in v {
        let &c = index.get(k.as_str()).ok_or_else(|| Error::ColumnKeyMismatch(format!("unknown column {k}")))?;
        if !x.is_zero() {
            row.push((c, x.clone()));
        }
    }
    if row.is_empty() {
        return Ok(true);
    }
    let base = rank(m);
    let mut ext = m.clone();
    ext.push_row(&row);
    Ok(rank(&ext) == base)
}

/// Row-span membership for a strata vector.
pub fn vector_in_row_span(m: &SparseRatMatrix, v: &StrataVector) -> Result<bool> {
    let keyed = v.terms().iter().map(|(s, c)| (s.id(), c.clone())).collect();
    in_row_span(m, &keyed)
}
