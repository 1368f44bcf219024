//! Reference-choice differences of the boundary rule for psi classes.

use prestable_chow::engine::relation_matrix;
use prestable_chow::graph::HalfEdge;
use prestable_chow::linalg::{rank, SparseRatMatrix};
use prestable_chow::relations::{normalize_sum, remove_psi};
use prestable_chow::strata::{enumerate_basis, Locus, NormalFormStratum, StrataVector};

pub fn stacked_rank(m: &SparseRatMatrix, extra: &[StrataVector], basis: &[NormalFormStratum]) -> usize {
    let mut all = SparseRatMatrix::from_vectors(extra, basis).unwrap();
    for row in m.row_vectors() {
        all.push_row(&row);
    }
    rank(&all)
}

pub fn rewrite_with(s: &NormalFormStratum, v: usize, h: HalfEdge, refs: (HalfEdge, HalfEdge)) -> StrataVector {
    let mut terms = Vec::new();
    for mut m in s.to_monomials() {
        *m.psi.entry((v, h)).or_insert(0) += 1;
        terms.extend(remove_psi(&m, v, h, refs).unwrap());
    }
    let n = s.n();
    let d = s.degree() + 1;
    if terms.is_empty() {
        StrataVector::new(n, d)
    } else {
        normalize_sum(&terms).unwrap()
    }
}

/// For every stratum of degree `d - 1`, every vertex of valence at least 3,
/// every half-edge `h` there and every ordered pair of other half-edges,
/// the difference between rewriting `psi_h` with that pair and with the
/// first pair. Returns the number of nonzero differences and whether they
/// all lie in the span of the WDVV relations.
pub fn reference_differences_in_span(n: u32, d: usize) -> (usize, bool) {
    let (basis, m) = relation_matrix(n, d, &Locus::All).unwrap();
    let mut diffs = Vec::new();
    for s in enumerate_basis(n, d - 1, &Locus::All) {
        let g = s.graph();
        for v in 0..g.num_vertices() {
            let hs = g.half_edges(v);
            if hs.len() < 3 {
                continue;
            }
            for &h in &hs {
                let others: Vec<HalfEdge> = hs.iter().copied().filter(|&x| x != h).collect();
                let first = rewrite_with(&s, v, h, (others[0], others[1]));
                for i in 0..others.len() {
                    for j in 0..others.len() {
                        if i != j && (i, j) != (0, 1) {
                            let diff = &first - &rewrite_with(&s, v, h, (others[i], others[j]));
                            if !diff.is_zero() {
                                diffs.push(diff);
                            }
                        }
                    }
                }
            }
        }
    }
    (diffs.len(), stacked_rank(&m, &diffs, &basis) == rank(&m))
}
