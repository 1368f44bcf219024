//! Relations among normal-form strata.
//!
//! The additive relations come from gluing a local relation on a smooth
//! vertex into a decorated stratum. The WDVV relation, glued into every
//! vertex of valence at least 4 of every stratum of degree `d - 1`,
//! generates all relations in degree `d`. Psi monomials that are not of
//! normal shape are rewritten by [`normalize`].

mod normalize;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::HalfEdge;
use crate::rational::{int, Rational};
use crate::strata::{enumerate_basis, Locus, NormalFormStratum, StrataVector};

pub use normalize::{normalize, normalize_sum, psi_rewrite_step, psi_rewrite_step_with_refs, remove_psi, unit_vector};
use normalize::{normalize_terms, WorkTerm};

/// One term of a local relation: the vertex split into two vertices joined
/// by a new edge, with the markings distributed as given. Psi exponents may
/// sit on markings or on the two halves of the new edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitTerm {
    pub left: BTreeSet<u32>,
    pub right: BTreeSet<u32>,
    pub left_psi: BTreeMap<u32, u32>,
    pub right_psi: BTreeMap<u32, u32>,
    /// Psi exponents at the new edge's half-edges (left end, right end).
    pub edge_psi: (u32, u32),
    pub coeff: Rational,
}

/// A pure psi monomial at the vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexTerm {
    pub psi: BTreeMap<u32, u32>,
    pub coeff: Rational,
}

/// A relation on the space of smooth curves with abstract markings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRelation {
    pub markings: Vec<u32>,
    pub splits: Vec<SplitTerm>,
    pub vertex_terms: Vec<VertexTerm>,
}

impl LocalRelation {
    pub fn new(markings: Vec<u32>, splits: Vec<SplitTerm>, vertex_terms: Vec<VertexTerm>) -> Result<Self> {
        let set: BTreeSet<u32> = markings.iter().copied().collect();
        if set.len() != markings.len() {
            return Err(Error::InvalidRelation("repeated marking labels".into()));
        }
        for t in &splits {
            let mut both = t.left.clone();
            both.extend(&t.right);
            if both != set || t.left.len() + t.right.len() != set.len() {
                return Err(Error::InvalidRelation("a splitting must name every marking exactly once".into()));
            }
            if t.left_psi.keys().any(|k| !t.left.contains(k)) || t.right_psi.keys().any(|k| !t.right.contains(k)) {
                return Err(Error::InvalidRelation("psi class on a marking of the other side".into()));
            }
        }
        for t in &vertex_terms {
            if t.psi.keys().any(|k| !set.contains(k)) {
                return Err(Error::InvalidRelation("psi class on an unknown marking".into()));
            }
        }
        use num_traits::Zero;
        let splits = splits.into_iter().filter(|t| !t.coeff.is_zero()).collect();
        let vertex_terms = vertex_terms.into_iter().filter(|t| !t.coeff.is_zero()).collect();
        Ok(Self { markings, splits, vertex_terms })
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty() && self.vertex_terms.is_empty()
    }
}

/// A way of splitting four markings `(i, j, k, l)` into two pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pairing {
    /// `(ij | kl)`
    #[serde(rename = "ij|kl")]
    IjKl,
    /// `(ik | jl)`
    #[serde(rename = "ik|jl")]
    IkJl,
    /// `(il | jk)`
    #[serde(rename = "il|jk")]
    IlJk,
}

impl Pairing {
    fn pairs(self, [i, j, k, l]: [u32; 4]) -> ([u32; 2], [u32; 2]) {
        match self {
            Pairing::IjKl => ([i, j], [k, l]),
            Pairing::IkJl => ([i, k], [j, l]),
            Pairing::IlJk => ([i, l], [j, k]),
        }
    }
}

/// The two independent differences used to generate relations.
pub const PAIRING_DIFFERENCES: [(Pairing, Pairing); 2] =
    [(Pairing::IjKl, Pairing::IkJl), (Pairing::IjKl, Pairing::IlJk)];

/// `sum D(I1|I2)` over splittings with the first pair of `plus` in `I1` and
/// its second pair in `I2`, minus the same sum for `minus`. Remaining
/// markings are distributed in every possible way, including leaving a
/// side with just its pair.
pub fn wdvv_local(markings: &[u32], quad: [u32; 4], plus: Pairing, minus: Pairing) -> Result<LocalRelation> {
    if markings.len() < 4 {
        return Err(Error::InvalidRelation(format!("need at least 4 markings, got {}", markings.len())));
    }
    let set: BTreeSet<u32> = markings.iter().copied().collect();
    if set.len() != markings.len() {
        return Err(Error::InvalidRelation("repeated marking labels".into()));
    }
    let qset: BTreeSet<u32> = quad.iter().copied().collect();
    if qset.len() != 4 || !qset.is_subset(&set) {
        return Err(Error::InvalidRelation("quadruple must be 4 distinct markings".into()));
    }
    let rest: Vec<u32> = markings.iter().copied().filter(|m| !qset.contains(m)).collect();
    let mut splits = Vec::new();
    if plus != minus {
        for (pairing, sign) in [(plus, 1), (minus, -1)] {
            let (a, b) = pairing.pairs(quad);
            for mask in 0u64..(1 << rest.len()) {
                let mut left: BTreeSet<u32> = a.into_iter().collect();
                let mut right: BTreeSet<u32> = b.into_iter().collect();
                for (i, &m) in rest.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        left.insert(m);
                    } else {
                        right.insert(m);
                    }
                }
                splits.push(SplitTerm {
                    left,
                    right,
                    left_psi: BTreeMap::new(),
                    right_psi: BTreeMap::new(),
                    edge_psi: (0, 0),
                    coeff: int(sign),
                });
            }
        }
    }
    LocalRelation::new(markings.to_vec(), splits, Vec::new())
}

/// Where a relation came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// WDVV relation glued into `vertex` of `stratum`; `subset` lists
    /// positions in the vertex's half-edge order.
    Wdvv { stratum: String, vertex: usize, subset: [usize; 4], plus: Pairing, minus: Pairing },
    /// A general local relation glued into a stratum.
    Glued { stratum: String, vertex: usize },
    /// Difference of two rewritings of the same monomial.
    PsiRewrite { source: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationVector {
    pub vector: StrataVector,
    pub provenance: Provenance,
}

impl Serialize for RelationVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let mut value = serde_json::to_value(&self.vector).map_err(S::Error::custom)?;
        let prov = serde_json::to_value(&self.provenance).map_err(S::Error::custom)?;
        value.as_object_mut().expect("vector serializes to an object").insert("provenance".into(), prov);
        value.serialize(s)
    }
}

/// Glue `rel` into vertex `v` of `s`. `ident[i]` is the half-edge at `v`
/// identified with `rel.markings[i]`; `None` uses the vertex's half-edge
/// order. Terms are rewritten into normal form and canonicalized.
pub fn glue_relation_at_vertex(
    s: &NormalFormStratum,
    v: usize,
    rel: &LocalRelation,
    ident: Option<&[HalfEdge]>,
) -> Result<StrataVector> {
    let g = s.graph();
    if v >= g.num_vertices() {
        return Err(Error::InvalidRelation(format!("vertex {v} does not exist")));
    }
    let hs = g.half_edges(v);
    if hs.len() < 3 || s.exps()[v] != 0 {
        return Err(Error::VertexDecorated(v));
    }
    if rel.markings.len() != hs.len() {
        return Err(Error::ArityMismatch { expected: hs.len(), found: rel.markings.len() });
    }
    let ident: Vec<HalfEdge> = match ident {
        Some(x) => {
            let distinct: BTreeSet<HalfEdge> = x.iter().copied().collect();
            let at_v: BTreeSet<HalfEdge> = hs.iter().copied().collect();
            if x.len() != hs.len() || distinct != at_v {
                return Err(Error::InvalidRelation("identification must be a bijection onto the half-edges".into()));
            }
            x.to_vec()
        }
        None => hs.clone(),
    };
    let of: BTreeMap<u32, HalfEdge> = rel.markings.iter().copied().zip(ident).collect();
    let base = WorkTerm::from_stratum(s, int(1));
    let mut terms = Vec::with_capacity(rel.splits.len() + rel.vertex_terms.len());
    let mut degrees = BTreeSet::new();
    for t in &rel.splits {
        let right: BTreeSet<HalfEdge> = t.right.iter().map(|m| of[m]).collect();
        let (mut w_term, w) = base.split(v, &right);
        for (m, &e) in &t.left_psi {
            add_psi(&mut w_term, v, of[m], e);
        }
        for (m, &e) in &t.right_psi {
            add_psi(&mut w_term, w, of[m], e);
        }
        add_psi(&mut w_term, v, HalfEdge::To(w), t.edge_psi.0);
        add_psi(&mut w_term, w, HalfEdge::To(v), t.edge_psi.1);
        w_term.coeff = t.coeff.clone();
        degrees.insert(
            s.degree()
                + 1
                + t.left_psi.values().chain(t.right_psi.values()).sum::<u32>() as usize
                + (t.edge_psi.0 + t.edge_psi.1) as usize,
        );
        terms.push(w_term);
    }
    for t in &rel.vertex_terms {
        let mut w_term = base.clone();
        for (m, &e) in &t.psi {
            add_psi(&mut w_term, v, of[m], e);
        }
        w_term.coeff = t.coeff.clone();
        degrees.insert(s.degree() + t.psi.values().sum::<u32>() as usize);
        terms.push(w_term);
    }
    if degrees.len() > 1 {
        return Err(Error::InvalidRelation("relation is not homogeneous".into()));
    }
    let degree = degrees.into_iter().next().unwrap_or(s.degree() + 1);
    normalize_terms(terms, s.n(), degree)
}

fn add_psi(t: &mut WorkTerm, v: usize, h: HalfEdge, e: u32) {
    if e > 0 {
        *t.psi.entry((v, h)).or_insert(0) += e;
    }
}

fn quads(k: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

/// All WDVV relations glued into one stratum, unprojected.
pub fn wdvv_relations_at(s: &NormalFormStratum) -> Vec<RelationVector> {
    let g = s.graph();
    let mut out = Vec::new();
    for v in 0..g.num_vertices() {
        let k = g.valence(v);
        if k < 4 {
            continue;
        }
        let labels: Vec<u32> = (0..k as u32).collect();
        for q in quads(k) {
            for (plus, minus) in PAIRING_DIFFERENCES {
                let quad = q.map(|i| i as u32);
                let rel = wdvv_local(&labels, quad, plus, minus).expect("valid quadruple");
                let vector = glue_relation_at_vertex(s, v, &rel, None).expect("WDVV glues into any smooth vertex");
                out.push(RelationVector {
                    vector,
                    provenance: Provenance::Wdvv { stratum: s.id(), vertex: v, subset: q, plus, minus },
                });
            }
        }
    }
    out
}

/// WDVV relations in degree `d`, generated from every stratum of degree
/// `d - 1` and projected onto `locus`. Duplicates and zero vectors are kept.
pub fn wdvv_relations(n: u32, d: usize, locus: &Locus) -> Vec<RelationVector> {
    if d == 0 {
        return Vec::new();
    }
    let base = enumerate_basis(n, d - 1, &Locus::All);
    relations_from_base(&base, locus)
}

/// WDVV relations generated from the given strata, projected onto `locus`,
/// in a deterministic order.
pub fn relations_from_base(base: &[NormalFormStratum], locus: &Locus) -> Vec<RelationVector> {
    let per: Vec<Vec<RelationVector>> = base
        .par_iter()
        .map(|s| {
            wdvv_relations_at(s)
                .into_iter()
                .map(|r| RelationVector { vector: r.vector.project(locus), provenance: r.provenance })
                .collect()
        })
        .collect();
    per.into_iter().flatten().collect()
}
