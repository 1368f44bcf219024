//! Decorated strata in normal form.
//!
//! A normal-form stratum is a canonical prestable graph together with one
//! exponent per vertex whose meaning depends on the valence `n(v)`:
//!
//! * `n(v) = 0`: `kappa_2^a`
//! * `n(v) = 1`: `psi_h^b` at the unique half-edge
//! * `n(v) = 2`: `psi_h^c + (-psi_h')^c`, with `(h, h')` the local half-edge order
//! * `n(v) >= 3`: no decoration (exponent must be 0)
//!
//! Canonicalization picks the lexicographically least exponent vector over
//! all automorphism images and tracks the sign picked up by two-term
//! decorations whose half-edge order gets reversed.

mod locus;
mod monomial;
mod vector;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, GraphKey, HalfEdge, PrestableGraph};
use crate::rational::{int, Rational};

pub use locus::{verify_locus, verify_predicate, Locus};
pub use monomial::MonomialStratum;
pub use vector::StrataVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecorationKind {
    #[serde(rename = "kappa2")]
    Kappa2,
    #[serde(rename = "psi")]
    Psi,
    #[serde(rename = "twoterm")]
    TwoTerm,
}

impl DecorationKind {
    pub fn for_valence(valence: usize) -> Option<Self> {
        match valence {
            0 => Some(Self::Kappa2),
            1 => Some(Self::Psi),
            2 => Some(Self::TwoTerm),
            _ => None,
        }
    }

    /// Cohomological degree of one power.
    pub fn weight(self) -> usize {
        match self {
            Self::Kappa2 => 2,
            Self::Psi | Self::TwoTerm => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormalFormStratum {
    graph: Arc<PrestableGraph>,
    key: GraphKey,
    exps: Vec<u32>,
}

impl PartialEq for NormalFormStratum {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.exps == other.exps
    }
}

impl Eq for NormalFormStratum {}

impl Hash for NormalFormStratum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
        self.exps.hash(state);
    }
}

impl PartialOrd for NormalFormStratum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormalFormStratum {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key).then_with(|| self.exps.cmp(&other.exps))
    }
}

impl NormalFormStratum {
    /// The undecorated stratum of `graph` (all exponents zero).
    pub fn undecorated(graph: &PrestableGraph) -> Self {
        let exps = vec![0; graph.num_vertices()];
        let (s, sign) = canonicalize_signed(graph, &exps).expect("zero exponents are valid");
        debug_assert_eq!(sign, 1);
        s
    }

    /// Canonicalize `(graph, exps)`, failing if the element vanishes or if
    /// the canonical representative carries a different sign.
    pub fn from_parts(graph: &PrestableGraph, exps: &[u32]) -> Result<(Self, i8)> {
        canonicalize_signed(graph, exps)
    }

    pub fn graph(&self) -> &PrestableGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<PrestableGraph> {
        Arc::clone(&self.graph)
    }

    pub fn key(&self) -> &GraphKey {
        &self.key
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn n(&self) -> u32 {
        self.graph.n()
    }

    pub fn kind(&self, v: usize) -> Option<DecorationKind> {
        DecorationKind::for_valence(self.graph.valence(v))
    }

    pub fn degree(&self) -> usize {
        decorated_degree(&self.graph, &self.exps)
    }

    pub fn is_trivially_decorated(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Stable text identifier, used as a column key.
    pub fn id(&self) -> String {
        let exps: Vec<String> = self.exps.iter().map(|e| e.to_string()).collect();
        format!("{}#{}", self.key, exps.join(","))
    }

    /// Expand into psi/kappa monomials on the same graph.
    pub fn to_monomials(&self) -> Vec<MonomialStratum> {
        let g = &*self.graph;
        let mut acc: Vec<(Vec<((usize, HalfEdge), u32)>, Vec<(usize, u32)>, Rational)> =
            vec![(Vec::new(), Vec::new(), int(1))];
        for (v, &e) in self.exps.iter().enumerate() {
            match self.kind(v) {
                Some(DecorationKind::Kappa2) if e > 0 => {
                    for t in acc.iter_mut() {
                        t.1.push((v, e));
                    }
                }
                Some(DecorationKind::Psi) if e > 0 => {
                    let h = g.half_edges(v)[0];
                    for t in acc.iter_mut() {
                        t.0.push(((v, h), e));
                    }
                }
                Some(DecorationKind::TwoTerm) => {
                    let hs = g.half_edges(v);
                    if e == 0 {
                        for t in acc.iter_mut() {
                            t.2 *= int(2);
                        }
                        continue;
                    }
                    let sign = if e % 2 == 0 { 1 } else { -1 };
                    let mut next = Vec::with_capacity(acc.len() * 2);
                    for t in acc {
                        let mut a = t.clone();
                        a.0.push(((v, hs[0]), e));
                        next.push(a);
                        let mut b = t;
                        b.0.push(((v, hs[1]), e));
                        b.2 *= int(sign);
                        next.push(b);
                    }
                    acc = next;
                }
                _ => {}
            }
        }
        acc.into_iter()
            .map(|(psi, kappa, c)| {
                MonomialStratum::new(g.clone(), psi.into_iter().collect(), kappa.into_iter().collect(), c)
                    .expect("normal-form decorations are valid monomials")
            })
            .collect()
    }
}

impl fmt::Display for NormalFormStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Serialize, Deserialize)]
struct ExpJson {
    v: usize,
    kind: DecorationKind,
    e: u32,
}

#[derive(Serialize, Deserialize)]
struct StratumJson {
    graph: PrestableGraph,
    exps: Vec<ExpJson>,
}

impl Serialize for NormalFormStratum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let exps = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(v, &e)| ExpJson { v, kind: self.kind(v).expect("decorated vertex has a kind"), e })
            .collect();
        StratumJson { graph: (*self.graph).clone(), exps }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormalFormStratum {
    /// Accepts any labelling; the result is canonicalized and must not pick
    /// up a sign or vanish.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = StratumJson::deserialize(d)?;
        let exps = exps_from_json(&j.graph, &j.exps).map_err(serde::de::Error::custom)?;
        match canonicalize_signed(&j.graph, &exps).map_err(serde::de::Error::custom)? {
            (s, 1) => Ok(s),
            (_, 0) => Err(serde::de::Error::custom("stratum vanishes by symmetry")),
            _ => Err(serde::de::Error::custom(
                "two-term orientation differs from the canonical one; use the normalize command",
            )),
        }
    }
}

fn exps_from_json(g: &PrestableGraph, list: &[ExpJson]) -> Result<Vec<u32>> {
    let mut exps = vec![0; g.num_vertices()];
    for x in list {
        if x.v >= exps.len() {
            return Err(Error::MalformedDecoration(format!("vertex {} does not exist", x.v)));
        }
        if DecorationKind::for_valence(g.valence(x.v)) != Some(x.kind) {
            return Err(Error::MalformedDecoration(format!(
                "vertex {} of valence {} cannot carry {:?}",
                x.v,
                g.valence(x.v),
                x.kind
            )));
        }
        exps[x.v] = x.e;
    }
    Ok(exps)
}

/// Parse a stratum given in JSON form that may be non-canonical, returning
/// the canonical representative and the sign relating the two.
pub fn stratum_from_json_signed(value: &serde_json::Value) -> Result<(NormalFormStratum, i8)> {
    let j: StratumJson = serde_json::from_value(value.clone())?;
    let exps = exps_from_json(&j.graph, &j.exps)?;
    canonicalize_signed(&j.graph, &exps)
}

pub fn validate_exps(g: &PrestableGraph, exps: &[u32]) -> Result<()> {
    if exps.len() != g.num_vertices() {
        return Err(Error::MalformedDecoration(format!("{} exponents for {} vertices", exps.len(), g.num_vertices())));
    }
    for (v, &e) in exps.iter().enumerate() {
        if e > 0 && g.valence(v) >= 3 {
            return Err(Error::MalformedDecoration(format!(
                "vertex {v} has valence {} and cannot be decorated",
                g.valence(v)
            )));
        }
    }
    Ok(())
}

fn decorated_degree(g: &PrestableGraph, exps: &[u32]) -> usize {
    g.num_edges()
        + exps
            .iter()
            .enumerate()
            .map(|(v, &e)| DecorationKind::for_valence(g.valence(v)).map_or(0, |k| k.weight() * e as usize))
            .sum::<usize>()
}

pub fn degree(s: &NormalFormStratum) -> usize {
    s.degree()
}

/// True iff an automorphism maps the decorated element to minus itself.
/// This happens exactly when the root of the centered layout is a leg-free
/// 2-valent vertex with odd exponent whose two branches agree including
/// decorations.
pub fn is_zero_by_symmetry(g: &PrestableGraph, exps: &[u32]) -> Result<bool> {
    validate_exps(g, exps)?;
    let layout = graph::layout(g, Some(exps));
    let root = layout.position.iter().position(|&p| p == 0).expect("layout has a root");
    Ok(layout.root_swap && exps[root] % 2 == 1)
}

/// Canonical representative and sign: `(g, exps) = sign * result`. A sign of
/// 0 means the element vanishes by symmetry.
pub(crate) fn canonicalize_signed(g: &PrestableGraph, exps: &[u32]) -> Result<(NormalFormStratum, i8)> {
    validate_exps(g, exps)?;
    let layout = graph::layout(g, Some(exps));
    let canon = g.permuted(&layout.position);
    let mut cexps = vec![0; exps.len()];
    for (v, &p) in layout.position.iter().enumerate() {
        cexps[p] = exps[v];
    }
    let root = layout.position.iter().position(|&p| p == 0).expect("layout has a root");
    let mut sign: i8 = if layout.root_swap && exps[root] % 2 == 1 { 0 } else { 1 };
    if sign != 0 {
        for v in 0..g.num_vertices() {
            if g.valence(v) != 2 || exps[v] % 2 == 0 {
                continue;
            }
            let first = match g.half_edges(v)[0] {
                HalfEdge::Leg(l) => HalfEdge::Leg(l),
                HalfEdge::To(u) => HalfEdge::To(layout.position[u]),
            };
            if canon.half_edges(layout.position[v])[0] != first {
                sign = -sign;
            }
        }
    }
    Ok((NormalFormStratum { graph: Arc::new(canon), key: layout.key, exps: cexps }, sign))
}

/// Canonical representative with the adjusted coefficient; the coefficient
/// is zero when the element vanishes by symmetry.
pub fn canonicalize_decorated(
    g: &PrestableGraph,
    exps: &[u32],
    coeff: &Rational,
) -> Result<(NormalFormStratum, Rational)> {
    let (s, sign) = canonicalize_signed(g, exps)?;
    let c = match sign {
        0 => Rational::zero(),
        1 => coeff.clone(),
        _ => -coeff.clone(),
    };
    Ok((s, c))
}

/// All compositions of `total` as `sum weights[i] * x[i]`.
fn weighted_compositions(weights: &[usize], total: usize) -> Vec<Vec<u32>> {
    fn go(weights: &[usize], rest: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        match weights.split_first() {
            None => {
                if rest == 0 {
                    out.push(cur.clone());
                }
            }
            Some((&w, tail)) => {
                if w == 0 {
                    cur.push(0);
                    go(tail, rest, cur, out);
                    cur.pop();
                    return;
                }
                for x in 0..=rest / w {
                    cur.push(x as u32);
                    go(tail, rest - x * w, cur, out);
                    cur.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(weights, total, &mut Vec::new(), &mut out);
    out
}

/// Non-vanishing normal-form strata of degree `d` on one canonical graph.
pub fn strata_on_graph(g: &PrestableGraph, d: usize) -> Vec<NormalFormStratum> {
    let e = g.num_edges();
    if e > d {
        return Vec::new();
    }
    let weights: Vec<usize> =
        (0..g.num_vertices()).map(|v| DecorationKind::for_valence(g.valence(v)).map_or(0, |k| k.weight())).collect();
    let mut found = BTreeSet::new();
    for exps in weighted_compositions(&weights, d - e) {
        let (s, sign) = canonicalize_signed(g, &exps).expect("composition respects valences");
        if sign != 0 {
            found.insert(s);
        }
    }
    found.into_iter().collect()
}

/// All non-vanishing normal-form strata of degree `d` with `n` legs whose
/// graph lies in `locus`, sorted.
pub fn enumerate_basis(n: u32, d: usize, locus: &Locus) -> Vec<NormalFormStratum> {
    let max_e = locus.edge_bound().map_or(d, |b| b.min(d));
    let graphs: Vec<PrestableGraph> =
        (0..=max_e).flat_map(|e| graph::graphs(n, e).as_ref().clone()).filter(|g| locus.contains(g)).collect();
    let mut all: Vec<NormalFormStratum> = graphs.par_iter().flat_map_iter(|g| strata_on_graph(g, d)).collect();
    all.sort();
    all
}
