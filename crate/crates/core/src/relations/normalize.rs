//! Rewriting psi monomials into the normal-form basis.
//!
//! Two local identities drive the rewriting. At a 2-valent vertex with
//! half-edges `h, h'` we have `psi_h + psi_h' = [split]`, and at a vertex of
//! valence at least 3, `psi_h` is the sum of the splittings separating `h`
//! from two reference half-edges `j, l`. A pure power `psi_h^c` at a
//! 2-valent vertex is finally converted into the two-term basis element
//! `psi_h^c + (-psi_h')^c` using the first identity.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{HalfEdge, PrestableGraph};
use crate::rational::{half, Rational};
use crate::strata::{canonicalize_decorated, MonomialStratum, NormalFormStratum, StrataVector};

/// A decorated graph in the middle of rewriting. Vertices listed in
/// `marks` carry a finished two-term decoration `(c, first half-edge)` and
/// are never rewritten again.
#[derive(Clone, Debug)]
pub(crate) struct WorkTerm {
    pub graph: PrestableGraph,
    pub psi: BTreeMap<(usize, HalfEdge), u32>,
    pub kappa2: BTreeMap<usize, u32>,
    pub marks: BTreeMap<usize, (u32, HalfEdge)>,
    pub coeff: Rational,
}

type Measure = (u64, u64, usize);

impl WorkTerm {
    pub fn from_monomial(m: &MonomialStratum) -> Self {
        Self {
            graph: m.graph.clone(),
            psi: m.psi.clone(),
            kappa2: m.kappa2.clone(),
            marks: BTreeMap::new(),
            coeff: m.coeff.clone(),
        }
    }

    pub fn from_stratum(s: &NormalFormStratum, coeff: Rational) -> Self {
        let g = s.graph().clone();
        let mut psi = BTreeMap::new();
        let mut kappa2 = BTreeMap::new();
        let mut marks = BTreeMap::new();
        for (v, &e) in s.exps().iter().enumerate() {
            match g.valence(v) {
                0 if e > 0 => {
                    kappa2.insert(v, e);
                }
                1 if e > 0 => {
                    psi.insert((v, g.half_edges(v)[0]), e);
                }
                2 => {
                    marks.insert(v, (e, g.half_edges(v)[0]));
                }
                _ => {}
            }
        }
        Self { graph: g, psi, kappa2, marks, coeff }
    }

    pub fn to_monomial(&self) -> MonomialStratum {
        assert!(self.marks.is_empty(), "two-term marks have no monomial form");
        MonomialStratum::new(self.graph.clone(), self.psi.clone(), self.kappa2.clone(), self.coeff.clone())
            .expect("rewriting keeps decorations valid")
    }

    fn exp(&self, v: usize, h: HalfEdge) -> u32 {
        self.psi.get(&(v, h)).copied().unwrap_or(0)
    }

    fn set_exp(&mut self, v: usize, h: HalfEdge, e: u32) {
        if e == 0 {
            self.psi.remove(&(v, h));
        } else {
            self.psi.insert((v, h), e);
        }
    }

    fn measure(&self) -> Measure {
        let degree = self.psi.values().map(|&e| e as u64).sum();
        let mut second = 0;
        let mut open = 0;
        for v in 0..self.graph.num_vertices() {
            if self.graph.valence(v) == 2 && !self.marks.contains_key(&v) {
                open += 1;
                second += self.exp(v, self.graph.half_edges(v)[1]) as u64;
            }
        }
        (degree, second, open)
    }

    /// Replace `v` by two vertices joined by a new edge: `v` keeps the
    /// half-edges not in `right`, a new vertex `w` (the last index) takes
    /// those in `right`. Decorations travel with their half-edges.
    pub fn split(&self, v: usize, right: &BTreeSet<HalfEdge>) -> (WorkTerm, usize) {
        debug_assert!(!self.marks.contains_key(&v));
        let g = &self.graph;
        let w = g.num_vertices();
        let mut legs: Vec<Vec<u32>> = g.all_legs().to_vec();
        legs[v] = g.legs(v).iter().copied().filter(|&l| !right.contains(&HalfEdge::Leg(l))).collect();
        legs.push(g.legs(v).iter().copied().filter(|&l| right.contains(&HalfEdge::Leg(l))).collect());
        let moved = |u: usize| right.contains(&HalfEdge::To(u));
        let mut edges: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .map(|&(a, b)| {
                if a == v && moved(b) {
                    (w, b)
                } else if b == v && moved(a) {
                    (a, w)
                } else {
                    (a, b)
                }
            })
            .collect();
        edges.push((v, w));
        let graph = PrestableGraph::new(g.n(), legs, edges).expect("splitting a vertex keeps a tree");
        let retarget = |x: usize, h: HalfEdge| -> (usize, HalfEdge) {
            if x == v && right.contains(&h) {
                (w, h)
            } else if x != v && h == HalfEdge::To(v) && moved(x) {
                (x, HalfEdge::To(w))
            } else {
                (x, h)
            }
        };
        let psi = self.psi.iter().map(|(&(x, h), &e)| (retarget(x, h), e)).collect();
        let marks = self.marks.iter().map(|(&x, &(c, h))| (x, (c, retarget(x, h).1))).collect();
        let term = WorkTerm { graph, psi, kappa2: self.kappa2.clone(), marks, coeff: self.coeff.clone() };
        (term, w)
    }

    fn is_open_two_valent(&self, v: usize) -> bool {
        self.graph.valence(v) == 2 && !self.marks.contains_key(&v)
    }

    /// First vertex where a psi rewriting rule applies.
    fn first_offending(&self) -> Option<usize> {
        (0..self.graph.num_vertices()).find(|&v| {
            let val = self.graph.valence(v);
            if val == 2 && !self.marks.contains_key(&v) {
                self.exp(v, self.graph.half_edges(v)[1]) > 0
            } else if val >= 3 {
                self.graph.half_edges(v).iter().any(|&h| self.exp(v, h) > 0)
            } else {
                false
            }
        })
    }

    /// First unmarked 2-valent vertex (after all rewriting rules are exhausted).
    fn first_open(&self) -> Option<usize> {
        (0..self.graph.num_vertices()).find(|&v| self.is_open_two_valent(v))
    }

    /// `psi_h^a psi_h'^b -> -psi_h^{a+1} psi_h'^{b-1} + [split] psi_h^a psi_h'^{b-1}`.
    fn rule_two_valent(&self, v: usize) -> Vec<WorkTerm> {
        let hs = self.graph.half_edges(v);
        let (h, h2) = (hs[0], hs[1]);
        let a = self.exp(v, h);
        let b = self.exp(v, h2);
        debug_assert!(b > 0);
        let mut first = self.clone();
        first.set_exp(v, h, a + 1);
        first.set_exp(v, h2, b - 1);
        first.coeff = -first.coeff;
        let (mut second, w) = self.split(v, &BTreeSet::from([h2]));
        second.set_exp(w, h2, b - 1);
        vec![first, second]
    }

    /// `psi_h^a -> sum over splittings (h | j, l) of [split] psi_h^{a-1}`.
    fn rule_boundary(
        &self,
        v: usize,
        h: Option<HalfEdge>,
        refs: Option<(HalfEdge, HalfEdge)>,
    ) -> Result<Vec<WorkTerm>> {
        let hs = self.graph.half_edges(v);
        if hs.len() < 3 {
            return Err(Error::InvalidRelation(format!("vertex {v} has valence {} < 3", hs.len())));
        }
        let h = match h {
            Some(h) => h,
            None => *hs.iter().find(|&&h| self.exp(v, h) > 0).ok_or(Error::AlreadyNormal)?,
        };
        let a = self.exp(v, h);
        if a == 0 {
            return Err(Error::AlreadyNormal);
        }
        let (j, l) = match refs {
            Some((j, l)) => {
                if j == l || j == h || l == h || !hs.contains(&j) || !hs.contains(&l) {
                    return Err(Error::InvalidRelation(format!(
                        "references {j:?}, {l:?} are not two half-edges at vertex {v} distinct from {h:?}"
                    )));
                }
                (j, l)
            }
            None => {
                let mut rest = hs.iter().copied().filter(|&x| x != h);
                (rest.next().expect("valence >= 3"), rest.next().expect("valence >= 3"))
            }
        };
        let others: Vec<HalfEdge> = hs.iter().copied().filter(|&x| x != h && x != j && x != l).collect();
        let mut out = Vec::with_capacity(1 << others.len());
        for mask in 0u64..(1 << others.len()) {
            let mut right = BTreeSet::from([j, l]);
            for (i, &x) in others.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    right.insert(x);
                }
            }
            let (mut t, _) = self.split(v, &right);
            t.set_exp(v, h, a - 1);
            out.push(t);
        }
        Ok(out)
    }

    /// `psi_h^c -> 1/2 (psi_h^c + (-psi_h')^c) + 1/2 sum_i (-1)^{c-1-i} [split] psi_h^i psi_h'^{c-1-i}`.
    fn convert_two_term(&self, v: usize) -> Vec<WorkTerm> {
        let hs = self.graph.half_edges(v);
        let (h, h2) = (hs[0], hs[1]);
        debug_assert_eq!(self.exp(v, h2), 0);
        let c = self.exp(v, h);
        let mut marked = self.clone();
        marked.set_exp(v, h, 0);
        marked.marks.insert(v, (c, h));
        marked.coeff *= half();
        let mut out = vec![marked];
        for i in 0..c {
            let (mut t, w) = self.split(v, &BTreeSet::from([h2]));
            t.set_exp(v, h, i);
            t.set_exp(w, h2, c - 1 - i);
            t.coeff *= half();
            if (c - 1 - i) % 2 == 1 {
                t.coeff = -t.coeff;
            }
            out.push(t);
        }
        out
    }

    /// One rewriting rule at the first offending vertex, checking that the
    /// termination measure drops.
    fn rewrite(&self, refs: Option<(HalfEdge, HalfEdge)>) -> Result<Vec<WorkTerm>> {
        let v = self.first_offending().ok_or(Error::AlreadyNormal)?;
        let out = if self.graph.valence(v) == 2 { self.rule_two_valent(v) } else { self.rule_boundary(v, None, refs)? };
        let before = self.measure();
        for t in &out {
            assert!(t.measure() < before, "rewriting must decrease the termination measure");
        }
        Ok(out)
    }

    /// Canonical normal-form stratum and coefficient of a finished term.
    fn finish(&self) -> Result<(NormalFormStratum, Rational)> {
        let g = &self.graph;
        let mut exps = vec![0u32; g.num_vertices()];
        let mut coeff = self.coeff.clone();
        for (v, e) in exps.iter_mut().enumerate() {
            let hs = g.half_edges(v);
            match hs.len() {
                0 => *e = self.kappa2.get(&v).copied().unwrap_or(0),
                1 => *e = self.exp(v, hs[0]),
                2 => match self.marks.get(&v) {
                    Some(&(c, first)) => {
                        *e = c;
                        if first != hs[0] && c % 2 == 1 {
                            coeff = -coeff;
                        }
                    }
                    None => unreachable!("open 2-valent vertices are converted before finishing"),
                },
                _ => debug_assert!(hs.iter().all(|&h| self.exp(v, h) == 0)),
            }
        }
        canonicalize_decorated(g, &exps, &coeff)
    }
}

/// Rewrite terms until every vertex is in normal shape and collect the
/// result. All terms must have the same number of legs and degree.
pub(crate) fn normalize_terms(terms: Vec<WorkTerm>, n: u32, degree: usize) -> Result<StrataVector> {
    let mut out = StrataVector::new(n, degree);
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        if t.coeff.is_zero() {
            continue;
        }
        if t.first_offending().is_some() {
            stack.extend(t.rewrite(None)?);
        } else if let Some(v) = t.first_open() {
            let before = t.measure();
            let next = t.convert_two_term(v);
            for x in &next {
                assert!(x.measure() < before, "conversion must decrease the termination measure");
            }
            stack.extend(next);
        } else {
            let (s, c) = t.finish()?;
            if s.degree() != degree {
                return Err(Error::InvalidRelation(format!(
                    "term of degree {} in a relation of degree {degree}",
                    s.degree()
                )));
            }
            out.add_term(s, c);
        }
    }
    Ok(out)
}

/// One rewriting step at the first vertex whose psi decoration is not in
/// normal shape: a 2-valent vertex with a positive exponent at its second
/// half-edge, or a vertex of valence at least 3 with any psi class.
pub fn psi_rewrite_step(m: &MonomialStratum) -> Result<Vec<MonomialStratum>> {
    psi_rewrite_step_with_refs(m, None)
}

/// As [`psi_rewrite_step`], choosing the two reference half-edges of the
/// boundary rule explicitly instead of taking the two smallest.
pub fn psi_rewrite_step_with_refs(
    m: &MonomialStratum,
    refs: Option<(HalfEdge, HalfEdge)>,
) -> Result<Vec<MonomialStratum>> {
    let t = WorkTerm::from_monomial(m);
    Ok(t.rewrite(refs)?.iter().map(WorkTerm::to_monomial).collect())
}

/// Apply the boundary rule once at vertex `v` (valence at least 3) to the
/// psi class at half-edge `h`, with reference half-edges `refs`:
/// `psi_h^a -> sum over splittings (h | j, l) of [split] psi_h^{a-1}`.
pub fn remove_psi(
    m: &MonomialStratum,
    v: usize,
    h: HalfEdge,
    refs: (HalfEdge, HalfEdge),
) -> Result<Vec<MonomialStratum>> {
    let t = WorkTerm::from_monomial(m);
    if v >= t.graph.num_vertices() {
        return Err(Error::InvalidRelation(format!("vertex {v} does not exist")));
    }
    Ok(t.rule_boundary(v, Some(h), Some(refs))?.iter().map(WorkTerm::to_monomial).collect())
}

/// Express a psi/kappa_2 monomial on a prestable graph in the normal-form basis.
pub fn normalize(m: &MonomialStratum) -> Result<StrataVector> {
    normalize_terms(vec![WorkTerm::from_monomial(m)], m.graph.n(), m.degree())
}

/// Normalize a sum of monomials of equal `n` and degree.
pub fn normalize_sum(ms: &[MonomialStratum]) -> Result<StrataVector> {
    let first = ms.first().ok_or_else(|| Error::InvalidRelation("empty sum".into()))?;
    let (n, degree) = (first.graph.n(), first.degree());
    if ms.iter().any(|m| m.graph.n() != n || m.degree() != degree) {
        return Err(Error::InvalidRelation("monomials differ in n or degree".into()));
    }
    normalize_terms(ms.iter().map(WorkTerm::from_monomial).collect(), n, degree)
}

/// The vector of a single normal-form stratum with coefficient one.
pub fn unit_vector(s: &NormalFormStratum) -> StrataVector {
    let mut v = StrataVector::new(s.n(), s.degree());
    v.add_term(s.clone(), Rational::one());
    v
}
