//! Brute force over vertex permutations: isomorphisms, automorphisms and
//! orbit sums of decorated strata expanded into monomials.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use prestable_chow::graph::{graphs, HalfEdge, PrestableGraph};
use prestable_chow::rational::{int, Rational};
use prestable_chow::strata::{is_zero_by_symmetry, NormalFormStratum};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..k {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

pub fn edge_set(g: &PrestableGraph) -> BTreeSet<(usize, usize)> {
    g.edges().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
}

pub fn same_graph(a: &PrestableGraph, b: &PrestableGraph) -> bool {
    a.num_vertices() == b.num_vertices() && a.all_legs() == b.all_legs() && edge_set(a) == edge_set(b)
}

/// Vertex bijections `p[old] = new` carrying `a` onto `b`.
pub fn isomorphisms(a: &PrestableGraph, b: &PrestableGraph) -> Vec<Vec<usize>> {
    permutations(a.num_vertices()).into_iter().filter(|p| same_graph(&a.permuted(p), b)).collect()
}

pub fn map_half_edge(p: &[usize], h: HalfEdge) -> HalfEdge {
    match h {
        HalfEdge::Leg(l) => HalfEdge::Leg(l),
        HalfEdge::To(u) => HalfEdge::To(p[u]),
    }
}

pub type Mono = (BTreeMap<(usize, HalfEdge), u32>, BTreeMap<usize, u32>);

/// Expansion of a decorated graph into monomials: kappa_2^e at isolated
/// vertices, psi^e at the only half-edge of a 1-valent vertex, and
/// `psi_a^e + (-1)^e psi_b^e` at a 2-valent vertex with half-edges `a < b`
/// (the constant 2 when `e = 0`).
pub fn expand(g: &PrestableGraph, exps: &[u32]) -> BTreeMap<Mono, Rational> {
    let mut acc: BTreeMap<Mono, Rational> = BTreeMap::from([((BTreeMap::new(), BTreeMap::new()), int(1))]);
    for v in 0..g.num_vertices() {
        let e = exps[v];
        let hs = g.half_edges(v);
        let options: Vec<(Option<HalfEdge>, bool, Rational)> = match hs.len() {
            0 if e > 0 => vec![(None, true, int(1))],
            1 if e > 0 => vec![(Some(hs[0]), false, int(1))],
            2 if e == 0 => vec![(None, false, int(2))],
            2 => vec![(Some(hs[0]), false, int(1)), (Some(hs[1]), false, int(if e % 2 == 0 { 1 } else { -1 }))],
            _ => continue,
        };
        let mut next = BTreeMap::new();
        for ((psi, kappa), c) in acc {
            for (h, is_kappa, f) in &options {
                let (mut psi, mut kappa) = (psi.clone(), kappa.clone());
                if let Some(h) = h {
                    psi.insert((v, *h), e);
                }
                if *is_kappa {
                    kappa.insert(v, e);
                }
                *next.entry((psi, kappa)).or_insert_with(Rational::zero) += &c * f;
            }
        }
        acc = next;
    }
    acc
}

pub fn transport(m: &BTreeMap<Mono, Rational>, p: &[usize]) -> BTreeMap<Mono, Rational> {
    m.iter()
        .map(|((psi, kappa), c)| {
            let psi = psi.iter().map(|(&(v, h), &e)| ((p[v], map_half_edge(p, h)), e)).collect();
            let kappa = kappa.iter().map(|(&v, &e)| (p[v], e)).collect();
            ((psi, kappa), c.clone())
        })
        .collect()
}

/// Sum over all automorphisms: two monomial sums define the same class
/// exactly when their orbit sums agree.
pub fn orbit_sum(m: &BTreeMap<Mono, Rational>, auts: &[Vec<usize>]) -> BTreeMap<Mono, Rational> {
    let mut out: BTreeMap<Mono, Rational> = BTreeMap::new();
    for a in auts {
        for (k, c) in transport(m, a) {
            *out.entry(k).or_insert_with(Rational::zero) += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn exponent_choices(g: &PrestableGraph, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for v in 0..g.num_vertices() {
        let top = if g.valence(v) <= 2 { max } else { 0 };
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=top).map(move |e| {
                    let mut q = p.clone();
                    q.push(e);
                    q
                })
            })
            .collect();
    }
    out
}

/// Compare every decorated stratum on every labelling of the graphs with
/// `n <= max_n` and `e <= max_e` against orbit sums. Returns the number of
/// cases checked and the mismatches.
pub fn sign_mismatches(max_n: u32, max_e: usize, max_exp: u32) -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for n in 0..=max_n {
        for e in 0..=max_e {
            for g in graphs(n, e).iter() {
                for p in permutations(g.num_vertices()) {
                    let h = g.permuted(&p);
                    for exps in exponent_choices(&h, max_exp) {
                        checked += 1;
                        let (s, sign) = NormalFormStratum::from_parts(&h, &exps).unwrap();
                        let target = s.graph();
                        let auts = isomorphisms(target, target);
                        let iso = &isomorphisms(&h, target)[0];
                        let lhs = orbit_sum(&transport(&expand(&h, &exps), iso), &auts);
                        let mut rhs = orbit_sum(&expand(target, s.exps()), &auts);
                        for c in rhs.values_mut() {
                            *c *= int(sign as i64);
                        }
                        rhs.retain(|_, c| !c.is_zero());
                        let vanishes = is_zero_by_symmetry(&h, &exps).unwrap();
                        if lhs != rhs || vanishes != (sign == 0) || vanishes != lhs.is_empty() {
                            bad.push(format!("graph {h:?} exps {exps:?} sign {sign}"));
                        }
                    }
                }
            }
        }
    }
    (checked, bad)
}

/// Random relabellings of random graphs with `n <= 5` and at most six
/// edges; returns the number of key or canonical-form mismatches.
pub fn relabelling_mismatches(trials: usize, seed: u64) -> usize {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..trials {
        let n = rng.gen_range(0..=5u32);
        let e = rng.gen_range(0..=6usize);
        let all = graphs(n, e);
        let g = &all[rng.gen_range(0..all.len())];
        let mut perm: Vec<usize> = (0..g.num_vertices()).collect();
        perm.shuffle(&mut rng);
        let h = g.permuted(&perm);
        let c = h.canonical_form();
        let ok = h.key() == g.key()
            && same_graph(&c.graph, &h.permuted(&c.vertex_map))
            && same_graph(&c.graph, &g.canonical_form().graph)
            && h.automorphisms().order == g.automorphisms().order;
        if !ok {
            bad += 1;
        }
    }
    bad
}
