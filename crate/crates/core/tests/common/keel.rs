//! Boundary strata of the stable moduli space in genus zero, described by
//! sets of pairwise compatible splits of the markings, with the WDVV
//! relations inserted at every vertex of valence at least 4.
//!
//! A split is stored as a bitmask of the markings on the side away from
//! marking 1, with at least two markings on each side. This code shares
//! nothing with the crate's graph machinery.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;

use super::{dense_rank, q};

pub type Split = u32;
pub type Stratum = BTreeSet<Split>;

fn popcount(x: u32) -> u32 {
    x.count_ones()
}

/// All splits for `n` markings (marking `i` is bit `i - 1`).
pub fn splits(n: u32) -> Vec<Split> {
    let full = (1u32 << n) - 1;
    (0..=full).filter(|s| s & 1 == 0 && popcount(*s) >= 2 && popcount(full & !s) >= 2).collect()
}

pub fn compatible(a: Split, b: Split) -> bool {
    a & b == 0 || a & b == a || a & b == b
}

/// All sets of `d` pairwise compatible splits.
pub fn strata(n: u32, d: usize) -> Vec<Stratum> {
    fn go(all: &[Split], start: usize, d: usize, cur: &mut Vec<Split>, out: &mut Vec<Stratum>) {
        if cur.len() == d {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..all.len() {
            if cur.iter().all(|&s| compatible(s, all[i])) {
                cur.push(all[i]);
                go(all, i + 1, d, cur, out);
                cur.pop();
            }
        }
    }
    let all = splits(n);
    let mut out = Vec::new();
    go(&all, 0, d, &mut Vec::new(), &mut out);
    out
}

/// Vertices of the tree of a stratum, each as its list of branches. A
/// branch is the set of markings reached through one half-edge.
pub fn vertices(n: u32, s: &Stratum) -> Vec<Vec<u32>> {
    let full = (1u32 << n) - 1;
    let mut nodes: Vec<u32> = s.iter().copied().collect();
    nodes.push(full & !1);
    let mut out = Vec::new();
    for &x in &nodes {
        let inside: Vec<u32> = s.iter().copied().filter(|&y| y != x && y & x == y).collect();
        let children: Vec<u32> =
            inside.iter().copied().filter(|&c| !inside.iter().any(|&o| o != c && c & o == c)).collect();
        let covered = children.iter().fold(0, |a, &c| a | c);
        let mut branches = children.clone();
        for i in 0..n {
            let bit = 1u32 << i;
            if x & bit != 0 && covered & bit == 0 {
                branches.push(bit);
            }
        }
        branches.push(full & !x);
        out.push(branches);
    }
    out
}

/// Kontsevich-Manin relations in codimension `d`: for every stratum of
/// codimension `d - 1`, every vertex of valence at least 4, every four of
/// its branches and both pairing differences.
pub fn relations(n: u32, d: usize) -> Vec<BTreeMap<Stratum, i64>> {
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    for s in strata(n, d - 1) {
        for branches in vertices(n, &s) {
            let m = branches.len();
            if m < 4 {
                continue;
            }
            let parent = m - 1;
            for a in 0..m {
                for b in a + 1..m {
                    for c in b + 1..m {
                        for e in c + 1..m {
                            let quad = [a, b, c, e];
                            for pairs in [[(0, 2), (1, 3)], [(0, 3), (1, 2)]] {
                                let mut rel: BTreeMap<Stratum, i64> = BTreeMap::new();
                                let sides = [[(0, 1), (2, 3)], pairs];
                                for (sign, side) in [(1i64, sides[0]), (-1i64, sides[1])] {
                                    let left = [quad[side[0].0], quad[side[0].1]];
                                    let right = [quad[side[1].0], quad[side[1].1]];
                                    let rest: Vec<usize> = (0..m).filter(|i| !quad.contains(i)).collect();
                                    for mask in 0u32..(1 << rest.len()) {
                                        let mut l: Vec<usize> = left.to_vec();
                                        let mut r: Vec<usize> = right.to_vec();
                                        for (i, &x) in rest.iter().enumerate() {
                                            if mask & (1 << i) != 0 {
                                                l.push(x);
                                            } else {
                                                r.push(x);
                                            }
                                        }
                                        let away = if l.contains(&parent) { &r } else { &l };
                                        let split = away.iter().fold(0, |acc, &i| acc | branches[i]);
                                        let mut t = s.clone();
                                        t.insert(split);
                                        *rel.entry(t).or_insert(0) += sign;
                                    }
                                }
                                rel.retain(|_, v| *v != 0);
                                out.push(rel);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Dimension of the codimension-`d` Chow group: strata minus relation rank.
pub fn dimension(n: u32, d: usize) -> usize {
    let gens = strata(n, d);
    let index: BTreeMap<&Stratum, usize> = gens.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let rows: Vec<Vec<BigRational>> = relations(n, d)
        .into_iter()
        .map(|rel| {
            let mut row = vec![q(0); gens.len()];
            for (s, c) in rel {
                row[index[&s]] = q(c);
            }
            row
        })
        .collect();
    gens.len() - if rows.is_empty() { 0 } else { dense_rank(rows) }
}
