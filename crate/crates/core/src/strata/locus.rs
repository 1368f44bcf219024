use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{self, PrestableGraph};

/// Open loci given as unions of strata, described by a graph predicate
/// that must be closed under edge contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Locus {
    All,
    /// At most this many edges.
    MaxNodes(usize),
    /// Every vertex has valence at least 3.
    Stable,
    /// Every vertex has valence at least 2.
    Semistable,
    /// Chains with legs 2,3 at one end and leg 1 at the other (`n = 3`).
    ChainT,
}

impl Locus {
    pub fn contains(&self, g: &PrestableGraph) -> bool {
        match *self {
            Locus::All => true,
            Locus::MaxNodes(e) => g.num_edges() <= e,
            Locus::Stable => g.is_stable(),
            Locus::Semistable => g.is_semistable(),
            Locus::ChainT => is_t_chain(g),
        }
    }

    /// Largest edge count of a graph in the locus, when bounded
    /// independently of the degree.
    pub fn edge_bound(&self) -> Option<usize> {
        match *self {
            Locus::MaxNodes(e) => Some(e),
            _ => None,
        }
    }

    /// Marking counts for which the locus is defined.
    pub fn check_n(&self, n: u32) -> Result<()> {
        if *self == Locus::ChainT && n != 3 {
            return Err(Error::InvalidLocus(format!("chain-T needs n = 3, got n = {n}")));
        }
        Ok(())
    }
}

fn is_t_chain(g: &PrestableGraph) -> bool {
    if g.n() != 3 {
        return false;
    }
    if g.num_edges() == 0 {
        return true;
    }
    let ends: Vec<usize> = (0..g.num_vertices()).filter(|&v| g.neighbors(v).len() == 1).collect();
    if ends.len() != 2 || (0..g.num_vertices()).any(|v| g.neighbors(v).len() > 2) {
        return false;
    }
    let legs: Vec<&[u32]> = ends.iter().map(|&v| g.legs(v)).collect();
    let ends_ok = (legs[0] == [1] && legs[1] == [2, 3]) || (legs[0] == [2, 3] && legs[1] == [1]);
    let interior_ok = (0..g.num_vertices()).filter(|v| !ends.contains(v)).all(|v| g.legs(v).is_empty());
    ends_ok && interior_ok
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locus::All => f.write_str("all"),
            Locus::MaxNodes(e) => write!(f, "max-nodes={e}"),
            Locus::Stable => f.write_str("stable"),
            Locus::Semistable => f.write_str("semistable"),
            Locus::ChainT => f.write_str("chain-T"),
        }
    }
}

impl FromStr for Locus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Locus::All),
            "stable" => Ok(Locus::Stable),
            "semistable" => Ok(Locus::Semistable),
            "chain-T" => Ok(Locus::ChainT),
            _ => {
                if let Some(e) = s.strip_prefix("max-nodes=") {
                    e.parse().map(Locus::MaxNodes).map_err(|_| Error::InvalidLocus(format!("bad edge bound in {s:?}")))
                } else {
                    Err(Error::InvalidLocus(format!(
                        "unknown locus {s:?}; expected all, max-nodes=E, stable, semistable or chain-T"
                    )))
                }
            }
        }
    }
}

/// True iff `pred` is closed under contracting any edge, checked over all
/// graphs with `n` legs and at most `max_edges` edges.
pub fn verify_predicate(pred: impl Fn(&PrestableGraph) -> bool, n: u32, max_edges: usize) -> bool {
    for e in 1..=max_edges {
        for g in graph::graphs(n, e).iter() {
            if !pred(g) {
                continue;
            }
            for i in 0..g.num_edges() {
                let c = g.contract_edge(i).expect("edge index in range");
                if !pred(&c) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn verify_locus(locus: &Locus, n: u32, max_edges: usize) -> bool {
    verify_predicate(|g| locus.contains(g), n, max_edges)
}
