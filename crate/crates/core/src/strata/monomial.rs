use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{HalfEdge, PrestableGraph};
use crate::rational::{serde_rational, Rational};

/// A graph decorated by a monomial in psi classes (one exponent per
/// half-edge) and powers of kappa_2 at 0-valent vertices, times a rational
/// coefficient. The graph need not be canonical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialStratum {
    pub graph: PrestableGraph,
    /// Nonzero psi exponents keyed by `(vertex, half-edge)`.
    pub psi: BTreeMap<(usize, HalfEdge), u32>,
    /// Nonzero kappa_2 exponents keyed by vertex.
    pub kappa2: BTreeMap<usize, u32>,
    pub coeff: Rational,
}

impl MonomialStratum {
    pub fn new(
        graph: PrestableGraph,
        psi: BTreeMap<(usize, HalfEdge), u32>,
        kappa2: BTreeMap<usize, u32>,
        coeff: Rational,
    ) -> Result<Self> {
        for &(v, h) in psi.keys() {
            if v >= graph.num_vertices() || !graph.half_edges(v).contains(&h) {
                return Err(Error::MalformedDecoration(format!("{h:?} is not a half-edge at vertex {v}")));
            }
        }
        for &v in kappa2.keys() {
            if v >= graph.num_vertices() {
                return Err(Error::MalformedDecoration(format!("vertex {v} does not exist")));
            }
            if graph.valence(v) != 0 {
                return Err(Error::UnsupportedKappa(format!("kappa_2 at vertex {v} of valence {}", graph.valence(v))));
            }
        }
        let psi = psi.into_iter().filter(|&(_, e)| e > 0).collect();
        let kappa2 = kappa2.into_iter().filter(|&(_, e)| e > 0).collect();
        Ok(Self { graph, psi, kappa2, coeff })
    }

    /// Undecorated graph with coefficient one.
    pub fn plain(graph: PrestableGraph) -> Self {
        Self { graph, psi: BTreeMap::new(), kappa2: BTreeMap::new(), coeff: crate::rational::int(1) }
    }

    /// Build from a list of `(vertex, index, exponent)` kappa factors.
    /// Only `kappa_2` at 0-valent vertices is in scope.
    pub fn with_kappa(
        graph: PrestableGraph,
        psi: BTreeMap<(usize, HalfEdge), u32>,
        kappa: &[(usize, u32, u32)],
        coeff: Rational,
    ) -> Result<Self> {
        let mut kappa2 = BTreeMap::new();
        for &(v, index, e) in kappa {
            if e == 0 {
                continue;
            }
            if index != 2 {
                return Err(Error::UnsupportedKappa(format!("kappa_{index} at vertex {v}")));
            }
            *kappa2.entry(v).or_insert(0) += e;
        }
        Self::new(graph, psi, kappa2, coeff)
    }

    pub fn psi_exponent(&self, v: usize, h: HalfEdge) -> u32 {
        self.psi.get(&(v, h)).copied().unwrap_or(0)
    }

    /// Cohomological degree: edges plus psi degree plus twice the kappa_2 degree.
    pub fn degree(&self) -> usize {
        self.graph.num_edges()
            + self.psi.values().map(|&e| e as usize).sum::<usize>()
            + self.kappa2.values().map(|&e| 2 * e as usize).sum::<usize>()
    }
}

#[derive(Serialize, Deserialize)]
struct PsiJson {
    v: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    leg: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    to: Option<usize>,
    e: u32,
}

#[derive(Serialize, Deserialize)]
struct KappaJson {
    v: usize,
    #[serde(default = "two")]
    index: u32,
    e: u32,
}

fn two() -> u32 {
    2
}

#[derive(Serialize, Deserialize)]
struct MonomialJson {
    graph: PrestableGraph,
    #[serde(default)]
    psi: Vec<PsiJson>,
    #[serde(default)]
    kappa: Vec<KappaJson>,
    #[serde(with = "serde_rational", default = "one")]
    coeff: Rational,
}

fn one() -> Rational {
    crate::rational::int(1)
}

impl Serialize for MonomialStratum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let psi = self
            .psi
            .iter()
            .map(|(&(v, h), &e)| match h {
                HalfEdge::Leg(l) => PsiJson { v, leg: Some(l), to: None, e },
                HalfEdge::To(u) => PsiJson { v, leg: None, to: Some(u), e },
            })
            .collect();
        let kappa = self.kappa2.iter().map(|(&v, &e)| KappaJson { v, index: 2, e }).collect();
        MonomialJson { graph: self.graph.clone(), psi, kappa, coeff: self.coeff.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MonomialStratum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = MonomialJson::deserialize(d)?;
        let mut psi = BTreeMap::new();
        for p in j.psi {
            let h = match (p.leg, p.to) {
                (Some(l), None) => HalfEdge::Leg(l),
                (None, Some(u)) => HalfEdge::To(u),
                _ => return Err(D::Error::custom("psi entry needs exactly one of \"leg\" or \"to\"")),
            };
            *psi.entry((p.v, h)).or_insert(0) += p.e;
        }
        let kappa: Vec<(usize, u32, u32)> = j.kappa.iter().map(|k| (k.v, k.index, k.e)).collect();
        MonomialStratum::with_kappa(j.graph, psi, &kappa, j.coeff).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_scope_kappa() {
        let g = PrestableGraph::trivial(1);
        let r = MonomialStratum::with_kappa(g.clone(), BTreeMap::new(), &[(0, 2, 1)], one());
        assert!(matches!(r, Err(Error::UnsupportedKappa(_))));
        let p = PrestableGraph::trivial(0);
        let r = MonomialStratum::with_kappa(p.clone(), BTreeMap::new(), &[(0, 3, 1)], one());
        assert!(matches!(r, Err(Error::UnsupportedKappa(_))));
        assert!(MonomialStratum::with_kappa(p, BTreeMap::new(), &[(0, 2, 1)], one()).is_ok());
    }

    #[test]
    fn rejects_foreign_half_edges() {
        let g = PrestableGraph::trivial(2);
        let psi = BTreeMap::from([((0, HalfEdge::Leg(3)), 1)]);
        assert!(MonomialStratum::new(g, psi, BTreeMap::new(), one()).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let g = PrestableGraph::new(2, vec![vec![1], vec![2]], vec![(0, 1)]).unwrap();
        let psi = BTreeMap::from([((0, HalfEdge::Leg(1)), 2), ((1, HalfEdge::To(0)), 1)]);
        let m = MonomialStratum::new(g, psi, BTreeMap::new(), Rational::new(3.into(), 2.into())).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains(r#""coeff":"3/2""#));
        let back: MonomialStratum = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.degree(), 4);
    }
}
