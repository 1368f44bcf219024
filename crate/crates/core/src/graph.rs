//! Genus-zero prestable graphs.
//!
//! A prestable graph of genus zero is a tree whose vertices carry the
//! marking labels `1..=n` as legs. Unlike stable graphs, vertices of
//! valence at most two are allowed. Graphs are immutable once built and
//! every constructor validates the tree and leg-partition invariants.
//!
//! Isomorphism classes are handled by an AHU-style canonical form rooted at
//! the tree center. The same layout routine also canonicalizes vertex
//! decorations (see [`crate::strata`]), breaking ties between isomorphic
//! sibling subtrees by their decoration sequences.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Leg = u32;

/// A half-edge at a vertex: either a marking or the end of the edge
/// pointing to a neighbouring vertex.
///
/// The derived order (legs by label, then edge-ends by neighbour index) is
/// the local half-edge order used everywhere in the crate. On a canonical
/// graph it is the canonical half-edge order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HalfEdge {
    Leg(Leg),
    To(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrestableGraph {
    n: u32,
    legs: Vec<Vec<Leg>>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl PrestableGraph {
    pub fn new(n: u32, legs: Vec<Vec<Leg>>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let nv = legs.len();
        if nv == 0 {
            return Err(Error::InvalidGraph("a graph needs at least one vertex".into()));
        }
        let mut seen = vec![false; n as usize + 1];
        let mut legs = legs;
        for vl in legs.iter_mut() {
            vl.sort_unstable();
            for &l in vl.iter() {
                if l == 0 || l > n {
                    return Err(Error::InvalidGraph(format!("leg {l} outside 1..={n}")));
                }
                if seen[l as usize] {
                    return Err(Error::InvalidGraph(format!("leg {l} appears twice")));
                }
                seen[l as usize] = true;
            }
        }
        if let Some(l) = (1..=n).find(|&l| !seen[l as usize]) {
            return Err(Error::InvalidGraph(format!("leg {l} is missing")));
        }
        if edges.len() + 1 != nv {
            return Err(Error::InvalidGraph(format!("{} edges on {} vertices cannot form a tree", edges.len(), nv)));
        }
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= nv || b >= nv {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) names a missing vertex")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-edge at vertex {a}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph("parallel edges".into()));
        }
        let mut adj = vec![Vec::new(); nv];
        for &(a, b) in &norm {
            adj[a].push(b);
            adj[b].push(a);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        // |E| = |V| - 1 plus connectivity rules out cycles.
        let mut stack = vec![0usize];
        let mut visited = vec![false; nv];
        visited[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !visited[u] {
                    visited[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        if count != nv {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(Self { n, legs, edges: norm, adj })
    }

    /// The graph with one vertex carrying all `n` legs.
    pub fn trivial(n: u32) -> Self {
        Self::new(n, vec![(1..=n).collect()], Vec::new()).expect("trivial graph is valid")
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.legs.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn legs(&self, v: usize) -> &[Leg] {
        &self.legs[v]
    }

    pub fn all_legs(&self) -> &[Vec<Leg>] {
        &self.legs
    }

    /// Edges as `(a, b)` with `a < b`, sorted; the position is the edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.legs[v].len() + self.adj[v].len()
    }

    /// Half-edges at `v` in local order: legs ascending, then edge-ends by
    /// neighbour index.
    pub fn half_edges(&self, v: usize) -> Vec<HalfEdge> {
        self.legs[v].iter().map(|&l| HalfEdge::Leg(l)).chain(self.adj[v].iter().map(|&u| HalfEdge::To(u))).collect()
    }

    pub fn vertex_of_leg(&self, leg: Leg) -> Option<usize> {
        self.legs.iter().position(|l| l.contains(&leg))
    }

    pub fn is_stable(&self) -> bool {
        (0..self.num_vertices()).all(|v| self.valence(v) >= 3)
    }

    pub fn is_semistable(&self) -> bool {
        (0..self.num_vertices()).all(|v| self.valence(v) >= 2)
    }

    /// Contract edge `e`; the merged vertex takes the smaller index.
    pub fn contract_edge(&self, e: usize) -> Result<Self> {
        let &(a, b) = self.edges.get(e).ok_or(Error::InvalidEdge(e))?;
        let relabel = |v: usize| -> usize {
            if v == b {
                a
            } else if v > b {
                v - 1
            } else {
                v
            }
        };
        let mut legs: Vec<Vec<Leg>> = Vec::with_capacity(self.num_vertices() - 1);
        for (v, l) in self.legs.iter().enumerate() {
            if v == b {
                continue;
            }
            legs.push(l.clone());
        }
        legs[a].extend_from_slice(&self.legs[b]);
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != e)
            .map(|(_, &(x, y))| (relabel(x), relabel(y)))
            .collect();
        Self::new(self.n, legs, edges)
    }

    /// Apply a vertex permutation `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut legs = vec![Vec::new(); self.num_vertices()];
        for (v, l) in self.legs.iter().enumerate() {
            legs[perm[v]] = l.clone();
        }
        let edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Self::new(self.n, legs, edges).expect("permutation preserves validity")
    }

    pub fn canonical_form(&self) -> Canonical {
        let layout = layout(self, None);
        let graph = self.permuted(&layout.position);
        Canonical { key: layout.key, graph, vertex_map: layout.position }
    }

    pub fn key(&self) -> GraphKey {
        layout(self, None).key
    }

    pub fn automorphisms(&self) -> AutGroup {
        let canon = self.canonical_form();
        let cg = &canon.graph;
        let tree = RootedTree::new(cg);
        let mut order: u128 = 1;
        let mut gens_canon: Vec<Vec<usize>> = Vec::new();
        let size = tree.subtree_sizes();
        for p in 0..cg.num_vertices() {
            let kids = &tree.children[p];
            let mut i = 0;
            while i < kids.len() {
                let mut j = i + 1;
                while j < kids.len() && tree.code[kids[j]] == tree.code[kids[i]] {
                    j += 1;
                }
                for m in 2..=(j - i) as u128 {
                    order *= m;
                }
                for k in i..j.saturating_sub(1) {
                    gens_canon.push(block_swap(cg.num_vertices(), kids[k], kids[k + 1], size[kids[k]]));
                }
                i = j;
            }
        }
        if let [u, w] = tree.roots[..] {
            if tree.code[u] == tree.code[w] {
                order *= 2;
                gens_canon.push(block_swap(cg.num_vertices(), u, w, size[u]));
            }
        }
        // Conjugate back to the input labelling.
        let to_canon = &canon.vertex_map;
        let mut from_canon = vec![0; to_canon.len()];
        for (v, &p) in to_canon.iter().enumerate() {
            from_canon[p] = v;
        }
        let generators =
            gens_canon.into_iter().map(|s| (0..to_canon.len()).map(|v| from_canon[s[to_canon[v]]]).collect()).collect();
        AutGroup { order, generators }
    }

    pub(crate) fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            vertices: self.legs.iter().map(|l| VertexJson { legs: l.clone() }).collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

/// Swap two consecutive preorder blocks of equal length starting at `a`
/// and `b`.
fn block_swap(nv: usize, a: usize, b: usize, len: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..nv).collect();
    for k in 0..len {
        perm[a + k] = b + k;
        perm[b + k] = a + k;
    }
    perm
}

impl fmt::Display for PrestableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.to_json()).map_err(|_| fmt::Error)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct VertexJson {
    legs: Vec<Leg>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct GraphJson {
    n: u32,
    vertices: Vec<VertexJson>,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for PrestableGraph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        PrestableGraph::new(
            j.n,
            j.vertices.into_iter().map(|v| v.legs).collect(),
            j.edges.into_iter().map(|[a, b]| (a, b)).collect(),
        )
    }
}

impl Serialize for PrestableGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PrestableGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GraphJson::deserialize(d)?;
        PrestableGraph::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Unique serialization of a leg-labelled isomorphism class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphKey(pub String);

impl fmt::Display for GraphKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical representative of a graph together with the relabelling
/// `vertex_map[old] = new` carrying the input onto it.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub key: GraphKey,
    pub graph: PrestableGraph,
    pub vertex_map: Vec<usize>,
}

/// Automorphisms fixing every leg.
#[derive(Clone, Debug)]
pub struct AutGroup {
    pub order: u128,
    /// Vertex permutations `g[v] = image of v`; the induced half-edge map is
    /// determined because the graph has no parallel edges.
    pub generators: Vec<Vec<usize>>,
}

impl AutGroup {
    pub fn map_half_edge(perm: &[usize], h: HalfEdge) -> HalfEdge {
        match h {
            HalfEdge::Leg(l) => HalfEdge::Leg(l),
            HalfEdge::To(u) => HalfEdge::To(perm[u]),
        }
    }
}

/// Rooted structure of a tree, rooted at its center. For a bicentral tree
/// both centers are roots and each is the parent-less root of its half.
struct RootedTree {
    roots: Vec<usize>,
    children: Vec<Vec<usize>>,
    code: Vec<String>,
}

impl RootedTree {
    fn new(g: &PrestableGraph) -> Self {
        let roots = centers(g);
        let nv = g.num_vertices();
        let mut children = vec![Vec::new(); nv];
        let mut parent = vec![usize::MAX; nv];
        let mut order = Vec::with_capacity(nv);
        let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
        if let [u, w] = roots[..] {
            parent[u] = w;
            parent[w] = u;
        }
        while let Some(v) = stack.pop() {
            order.push(v);
            for &u in g.neighbors(v) {
                if u != parent[v] && !(roots.len() == 2 && roots.contains(&u) && roots.contains(&v)) {
                    parent[u] = v;
                    children[v].push(u);
                }
            }
            for &u in children[v].iter().rev() {
                stack.push(u);
            }
        }
        let mut code = vec![String::new(); nv];
        for &v in order.iter().rev() {
            let mut kids = children[v].clone();
            kids.sort_by(|a, b| code[*a].cmp(&code[*b]));
            let mut s = String::from("(");
            push_legs(&mut s, g.legs(v));
            s.push('|');
            for &k in &kids {
                s.push_str(&code[k]);
            }
            s.push(')');
            code[v] = s;
            children[v] = kids;
        }
        Self { roots, children, code }
    }

    fn subtree_sizes(&self) -> Vec<usize> {
        fn go(t: &RootedTree, v: usize, out: &mut Vec<usize>) -> usize {
            let s = 1 + t.children[v].iter().map(|&c| go(t, c, out)).sum::<usize>();
            out[v] = s;
            s
        }
        let mut out = vec![0; self.children.len()];
        for &r in &self.roots {
            go(self, r, &mut out);
        }
        out
    }
}

fn push_legs(s: &mut String, legs: &[Leg]) {
    for (i, l) in legs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&l.to_string());
    }
}

/// Center(s) of the tree, found by peeling leaves. Sorted ascending.
fn centers(g: &PrestableGraph) -> Vec<usize> {
    let nv = g.num_vertices();
    if nv <= 2 {
        return (0..nv).collect();
    }
    let mut deg: Vec<usize> = (0..nv).map(|v| g.neighbors(v).len()).collect();
    let mut removed = vec![false; nv];
    let mut layer: Vec<usize> = (0..nv).filter(|&v| deg[v] == 1).collect();
    let mut remaining = nv;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            removed[v] = true;
        }
        for &v in &layer {
            for &u in g.neighbors(v) {
                if !removed[u] {
                    deg[u] -= 1;
                    if deg[u] == 1 {
                        next.push(u);
                    }
                }
            }
        }
        layer = next;
    }
    (0..nv).filter(|&v| !removed[v]).collect()
}

/// Result of the canonical layout.
pub(crate) struct Layout {
    pub key: GraphKey,
    /// `position[v]` = canonical index of input vertex `v`.
    pub position: Vec<usize>,
    /// True when the root is a leg-free 2-valent vertex whose two branches
    /// are isomorphic including decorations, i.e. an automorphism swaps the
    /// two half-edges of the root and fixes the decoration.
    pub root_swap: bool,
}

struct Node {
    code: String,
    dseq: Vec<u32>,
    order: Vec<usize>,
}

fn build(g: &PrestableGraph, deco: Option<&[u32]>, v: usize, parent: Option<usize>) -> Node {
    let mut kids: Vec<Node> =
        g.neighbors(v).iter().filter(|&&u| Some(u) != parent).map(|&u| build(g, deco, u, Some(v))).collect();
    kids.sort_by(|a, b| a.code.cmp(&b.code).then_with(|| a.dseq.cmp(&b.dseq)));
    let mut code = String::from("(");
    push_legs(&mut code, g.legs(v));
    code.push('|');
    let mut dseq = Vec::new();
    let mut order = vec![v];
    if let Some(d) = deco {
        dseq.push(d[v]);
    }
    for k in &kids {
        code.push_str(&k.code);
        dseq.extend_from_slice(&k.dseq);
        order.extend_from_slice(&k.order);
    }
    code.push(')');
    Node { code, dseq, order }
}

/// Canonical vertex layout. With `deco = Some(exps)` the bare structure is
/// unchanged, but ties between isomorphic sibling subtrees are broken by the
/// decoration sequences so that the canonical exponent vector is the
/// lexicographically least one over all automorphism images.
pub(crate) fn layout(g: &PrestableGraph, deco: Option<&[u32]>) -> Layout {
    let roots = centers(g);
    let (key, order, root_swap) = match roots[..] {
        [r] => {
            let node = build(g, deco, r, None);
            let root_swap = g.legs(r).is_empty() && g.neighbors(r).len() == 2 && {
                let a = build(g, deco, g.neighbors(r)[0], Some(r));
                let b = build(g, deco, g.neighbors(r)[1], Some(r));
                a.code == b.code && a.dseq == b.dseq
            };
            (format!("{}:U{}", g.n(), node.code), node.order, root_swap)
        }
        [u, w] => {
            let a = build(g, deco, u, Some(w));
            let b = build(g, deco, w, Some(u));
            let (first, second) = if (&b.code, &b.dseq) < (&a.code, &a.dseq) { (b, a) } else { (a, b) };
            let mut order = first.order;
            order.extend_from_slice(&second.order);
            (format!("{}:B{}{}", g.n(), first.code, second.code), order, false)
        }
        _ => unreachable!("a tree has one or two centers"),
    };
    let mut position = vec![0; order.len()];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    Layout { key: GraphKey(key), position, root_swap }
}

fn unlabeled_trees(nv: usize) -> Vec<PrestableGraph> {
    let mut current: Vec<PrestableGraph> = vec![PrestableGraph::trivial(0)];
    for size in 2..=nv {
        let mut next: BTreeMap<GraphKey, PrestableGraph> = BTreeMap::new();
        for t in &current {
            for x in 0..t.num_vertices() {
                let mut edges = t.edges().to_vec();
                edges.push((x, size - 1));
                let g =
                    PrestableGraph::new(0, vec![Vec::new(); size], edges).expect("leaf extension of a tree is a tree");
                let c = g.canonical_form();
                next.entry(c.key).or_insert(c.graph);
            }
        }
        current = next.into_values().collect();
    }
    current
}

type Catalog = RwLock<HashMap<(u32, usize), Arc<Vec<PrestableGraph>>>>;

fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| RwLock::new(HashMap::new()))
}

/// One canonical representative per isomorphism class of prestable graphs
/// with `n` legs and `edges` edges, sorted by [`GraphKey`]. Results are
/// memoized and shared.
pub fn graphs(n: u32, edges: usize) -> Arc<Vec<PrestableGraph>> {
    if let Some(g) = catalog().read().expect("catalog lock").get(&(n, edges)) {
        return Arc::clone(g);
    }
    let nv = edges + 1;
    let mut found: BTreeMap<GraphKey, PrestableGraph> = BTreeMap::new();
    for tree in unlabeled_trees(nv) {
        // Every assignment of the n legs to the nv vertices.
        let total = (nv as u64).pow(n);
        let mut legs = vec![Vec::new(); nv];
        for code in 0..total {
            for l in legs.iter_mut() {
                l.clear();
            }
            let mut c = code;
            for leg in 1..=n {
                legs[(c % nv as u64) as usize].push(leg);
                c /= nv as u64;
            }
            let g = PrestableGraph::new(n, legs.clone(), tree.edges().to_vec())
                .expect("leg distribution keeps the tree valid");
            let canon = g.canonical_form();
            found.entry(canon.key).or_insert(canon.graph);
        }
    }
    let list = Arc::new(found.into_values().collect::<Vec<_>>());
    catalog().write().expect("catalog lock").insert((n, edges), Arc::clone(&list));
    list
}

pub fn enumerate_graphs(n: u32, edges: usize) -> Vec<PrestableGraph> {
    graphs(n, edges).as_ref().clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(nv: usize) -> PrestableGraph {
        PrestableGraph::new(0, vec![Vec::new(); nv], (1..nv).map(|i| (i - 1, i)).collect()).unwrap()
    }

    fn star(leaves: usize) -> PrestableGraph {
        PrestableGraph::new(0, vec![Vec::new(); leaves + 1], (1..=leaves).map(|i| (0, i)).collect()).unwrap()
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(PrestableGraph::new(0, vec![vec![], vec![]], vec![(0, 0)]).is_err());
        assert!(PrestableGraph::new(0, vec![vec![], vec![], vec![]], vec![(0, 1), (1, 0)]).is_err());
        assert!(PrestableGraph::new(2, vec![vec![1], vec![1]], vec![(0, 1)]).is_err());
        assert!(PrestableGraph::new(2, vec![vec![1], vec![]], vec![(0, 1)]).is_err());
        assert!(PrestableGraph::new(0, vec![vec![], vec![], vec![]], vec![(0, 1)]).is_err());
        assert!(PrestableGraph::new(0, vec![vec![]; 4], vec![(0, 1), (1, 2), (2, 0)]).is_err());
    }

    #[test]
    fn small_enumeration_counts() {
        assert_eq!(enumerate_graphs(0, 0).len(), 1);
        assert_eq!(enumerate_graphs(0, 3).len(), 2);
        assert_eq!(enumerate_graphs(4, 1).len(), 8);
        // unlabeled trees on 1..=8 vertices
        let counts: Vec<usize> = (0..8).map(|e| enumerate_graphs(0, e).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23]);
    }

    #[test]
    fn canonical_key_ignores_labelling() {
        let a = PrestableGraph::new(2, vec![vec![1], vec![2]], vec![(0, 1)]).unwrap();
        let b = PrestableGraph::new(2, vec![vec![2], vec![1]], vec![(0, 1)]).unwrap();
        assert_eq!(a.key(), b.key());
        let t1 = PrestableGraph::new(3, vec![(1..=3).collect()], vec![]).unwrap();
        assert_eq!(t1.key(), PrestableGraph::trivial(3).key());
    }

    #[test]
    fn canonical_form_is_idempotent() {
        for g in enumerate_graphs(2, 3) {
            let c = g.canonical_form();
            assert_eq!(c.graph, g);
            assert_eq!(c.vertex_map, (0..g.num_vertices()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn automorphism_orders() {
        assert_eq!(path(2).automorphisms().order, 2);
        assert_eq!(star(3).automorphisms().order, 6);
        assert_eq!(star(10).automorphisms().order, 3_628_800);
        let d = PrestableGraph::new(4, vec![vec![1], vec![2, 3, 4]], vec![(0, 1)]).unwrap();
        assert_eq!(d.automorphisms().order, 1);
        assert!(d.automorphisms().generators.is_empty());
    }

    #[test]
    fn generators_are_automorphisms() {
        for g in enumerate_graphs(1, 5) {
            for s in g.automorphisms().generators {
                assert_eq!(g.permuted(&s), g);
            }
        }
    }

    #[test]
    fn contraction() {
        let g = path(2);
        assert_eq!(g.contract_edge(0).unwrap().key(), PrestableGraph::trivial(0).key());
        let p3 = path(3);
        let mid = p3.contract_edge(1).unwrap();
        assert_eq!(mid.key(), path(2).key());
        assert!(matches!(p3.contract_edge(2), Err(Error::InvalidEdge(2))));
    }

    #[test]
    fn json_roundtrip() {
        let g = PrestableGraph::new(3, vec![vec![1], vec![], vec![2, 3]], vec![(0, 1), (1, 2)]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"n":3,"vertices":[{"legs":[1]},{"legs":[]},{"legs":[2,3]}],"edges":[[0,1],[1,2]]}"#);
        let back: PrestableGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
