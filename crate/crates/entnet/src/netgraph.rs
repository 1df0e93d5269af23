//! EPR graphs, spanning trees and entangled hypergraphs.
//!
//! Agents are numbered `0..n`. Edges and hyperedges are kept in canonical
//! sorted form so that serialisation and iteration order are stable.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_spanning_trees`].
pub const MAX_TREE_ENUMERATION: usize = 8;
/// Largest `n` accepted by [`enumerate_r_uniform_hypertrees`] and [`enumerate_hypertrees`].
pub const MAX_HYPERTREE_ENUMERATION: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for AgentId {
    fn from(v: usize) -> Self {
        AgentId(v)
    }
}

/// Unordered agent pair, stored smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", from = "[usize; 2]")]
pub struct Edge {
    lo: AgentId,
    hi: AgentId,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Edge {
        Edge {
            lo: AgentId(a.min(b)),
            hi: AgentId(a.max(b)),
        }
    }

    pub fn lo(&self) -> AgentId {
        self.lo
    }

    pub fn hi(&self) -> AgentId {
        self.hi
    }

    pub fn contains(&self, v: AgentId) -> bool {
        self.lo == v || self.hi == v
    }

    /// The other endpoint, if `v` is one of them.
    pub fn other(&self, v: AgentId) -> Option<AgentId> {
        if v == self.lo {
            Some(self.hi)
        } else if v == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.lo.0, e.hi.0]
    }
}

impl From<[usize; 2]> for Edge {
    fn from([a, b]: [usize; 2]) -> Self {
        Edge::new(a, b)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    pub(crate) fn components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Agents as vertices, one edge per shared EPR pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct EprGraph {
    n: usize,
    edges: BTreeSet<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphRepr> for EprGraph {
    type Error = Error;
    fn try_from(r: GraphRepr) -> Result<Self> {
        EprGraph::new(r.n, r.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<EprGraph> for GraphRepr {
    fn from(g: EprGraph) -> Self {
        GraphRepr {
            n: g.n,
            edges: g.edges.into_iter().map(Into::into).collect(),
        }
    }
}

impl EprGraph {
    /// Rejects self-loops, out-of-range agents and repeated edges.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a graph needs at least one agent"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a},{b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at {a}")));
            }
            if !set.insert(Edge::new(a, b)) {
                return Err(Error::invalid(format!("duplicate edge ({a},{b})")));
            }
        }
        Ok(EprGraph { n, edges: set })
    }

    pub fn complete(n: usize) -> Result<Self> {
        EprGraph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    pub fn degree(&self, v: AgentId) -> usize {
        self.edges.iter().filter(|e| e.contains(v)).count()
    }

    /// Neighbours of `v` in increasing order.
    pub fn neighbors(&self, v: AgentId) -> Vec<AgentId> {
        let mut out: Vec<AgentId> = self.edges.iter().filter_map(|e| e.other(v)).collect();
        out.sort();
        out
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n).map(AgentId)
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.n);
        for e in &self.edges {
            uf.union(e.lo.0, e.hi.0);
        }
        uf.components() == 1
    }
}

/// An [`EprGraph`] with one non-negative cost per edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightedRepr", into = "WeightedRepr")]
pub struct WeightedEprGraph {
    graph: EprGraph,
    weights: BTreeMap<Edge, f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightedRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
    weights: Vec<f64>,
}

impl TryFrom<WeightedRepr> for WeightedEprGraph {
    type Error = Error;
    fn try_from(r: WeightedRepr) -> Result<Self> {
        if r.edges.len() != r.weights.len() {
            return Err(Error::invalid("edges and weights differ in length"));
        }
        WeightedEprGraph::new(
            r.n,
            r.edges.into_iter().zip(r.weights).map(|([a, b], w)| (a, b, w)),
        )
    }
}

impl From<WeightedEprGraph> for WeightedRepr {
    fn from(g: WeightedEprGraph) -> Self {
        WeightedRepr {
            n: g.graph.n,
            edges: g.weights.keys().map(|&e| e.into()).collect(),
            weights: g.weights.values().copied().collect(),
        }
    }
}

impl WeightedEprGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let edges: Vec<(usize, usize, f64)> = edges.into_iter().collect();
        for &(a, b, w) in &edges {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(format!("edge ({a},{b}) has weight {w}")));
            }
        }
        let graph = EprGraph::new(n, edges.iter().map(|&(a, b, _)| (a, b)))?;
        let weights = edges.iter().map(|&(a, b, w)| (Edge::new(a, b), w)).collect();
        Ok(WeightedEprGraph { graph, weights })
    }

    pub fn graph(&self) -> &EprGraph {
        &self.graph
    }

    pub fn weight(&self, e: &Edge) -> Option<f64> {
        self.weights.get(e).copied()
    }

    /// Sum of the weights of the given edges; edges absent from the graph count as infinite.
    pub fn total_weight<'a>(&self, edges: impl IntoIterator<Item = &'a Edge>) -> f64 {
        edges
            .into_iter()
            .map(|e| self.weight(e).unwrap_or(f64::INFINITY))
            .sum()
    }

    /// Kruskal's algorithm; equal weights fall back to edge order.
    pub fn minimum_spanning_tree(&self) -> Result<SpanningTree> {
        let mut order: Vec<(&Edge, f64)> = self.weights.iter().map(|(e, &w)| (e, w)).collect();
        order.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(y.0)));
        let mut uf = UnionFind::new(self.graph.n);
        let mut chosen = BTreeSet::new();
        for (e, _) in order {
            if uf.union(e.lo.0, e.hi.0) {
                chosen.insert(*e);
            }
        }
        if uf.components() != 1 {
            return Err(Error::NoSpanningTree);
        }
        Ok(SpanningTree(EprGraph {
            n: self.graph.n,
            edges: chosen,
        }))
    }
}

/// A connected [`EprGraph`] with exactly `n − 1` edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "EprGraph", into = "EprGraph")]
pub struct SpanningTree(EprGraph);

impl TryFrom<EprGraph> for SpanningTree {
    type Error = Error;
    fn try_from(g: EprGraph) -> Result<Self> {
        if g.edges.len() + 1 != g.n || !g.is_connected() {
            return Err(Error::invalid(format!(
                "graph with {} agents and {} edges is not a spanning tree",
                g.n,
                g.edges.len()
            )));
        }
        Ok(SpanningTree(g))
    }
}

impl From<SpanningTree> for EprGraph {
    fn from(t: SpanningTree) -> Self {
        t.0
    }
}

impl SpanningTree {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        EprGraph::new(n, edges)?.try_into()
    }

    /// `0 − 1 − … − (n−1)`.
    pub fn path(n: usize) -> Result<Self> {
        SpanningTree::new(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Every agent joined to `centre`.
    pub fn star(n: usize, centre: usize) -> Result<Self> {
        SpanningTree::new(n, (0..n).filter(|&v| v != centre).map(|v| (centre, v)))
    }

    pub fn graph(&self) -> &EprGraph {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.0.edges
    }

    /// Degree-one agents (both agents when `n = 2`).
    pub fn leaves(&self) -> Vec<AgentId> {
        self.0.agents().filter(|&v| self.0.degree(v) == 1).collect()
    }

    /// The unique path from `from` to `to`, both ends included.
    pub fn path_between(&self, from: AgentId, to: AgentId) -> Vec<AgentId> {
        let mut parent: Vec<Option<AgentId>> = vec![None; self.n()];
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([from]);
        seen[from.0] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for w in self.0.neighbors(v) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    parent[w.0] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while let Some(p) = parent[cur.0] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// The two sides left after deleting `e`; the side holding `e.lo()` comes first.
    pub fn split_at(&self, e: &Edge) -> (BTreeSet<AgentId>, BTreeSet<AgentId>) {
        let mut uf = UnionFind::new(self.n());
        for f in self.edges().iter().filter(|f| *f != e) {
            uf.union(f.lo.0, f.hi.0);
        }
        let root = uf.find(e.lo.0);
        self.0
            .agents()
            .partition(|v| uf.find(v.0) == root)
    }
}

/// Every spanning tree of `g`, in lexicographic order of sorted edge lists.
pub fn enumerate_spanning_trees(g: &EprGraph) -> Result<Vec<SpanningTree>> {
    if g.n > MAX_TREE_ENUMERATION {
        return Err(Error::LimitExceeded {
            what: "spanning-tree enumeration size",
            limit: MAX_TREE_ENUMERATION,
            got: g.n,
        });
    }
    let edges: Vec<Edge> = g.edges.iter().copied().collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    grow_trees(g.n, &edges, 0, &mut chosen, UnionFind::new(g.n), &mut out);
    Ok(out)
}

fn grow_trees(
    n: usize,
    edges: &[Edge],
    i: usize,
    chosen: &mut Vec<Edge>,
    mut uf: UnionFind,
    out: &mut Vec<SpanningTree>,
) {
    let need = n - 1 - chosen.len();
    if need == 0 {
        out.push(SpanningTree(EprGraph {
            n,
            edges: chosen.iter().copied().collect(),
        }));
        return;
    }
    if edges.len() - i < need {
        return;
    }
    let e = edges[i];
    if uf.find(e.lo.0) != uf.find(e.hi.0) {
        let mut with = uf.clone();
        with.union(e.lo.0, e.hi.0);
        chosen.push(e);
        grow_trees(n, edges, i + 1, chosen, with, out);
        chosen.pop();
    }
    let mut reach = uf.clone();
    for f in &edges[i + 1..] {
        reach.union(f.lo.0, f.hi.0);
    }
    if reach.components() == 1 {
        grow_trees(n, edges, i + 1, chosen, uf, out);
    }
}

/// Number of edges of `t1` missing from `t2`.
pub fn quantum_distance(t1: &SpanningTree, t2: &SpanningTree) -> Result<usize> {
    if t1.n() != t2.n() {
        return Err(Error::invalid(format!(
            "trees on {} and {} agents",
            t1.n(),
            t2.n()
        )));
    }
    Ok(t1.edges().difference(t2.edges()).count())
}

/// Hyperedges of agents sharing a multipartite CAT state.
///
/// With `multi` set, a hyperedge may appear more than once (several copies
/// of the same state).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "HyperRepr", into = "HyperRepr")]
pub struct EntangledHypergraph {
    n: usize,
    hyperedges: Vec<Vec<AgentId>>,
    multi: bool,
}

#[derive(Serialize, Deserialize)]
struct HyperRepr {
    n: usize,
    hyperedges: Vec<Vec<usize>>,
    #[serde(default)]
    multi: bool,
}

impl TryFrom<HyperRepr> for EntangledHypergraph {
    type Error = Error;
    fn try_from(r: HyperRepr) -> Result<Self> {
        EntangledHypergraph::new(r.n, r.hyperedges, r.multi)
    }
}

impl From<EntangledHypergraph> for HyperRepr {
    fn from(h: EntangledHypergraph) -> Self {
        HyperRepr {
            n: h.n,
            hyperedges: h
                .hyperedges
                .into_iter()
                .map(|e| e.into_iter().map(|v| v.0).collect())
                .collect(),
            multi: h.multi,
        }
    }
}

impl EntangledHypergraph {
    pub fn new(n: usize, hyperedges: Vec<Vec<usize>>, multi: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a hypergraph needs at least one agent"));
        }
        let mut canon: Vec<Vec<AgentId>> = Vec::with_capacity(hyperedges.len());
        for e in hyperedges {
            let set: BTreeSet<usize> = e.iter().copied().collect();
            if set.len() != e.len() {
                return Err(Error::invalid(format!("hyperedge {e:?} repeats an agent")));
            }
            if set.len() < 2 {
                return Err(Error::invalid(format!("hyperedge {e:?} has fewer than 2 agents")));
            }
            if let Some(v) = set.iter().find(|&&v| v >= n) {
                return Err(Error::invalid(format!("agent {v} outside 0..{n}")));
            }
            canon.push(set.into_iter().map(AgentId).collect());
        }
        canon.sort();
        if !multi && canon.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate hyperedge in a simple hypergraph"));
        }
        Ok(EntangledHypergraph {
            n,
            hyperedges: canon,
            multi,
        })
    }

    /// The graph's edges as 2-agent hyperedges.
    pub fn from_graph(g: &EprGraph) -> Self {
        EntangledHypergraph {
            n: g.n,
            hyperedges: g.edges.iter().map(|e| vec![e.lo, e.hi]).collect(),
            multi: false,
        }
    }

    /// `copies` instances of the hyperedge holding every agent.
    pub fn full_copies(n: usize, copies: usize) -> Result<Self> {
        EntangledHypergraph::new(n, vec![(0..n).collect(); copies], copies > 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hyperedges(&self) -> &[Vec<AgentId>] {
        &self.hyperedges
    }

    pub fn is_multi(&self) -> bool {
        self.multi
    }

    /// Hyperedges containing `v`.
    pub fn memberships(&self, v: AgentId) -> usize {
        self.hyperedges.iter().filter(|e| e.contains(&v)).count()
    }

    /// Connected through chains of hyperedges that share an agent.
    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.n);
        for e in &self.hyperedges {
            for w in e.windows(2) {
                uf.union(w[0].0, w[1].0);
            }
        }
        uf.components() == 1
    }

    /// Agents lying in exactly one hyperedge.
    pub fn pendant_vertices(&self) -> BTreeSet<AgentId> {
        (0..self.n)
            .map(AgentId)
            .filter(|&v| self.memberships(v) == 1)
            .collect()
    }

    /// True when the agent/hyperedge incidence graph has no cycle, i.e. no two
    /// agents are joined by two hyperedge-distinct hyperpaths.
    pub fn is_acyclic(&self) -> bool {
        let m = self.hyperedges.len();
        let mut uf = UnionFind::new(self.n + m);
        self.hyperedges
            .iter()
            .enumerate()
            .all(|(i, e)| e.iter().all(|v| uf.union(v.0, self.n + i)))
    }

    /// Connected, acyclic, and every agent in some hyperedge.
    pub fn is_hypertree(&self) -> bool {
        self.is_connected() && self.is_acyclic()
    }

    pub fn is_r_uniform_hypertree(&self, r: usize) -> bool {
        r >= 2
            && self.hyperedges.iter().all(|e| e.len() == r)
            && self.is_hypertree()
            && self.n == self.hyperedges.len() * (r - 1) + 1
    }

    /// True when some hyperedge holds both agents.
    pub fn co_hyperedged(&self, u: AgentId, v: AgentId) -> bool {
        self.hyperedges
            .iter()
            .any(|e| e.contains(&u) && e.contains(&v))
    }
}

/// The first pair `(u, v)`, `u < v`, sharing a hyperedge in `h2` but none in `h1`.
pub fn find_separating_pair(
    h1: &EntangledHypergraph,
    h2: &EntangledHypergraph,
) -> Result<(AgentId, AgentId)> {
    if h1 == h2 {
        return Err(Error::Precondition("hypertrees are identical".into()));
    }
    let r = h1.hyperedges.first().map_or(0, Vec::len);
    if r < 3 || h1.n != h2.n || !h1.is_r_uniform_hypertree(r) || !h2.is_r_uniform_hypertree(r) {
        return Err(Error::Precondition(
            "expected two r-uniform hypertrees with r ≥ 3 on the same agents".into(),
        ));
    }
    (0..h1.n)
        .flat_map(|u| (u + 1..h1.n).map(move |v| (AgentId(u), AgentId(v))))
        .find(|&(u, v)| h2.co_hyperedged(u, v) && !h1.co_hyperedged(u, v))
        .ok_or_else(|| Error::Internal("no separating pair between distinct hypertrees".into()))
}

fn check_hypertree_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_HYPERTREE_ENUMERATION {
        return Err(Error::LimitExceeded {
            what: "hypertree enumeration size",
            limit: MAX_HYPERTREE_ENUMERATION,
            got: n,
        });
    }
    Ok(())
}

/// All `r`-uniform hypertrees on agents `0..n`, in canonical order.
pub fn enumerate_r_uniform_hypertrees(n: usize, r: usize) -> Result<Vec<EntangledHypergraph>> {
    check_hypertree_size(n)?;
    if r < 2 || (n - 1) % (r - 1) != 0 {
        return Ok(Vec::new());
    }
    let candidates = subsets_of_size(n, r);
    Ok(grow_hypertrees(n, &candidates, n - 1))
}

/// All hypertrees on `0..n` with hyperedges of any size ≥ 2.
pub fn enumerate_hypertrees(n: usize) -> Result<Vec<EntangledHypergraph>> {
    check_hypertree_size(n)?;
    let candidates: Vec<Vec<usize>> = (2..=n).flat_map(|k| subsets_of_size(n, k)).collect();
    let mut out = grow_hypertrees(n, &candidates, n - 1);
    out.sort_by(|a, b| a.hyperedges.cmp(&b.hyperedges));
    Ok(out)
}

/// Sets of candidates whose incidence graph is a spanning tree.
///
/// An acyclic choice with `Σ(|E| − 1) = n − 1` is automatically connected.
fn grow_hypertrees(n: usize, candidates: &[Vec<usize>], budget: usize) -> Vec<EntangledHypergraph> {
    fn rec(
        n: usize,
        candidates: &[Vec<usize>],
        i: usize,
        budget: usize,
        uf: &UnionFind,
        chosen: &mut Vec<usize>,
        out: &mut Vec<EntangledHypergraph>,
    ) {
        if budget == 0 {
            let hyperedges = chosen
                .iter()
                .map(|&c| candidates[c].iter().map(|&v| AgentId(v)).collect())
                .collect();
            out.push(EntangledHypergraph {
                n,
                hyperedges,
                multi: false,
            });
            return;
        }
        for c in i..candidates.len() {
            let e = &candidates[c];
            if e.len() - 1 > budget {
                continue;
            }
            let mut next = uf.clone();
            let roots: BTreeSet<usize> = e.iter().map(|&v| next.find(v)).collect();
            if roots.len() != e.len() {
                continue;
            }
            for w in e.windows(2) {
                next.union(w[0], w[1]);
            }
            chosen.push(c);
            rec(n, candidates, c + 1, budget - (e.len() - 1), &next, chosen, out);
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    if n == 1 {
        return out;
    }
    rec(n, candidates, 0, budget, &UnionFind::new(n), &mut Vec::new(), &mut out);
    out
}

/// `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}
