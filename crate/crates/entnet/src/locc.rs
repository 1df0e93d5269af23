//! Bicolored merging: one-sided certificates that an LOCC conversion is impossible.
//!
//! Colour every agent A or B and merge each colour class into a single
//! party. Every hyperedge that touches both colours becomes one EPR pair
//! between the two parties. If the target ends up with more pairs than the
//! source, the conversion would create bipartite entanglement from nothing,
//! so it cannot be done by LOCC.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{
    enumerate_r_uniform_hypertrees, enumerate_spanning_trees, find_separating_pair,
    quantum_distance, AgentId, Edge, EntangledHypergraph, EprGraph, SpanningTree,
};
use crate::protocols::{entanglement_swap, NetworkState, ProtocolReport, QubitId};
use crate::statevec::{OutcomeSource, Register};

/// Largest agent count [`find_witness`] will search.
pub const MAX_WITNESS_AGENTS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Color {
    A,
    B,
}

/// A two-colouring of agents `0..n` using both colours.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Color>", into = "Vec<Color>")]
pub struct Bicoloring(Vec<Color>);

impl TryFrom<Vec<Color>> for Bicoloring {
    type Error = Error;
    fn try_from(v: Vec<Color>) -> Result<Self> {
        Bicoloring::new(v)
    }
}

impl From<Bicoloring> for Vec<Color> {
    fn from(c: Bicoloring) -> Self {
        c.0
    }
}

impl Bicoloring {
    pub fn new(colors: Vec<Color>) -> Result<Self> {
        if !(colors.contains(&Color::A) && colors.contains(&Color::B)) {
            return Err(Error::invalid("a bicoloring must use both colours"));
        }
        Ok(Bicoloring(colors))
    }

    /// Colours the listed agents A and everyone else B.
    pub fn with_a_side(n: usize, a_side: &BTreeSet<AgentId>) -> Result<Self> {
        Bicoloring::new(
            (0..n)
                .map(|v| if a_side.contains(&AgentId(v)) { Color::A } else { Color::B })
                .collect(),
        )
    }

    /// The colouring at position `index` of the lexicographic order (A < B, agent 0 first).
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        Bicoloring::new(
            (0..n)
                .map(|v| if index >> (n - 1 - v) & 1 == 1 { Color::B } else { Color::A })
                .collect(),
        )
    }

    pub fn index(&self) -> u64 {
        self.0
            .iter()
            .fold(0, |acc, &c| (acc << 1) | u64::from(c == Color::B))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn color(&self, v: AgentId) -> Color {
        self.0[v.0]
    }

    pub fn colors(&self) -> &[Color] {
        &self.0
    }
}

/// EPR pairs shared by the two merged parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MergeCount(pub usize);

/// Anything that can be read as a list of hyperedges over `0..n`.
pub trait EntanglementStructure {
    fn agent_count(&self) -> usize;
    fn hyperedge_list(&self) -> Vec<Vec<AgentId>>;
}

impl EntanglementStructure for EprGraph {
    fn agent_count(&self) -> usize {
        self.n()
    }
    fn hyperedge_list(&self) -> Vec<Vec<AgentId>> {
        self.edges().iter().map(|e| vec![e.lo(), e.hi()]).collect()
    }
}

impl EntanglementStructure for SpanningTree {
    fn agent_count(&self) -> usize {
        self.n()
    }
    fn hyperedge_list(&self) -> Vec<Vec<AgentId>> {
        self.graph().hyperedge_list()
    }
}

impl EntanglementStructure for EntangledHypergraph {
    fn agent_count(&self) -> usize {
        self.n()
    }
    fn hyperedge_list(&self) -> Vec<Vec<AgentId>> {
        self.hyperedges().to_vec()
    }
}

/// Hyperedges (with multiplicity) containing both colours.
pub fn merge_count(s: &impl EntanglementStructure, c: &Bicoloring) -> Result<MergeCount> {
    if s.agent_count() != c.len() {
        return Err(Error::invalid(format!(
            "colouring covers {} agents, structure has {}",
            c.len(),
            s.agent_count()
        )));
    }
    Ok(MergeCount(
        s.hyperedge_list()
            .iter()
            .filter(|e| {
                let first = c.color(e[0]);
                e.iter().any(|&v| c.color(v) != first)
            })
            .count(),
    ))
}

/// A colouring under which the target has more cross pairs than the source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub coloring: Bicoloring,
    pub count_source: MergeCount,
    pub count_target: MergeCount,
}

impl Witness {
    /// Recomputes both counts from scratch.
    pub fn verify(
        &self,
        source: &impl EntanglementStructure,
        target: &impl EntanglementStructure,
    ) -> bool {
        match (merge_count(source, &self.coloring), merge_count(target, &self.coloring)) {
            (Ok(s), Ok(t)) => s == self.count_source && t == self.count_target && t > s,
            _ => false,
        }
    }
}

/// Outcome of a witness search. `NoWitnessFound` does not mean the
/// conversion is possible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    ImpossibleWithWitness { witness: Witness },
    NoWitnessFound { colorings_checked: u64 },
}

impl Verdict {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::ImpossibleWithWitness { witness } => Some(witness),
            Verdict::NoWitnessFound { .. } => None,
        }
    }
}

/// Hyperedges as bitmasks, agent `i` at bit `n − 1 − i`.
fn masks(s: &impl EntanglementStructure) -> Vec<u64> {
    let n = s.agent_count();
    s.hyperedge_list()
        .iter()
        .map(|e| e.iter().fold(0u64, |m, v| m | 1 << (n - 1 - v.0)))
        .collect()
}

fn cross(masks: &[u64], b_side: u64, full: u64) -> usize {
    masks
        .iter()
        .filter(|&&h| h & b_side != 0 && h & !b_side & full != 0)
        .count()
}

struct Search {
    n: usize,
    source: Vec<u64>,
    target: Vec<u64>,
    full: u64,
}

impl Search {
    fn new(s: &impl EntanglementStructure, t: &impl EntanglementStructure) -> Result<Self> {
        let n = s.agent_count();
        if t.agent_count() != n {
            return Err(Error::invalid(format!(
                "source has {n} agents, target has {}",
                t.agent_count()
            )));
        }
        if n > MAX_WITNESS_AGENTS {
            return Err(Error::LimitExceeded {
                what: "witness search agents",
                limit: MAX_WITNESS_AGENTS,
                got: n,
            });
        }
        Ok(Search {
            n,
            source: masks(s),
            target: masks(t),
            full: (1u64 << n) - 1,
        })
    }

    fn hit(&self, idx: u64) -> bool {
        cross(&self.target, idx, self.full) > cross(&self.source, idx, self.full)
    }

    fn verdict(&self, found: Option<u64>) -> Result<Verdict> {
        Ok(match found {
            Some(idx) => Verdict::ImpossibleWithWitness {
                witness: Witness {
                    coloring: Bicoloring::from_index(self.n, idx)?,
                    count_source: MergeCount(cross(&self.source, idx, self.full)),
                    count_target: MergeCount(cross(&self.target, idx, self.full)),
                },
            },
            None => Verdict::NoWitnessFound {
                colorings_checked: self.full.saturating_sub(1),
            },
        })
    }
}

/// The lexicographically first witness against `source → target`, searched in parallel.
pub fn find_witness(
    source: &impl EntanglementStructure,
    target: &impl EntanglementStructure,
) -> Result<Verdict> {
    let s = Search::new(source, target)?;
    let found = (1..s.full).into_par_iter().find_first(|&i| s.hit(i));
    s.verdict(found)
}

/// Single-threaded [`find_witness`].
pub fn find_witness_sequential(
    source: &impl EntanglementStructure,
    target: &impl EntanglementStructure,
) -> Result<Verdict> {
    let s = Search::new(source, target)?;
    let found = (1..s.full).find(|&i| s.hit(i));
    s.verdict(found)
}

/// Result of checking a claim over many cases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremReport {
    pub claim: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn ordered_pairs<T: Sync>(items: &[T]) -> Vec<(&T, &T)> {
    items
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            items
                .iter()
                .enumerate()
                .filter(move |(j, _)| *j != i)
                .map(move |(_, b)| (a, b))
        })
        .collect()
}

fn complete_trees(n: usize) -> Result<Vec<SpanningTree>> {
    enumerate_spanning_trees(&EprGraph::complete(n)?)
}

/// Checks that every ordered pair of distinct spanning trees of `K_n` has a witness.
pub fn verify_tree_incomparability(n: usize) -> Result<TheoremReport> {
    if !(1..=6).contains(&n) {
        return Err(Error::LimitExceeded {
            what: "tree incomparability agents",
            limit: 6,
            got: n,
        });
    }
    let trees = complete_trees(n)?;
    let pairs = ordered_pairs(&trees);
    let mut failures: Vec<String> = pairs
        .par_iter()
        .filter_map(|(a, b)| match find_witness_sequential(*a, *b) {
            Ok(Verdict::ImpossibleWithWitness { witness }) if witness.verify(*a, *b) => None,
            other => Some(format!("{:?} -> {:?}: {other:?}", a.edges(), b.edges())),
        })
        .collect();
    failures.sort();
    Ok(TheoremReport {
        claim: format!("distinct spanning trees on {n} agents are pairwise incomparable"),
        cases: pairs.len(),
        failures,
    })
}

/// Proper 2-colouring of a tree (agent 0 gets A).
pub fn tree_bipartition(t: &SpanningTree) -> Result<Bicoloring> {
    let mut color = vec![None; t.n()];
    color[0] = Some(Color::A);
    let mut queue = VecDeque::from([AgentId(0)]);
    while let Some(v) = queue.pop_front() {
        let flip = match color[v.0] {
            Some(Color::A) => Color::B,
            _ => Color::A,
        };
        for w in t.graph().neighbors(v) {
            if color[w.0].is_none() {
                color[w.0] = Some(flip);
                queue.push_back(w);
            }
        }
    }
    Bicoloring::new(color.into_iter().map(|c| c.unwrap_or(Color::A)).collect())
}

/// Checks that `n − 2` copies of the n-agent CAT state cannot reach any
/// spanning tree, while `n − 1` copies admit no witness.
pub fn verify_cat_copy_lower_bound(n: usize) -> Result<TheoremReport> {
    if !(3..=6).contains(&n) {
        return Err(Error::LimitExceeded {
            what: "CAT copy bound agents",
            limit: 6,
            got: n,
        });
    }
    let short = EntangledHypergraph::full_copies(n, n - 2)?;
    let enough = EntangledHypergraph::full_copies(n, n - 1)?;
    let trees = complete_trees(n)?;
    let mut failures = Vec::new();
    for t in &trees {
        let c = tree_bipartition(t)?;
        let (s, g) = (merge_count(&short, &c)?, merge_count(t, &c)?);
        if (s, g) != (MergeCount(n - 2), MergeCount(n - 1)) {
            failures.push(format!("{:?}: bipartition gives {} vs {}", t.edges(), s.0, g.0));
        }
        match find_witness_sequential(&short, t)? {
            Verdict::ImpossibleWithWitness { witness } if witness.verify(&short, t) => {}
            v => failures.push(format!("{:?}: {} copies gave {v:?}", t.edges(), n - 2)),
        }
        if let Verdict::ImpossibleWithWitness { .. } = find_witness_sequential(&enough, t)? {
            failures.push(format!("{:?}: {} copies were refuted", t.edges(), n - 1));
        }
    }
    Ok(TheoremReport {
        claim: format!("{} CAT copies on {n} agents cannot yield a spanning tree", n - 2),
        cases: trees.len(),
        failures,
    })
}

/// Witnesses in both directions between hypergraphs whose pendant sets
/// differ both ways.
///
/// For `u` pendant in the source but not in the target, colouring `u` alone
/// A is tried before the exhaustive search.
pub fn verify_pendant_theorem(
    h1: &EntangledHypergraph,
    h2: &EntangledHypergraph,
) -> Result<(Verdict, Verdict)> {
    let (p1, p2) = (h1.pendant_vertices(), h2.pendant_vertices());
    let u = p1.difference(&p2).next().copied();
    let v = p2.difference(&p1).next().copied();
    let (Some(u), Some(v)) = (u, v) else {
        return Err(Error::Precondition(
            "each hypergraph needs a pendant agent that is not pendant in the other".into(),
        ));
    };
    Ok((singleton_first(h1, h2, u)?, singleton_first(h2, h1, v)?))
}

fn singleton_first(
    source: &EntangledHypergraph,
    target: &EntangledHypergraph,
    u: AgentId,
) -> Result<Verdict> {
    let c = Bicoloring::with_a_side(source.n(), &BTreeSet::from([u]))?;
    let (s, t) = (merge_count(source, &c)?, merge_count(target, &c)?);
    if t > s {
        return Ok(Verdict::ImpossibleWithWitness {
            witness: Witness {
                coloring: c,
                count_source: s,
                count_target: t,
            },
        });
    }
    find_witness_sequential(source, target)
}

/// Checks every ordered pair of distinct `r`-uniform hypertrees on `n` agents.
///
/// The number of pairs grows very quickly; `r = 3` with `n = 9` is far
/// beyond desk scale.
pub fn verify_runiform_theorem(r: usize, n: usize) -> Result<TheoremReport> {
    if !(3..=4).contains(&r) {
        return Err(Error::invalid(format!("r = {r}; only 3 and 4 are supported")));
    }
    let trees = enumerate_r_uniform_hypertrees(n, r)?;
    let pairs = ordered_pairs(&trees);
    let mut failures: Vec<String> = pairs
        .par_iter()
        .filter_map(|(a, b)| {
            let sep = match find_separating_pair(a, b) {
                Ok((u, v)) if b.co_hyperedged(u, v) && !a.co_hyperedged(u, v) => None,
                other => Some(format!("separating pair {other:?}")),
            };
            let wit = match find_witness_sequential(*a, *b) {
                Ok(Verdict::ImpossibleWithWitness { witness }) if witness.verify(*a, *b) => None,
                other => Some(format!("{other:?}")),
            };
            match (sep, wit) {
                (None, None) => None,
                (s, w) => Some(format!(
                    "{:?} -> {:?}: {}",
                    a.hyperedges(),
                    b.hyperedges(),
                    [s, w].into_iter().flatten().collect::<Vec<_>>().join("; ")
                )),
            }
        })
        .collect();
    failures.sort();
    Ok(TheoremReport {
        claim: format!("distinct {r}-uniform hypertrees on {n} agents are pairwise incomparable"),
        cases: pairs.len(),
        failures,
    })
}

/// A constructive conversion from copies of one tree to another.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CopyPlan {
    pub source: SpanningTree,
    pub target: SpanningTree,
    /// Target edges taken directly from one copy of the source.
    pub common_edges: Vec<Edge>,
    /// Each missing edge is produced by swapping along its path in the source.
    pub swaps: Vec<SwapStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwapStep {
    pub target_edge: Edge,
    pub path: Vec<AgentId>,
}

impl CopyPlan {
    /// Copies of the source tree the plan consumes.
    pub fn copies(&self) -> usize {
        usize::from(!self.common_edges.is_empty()) + self.swaps.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CopyBounds {
    pub lower: usize,
    pub upper: usize,
    pub quantum_distance: usize,
    pub plan: CopyPlan,
}

/// Bounds on the copies of `t1` needed to reach `t2`: `(2, QD + 1)`, or
/// `(1, 1)` for equal trees.
pub fn copy_bounds(t1: &SpanningTree, t2: &SpanningTree) -> Result<CopyBounds> {
    let qd = quantum_distance(t1, t2)?;
    let common_edges: Vec<Edge> = t2.edges().intersection(t1.edges()).copied().collect();
    let swaps = t2
        .edges()
        .difference(t1.edges())
        .map(|&e| SwapStep {
            target_edge: e,
            path: t1.path_between(e.lo(), e.hi()),
        })
        .collect();
    let plan = CopyPlan {
        source: t1.clone(),
        target: t2.clone(),
        common_edges,
        swaps,
    };
    let (lower, upper) = if qd == 0 { (1, 1) } else { (2, qd + 1) };
    Ok(CopyBounds {
        lower,
        upper,
        quantum_distance: qd,
        plan,
    })
}

/// A simulated run of a [`CopyPlan`].
#[derive(Clone, Debug, Serialize)]
pub struct CopyExecution {
    pub report: ProtocolReport,
    /// The qubits forming each target edge, lower agent first.
    pub pairs: BTreeMap<Edge, (QubitId, QubitId)>,
}

impl CopyExecution {
    /// True when the final register is a Bell pair on every target edge.
    pub fn reproduces_target(&self, tol: f64) -> Result<bool> {
        let order: Vec<QubitId> = self.pairs.values().flat_map(|&(a, b)| [a, b]).collect();
        let reg = self.report.final_state.register_in_order(&order)?;
        let mut want = Register::empty();
        for _ in 0..self.pairs.len() {
            want = want.tensor(&Register::cat(2)?)?;
        }
        Ok(reg.fidelity(&want) >= 1.0 - tol)
    }
}

/// Runs a plan, materialising only the source-copy pairs it actually uses.
pub fn execute_copy_plan(
    plan: &CopyPlan,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<CopyExecution> {
    let mut ns = NetworkState::new();
    let mut pairs = BTreeMap::new();
    for e in &plan.common_edges {
        pairs.insert(*e, ns.make_epr(e.lo(), e.hi())?);
    }
    for step in &plan.swaps {
        let chain: Vec<(QubitId, QubitId)> = step
            .path
            .windows(2)
            .map(|w| ns.make_epr(w[0], w[1]))
            .collect::<Result<_>>()?;
        let far = entanglement_swap(&mut ns, &chain, rng)?;
        pairs.insert(step.target_edge, (chain[0].0, far));
    }
    Ok(CopyExecution {
        report: ProtocolReport::new(ns, Vec::new()),
        pairs,
    })
}

/// The witness showing that a GHZ state cannot be turned into EPR pairs
/// A–B and A–C, which is what selectively teleporting two qubits would need.
pub fn selective_teleportation_impossible() -> Result<Witness> {
    let ghz = EntangledHypergraph::new(3, vec![vec![0, 1, 2]], false)?;
    let pairs = EprGraph::new(3, [(0, 1), (0, 2)])?;
    match find_witness_sequential(&ghz, &pairs)? {
        Verdict::ImpossibleWithWitness { witness } => Ok(witness),
        Verdict::NoWitnessFound { .. } => Err(Error::Internal(
            "GHZ to two EPR pairs was not refuted".into(),
        )),
    }
}
