//! Multiparty key distribution over a spanning tree of pairwise keys.
//!
//! Pairwise bits along the tree edges are turned into one bit shared by all
//! agents: every interior agent publishes its edge bits masked by a single
//! private flip, which leaks only relative values. The quantum pipeline
//! repeats this over simulated EPR measurements and reconciles with a
//! linear code. The two-group variant XORs diagonal-basis outcomes of a CAT
//! state within each group.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netgraph::{AgentId, Edge, EntangledHypergraph, EprGraph, SpanningTree};
use crate::protocols::protocol_two_ncat;
use crate::statevec::{c64, Basis, Gate, OutcomeSource, Register, TOLERANCE};

/// Largest tree [`eve_consistent_configs`] enumerates.
pub const MAX_EVE_AGENTS: usize = 16;

/// One secret bit per tree edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeKeyTable(BTreeMap<Edge, u8>);

impl Serialize for EdgeKeyTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl EdgeKeyTable {
    pub fn new(tree: &SpanningTree, bits: BTreeMap<Edge, u8>) -> Result<Self> {
        if !bits.keys().eq(tree.edges().iter()) {
            return Err(Error::invalid("key table must cover exactly the tree edges"));
        }
        if bits.values().any(|&b| b > 1) {
            return Err(Error::invalid("key bits must be 0 or 1"));
        }
        Ok(EdgeKeyTable(bits))
    }

    /// Edge `i` in canonical order gets bit `i` of `mask`.
    pub fn from_mask(tree: &SpanningTree, mask: u64) -> Self {
        EdgeKeyTable(
            tree.edges()
                .iter()
                .enumerate()
                .map(|(i, &e)| (e, (mask >> i & 1) as u8))
                .collect(),
        )
    }

    pub fn random(tree: &SpanningTree, rng: &mut impl Rng) -> Self {
        EdgeKeyTable(tree.edges().iter().map(|&e| (e, rng.gen_range(0..=1))).collect())
    }

    pub fn bit(&self, e: &Edge) -> Option<u8> {
        self.0.get(e).copied()
    }

    pub fn bits(&self) -> &BTreeMap<Edge, u8> {
        &self.0
    }

    pub fn complement(&self) -> Self {
        EdgeKeyTable(self.0.iter().map(|(&e, &b)| (e, b ^ 1)).collect())
    }
}

/// An interior agent's edge bits, all XORed with one private flip.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RandomizedRecord {
    pub agent: AgentId,
    pub entries: Vec<(Edge, u8)>,
}

fn incident(tree: &SpanningTree, v: AgentId) -> impl Iterator<Item = Edge> + '_ {
    tree.edges().iter().copied().filter(move |e| e.contains(v))
}

fn interior_agents(tree: &SpanningTree) -> Vec<AgentId> {
    tree.graph().agents().filter(|&v| tree.graph().degree(v) > 1).collect()
}

fn announce(
    tree: &SpanningTree,
    agent: AgentId,
    view: impl Fn(Edge) -> u8,
    flip: u8,
) -> RandomizedRecord {
    RandomizedRecord {
        agent,
        entries: incident(tree, agent).map(|e| (e, view(e) ^ flip)).collect(),
    }
}

/// Fills in every edge bit from an agent's own bits and the public records.
fn reconstruct_edges(
    tree: &SpanningTree,
    own: BTreeMap<Edge, u8>,
    records: &[RandomizedRecord],
) -> Result<BTreeMap<Edge, u8>> {
    let mut known = own;
    loop {
        let mut progress = false;
        for rec in records {
            let Some(flip) = rec
                .entries
                .iter()
                .find_map(|(e, r)| known.get(e).map(|b| b ^ r))
            else {
                continue;
            };
            for &(e, r) in &rec.entries {
                if !known.contains_key(&e) {
                    known.insert(e, r ^ flip);
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
    }
    if known.len() != tree.edges().len() {
        return Err(Error::Internal("records do not determine every edge".into()));
    }
    Ok(known)
}

fn terminal_edge(tree: &SpanningTree, terminal: AgentId) -> Result<Edge> {
    let mut edges = incident(tree, terminal);
    match (edges.next(), edges.next()) {
        (Some(e), None) => Ok(e),
        _ => Err(Error::invalid(format!("agent {} is not a terminal", terminal.0))),
    }
}

/// What the public channel carries in one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PublicRound {
    pub announcements: Vec<RandomizedRecord>,
    pub chosen_terminal: AgentId,
}

/// One run of the classical subroutine, hidden values included.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KeyRound {
    pub tree: SpanningTree,
    pub table: EdgeKeyTable,
    pub flips: BTreeMap<AgentId, u8>,
    pub announcements: Vec<RandomizedRecord>,
    pub chosen_terminal: AgentId,
    pub shared_bit: u8,
}

impl KeyRound {
    /// The shared bit as computed by `agent` from its own edges and the records.
    pub fn reconstruct(&self, agent: AgentId) -> Result<u8> {
        let own = incident(&self.tree, agent)
            .map(|e| (e, self.table.0[&e]))
            .collect();
        let all = reconstruct_edges(&self.tree, own, &self.announcements)?;
        Ok(all[&terminal_edge(&self.tree, self.chosen_terminal)?])
    }

    pub fn public(&self) -> PublicRound {
        PublicRound {
            announcements: self.announcements.clone(),
            chosen_terminal: self.chosen_terminal,
        }
    }
}

/// The subroutine with every random choice supplied.
pub fn nkd_round_with(
    tree: &SpanningTree,
    table: EdgeKeyTable,
    flips: BTreeMap<AgentId, u8>,
    terminal: AgentId,
) -> Result<KeyRound> {
    let edge = terminal_edge(tree, terminal)?;
    let announcements = interior_agents(tree)
        .into_iter()
        .map(|v| {
            let x = *flips
                .get(&v)
                .ok_or_else(|| Error::invalid(format!("no flip bit for agent {}", v.0)))?;
            Ok(announce(tree, v, |e| table.0[&e], x))
        })
        .collect::<Result<Vec<_>>>()?;
    let shared_bit = table.0[&edge];
    Ok(KeyRound {
        tree: tree.clone(),
        table,
        flips,
        announcements,
        chosen_terminal: terminal,
        shared_bit,
    })
}

/// Turns `n − 1` random edge bits into one bit shared by all agents.
pub fn classical_nkd_round(tree: &SpanningTree, rng: &mut impl Rng) -> Result<KeyRound> {
    let leaves = tree.leaves();
    if leaves.is_empty() {
        return Err(Error::invalid("at least two agents are needed"));
    }
    let table = EdgeKeyTable::random(tree, rng);
    let flips = interior_agents(tree)
        .into_iter()
        .map(|v| (v, rng.gen_range(0..=1)))
        .collect();
    let terminal = leaves[rng.gen_range(0..leaves.len())];
    nkd_round_with(tree, table, flips, terminal)
}

/// Every hidden configuration an eavesdropper cannot rule out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EveView {
    pub configurations: Vec<EdgeKeyTable>,
    /// How many configurations give the shared bit 0 and 1.
    pub shared_bit_counts: [usize; 2],
}

impl EveView {
    /// Exactly two configurations, complementary, one per shared-bit value.
    pub fn is_balanced_pair(&self) -> bool {
        self.shared_bit_counts == [1, 1]
            && self.configurations.len() == 2
            && self.configurations[0].complement() == self.configurations[1]
    }
}

/// Enumerates all edge tables (each fixing the flips) consistent with the public record.
pub fn eve_consistent_configs(tree: &SpanningTree, public: &PublicRound) -> Result<EveView> {
    if tree.n() > MAX_EVE_AGENTS {
        return Err(Error::LimitExceeded {
            what: "eavesdropper enumeration agents",
            limit: MAX_EVE_AGENTS,
            got: tree.n(),
        });
    }
    let edge = terminal_edge(tree, public.chosen_terminal)?;
    let mut configurations = Vec::new();
    let mut shared_bit_counts = [0; 2];
    for mask in 0..1u64 << tree.edges().len() {
        let table = EdgeKeyTable::from_mask(tree, mask);
        let consistent = public.announcements.iter().all(|rec| {
            let mut xs = rec.entries.iter().map(|(e, r)| table.0.get(e).map(|b| b ^ r));
            let first = xs.next().flatten();
            first.is_some() && xs.all(|x| x == first)
        });
        if consistent {
            shared_bit_counts[table.0[&edge] as usize] += 1;
            configurations.push(table);
        }
    }
    Ok(EveView {
        configurations,
        shared_bit_counts,
    })
}

/// Shared bits out per pairwise bit in: `k·n / (m·(n − 1)·2)`.
pub fn random_efficiency(n: u64, m: u64, k: u64) -> Result<Ratio<u64>> {
    if n < 2 || k == 0 || k > m {
        return Err(Error::invalid(format!("need n ≥ 2 and 1 ≤ k ≤ m, got n={n} m={m} k={k}")));
    }
    Ok(Ratio::new(k * n, m * (n - 1) * 2))
}

/// A binary linear code in systematic form `G = [I_k | P]`.
#[derive(Clone, Debug)]
pub struct LinearCode {
    m: usize,
    k: usize,
    d: usize,
    generator: Vec<Vec<u8>>,
    parity_check: Vec<Vec<u8>>,
    leaders: HashMap<Vec<u8>, Vec<u8>>,
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn weight(v: &[u8]) -> usize {
    v.iter().filter(|&&b| b == 1).count()
}

impl LinearCode {
    /// `parity` holds the `k` rows of `P`, each of length `m − k`.
    pub fn systematic(k: usize, parity: Vec<Vec<u8>>) -> Result<Self> {
        if k == 0 || k > 16 || parity.len() != k {
            return Err(Error::invalid("need 1 ≤ k ≤ 16 parity rows"));
        }
        let r = parity[0].len();
        if parity.iter().any(|row| row.len() != r || row.iter().any(|&b| b > 1)) {
            return Err(Error::invalid("parity rows must be equal-length bit vectors"));
        }
        let m = k + r;
        let generator: Vec<Vec<u8>> = (0..k)
            .map(|i| (0..k).map(|j| u8::from(i == j)).chain(parity[i].iter().copied()).collect())
            .collect();
        let parity_check = (0..r)
            .map(|j| (0..k).map(|i| parity[i][j]).chain((0..r).map(|l| u8::from(l == j))).collect())
            .collect();
        let mut code = LinearCode {
            m,
            k,
            d: 0,
            generator,
            parity_check,
            leaders: HashMap::new(),
        };
        code.d = (1..1u32 << k)
            .map(|w| weight(&code.encode(&bits_of(w as u64, k))))
            .min()
            .unwrap_or(m);
        for w in 0..=code.t() {
            for pattern in crate::netgraph::subsets_of_size(m, w) {
                let mut e = vec![0; m];
                for v in pattern {
                    e[v] = 1;
                }
                code.leaders.entry(code.syndrome(&e)).or_insert(e);
            }
        }
        Ok(code)
    }

    /// The [7,4,3] Hamming code.
    pub fn hamming74() -> Self {
        let p = vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]];
        LinearCode::systematic(4, p).expect("fixed parity matrix")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Errors per block the code corrects.
    pub fn t(&self) -> usize {
        (self.d - 1) / 2
    }

    pub fn encode(&self, msg: &[u8]) -> Vec<u8> {
        self.generator
            .iter()
            .zip(msg)
            .filter(|(_, &b)| b == 1)
            .fold(vec![0; self.m], |acc, (row, _)| xor(&acc, row))
    }

    pub fn syndrome(&self, word: &[u8]) -> Vec<u8> {
        self.parity_check
            .iter()
            .map(|row| row.iter().zip(word).fold(0, |s, (a, b)| s ^ (a & b)))
            .collect()
    }

    /// Corrects `word` to a nearest codeword; returns `(message, codeword)`.
    pub fn decode(&self, word: &[u8]) -> Result<(Vec<u8>, Vec<u8>)> {
        if word.len() != self.m || word.iter().any(|&b| b > 1) {
            return Err(Error::invalid(format!("expected {} bits", self.m)));
        }
        let codeword = match self.leaders.get(&self.syndrome(word)) {
            Some(e) => xor(word, e),
            None => (0..1u64 << self.k)
                .map(|w| self.encode(&bits_of(w, self.k)))
                .min_by_key(|c| weight(&xor(c, word)))
                .expect("k ≥ 1"),
        };
        Ok((codeword[..self.k].to_vec(), codeword))
    }
}

fn bits_of(w: u64, k: usize) -> Vec<u8> {
    (0..k).map(|i| (w >> (k - 1 - i) & 1) as u8).collect()
}

/// Public messages of one pipeline run.
#[derive(Clone, Debug, Serialize)]
pub struct NqkdTranscript {
    pub leader: AgentId,
    pub rounds: Vec<PublicRound>,
    pub check_positions: Vec<usize>,
    /// Check-bit values announced by each agent, indexed by agent.
    pub check_values: Vec<Vec<u8>>,
    /// The leader's codeword XOR her remaining bits, absent after an abort.
    pub masked_word: Option<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum NqkdOutcome {
    Key { keys: Vec<Vec<u8>>, agreed: bool },
    Aborted { error_rate: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct NqkdRun {
    pub outcome: NqkdOutcome,
    pub transcript: NqkdTranscript,
}

/// The full quantum pipeline on one code block.
///
/// Each edge yields `2m` raw bits from measured EPR pairs; the copy held by
/// the higher-numbered endpoint is flipped with probability `noise_p`.
/// Agent 0 leads. The run aborts when any agent disagrees with the leader
/// on more than `t` of the `m` check bits.
pub fn nqkd_pipeline<R: Rng>(
    tree: &SpanningTree,
    code: &LinearCode,
    noise_p: f64,
    rng: &mut R,
) -> Result<NqkdRun> {
    let n = tree.n();
    let leaves = tree.leaves();
    if leaves.is_empty() {
        return Err(Error::invalid("at least two agents are needed"));
    }
    if !(0.0..=1.0).contains(&noise_p) {
        return Err(Error::invalid(format!("noise probability {noise_p} is outside [0, 1]")));
    }
    let m = code.m();
    let leader = AgentId(0);
    let interior = interior_agents(tree);

    let mut rounds = Vec::with_capacity(2 * m);
    // estimates[j][pos]: agent j's view of the shared bit at position pos.
    let mut estimates = vec![Vec::with_capacity(2 * m); n];
    for _ in 0..2 * m {
        let mut held: BTreeMap<(AgentId, Edge), u8> = BTreeMap::new();
        for &e in tree.edges() {
            let mut pair = Register::cat(2)?;
            let a = pair.measure(0, Basis::Computational, rng)?.value as u8;
            let b = pair.measure(1, Basis::Computational, rng)?.value as u8;
            held.insert((e.lo(), e), a);
            held.insert((e.hi(), e), b ^ u8::from(rng.gen_bool(noise_p)));
        }
        let announcements: Vec<_> = interior
            .iter()
            .map(|&v| announce(tree, v, |e| held[&(v, e)], rng.gen_range(0..=1)))
            .collect();
        let terminal = leaves[rng.gen_range(0..leaves.len())];
        let edge = terminal_edge(tree, terminal)?;
        for (j, est) in estimates.iter_mut().enumerate() {
            let me = AgentId(j);
            let own = incident(tree, me).map(|e| (e, held[&(me, e)])).collect();
            est.push(reconstruct_edges(tree, own, &announcements)?[&edge]);
        }
        rounds.push(PublicRound {
            announcements,
            chosen_terminal: terminal,
        });
    }

    let mut check_positions = sample(rng, 2 * m, m).into_vec();
    check_positions.sort_unstable();
    let is_check: BTreeSet<usize> = check_positions.iter().copied().collect();
    let check_values: Vec<Vec<u8>> = estimates
        .iter()
        .map(|est| check_positions.iter().map(|&p| est[p]).collect())
        .collect();
    let worst = check_values
        .iter()
        .map(|c| weight(&xor(c, &check_values[leader.0])))
        .max()
        .unwrap_or(0);
    let mut transcript = NqkdTranscript {
        leader,
        rounds,
        check_positions,
        check_values,
        masked_word: None,
    };
    if worst > code.t() {
        return Ok(NqkdRun {
            outcome: NqkdOutcome::Aborted {
                error_rate: worst as f64 / m as f64,
            },
            transcript,
        });
    }

    let rest: Vec<Vec<u8>> = estimates
        .iter()
        .map(|est| (0..2 * m).filter(|p| !is_check.contains(p)).map(|p| est[p]).collect())
        .collect();
    let key: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..=1)).collect();
    let masked = xor(&code.encode(&key), &rest[leader.0]);
    let keys = rest
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if j == leader.0 {
                Ok(key.clone())
            } else {
                code.decode(&xor(&masked, v)).map(|(msg, _)| msg)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    transcript.masked_word = Some(masked);
    let agreed = keys.iter().all(|k| *k == key);
    Ok(NqkdRun {
        outcome: NqkdOutcome::Key { keys, agreed },
        transcript,
    })
}

fn check_groups(n: usize, group_a: &BTreeSet<AgentId>) -> Result<()> {
    if group_a.is_empty() || group_a.len() >= n || group_a.iter().any(|a| a.0 >= n) {
        return Err(Error::invalid("group A must be a nonempty proper subset of the agents"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoGroupRound {
    /// Diagonal-basis outcome of every agent.
    pub outcomes: Vec<u8>,
    pub effective_bit_a: u8,
    pub effective_bit_b: u8,
    pub cbits_used: usize,
}

/// One raw bit of two-group key: build the n-agent CAT state over a path,
/// measure every qubit in the diagonal basis and XOR within each group.
pub fn two_group_round(
    n: usize,
    group_a: &BTreeSet<AgentId>,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<TwoGroupRound> {
    check_groups(n, group_a)?;
    let report = protocol_two_ncat(&SpanningTree::path(n)?, rng)?;
    let cbits_used = report.cbits_used;
    let mut ns = report.final_state;
    let mut outcomes = Vec::with_capacity(n);
    for a in 0..n {
        let agent = AgentId(a);
        let q = ns.qubits_of(agent)[0];
        outcomes.push(ns.measure(agent, q, Basis::Diagonal, rng)?);
    }
    let parity = |inside: bool| {
        outcomes
            .iter()
            .enumerate()
            .filter(|(a, _)| group_a.contains(&AgentId(*a)) == inside)
            .fold(0, |p, (_, &b)| p ^ b)
    };
    Ok(TwoGroupRound {
        effective_bit_a: parity(true),
        effective_bit_b: parity(false),
        outcomes,
        cbits_used,
    })
}

/// True when, after a Hadamard on every site, no basis state with
/// differing group parities carries weight. Site `i` belongs to agent `i`.
pub fn diagonal_parity_holds(reg: &Register, group_a: &BTreeSet<AgentId>) -> Result<bool> {
    let n = reg.num_sites();
    check_groups(n, group_a)?;
    if reg.dims().iter().any(|&d| d != 2) {
        return Err(Error::invalid("parity check needs qubits"));
    }
    let mut r = reg.clone();
    for site in 0..n {
        r.apply_gate(Gate::H, &[site])?;
    }
    let mask_a = group_a.iter().fold(0usize, |m, a| m | 1 << (n - 1 - a.0));
    Ok(r.amplitudes().iter().enumerate().all(|(x, amp)| {
        let differs = ((x & mask_a).count_ones() + (x & !mask_a).count_ones()) % 2 == 1;
        !differs || amp.norm_sqr() < TOLERANCE
    }))
}

/// Probability that the XOR of `s` independently noisy bits is wrong.
pub fn group_error_prob(s: u32, p: f64) -> Result<f64> {
    if s == 0 || !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("need s ≥ 1 and p in [0, 1], got s={s} p={p}")));
    }
    let mut binom = 1.0;
    let mut total = 0.0;
    for r in 0..=s {
        if r > 0 {
            binom *= f64::from(s - r + 1) / f64::from(r);
        }
        if r % 2 == 1 {
            total += binom * p.powi(r as i32) * (1.0 - p).powi((s - r) as i32);
        }
    }
    Ok(total)
}

pub fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p]
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum()
}

/// `1 − H(P)`.
pub fn channel_capacity(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} is outside [0, 1]")));
    }
    Ok(1.0 - binary_entropy(p))
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn make_singlet() -> Register {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Register::new(
        vec![2, 2],
        vec![c64(0.0, 0.0), c64(h, 0.0), c64(-h, 0.0), c64(0.0, 0.0)],
    )
    .expect("normalized")
}

/// Applies `XZ` to `site`, taking a singlet to `(|00⟩ + |11⟩)/√2` up to phase.
pub fn singlet_to_triplet(reg: &mut Register, site: usize) -> Result<()> {
    reg.apply_gate(Gate::Z, &[site])?;
    reg.apply_gate(Gate::X, &[site])
}

/// Trustful groups as hyperedges over the agents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SecurityHypergraph(pub EntangledHypergraph);

impl SecurityHypergraph {
    pub fn new(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        Ok(SecurityHypergraph(EntangledHypergraph::new(n, groups, false)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SecurityGraph {
    /// Agents in at least two groups.
    pub survivors: BTreeSet<AgentId>,
    /// Edges between survivors that share a group, over the original agents.
    pub graph: EprGraph,
}

pub fn reduce_security_hypergraph(h: &SecurityHypergraph) -> Result<SecurityGraph> {
    let h = &h.0;
    if !h.is_connected() {
        return Err(Error::NoScheme("security hypergraph is disconnected".into()));
    }
    let survivors: BTreeSet<AgentId> = (0..h.n())
        .map(AgentId)
        .filter(|&v| h.memberships(v) >= 2)
        .collect();
    let edges = survivors.iter().flat_map(|&u| {
        survivors
            .range(u..)
            .skip(1)
            .filter(move |&&v| h.co_hyperedged(u, v))
            .map(move |&v| (u.0, v.0))
    });
    let graph = EprGraph::new(h.n(), edges.collect::<Vec<_>>())?;
    Ok(SecurityGraph { survivors, graph })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn agents(v: &[usize]) -> BTreeSet<AgentId> {
        v.iter().map(|&a| AgentId(a)).collect()
    }

    #[test]
    fn single_edge_round() {
        let tree = SpanningTree::path(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = classical_nkd_round(&tree, &mut rng).unwrap();
        assert!(r.announcements.is_empty());
        assert_eq!(r.shared_bit, r.table.bit(&Edge::new(0, 1)).unwrap());
        let eve = eve_consistent_configs(&tree, &r.public()).unwrap();
        assert!(eve.is_balanced_pair());
    }

    #[test]
    fn star_reconstruction_truth_table() {
        let tree = SpanningTree::star(4, 0).unwrap();
        for mask in 0..8 {
            for x in 0..2 {
                for t in 1..4 {
                    let table = EdgeKeyTable::from_mask(&tree, mask);
                    let r = nkd_round_with(&tree, table, BTreeMap::from([(AgentId(0), x)]), AgentId(t))
                        .unwrap();
                    assert_eq!(r.announcements.len(), 1);
                    assert_eq!(r.announcements[0].entries.len(), 3);
                    for a in 0..4 {
                        assert_eq!(r.reconstruct(AgentId(a)).unwrap(), r.shared_bit);
                    }
                    assert!(eve_consistent_configs(&tree, &r.public()).unwrap().is_balanced_pair());
                }
            }
        }
    }

    #[test]
    fn rejects_interior_terminal() {
        let tree = SpanningTree::path(3).unwrap();
        let table = EdgeKeyTable::from_mask(&tree, 0);
        assert!(nkd_round_with(&tree, table, BTreeMap::from([(AgentId(1), 0)]), AgentId(1)).is_err());
    }

    #[test]
    fn efficiency_values() {
        assert_eq!(random_efficiency(2, 1, 1).unwrap(), Ratio::new(1, 1));
        for n in 2..20 {
            assert_eq!(random_efficiency(n, 5, 5).unwrap(), Ratio::new(n, 2 * (n - 1)));
        }
        let big = random_efficiency(1_000_000, 7, 4).unwrap();
        assert!((*big.numer() as f64 / *big.denom() as f64 - 4.0 / 14.0).abs() < 1e-6);
        assert!(random_efficiency(1, 1, 1).is_err());
    }

    #[test]
    fn hamming_code_corrects_single_errors() {
        let code = LinearCode::hamming74();
        assert_eq!((code.m(), code.k(), code.d(), code.t()), (7, 4, 3, 1));
        for w in 0..16 {
            let msg = bits_of(w, 4);
            let c = code.encode(&msg);
            assert_eq!(code.decode(&c).unwrap(), (msg.clone(), c.clone()));
            for i in 0..7 {
                let mut bad = c.clone();
                bad[i] ^= 1;
                assert_eq!(code.decode(&bad).unwrap().1, c);
            }
        }
    }

    #[test]
    fn repetition_code() {
        let code = LinearCode::systematic(1, vec![vec![1, 1, 1, 1]]).unwrap();
        assert_eq!((code.m(), code.d(), code.t()), (5, 5, 2));
        assert_eq!(code.decode(&[1, 0, 1, 0, 0]).unwrap().0, vec![0]);
    }

    #[test]
    fn noiseless_pipeline_agrees() {
        let tree = SpanningTree::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let code = LinearCode::hamming74();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let run = nqkd_pipeline(&tree, &code, 0.0, &mut rng).unwrap();
            match run.outcome {
                NqkdOutcome::Key { keys, agreed } => {
                    assert!(agreed);
                    assert_eq!(keys.len(), 5);
                }
                NqkdOutcome::Aborted { .. } => panic!("noiseless run aborted"),
            }
            assert_eq!(run.transcript.rounds.len(), 14);
            for r in &run.transcript.rounds {
                assert!(eve_consistent_configs(&tree, r).unwrap().is_balanced_pair());
            }
        }
    }

    #[test]
    fn two_group_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, a) in [(2, vec![0]), (3, vec![0]), (4, vec![0, 1])] {
            for _ in 0..50 {
                let r = two_group_round(n, &agents(&a), &mut rng).unwrap();
                assert_eq!(r.effective_bit_a, r.effective_bit_b);
            }
            assert!(diagonal_parity_holds(&Register::cat(n).unwrap(), &agents(&a)).unwrap());
        }
        assert!(two_group_round(3, &agents(&[0, 1, 2]), &mut rng).is_err());
        assert!(two_group_round(3, &agents(&[]), &mut rng).is_err());
        // A product state breaks the law.
        let plus = Register::basis_state(&[2, 2], &[0, 0]).unwrap();
        assert!(!diagonal_parity_holds(&plus, &agents(&[0])).unwrap());
    }

    #[test]
    fn group_error_values() {
        assert!((group_error_prob(1, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((group_error_prob(2, 0.1).unwrap() - 0.18).abs() < 1e-15);
        for s in 1..12 {
            for p in [0.0f64, 0.01, 0.2, 0.5, 0.9] {
                let closed = (1.0 - (1.0 - 2.0 * p).powi(s as i32)) / 2.0;
                assert!((group_error_prob(s, p).unwrap() - closed).abs() < 1e-12);
            }
        }
        assert_eq!(channel_capacity(0.5).unwrap(), 0.0);
        assert_eq!(channel_capacity(0.0).unwrap(), 1.0);
    }

    #[test]
    fn singlet_conversion() {
        let mut s = make_singlet();
        singlet_to_triplet(&mut s, 1).unwrap();
        assert!((s.fidelity(&Register::cat(2).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn security_reduction_examples() {
        let h = SecurityHypergraph::new(
            10,
            vec![vec![0, 1, 2], vec![2, 3, 5, 6], vec![3, 4, 6, 7, 8, 9]],
        )
        .unwrap();
        let g = reduce_security_hypergraph(&h).unwrap();
        assert_eq!(g.survivors, agents(&[2, 3, 6]));
        let edges: Vec<Edge> = g.graph.edges().iter().copied().collect();
        assert_eq!(edges, vec![Edge::new(2, 3), Edge::new(2, 6), Edge::new(3, 6)]);

        let one = SecurityHypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert!(reduce_security_hypergraph(&one).unwrap().survivors.is_empty());
        let two = SecurityHypergraph::new(5, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        let g = reduce_security_hypergraph(&two).unwrap();
        assert_eq!(g.survivors, agents(&[2]));
        assert!(g.graph.edges().is_empty());
        let split = SecurityHypergraph::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(matches!(reduce_security_hypergraph(&split), Err(Error::NoScheme(_))));
    }
}
