//! Entanglement protocols run over a [`NetworkState`].
//!
//! Qubits are addressed by stable [`QubitId`] handles so that measuring and
//! discarding sites never invalidates references held by a protocol. Each
//! qubit keeps the owner it was created with; gates and measurements are
//! only accepted from that owner, so every run is LOCC by construction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{AgentId, EntangledHypergraph, EprGraph, SpanningTree, WeightedEprGraph};
use crate::statevec::{Basis, Gate, OutcomeSource, Register, TOLERANCE};

/// Stable handle for a qubit in a [`NetworkState`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum MessageKind {
    Broadcast,
    Directed { receiver: AgentId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: AgentId,
    pub kind: MessageKind,
    pub bits: Vec<u8>,
}

/// Append-only log of classical messages.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassicalTranscript {
    messages: Vec<Message>,
}

impl ClassicalTranscript {
    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn cbit_count(&self) -> usize {
        self.messages.iter().map(|m| m.bits.len()).sum()
    }

    fn push(&mut self, m: Message) {
        self.messages.push(m);
    }
}

/// One local action, kept so that locality can be re-audited after a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalOp {
    pub agent: AgentId,
    pub action: String,
    pub qubits: Vec<QubitId>,
}

/// A register shared among agents, plus the classical messages exchanged so far.
#[derive(Clone, Debug)]
pub struct NetworkState {
    reg: Register,
    sites: Vec<QubitId>,
    owners: BTreeMap<QubitId, AgentId>,
    next_id: u32,
    transcript: ClassicalTranscript,
    ops: Vec<LocalOp>,
}

impl Default for NetworkState {
    fn default() -> Self {
        NetworkState::new()
    }
}

impl NetworkState {
    pub fn new() -> Self {
        NetworkState {
            reg: Register::empty(),
            sites: Vec::new(),
            owners: BTreeMap::new(),
            next_id: 0,
            transcript: ClassicalTranscript::default(),
            ops: Vec::new(),
        }
    }

    pub fn register(&self) -> &Register {
        &self.reg
    }

    pub fn transcript(&self) -> &ClassicalTranscript {
        &self.transcript
    }

    pub fn operations(&self) -> &[LocalOp] {
        &self.ops
    }

    /// Live qubits in register order.
    pub fn qubits(&self) -> &[QubitId] {
        &self.sites
    }

    /// Owner of a qubit, live or already discarded.
    pub fn owner(&self, q: QubitId) -> Option<AgentId> {
        self.owners.get(&q).copied()
    }

    /// Live qubits held by `agent`, in creation order.
    pub fn qubits_of(&self, agent: AgentId) -> Vec<QubitId> {
        let mut qs: Vec<QubitId> = self
            .sites
            .iter()
            .copied()
            .filter(|q| self.owners[q] == agent)
            .collect();
        qs.sort();
        qs
    }

    pub fn site_of(&self, q: QubitId) -> Result<usize> {
        self.sites
            .iter()
            .position(|&s| s == q)
            .ok_or_else(|| Error::invalid(format!("qubit {} is not live", q.0)))
    }

    /// Appends a register whose sites are owned by `owners` in order.
    pub fn add_state(&mut self, owners: &[AgentId], state: &Register) -> Result<Vec<QubitId>> {
        if owners.len() != state.num_sites() {
            return Err(Error::invalid("one owner per site is required"));
        }
        self.reg = self.reg.tensor(state)?;
        let ids: Vec<QubitId> = owners
            .iter()
            .map(|&a| {
                let id = QubitId(self.next_id);
                self.next_id += 1;
                self.owners.insert(id, a);
                id
            })
            .collect();
        self.sites.extend(&ids);
        Ok(ids)
    }

    /// A fresh `|0⟩` qubit held by `agent`.
    pub fn add_qubit(&mut self, agent: AgentId) -> Result<QubitId> {
        let zero = Register::basis_state(&[2], &[0])?;
        Ok(self.add_state(&[agent], &zero)?[0])
    }

    /// Appends `(|00⟩+|11⟩)/√2` with halves held by `a` and `b`.
    pub fn make_epr(&mut self, a: AgentId, b: AgentId) -> Result<(QubitId, QubitId)> {
        let ids = self.add_state(&[a, b], &Register::cat(2)?)?;
        Ok((ids[0], ids[1]))
    }

    fn check_owned(&self, agent: AgentId, qubits: &[QubitId]) -> Result<Vec<usize>> {
        qubits
            .iter()
            .map(|&q| {
                if self.owner(q) != Some(agent) {
                    return Err(Error::invalid(format!(
                        "agent {agent} does not hold qubit {}",
                        q.0
                    )));
                }
                self.site_of(q)
            })
            .collect()
    }

    /// Applies a gate on qubits that all belong to `agent`.
    pub fn apply_local(&mut self, agent: AgentId, gate: Gate, qubits: &[QubitId]) -> Result<()> {
        let sites = self.check_owned(agent, qubits)?;
        let action = format!("{gate:?}");
        self.reg.apply_gate(gate, &sites)?;
        self.ops.push(LocalOp {
            agent,
            action,
            qubits: qubits.to_vec(),
        });
        Ok(())
    }

    pub fn measure(
        &mut self,
        agent: AgentId,
        q: QubitId,
        basis: Basis,
        source: &mut (impl OutcomeSource + ?Sized),
    ) -> Result<u8> {
        let site = self.check_owned(agent, &[q])?[0];
        let o = self.reg.measure(site, basis, source)?;
        self.ops.push(LocalOp {
            agent,
            action: format!("measure {basis:?}"),
            qubits: vec![q],
        });
        Ok(o.value as u8)
    }

    /// Drops a qubit that is unentangled from everything else.
    pub fn discard(&mut self, q: QubitId) -> Result<()> {
        let site = self.site_of(q)?;
        self.reg = self.reg.discard_site(site)?;
        self.sites.remove(site);
        Ok(())
    }

    /// Measures `q` and drops it.
    pub fn measure_out(
        &mut self,
        agent: AgentId,
        q: QubitId,
        basis: Basis,
        source: &mut (impl OutcomeSource + ?Sized),
    ) -> Result<u8> {
        let bit = self.measure(agent, q, basis, source)?;
        self.discard(q)?;
        Ok(bit)
    }

    pub fn send(&mut self, from: AgentId, to: AgentId, bits: &[u8]) {
        self.transcript.push(Message {
            sender: from,
            kind: MessageKind::Directed { receiver: to },
            bits: bits.to_vec(),
        });
    }

    pub fn broadcast(&mut self, from: AgentId, bits: &[u8]) {
        self.transcript.push(Message {
            sender: from,
            kind: MessageKind::Broadcast,
            bits: bits.to_vec(),
        });
    }

    /// The register with sites reordered to `order`, which must list every live qubit.
    pub fn register_in_order(&self, order: &[QubitId]) -> Result<Register> {
        if order.len() != self.sites.len() {
            return Err(Error::invalid("ordering must list every live qubit"));
        }
        let perm = order
            .iter()
            .map(|&q| self.site_of(q))
            .collect::<Result<Vec<_>>>()?;
        self.reg.permute_sites(&perm)
    }

    /// The register with site `i` held by agent `i`; each agent must hold exactly one qubit.
    pub fn register_by_agent(&self, n: usize) -> Result<Register> {
        let order = (0..n)
            .map(|a| match self.qubits_of(AgentId(a)).as_slice() {
                [q] => Ok(*q),
                qs => Err(Error::invalid(format!("agent {a} holds {} qubits", qs.len()))),
            })
            .collect::<Result<Vec<_>>>()?;
        self.register_in_order(&order)
    }

    /// `⟨Φ+|ρ|Φ+⟩` for the two-qubit reduced state of `a` and `b`.
    pub fn bell_fidelity(&self, a: QubitId, b: QubitId) -> Result<f64> {
        let rho = self
            .reg
            .reduced_density_matrix(&[self.site_of(a)?, self.site_of(b)?])?;
        Ok(((rho[(0, 0)] + rho[(0, 3)] + rho[(3, 0)] + rho[(3, 3)]) / 2.0).re)
    }

    /// Re-checks that every recorded local action touched only the actor's qubits.
    pub fn audit_locality(&self) -> Result<()> {
        for op in &self.ops {
            if let Some(q) = op.qubits.iter().find(|&&q| self.owner(q) != Some(op.agent)) {
                return Err(Error::Internal(format!(
                    "agent {} acted on qubit {} it does not hold",
                    op.agent, q.0
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct SiteRepr {
    qubit: QubitId,
    owner: AgentId,
}

impl Serialize for NetworkState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let sites: Vec<SiteRepr> = self
            .sites
            .iter()
            .map(|&q| SiteRepr {
                qubit: q,
                owner: self.owners[&q],
            })
            .collect();
        let mut st = s.serialize_struct("NetworkState", 3)?;
        st.serialize_field("sites", &sites)?;
        st.serialize_field("state", &self.reg)?;
        st.serialize_field("transcript", &self.transcript)?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledState {
    pub label: String,
    pub state: Register,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolReport {
    pub cbits_used: usize,
    #[serde(rename = "final")]
    pub final_state: NetworkState,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub intermediate_states: Vec<LabeledState>,
}

impl ProtocolReport {
    pub(crate) fn new(final_state: NetworkState, intermediate_states: Vec<LabeledState>) -> Self {
        ProtocolReport {
            cbits_used: final_state.transcript().cbit_count(),
            final_state,
            intermediate_states,
        }
    }
}

/// Teleports `source` through the pair `(epr_sender, epr_receiver)`.
///
/// The sender's two qubits are measured and discarded; two bits go to the
/// receiver, whose qubit (returned) then carries the source state.
pub fn teleport(
    ns: &mut NetworkState,
    source: QubitId,
    epr_sender: QubitId,
    epr_receiver: QubitId,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<QubitId> {
    let sender = ns
        .owner(source)
        .ok_or_else(|| Error::invalid("unknown source qubit"))?;
    let receiver = ns
        .owner(epr_receiver)
        .ok_or_else(|| Error::invalid("unknown receiver qubit"))?;
    if ns.owner(epr_sender) != Some(sender) {
        return Err(Error::invalid("sender must hold both the source and its EPR half"));
    }
    if source == epr_sender || source == epr_receiver {
        return Err(Error::invalid("source qubit is part of the channel"));
    }
    let f = ns.bell_fidelity(epr_sender, epr_receiver)?;
    if f < 1.0 - TOLERANCE {
        return Err(Error::InvalidChannel(format!(
            "channel fidelity with (|00⟩+|11⟩)/√2 is {f}"
        )));
    }
    ns.apply_local(sender, Gate::Cnot, &[source, epr_sender])?;
    ns.apply_local(sender, Gate::H, &[source])?;
    let m1 = ns.measure_out(sender, source, Basis::Computational, rng)?;
    let m2 = ns.measure_out(sender, epr_sender, Basis::Computational, rng)?;
    ns.send(sender, receiver, &[m1, m2]);
    if m2 == 1 {
        ns.apply_local(receiver, Gate::X, &[epr_receiver])?;
    }
    if m1 == 1 {
        ns.apply_local(receiver, Gate::Z, &[epr_receiver])?;
    }
    Ok(epr_receiver)
}

/// Moves the far end of an EPR chain along `pairs` to the last agent.
///
/// `pairs[j]` is the pair between consecutive agents on a path. Afterwards
/// the first qubit of `pairs[0]` and the returned qubit form a Bell pair.
pub fn entanglement_swap(
    ns: &mut NetworkState,
    pairs: &[(QubitId, QubitId)],
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<QubitId> {
    let (_, mut carried) = *pairs
        .first()
        .ok_or_else(|| Error::invalid("empty EPR chain"))?;
    for &(near, far) in &pairs[1..] {
        carried = teleport(ns, carried, near, far, rng)?;
    }
    Ok(carried)
}

/// Extends a CAT state by one qubit held by the owner of `q`.
pub fn entangle_new_qubit(ns: &mut NetworkState, q: QubitId) -> Result<QubitId> {
    let agent = ns
        .owner(q)
        .ok_or_else(|| Error::invalid("unknown qubit"))?;
    ns.site_of(q)?;
    let fresh = ns.add_qubit(agent)?;
    ns.apply_local(agent, Gate::Cnot, &[q, fresh])?;
    Ok(fresh)
}

/// Removes `q` from a CAT state by a CNOT from another qubit of the same agent.
pub fn disentangle_qubit(ns: &mut NetworkState, q: QubitId) -> Result<()> {
    let agent = ns
        .owner(q)
        .ok_or_else(|| Error::invalid("unknown qubit"))?;
    let site = ns.site_of(q)?;
    for control in ns.qubits_of(agent).into_iter().filter(|&c| c != q) {
        let mut trial = ns.reg.clone();
        trial.apply_gate(Gate::Cnot, &[ns.site_of(control)?, site])?;
        let p = trial.probabilities(site)?;
        if p[1] < TOLERANCE && (trial.purity(&[site])? - 1.0).abs() < TOLERANCE {
            ns.apply_local(agent, Gate::Cnot, &[control, q])?;
            ns.discard(q)?;
            return Ok(());
        }
    }
    Err(Error::invalid(format!(
        "qubit {} cannot be removed by a CNOT from another qubit of agent {agent}",
        q.0
    )))
}

/// Qubits whose computational value always equals that of `q`.
fn z_correlated(ns: &NetworkState, q: QubitId) -> Result<Vec<QubitId>> {
    let sq = ns.site_of(q)?;
    let mut out = Vec::new();
    for &w in ns.qubits() {
        if w == q {
            continue;
        }
        let rho = ns.reg.reduced_density_matrix(&[sq, ns.site_of(w)?])?;
        if rho[(1, 1)].re + rho[(2, 2)].re < TOLERANCE {
            out.push(w);
        }
    }
    Ok(out)
}

/// Fuses the CAT states holding `group1` and `group2` into one.
///
/// Both qubits must belong to the same agent. A CNOT from `group1` onto
/// `group2` is followed by measuring `group2`; the result is broadcast and
/// the remaining members of the second group flip on outcome 1.
pub fn zeilinger_merge(
    ns: &mut NetworkState,
    group1: QubitId,
    group2: QubitId,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<()> {
    let agent = ns
        .owner(group1)
        .ok_or_else(|| Error::invalid("unknown qubit"))?;
    if ns.owner(group2) != Some(agent) || group1 == group2 {
        return Err(Error::invalid("merge needs two distinct qubits of one agent"));
    }
    let rho = ns
        .reg
        .reduced_density_matrix(&[ns.site_of(group1)?, ns.site_of(group2)?])?;
    let overlap = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| {
            let want = if i == j { 0.25 } else { 0.0 };
            (rho[(i, j)].re - want).abs() + rho[(i, j)].im.abs()
        })
        .fold(0.0, f64::max);
    if overlap > 1e-9 {
        return Err(Error::invalid("the two qubits are not in disjoint CAT states"));
    }
    let partners = z_correlated(ns, group2)?;
    ns.apply_local(agent, Gate::Cnot, &[group1, group2])?;
    let m = ns.measure_out(agent, group2, Basis::Computational, rng)?;
    ns.broadcast(agent, &[m]);
    if m == 1 {
        for w in partners {
            let owner = ns.owner(w).expect("live qubit has an owner");
            ns.apply_local(owner, Gate::X, &[w])?;
        }
    }
    Ok(())
}

/// The three agents and two EPR pairs a GHZ state is built from.
pub fn protocol_one_setup() -> Result<NetworkState> {
    let mut ns = NetworkState::new();
    ns.make_epr(AgentId(0), AgentId(1))?;
    ns.make_epr(AgentId(0), AgentId(2))?;
    Ok(ns)
}

/// Builds a GHZ state from pairs A–B and A–C with two cbits.
///
/// A is the agent holding two qubits; of the other two, the one with the
/// smaller id plays B. The report lists seven intermediate states with
/// sites ordered `a1, b, a3, a2, c`, where `a3` is A's ancilla.
pub fn protocol_one_ghz(
    mut ns: NetworkState,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<ProtocolReport> {
    let bad = || Error::invalid("expected EPR pairs A–B and A–C on four qubits");
    let qs = ns.qubits().to_vec();
    if qs.len() != 4 || !ns.transcript().messages().is_empty() {
        return Err(bad());
    }
    let mut held: BTreeMap<AgentId, Vec<QubitId>> = BTreeMap::new();
    for &q in &qs {
        held.entry(ns.owner(q).ok_or_else(bad)?).or_default().push(q);
    }
    let a = *held.iter().find(|(_, v)| v.len() == 2).ok_or_else(bad)?.0;
    let others: Vec<AgentId> = held.keys().copied().filter(|&x| x != a).collect();
    let [b_agent, c_agent] = others[..] else {
        return Err(bad());
    };
    let b = held[&b_agent][0];
    let c = held[&c_agent][0];
    let (x, y) = (held[&a][0], held[&a][1]);
    let paired = |p: QubitId, q: QubitId| -> Result<bool> {
        Ok(ns.bell_fidelity(p, q)? > 1.0 - TOLERANCE)
    };
    let (a1, a2) = if paired(x, b)? && paired(y, c)? {
        (x, y)
    } else if paired(y, b)? && paired(x, c)? {
        (y, x)
    } else {
        return Err(bad());
    };

    let mut states = Vec::new();
    let a3 = entangle_new_qubit(&mut ns, a1)?;
    let order = [a1, b, a3, a2, c];
    let mut snap = |ns: &NetworkState, label: &str| -> Result<()> {
        states.push(LabeledState {
            label: label.into(),
            state: ns.register_in_order(&order)?,
        });
        Ok(())
    };
    snap(&ns, "phi1")?;
    ns.apply_local(a, Gate::Cnot, &[a3, a2])?;
    snap(&ns, "phi2")?;
    let m2 = ns.measure(a, a2, Basis::Computational, rng)?;
    snap(&ns, "phi3")?;
    ns.apply_local(a, Gate::H, &[a3])?;
    snap(&ns, "phi4")?;
    let m1 = ns.measure(a, a3, Basis::Computational, rng)?;
    snap(&ns, "phi5")?;
    ns.send(a, b_agent, &[m2]);
    ns.send(a, c_agent, &[m1]);
    if m2 == 1 {
        ns.apply_local(a, Gate::X, &[a1])?;
        ns.apply_local(b_agent, Gate::X, &[b])?;
    }
    snap(&ns, "phi6")?;
    if m1 == 1 {
        ns.apply_local(c_agent, Gate::Z, &[c])?;
    }
    snap(&ns, "phi7")?;
    ns.discard(a2)?;
    ns.discard(a3)?;
    Ok(ProtocolReport::new(ns, states))
}

/// Builds the n-agent CAT state over a spanning tree of EPR pairs.
///
/// Uses `2n + k − 4` cbits, where `k` counts the tree's leaves: one start
/// signal, two bits per teleportation and one acknowledgement from every
/// leaf except the starting one.
pub fn protocol_two_ncat(
    tree: &SpanningTree,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<ProtocolReport> {
    let n = tree.n();
    if n < 2 {
        return Err(Error::invalid("at least two agents are needed"));
    }
    let g = tree.graph();
    let mut ns = NetworkState::new();
    let mut halves: BTreeMap<(AgentId, AgentId), QubitId> = BTreeMap::new();
    for e in tree.edges() {
        let (p, q) = ns.make_epr(e.lo(), e.hi())?;
        halves.insert((e.lo(), e.hi()), p);
        halves.insert((e.hi(), e.lo()), q);
    }
    let leaves: BTreeSet<AgentId> = tree.leaves().into_iter().collect();
    let t = *leaves.first().expect("a tree with two agents has leaves");
    let s = g.neighbors(t)[0];
    ns.broadcast(s, &[1]);

    let mut cat: BTreeMap<AgentId, QubitId> = BTreeMap::new();
    cat.insert(t, halves[&(t, s)]);
    cat.insert(s, halves[&(s, t)]);
    let mut queue = VecDeque::new();
    if let Some(r) = g.neighbors(s).into_iter().find(|&v| v != t) {
        join(&mut ns, &halves, &mut cat, s, r, &leaves, rng)?;
        queue.extend([s, r]);
    } else {
        // Two agents: the pair is already the CAT state.
        ns.broadcast(s, &[1]);
    }
    while let Some(v) = queue.pop_front() {
        for w in g.neighbors(v) {
            if !cat.contains_key(&w) {
                join(&mut ns, &halves, &mut cat, v, w, &leaves, rng)?;
                queue.push_back(w);
            }
        }
    }
    Ok(ProtocolReport::new(ns, Vec::new()))
}

/// `from` extends the CAT state and teleports the new qubit to `to`.
fn join(
    ns: &mut NetworkState,
    halves: &BTreeMap<(AgentId, AgentId), QubitId>,
    cat: &mut BTreeMap<AgentId, QubitId>,
    from: AgentId,
    to: AgentId,
    leaves: &BTreeSet<AgentId>,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<()> {
    let extra = entangle_new_qubit(ns, cat[&from])?;
    let got = teleport(ns, extra, halves[&(from, to)], halves[&(to, from)], rng)?;
    cat.insert(to, got);
    if leaves.contains(&to) {
        ns.broadcast(to, &[1]);
    }
    Ok(())
}

/// Runs the spanning-tree protocol on any connected EPR graph.
///
/// The tree used is the lexicographically first minimum spanning tree
/// with unit weights.
pub fn protocol_two_on_graph(
    g: &EprGraph,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<ProtocolReport> {
    if !g.is_connected() {
        return Err(Error::NoProtocol(
            "the EPR graph is disconnected, so no CAT state over all agents can be prepared".into(),
        ));
    }
    let weighted = WeightedEprGraph::new(
        g.n(),
        g.edges().iter().map(|e| (e.lo().0, e.hi().0, 1.0)),
    )?;
    protocol_two_ncat(&weighted.minimum_spanning_tree()?, rng)
}

/// Builds the n-agent CAT state from a connected entangled hypergraph.
///
/// Hyperedges are taken largest first. Each step merges the growing CAT
/// state with the first hyperedge that meets it, at their smallest common
/// agent, and the other common agents drop their duplicate qubit. A
/// hyperedge's CAT state enters the register only when it is merged.
pub fn protocol_three_hypergraph(
    h: &EntangledHypergraph,
    rng: &mut (impl OutcomeSource + ?Sized),
) -> Result<ProtocolReport> {
    if !h.is_connected() {
        return Err(Error::NoProtocol(
            "the entangled hypergraph is disconnected, so no CAT state over all agents can be prepared"
                .into(),
        ));
    }
    let n = h.n();
    let mut ns = NetworkState::new();
    let mut order: Vec<&Vec<AgentId>> = h.hyperedges().iter().collect();
    order.sort_by(|x, y| y.len().cmp(&x.len()));
    let mut cat: BTreeMap<AgentId, QubitId> = BTreeMap::new();
    if let Some(first) = order.first() {
        let ids = ns.add_state(first, &Register::cat(first.len())?)?;
        cat.extend(first.iter().copied().zip(ids));
    }
    let mut rest: Vec<&Vec<AgentId>> = order.into_iter().skip(1).collect();
    while cat.len() < n {
        let pos = rest
            .iter()
            .position(|e| {
                e.iter().any(|v| cat.contains_key(v)) && e.iter().any(|v| !cat.contains_key(v))
            })
            .ok_or_else(|| Error::Internal("connected hypergraph left agents unreached".into()))?;
        let e = rest.remove(pos);
        let ids = ns.add_state(e, &Register::cat(e.len())?)?;
        let fresh: BTreeMap<AgentId, QubitId> = e.iter().copied().zip(ids).collect();
        let common: Vec<AgentId> = e.iter().copied().filter(|v| cat.contains_key(v)).collect();
        zeilinger_merge(&mut ns, cat[&common[0]], fresh[&common[0]], rng)?;
        for v in &common[1..] {
            disentangle_qubit(&mut ns, fresh[v])?;
        }
        for (v, q) in fresh {
            cat.entry(v).or_insert(q);
        }
    }
    Ok(ProtocolReport::new(ns, Vec::new()))
}
