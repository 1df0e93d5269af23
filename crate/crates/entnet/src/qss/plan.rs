//! Scheme plans: a tree of quantum layers and classical keys, checked
//! structurally against an access structure and simulated on a register.
//!
//! A quantum `((k,n))` node is only simulated for `(1,1)`, `(2,3)` and the
//! one-time-pad style `(m,m)`; other nodes are checked structurally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::homogenize::{homogenize_sites, ordering_from_index, unwind_sites, MAX_RESERVOIR};
use super::{
    density, embed_site, letters, pad_site, pad_space, player_name, qts23_expand, qts23_recover,
    shamir_reconstruct, shamir_split, AccessStructure, ShamirShare, DEFAULT_PRIME, KEY_PRIME,
};
use crate::error::{Error, Result};
use crate::statevec::{c64, Matrix, Register};

/// Largest player count for which every coalition is checked.
const MAX_STRUCTURAL_PLAYERS: usize = 16;
/// Every coalition is simulated up to this many players.
const EXHAUSTIVE_SIMULATION_PLAYERS: usize = 8;
/// Cap on key combinations averaged over for one unauthorized view.
const MAX_KEY_COMBINATIONS: u64 = 1 << 18;
const FIDELITY_TOL: f64 = 1e-9;
const LEAK_TOL: f64 = 1e-9;

/// Who keeps a share. The dealer keeps resident shares and never leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Holder {
    Player(usize),
    Dealer,
}

impl Holder {
    fn present(self, mask: u64) -> bool {
        match self {
            Holder::Dealer => true,
            Holder::Player(p) => mask >> p & 1 == 1,
        }
    }

    fn name(self) -> String {
        match self {
            Holder::Dealer => "dealer".into(),
            Holder::Player(p) => player_name(p),
        }
    }
}

/// How the quantum secret is split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum QNode {
    Share {
        holder: Holder,
    },
    /// For `k == n ≥ 2` the first child carries the padded quantum piece
    /// and the others deal the pad classically.
    Threshold {
        k: usize,
        n: usize,
        children: Vec<QNode>,
    },
    /// A one-time pad on the piece, keyed by an entry of the plan's keys.
    Encrypted { key: String, inner: Box<QNode> },
    /// The piece diluted into `reservoir` extra qubits. The ordering of the
    /// `reservoir + 1` qubits is the key.
    Homogenized {
        reservoir: usize,
        theta: f64,
        holdings: Vec<(Holder, usize)>,
        key: String,
    },
}

/// How a classical key is split. Thresholds use Shamir sharing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum CNode {
    Share { holder: Holder },
    Threshold { k: usize, n: usize, children: Vec<CNode> },
}

fn share(p: usize) -> QNode {
    QNode::Share {
        holder: Holder::Player(p),
    }
}

fn cshares(players: &[usize]) -> Vec<CNode> {
    players
        .iter()
        .map(|&p| CNode::Share {
            holder: Holder::Player(p),
        })
        .collect()
}

/// `(m,m)` among `players`, collapsing a single share.
fn c_all_of(players: &[usize]) -> CNode {
    match players {
        [p] => CNode::Share {
            holder: Holder::Player(*p),
        },
        _ => CNode::Threshold {
            k: players.len(),
            n: players.len(),
            children: cshares(players),
        },
    }
}

impl CNode {
    fn recoverable(&self, mask: u64) -> bool {
        match self {
            CNode::Share { holder } => holder.present(mask),
            CNode::Threshold { k, children, .. } => {
                children.iter().filter(|c| c.recoverable(mask)).count() >= *k
            }
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            CNode::Share { .. } => Ok(()),
            CNode::Threshold { k, n, children } => {
                if *k == 0 || k > n || children.len() != *n {
                    return Err(Error::invalid(format!(
                        "classical ({k},{n}) node with {} children",
                        children.len()
                    )));
                }
                children.iter().try_for_each(CNode::check)
            }
        }
    }

    /// Deals `secret` and returns what `mask` rebuilds from its shares.
    fn deal_and_recover(&self, secret: u64, p: u64, mask: u64, rng: &mut impl Rng) -> Result<Option<u64>> {
        match self {
            CNode::Share { holder } => Ok(holder.present(mask).then_some(secret)),
            CNode::Threshold { k, n, children } => {
                let shares = shamir_split(secret, *k, *n, p, rng)?;
                let mut got = Vec::new();
                for (c, s) in children.iter().zip(&shares) {
                    if let Some(y) = c.deal_and_recover(s.y, p, mask, rng)? {
                        got.push(ShamirShare { x: s.x, y });
                    }
                }
                if got.len() < *k {
                    return Ok(None);
                }
                shamir_reconstruct(&got[..*k], p).map(Some)
            }
        }
    }

    fn render(&self) -> String {
        match self {
            CNode::Share { holder } => holder.name(),
            CNode::Threshold { k, n, children } => {
                if children.iter().all(|c| matches!(c, CNode::Share { .. })) {
                    let names: Vec<String> = children.iter().map(CNode::render).collect();
                    format!("({k},{n}): {}", names.join(", "))
                } else {
                    let parts: Vec<String> = children.iter().map(CNode::render).collect();
                    format!("({k},{n}) {{ {} }}", parts.join(" | "))
                }
            }
        }
    }
}

impl QNode {
    fn is_pad_split(k: usize, n: usize) -> bool {
        k == n && n >= 2
    }

    /// The classical reading of a subtree that only carries pad pieces.
    fn as_classical(&self) -> Result<CNode> {
        match self {
            QNode::Share { holder } => Ok(CNode::Share { holder: *holder }),
            QNode::Threshold { k, n, children } => Ok(CNode::Threshold {
                k: *k,
                n: *n,
                children: children.iter().map(QNode::as_classical).collect::<Result<_>>()?,
            }),
            _ => Err(Error::invalid("a pad subtree holds plain shares and thresholds")),
        }
    }

    fn recoverable(&self, mask: u64, keys: &BTreeMap<String, CNode>) -> bool {
        let key_ok = |k: &String| keys.get(k).is_some_and(|c| c.recoverable(mask));
        match self {
            QNode::Share { holder } => holder.present(mask),
            QNode::Threshold { k, children, .. } => {
                children.iter().filter(|c| c.recoverable(mask, keys)).count() >= *k
            }
            QNode::Encrypted { key, inner } => key_ok(key) && inner.recoverable(mask, keys),
            QNode::Homogenized { holdings, key, .. } => {
                key_ok(key) && holdings.iter().all(|(h, _)| h.present(mask))
            }
        }
    }

    /// Players holding a quantum piece, as opposed to pad pieces.
    fn quantum_holders(&self, out: &mut BTreeSet<usize>) {
        match self {
            QNode::Share {
                holder: Holder::Player(p),
            } => {
                out.insert(*p);
            }
            QNode::Share { .. } => {}
            QNode::Threshold { k, n, children } => {
                let take = if Self::is_pad_split(*k, *n) { 1 } else { children.len() };
                children.iter().take(take).for_each(|c| c.quantum_holders(out));
            }
            QNode::Encrypted { inner, .. } => inner.quantum_holders(out),
            QNode::Homogenized { holdings, .. } => out.extend(holdings.iter().filter_map(|(h, _)| match h {
                Holder::Player(p) => Some(*p),
                Holder::Dealer => None,
            })),
        }
    }

    fn dealer_shares(&self) -> usize {
        match self {
            QNode::Share { holder } => usize::from(*holder == Holder::Dealer),
            QNode::Threshold { children, .. } => children.iter().map(QNode::dealer_shares).sum(),
            QNode::Encrypted { inner, .. } => inner.dealer_shares(),
            QNode::Homogenized { holdings, .. } => holdings
                .iter()
                .filter(|(h, _)| *h == Holder::Dealer)
                .map(|(_, m)| m)
                .sum(),
        }
    }

    fn key_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            QNode::Share { .. } => {}
            QNode::Threshold { children, .. } => children.iter().for_each(|c| c.key_refs(out)),
            QNode::Encrypted { key, inner } => {
                out.push(key);
                inner.key_refs(out);
            }
            QNode::Homogenized { key, .. } => out.push(key),
        }
    }

    /// Structural checks plus the dimension of every quantum share, given
    /// the dimension `dim` of the piece arriving at this node.
    fn check(&self, dim: usize, dims: &mut Vec<usize>) -> Result<()> {
        match self {
            QNode::Share { .. } => {
                dims.push(dim);
                Ok(())
            }
            QNode::Threshold { k, n, children } => {
                if *k == 0 || k > n || children.len() != *n {
                    return Err(Error::invalid(format!(
                        "quantum ({k},{n}) node with {} children",
                        children.len()
                    )));
                }
                if 2 * k <= *n {
                    return Err(Error::Constraint(format!(
                        "a quantum ({k},{n}) layer would let two disjoint sets rebuild the secret"
                    )));
                }
                if Self::is_pad_split(*k, *n) {
                    children[1..].iter().try_for_each(|c| c.as_classical()?.check())?;
                    return children[0].check(dim, dims);
                }
                // The (2,3) code works on qutrits; other codes keep the piece size.
                let child_dim = if (*k, *n) == (2, 3) { dim.max(3) } else { dim };
                children.iter().try_for_each(|c| c.check(child_dim, dims))
            }
            QNode::Encrypted { inner, .. } => inner.check(dim, dims),
            QNode::Homogenized {
                reservoir, holdings, ..
            } => {
                if *reservoir > MAX_RESERVOIR {
                    return Err(Error::LimitExceeded {
                        what: "reservoir qubits",
                        limit: MAX_RESERVOIR,
                        got: *reservoir,
                    });
                }
                let total: usize = holdings.iter().map(|(_, m)| m).sum();
                if total != reservoir + 1 || holdings.iter().any(|(_, m)| *m == 0) {
                    return Err(Error::invalid(format!(
                        "holdings cover {total} qubits, expected {}",
                        reservoir + 1
                    )));
                }
                dims.extend(std::iter::repeat(dim).take(total));
                Ok(())
            }
        }
    }

    fn render(&self, indent: usize, out: &mut String) {
        let pad = " ".repeat(indent);
        match self {
            QNode::Share { holder } => {
                let _ = writeln!(out, "{pad}{}", holder.name());
            }
            QNode::Encrypted { key, inner } => {
                if let QNode::Share { holder } = inner.as_ref() {
                    let _ = writeln!(out, "{pad}{} ~ {key}", holder.name());
                } else {
                    let _ = writeln!(out, "{pad}{key} ~");
                    inner.render(indent, out);
                }
            }
            QNode::Threshold { k, n, children } => {
                let _ = writeln!(out, "{pad}(({k},{n})) {{");
                children.iter().for_each(|c| c.render(indent + 2, out));
                let _ = writeln!(out, "{pad}}}");
            }
            QNode::Homogenized {
                reservoir,
                theta,
                holdings,
                key,
            } => {
                let held: Vec<String> = holdings.iter().map(|(h, m)| format!("{}×{m}", h.name())).collect();
                let _ = writeln!(
                    out,
                    "{pad}homogenize(N={reservoir}, θ={theta:.4}) ~ {key}: {}",
                    held.join(", ")
                );
            }
        }
    }
}

/// A complete sharing scheme for one access structure.
#[derive(Clone, Debug, Serialize)]
pub struct SchemePlan {
    pub name: String,
    pub access: AccessStructure,
    pub quantum: QNode,
    pub keys: BTreeMap<String, CNode>,
    pub q_players: BTreeSet<usize>,
    pub c_players: BTreeSet<usize>,
    pub resident_shares: usize,
    /// False when unauthorized views are only approximately independent of the secret.
    pub exact_security: bool,
    pub diagram: String,
}

/// What one coalition saw in a simulation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoalitionResult {
    pub coalition: String,
    pub authorized: bool,
    /// Authorized coalitions: fidelity of the decoded secret.
    pub fidelity: Option<f64>,
    /// Unauthorized coalitions: largest distance between views of different secrets.
    pub leak: Option<f64>,
    pub maximally_mixed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub plan: String,
    pub coalitions: Vec<CoalitionResult>,
    pub exact_security: bool,
    pub failures: Vec<String>,
}

impl SimulationReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A key the simulation has to draw: named keys and internal pads.
struct KeyInfo {
    label: String,
    space: u64,
    sharing: CNode,
}

impl KeyInfo {
    fn prime(&self) -> u64 {
        if self.space <= DEFAULT_PRIME {
            DEFAULT_PRIME
        } else {
            KEY_PRIME
        }
    }
}

/// Where each piece ended up, for decoding.
enum Placed {
    Leaf(usize),
    Pad {
        label: String,
        pad_dim: usize,
        inner: Box<Placed>,
    },
    Pass(Box<Placed>),
    Qts(Vec<Placed>),
    Homog {
        label: String,
        group: Vec<usize>,
        theta: f64,
    },
}

struct Encoder<'a> {
    reg: Register,
    holders: Vec<Option<Holder>>,
    values: &'a BTreeMap<String, u64>,
}

fn value(values: &BTreeMap<String, u64>, label: &str) -> Result<u64> {
    values
        .get(label)
        .copied()
        .ok_or_else(|| Error::Internal(format!("no value drawn for key {label}")))
}

impl Encoder<'_> {
    fn encode(&mut self, node: &QNode, site: usize, path: &str) -> Result<Placed> {
        let dim = self.reg.dims()[site];
        match node {
            QNode::Share { holder } => {
                self.holders[site] = Some(*holder);
                Ok(Placed::Leaf(site))
            }
            QNode::Encrypted { key, inner } => {
                pad_site(&mut self.reg, site, dim, value(self.values, key)?, false)?;
                let inner = self.encode(inner, site, path)?;
                Ok(Placed::Pad {
                    label: key.clone(),
                    pad_dim: dim,
                    inner: Box::new(inner),
                })
            }
            QNode::Threshold { k: 1, n: 1, children } => {
                Ok(Placed::Pass(Box::new(self.encode(&children[0], site, &format!("{path}.0"))?)))
            }
            QNode::Threshold { k, n, children } if QNode::is_pad_split(*k, *n) => {
                let label = pad_label(path);
                pad_site(&mut self.reg, site, dim, value(self.values, &label)?, false)?;
                let inner = self.encode(&children[0], site, &format!("{path}.0"))?;
                Ok(Placed::Pad {
                    label,
                    pad_dim: dim,
                    inner: Box::new(inner),
                })
            }
            QNode::Threshold { k: 2, n: 3, children } => {
                if dim == 2 {
                    self.reg = embed_site(&self.reg, site, 3)?;
                }
                self.reg = qts23_expand(&self.reg, site)?;
                self.holders.extend([None, None]);
                let last = self.reg.num_sites() - 1;
                let sites = [site, last - 1, last];
                let mut placed = Vec::with_capacity(3);
                for (i, (c, s)) in children.iter().zip(sites).enumerate() {
                    placed.push(self.encode(c, s, &format!("{path}.{i}"))?);
                }
                Ok(Placed::Qts(placed))
            }
            QNode::Threshold { k, n, .. } => Err(Error::Precondition(format!(
                "a quantum (({k},{n})) layer is checked structurally but not simulated"
            ))),
            QNode::Homogenized {
                reservoir,
                theta,
                holdings,
                key,
            } => {
                if dim != 2 {
                    return Err(Error::Precondition("homogenization dilutes a qubit".into()));
                }
                let start = self.reg.num_sites();
                self.reg = self
                    .reg
                    .tensor(&Register::basis_state(&vec![2; *reservoir], &vec![0; *reservoir])?)?;
                self.holders.extend(std::iter::repeat(None).take(*reservoir));
                let group: Vec<usize> = std::iter::once(site).chain(start..start + reservoir).collect();
                let ordering = ordering_from_index(reservoir + 1, value(self.values, key)?);
                homogenize_sites(&mut self.reg, &group, &ordering, *theta)?;
                let mut slots = group.iter();
                for (h, m) in holdings {
                    for s in slots.by_ref().take(*m) {
                        self.holders[*s] = Some(*h);
                    }
                }
                Ok(Placed::Homog {
                    label: key.clone(),
                    group,
                    theta: *theta,
                })
            }
        }
    }
}

fn pad_label(path: &str) -> String {
    format!("pad@{path}")
}

/// Runs the decoder for a coalition; returns the site holding the secret.
fn decode(
    placed: &Placed,
    reg: &mut Register,
    holders: &[Option<Holder>],
    mask: u64,
    known: &BTreeMap<String, Option<u64>>,
) -> Result<Option<usize>> {
    let key = |l: &str| known.get(l).copied().flatten();
    Ok(match placed {
        Placed::Leaf(s) => holders[*s].is_some_and(|h| h.present(mask)).then_some(*s),
        Placed::Pass(inner) => decode(inner, reg, holders, mask, known)?,
        Placed::Pad { label, pad_dim, inner } => {
            match (decode(inner, reg, holders, mask, known)?, key(label)) {
                (Some(s), Some(v)) => {
                    pad_site(reg, s, *pad_dim, v, true)?;
                    Some(s)
                }
                _ => None,
            }
        }
        Placed::Qts(children) => {
            let mut got = Vec::new();
            for (i, c) in children.iter().enumerate() {
                if let Some(s) = decode(c, reg, holders, mask, known)? {
                    got.push((i, s));
                }
            }
            match got[..] {
                [(p1, s1), (p2, s2), ..] => {
                    qts23_recover(reg, [s1, s2], [p1, p2])?;
                    Some(s2)
                }
                _ => None,
            }
        }
        Placed::Homog { label, group, theta } => {
            let all = group.iter().all(|&s| holders[s].is_some_and(|h| h.present(mask)));
            match key(label) {
                Some(v) if all => {
                    let ordering = ordering_from_index(group.len(), v);
                    unwind_sites(reg, group, &ordering, *theta)?;
                    Some(group[ordering[0]])
                }
                _ => None,
            }
        }
    })
}

fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn test_secrets() -> Result<Vec<Register>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok(vec![
        Register::basis_state(&[2], &[0])?,
        Register::basis_state(&[2], &[1])?,
        Register::new(vec![2], vec![c64(h, 0.0), c64(h, 0.0)])?,
        Register::new(vec![2], vec![c64(h, 0.0), c64(0.0, h)])?,
    ])
}

impl SchemePlan {
    /// Assembles a plan and validates it.
    pub fn new(
        name: impl Into<String>,
        access: AccessStructure,
        quantum: QNode,
        keys: BTreeMap<String, CNode>,
        q_players: BTreeSet<usize>,
        exact_security: bool,
    ) -> Result<Self> {
        let c_players = (0..access.n()).filter(|p| !q_players.contains(p)).collect();
        let mut plan = SchemePlan {
            name: name.into(),
            resident_shares: quantum.dealer_shares(),
            access,
            quantum,
            keys,
            q_players,
            c_players,
            exact_security,
            diagram: String::new(),
        };
        plan.diagram = plan.render();
        plan.validate()?;
        Ok(plan)
    }

    fn render(&self) -> String {
        let mut out = String::new();
        self.quantum.render(0, &mut out);
        for (label, c) in &self.keys {
            let _ = writeln!(out, "{label} = {}", c.render());
        }
        out
    }

    /// Whether the shares of `coalition` (plus the dealer's) suffice, by structure alone.
    pub fn structurally_recovers(&self, coalition: &BTreeSet<usize>) -> bool {
        self.quantum
            .recoverable(coalition.iter().fold(0, |m, p| m | 1 << p), &self.keys)
    }

    /// Checks no-cloning per layer, key references, that every minimal set
    /// holds a quantum piece, share dimensions, and that structural
    /// recoverability matches the access structure on every coalition.
    pub fn validate(&self) -> Result<()> {
        let n = self.access.n();
        if n > MAX_STRUCTURAL_PLAYERS {
            return Err(Error::LimitExceeded {
                what: "players in a scheme plan",
                limit: MAX_STRUCTURAL_PLAYERS,
                got: n,
            });
        }
        let mut dims = Vec::new();
        self.quantum.check(2, &mut dims)?;
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Internal(format!("quantum share of dimension {d} is smaller than the secret")));
        }
        self.keys.values().try_for_each(CNode::check)?;
        let mut refs = Vec::new();
        self.quantum.key_refs(&mut refs);
        if let Some(r) = refs.iter().find(|r| !self.keys.contains_key(**r)) {
            return Err(Error::invalid(format!("key {r} is used but never shared")));
        }
        let mut holders = BTreeSet::new();
        self.quantum.quantum_holders(&mut holders);
        if let Some(s) = self.access.minimal_sets().iter().find(|s| s.is_disjoint(&holders)) {
            return Err(Error::Constraint(format!(
                "authorized set {} holds no quantum share",
                letters(s)
            )));
        }
        if let Some(mask) = (0..1u64 << n)
            .find(|&m| self.quantum.recoverable(m, &self.keys) != self.access.is_authorized_mask(m))
        {
            let set: BTreeSet<usize> = (0..n).filter(|p| mask >> p & 1 == 1).collect();
            return Err(Error::Internal(format!(
                "plan disagrees with the access structure on {{{}}}",
                letters(&set)
            )));
        }
        Ok(())
    }

    fn catalog(&self) -> Result<Vec<KeyInfo>> {
        fn walk(node: &QNode, dim: usize, path: &str, keys: &BTreeMap<String, CNode>, out: &mut Vec<KeyInfo>) -> Result<()> {
            let named = |label: &String, space: u64, out: &mut Vec<KeyInfo>| -> Result<()> {
                if let Some(prev) = out.iter().find(|k| &k.label == label) {
                    if prev.space != space {
                        return Err(Error::invalid(format!("key {label} is used with two sizes")));
                    }
                    return Ok(());
                }
                out.push(KeyInfo {
                    label: label.clone(),
                    space,
                    sharing: keys[label].clone(),
                });
                Ok(())
            };
            match node {
                QNode::Share { .. } => Ok(()),
                QNode::Encrypted { key, inner } => {
                    named(key, pad_space(dim)?, out)?;
                    walk(inner, dim, path, keys, out)
                }
                QNode::Homogenized { reservoir, key, .. } => {
                    named(key, (1..=*reservoir as u64 + 1).product(), out)
                }
                QNode::Threshold { k: 1, n: 1, children } => walk(&children[0], dim, &format!("{path}.0"), keys, out),
                QNode::Threshold { k, n, children } if QNode::is_pad_split(*k, *n) => {
                    let rest = children[1..]
                        .iter()
                        .map(QNode::as_classical)
                        .collect::<Result<Vec<_>>>()?;
                    let sharing = match &rest[..] {
                        [one] => one.clone(),
                        _ => CNode::Threshold {
                            k: rest.len(),
                            n: rest.len(),
                            children: rest,
                        },
                    };
                    out.push(KeyInfo {
                        label: pad_label(path),
                        space: pad_space(dim)?,
                        sharing,
                    });
                    walk(&children[0], dim, &format!("{path}.0"), keys, out)
                }
                QNode::Threshold { k: 2, n: 3, children } => children
                    .iter()
                    .enumerate()
                    .try_for_each(|(i, c)| walk(c, 3, &format!("{path}.{i}"), keys, out)),
                QNode::Threshold { k, n, .. } => Err(Error::Precondition(format!(
                    "a quantum (({k},{n})) layer is checked structurally but not simulated"
                ))),
            }
        }
        let mut out = Vec::new();
        walk(&self.quantum, 2, "", &self.keys, &mut out)?;
        Ok(out)
    }

    /// True when every layer of the plan can be run on a register.
    pub fn is_simulable(&self) -> bool {
        self.catalog().is_ok()
    }

    fn encode(&self, secret: &Register, values: &BTreeMap<String, u64>) -> Result<(Register, Vec<Option<Holder>>, Placed)> {
        let mut enc = Encoder {
            reg: secret.clone(),
            holders: vec![None],
            values,
        };
        let placed = enc.encode(&self.quantum, 0, "")?;
        Ok((enc.reg, enc.holders, placed))
    }

    fn coalitions(&self) -> Vec<u64> {
        let n = self.access.n();
        if n <= EXHAUSTIVE_SIMULATION_PLAYERS {
            return (0..1u64 << n).collect();
        }
        // Minimal authorized sets and each one with a member removed.
        let mut out = BTreeSet::new();
        for s in self.access.minimal_sets() {
            let m = s.iter().fold(0u64, |m, p| m | 1 << p);
            out.insert(m);
            out.extend(s.iter().map(|p| m & !(1 << p)));
        }
        out.into_iter().collect()
    }

    /// Deals a random secret and keys, decodes for every authorized
    /// coalition and averages unauthorized views over the keys they lack.
    ///
    /// Every coalition is checked up to eight players; beyond that, the
    /// minimal authorized sets and their one-short subsets are.
    pub fn simulate<R: Rng>(&self, rng: &mut R) -> Result<SimulationReport> {
        let catalog = self.catalog()?;
        let values: BTreeMap<String, u64> = catalog
            .iter()
            .map(|k| (k.label.clone(), rng.gen_range(0..k.space)))
            .collect();
        let (a, b): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let secret = Register::new(
            vec![2],
            vec![c64(a.sqrt(), 0.0), c64((1.0 - a).sqrt() * b.cos(), (1.0 - a).sqrt() * b.sin())],
        )?;
        let (encoded, holders, placed) = self.encode(&secret, &values)?;
        let tests = test_secrets()?;

        let n = self.access.n();
        let mut report = SimulationReport {
            plan: self.name.clone(),
            coalitions: Vec::new(),
            exact_security: self.exact_security,
            failures: Vec::new(),
        };
        for mask in self.coalitions() {
            let set: BTreeSet<usize> = (0..n).filter(|p| mask >> p & 1 == 1).collect();
            let name = format!("{{{}}}", letters(&set));
            let mut known = BTreeMap::new();
            for k in &catalog {
                let v = values[&k.label];
                let got = k.sharing.deal_and_recover(v, k.prime(), mask, rng)?;
                if got.is_some_and(|g| g != v) {
                    report.failures.push(format!("{name} rebuilt a wrong value for {}", k.label));
                }
                known.insert(k.label.clone(), got);
            }
            let authorized = self.access.is_authorized_mask(mask);
            let mut result = CoalitionResult {
                coalition: name.clone(),
                authorized,
                fidelity: None,
                leak: None,
                maximally_mixed: None,
            };
            if authorized {
                let mut reg = encoded.clone();
                match decode(&placed, &mut reg, &holders, mask, &known)? {
                    Some(site) => {
                        let rho = reg.reduced_density_matrix(&[site])?;
                        let want = embed_site(&secret, 0, rho.nrows())?;
                        let fid = (density(&want) * rho).trace().re;
                        if fid < 1.0 - FIDELITY_TOL {
                            report.failures.push(format!("{name} decoded with fidelity {fid}"));
                        }
                        result.fidelity = Some(fid);
                    }
                    None => report.failures.push(format!("{name} is authorized but could not decode")),
                }
            } else {
                let (leak, mixed) = self.unauthorized_view(&catalog, &values, &known, &holders, mask, &tests)?;
                if self.exact_security && leak > LEAK_TOL {
                    report.failures.push(format!("{name} view depends on the secret (distance {leak:.3e})"));
                }
                result.leak = Some(leak);
                result.maximally_mixed = Some(mixed);
            }
            report.coalitions.push(result);
        }
        Ok(report)
    }

    /// Largest distance between averaged views of the test secrets, and
    /// whether the view is maximally mixed.
    fn unauthorized_view(
        &self,
        catalog: &[KeyInfo],
        values: &BTreeMap<String, u64>,
        known: &BTreeMap<String, Option<u64>>,
        holders: &[Option<Holder>],
        mask: u64,
        tests: &[Register],
    ) -> Result<(f64, bool)> {
        let view: Vec<usize> = (0..holders.len())
            .filter(|&s| holders[s].is_some_and(|h| h.present(mask)))
            .collect();
        if view.is_empty() {
            return Ok((0.0, true));
        }
        let unknown: Vec<&KeyInfo> = catalog.iter().filter(|k| known[&k.label].is_none()).collect();
        let combos = unknown.iter().try_fold(1u64, |acc, k| {
            acc.checked_mul(k.space).filter(|&c| c <= MAX_KEY_COMBINATIONS)
        });
        let Some(combos) = combos else {
            return Err(Error::LimitExceeded {
                what: "key combinations for one view",
                limit: MAX_KEY_COMBINATIONS as usize,
                got: usize::MAX,
            });
        };
        let mut averages = Vec::with_capacity(tests.len());
        for secret in tests {
            let mut vals = values.clone();
            let mut acc: Option<Matrix> = None;
            for mut idx in 0..combos {
                for k in &unknown {
                    vals.insert(k.label.clone(), idx % k.space);
                    idx /= k.space;
                }
                let rho = self.encode(secret, &vals)?.0.reduced_density_matrix(&view)?;
                acc = Some(match acc {
                    Some(a) => a + rho,
                    None => rho,
                });
            }
            let acc = acc.ok_or_else(|| Error::Internal("no key combination".into()))?;
            averages.push(acc / c64(combos as f64, 0.0));
        }
        let leak = averages[1..]
            .iter()
            .map(|m| frobenius(&(m - &averages[0])))
            .fold(0.0, f64::max);
        let d = averages[0].nrows();
        let mixed = frobenius(&(&averages[0] - Matrix::identity(d, d) / c64(d as f64, 0.0))) < LEAK_TOL;
        Ok((leak, mixed))
    }
}

/// One quantum share per member of a minimum hitting set of the minimal
/// authorized sets. Each such player's share is padded with a key that the
/// authorized sets assigned to it can rebuild; the dealer keeps `M − 1` shares.
pub fn compress_plan(access: &AccessStructure) -> Result<SchemePlan> {
    let (m, hitting) = super::min_q_players(access)?;
    let hitting: Vec<usize> = hitting.into_iter().collect();
    let mut assigned: BTreeMap<usize, Vec<&BTreeSet<usize>>> = BTreeMap::new();
    for s in access.minimal_sets() {
        let h = hitting
            .iter()
            .find(|h| s.contains(h))
            .ok_or_else(|| Error::Internal("hitting set misses a set".into()))?;
        assigned.entry(*h).or_default().push(s);
    }
    let mut keys = BTreeMap::new();
    let mut pieces = Vec::with_capacity(2 * m - 1);
    for &h in &hitting {
        let sets = assigned.get(&h).map(Vec::as_slice).unwrap_or_default();
        let ands: Vec<CNode> = sets
            .iter()
            .map(|s| c_all_of(&s.iter().copied().collect::<Vec<_>>()))
            .collect();
        let key = match &ands[..] {
            [] => return Err(Error::Internal("hitting set is not minimal".into())),
            [one] => one.clone(),
            _ => CNode::Threshold {
                k: 1,
                n: ands.len(),
                children: ands,
            },
        };
        let label = format!("K_{}", player_name(h));
        keys.insert(label.clone(), key);
        pieces.push(QNode::Encrypted {
            key: label,
            inner: Box::new(share(h)),
        });
    }
    let quantum = if m == 1 {
        pieces.remove(0)
    } else {
        pieces.extend(std::iter::repeat(QNode::Share { holder: Holder::Dealer }).take(m - 1));
        QNode::Threshold {
            k: m,
            n: 2 * m - 1,
            children: pieces,
        }
    };
    SchemePlan::new(
        format!("compressed {access}"),
        access.clone(),
        quantum,
        keys,
        hitting.into_iter().collect(),
        true,
    )
}

/// A `((k,n))` threshold scheme in which only `n − k + 1` players hold
/// quantum shares. The secret is padded with a key shared `(k,n)` among
/// all players, then split `((k+γ, n+γ))` with the dealer keeping `γ + k − 1`.
pub fn compress_threshold(k: usize, n: usize) -> Result<SchemePlan> {
    let access = AccessStructure::threshold(k, n)?;
    let gamma = super::assisted_params(k, n)?;
    let q: Vec<usize> = (0..n - k + 1).collect();
    let resident = gamma + k - 1;
    let children: Vec<QNode> = q
        .iter()
        .map(|&p| share(p))
        .chain(std::iter::repeat(QNode::Share { holder: Holder::Dealer }).take(resident))
        .collect();
    let layer = QNode::Threshold {
        k: k + gamma,
        n: n + gamma,
        children,
    };
    let all: Vec<usize> = (0..n).collect();
    let keys = BTreeMap::from([(
        "K".to_string(),
        CNode::Threshold {
            k,
            n,
            children: cshares(&all),
        },
    )]);
    let quantum = QNode::Encrypted {
        key: "K".into(),
        inner: Box::new(layer),
    };
    SchemePlan::new(
        format!("compressed (({k},{n}))"),
        access,
        quantum,
        keys,
        q.into_iter().collect(),
        true,
    )
}

/// Players `0..q` hold quantum shares and the rest classical ones. A
/// coalition is authorized when it has `k_q` q-players, `k_c` c-players
/// and every member of `common_set`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinThresholdSpec {
    pub k_c: usize,
    pub k_q: usize,
    pub n: usize,
    pub q: usize,
    #[serde(default)]
    pub common_set: BTreeSet<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum TwinVariant {
    /// Quantum `((k_q, q))` padded with a key shared `(k_c, n − q)`. No common set.
    Scheme1,
    /// Common q-players split the secret all-of; the rest use a threshold.
    /// The first key half goes to all of the common set, or only its
    /// c-players when `k1_over_common_c_only` is set.
    Scheme2 {
        #[serde(default)]
        k1_over_common_c_only: bool,
    },
    /// The secret is diluted into a reservoir held by the q-players, all of
    /// whom must be common. Security is approximate.
    Scheme3 { reservoir: usize, theta: f64 },
}

impl TwinThresholdSpec {
    fn q_set(&self) -> Vec<usize> {
        (0..self.q).collect()
    }

    fn lambda_q(&self) -> usize {
        self.common_set.iter().filter(|&&p| p < self.q).count()
    }

    fn lambda_c(&self) -> usize {
        self.common_set.len() - self.lambda_q()
    }

    pub fn is_authorized(&self, coalition: &BTreeSet<usize>) -> bool {
        self.authorized_mask(coalition.iter().fold(0, |m, p| m | 1 << p))
    }

    fn authorized_mask(&self, mask: u64) -> bool {
        let has = |p: &usize| mask >> p & 1 == 1;
        let qs = (0..self.q).filter(has).count();
        let cs = (self.q..self.n).filter(has).count();
        qs >= self.k_q && cs >= self.k_c && self.common_set.iter().all(has)
    }

    fn access(&self) -> Result<AccessStructure> {
        AccessStructure::from_predicate(self.n, |m| self.authorized_mask(m))
    }

    fn check(&self) -> Result<()> {
        let TwinThresholdSpec { k_c, k_q, n, q, .. } = *self;
        if n > MAX_STRUCTURAL_PLAYERS {
            return Err(Error::LimitExceeded {
                what: "players in a scheme plan",
                limit: MAX_STRUCTURAL_PLAYERS,
                got: n,
            });
        }
        if q == 0 || q > n || k_q == 0 || k_q > q || k_c > n - q {
            return Err(Error::invalid(format!(
                "need 1 ≤ k_q ≤ q ≤ n and k_c ≤ n − q, got k_c={k_c} k_q={k_q} n={n} q={q}"
            )));
        }
        if let Some(p) = self.common_set.iter().find(|&&p| p >= n) {
            return Err(Error::invalid(format!("common player {p} is out of range")));
        }
        Ok(())
    }
}

/// `((k,m))` among `players`, as one quantum node.
fn q_threshold(k: usize, players: &[usize]) -> Result<QNode> {
    if 2 * k <= players.len() {
        return Err(Error::Constraint(format!(
            "a quantum (({k},{})) layer would let two disjoint sets rebuild the secret",
            players.len()
        )));
    }
    Ok(QNode::Threshold {
        k,
        n: players.len(),
        children: players.iter().map(|&p| share(p)).collect(),
    })
}

fn c_threshold(k: usize, players: &[usize]) -> Option<CNode> {
    (k > 0).then(|| CNode::Threshold {
        k,
        n: players.len(),
        children: cshares(players),
    })
}

fn c_pair(a: Option<CNode>, b: Option<CNode>) -> Option<CNode> {
    match (a, b) {
        (Some(a), Some(b)) => Some(CNode::Threshold {
            k: 2,
            n: 2,
            children: vec![a, b],
        }),
        (a, b) => a.or(b),
    }
}

/// Builds a plan for a twin-threshold structure with one of three constructions.
pub fn plan_twin_threshold(spec: &TwinThresholdSpec, variant: TwinVariant) -> Result<SchemePlan> {
    spec.check()?;
    let access = spec.access()?;
    let TwinThresholdSpec { k_c, k_q, n, q, .. } = *spec;
    let (lq, lc) = (spec.lambda_q(), spec.lambda_c());
    let qs = spec.q_set();
    let cs: Vec<usize> = (q..n).collect();
    let common: Vec<usize> = spec.common_set.iter().copied().collect();
    let q_common: Vec<usize> = common.iter().copied().filter(|&p| p < q).collect();
    let q_rest: Vec<usize> = qs.iter().copied().filter(|p| !spec.common_set.contains(p)).collect();
    let c_common: Vec<usize> = common.iter().copied().filter(|&p| p >= q).collect();
    let c_rest: Vec<usize> = cs.iter().copied().filter(|p| !spec.common_set.contains(p)).collect();
    if k_c < lc {
        return Err(Error::Constraint(format!(
            "k_c = {k_c} is below the {lc} common c-players"
        )));
    }

    let (name, core, key, exact) = match variant {
        TwinVariant::Scheme1 => {
            if !common.is_empty() {
                return Err(Error::Constraint("scheme 1 has no common set".into()));
            }
            let core = q_threshold(k_q, &qs)?;
            ("twin threshold, scheme 1", core, c_threshold(k_c, &cs), true)
        }
        TwinVariant::Scheme2 { k1_over_common_c_only } => {
            if k_q < lq {
                return Err(Error::Constraint(format!(
                    "k_q = {k_q} is below the {lq} common q-players"
                )));
            }
            let rest = k_q - lq;
            let s1 = (lq > 0).then(|| QNode::Threshold {
                k: lq,
                n: lq,
                children: q_common.iter().map(|&p| share(p)).collect(),
            });
            let s2 = if rest > 0 { Some(q_threshold(rest, &q_rest)?) } else { None };
            let core = match (s1, s2) {
                (Some(a), Some(b)) => QNode::Threshold {
                    k: 2,
                    n: 2,
                    children: vec![a, b],
                },
                (a, b) => a.or(b).ok_or_else(|| Error::Internal("empty quantum layer".into()))?,
            };
            let k1_holders = if k1_over_common_c_only { &c_common } else { &common };
            let k1 = (!k1_holders.is_empty()).then(|| c_all_of(k1_holders));
            let k2 = c_threshold(k_c - lc, &c_rest);
            ("twin threshold, scheme 2", core, c_pair(k1, k2), true)
        }
        TwinVariant::Scheme3 { reservoir, theta } => {
            if !q_rest.is_empty() {
                return Err(Error::Constraint("scheme 3 needs every q-player in the common set".into()));
            }
            if k_q != q {
                return Err(Error::Constraint(format!("scheme 3 needs k_q = q, got k_q={k_q} q={q}")));
            }
            if reservoir + 1 < q {
                return Err(Error::Constraint(format!(
                    "{} reservoir qubits cannot give each of {q} q-players a share",
                    reservoir
                )));
            }
            let mut counts = vec![0usize; q];
            for i in 0..=reservoir {
                counts[i % q] += 1;
            }
            let holdings = qs.iter().map(|&p| Holder::Player(p)).zip(counts).collect();
            let core = QNode::Homogenized {
                reservoir,
                theta,
                holdings,
                key: "K".into(),
            };
            let k1 = Some(c_all_of(&common));
            let k2 = c_threshold(k_c - lc, &c_rest);
            ("twin threshold, scheme 3", core, c_pair(k1, k2), false)
        }
    };

    let mut keys = BTreeMap::new();
    let quantum = match (core, key) {
        (core @ QNode::Homogenized { .. }, Some(k)) => {
            keys.insert("K".to_string(), k);
            core
        }
        (core, Some(k)) => {
            keys.insert("K".to_string(), k);
            QNode::Encrypted {
                key: "K".into(),
                inner: Box::new(core),
            }
        }
        (core, None) => core,
    };
    SchemePlan::new(name, access, quantum, keys, qs.into_iter().collect(), exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn compress_two_sets() {
        let a = AccessStructure::parse(5, "ABC, DE").unwrap();
        let plan = compress_plan(&a).unwrap();
        assert_eq!(plan.q_players, BTreeSet::from([0, 3]));
        assert_eq!(plan.resident_shares, 1);
        assert!(plan.diagram.starts_with("((2,3)) {\n  A ~ K_A\n  D ~ K_D\n  dealer\n}"));
        let report = plan.simulate(&mut rng()).unwrap();
        assert!(report.holds(), "{:?}", report.failures);
        assert_eq!(report.coalitions.len(), 32);
    }

    #[test]
    fn compress_single_hitter() {
        let a = AccessStructure::parse(4, "AB, AC, AD").unwrap();
        let plan = compress_plan(&a).unwrap();
        assert_eq!(plan.q_players, BTreeSet::from([0]));
        assert_eq!(plan.resident_shares, 0);
        assert!(plan.simulate(&mut rng()).unwrap().holds());
    }

    #[test]
    fn compress_disjoint_pairs() {
        let a = AccessStructure::parse(6, "AB, CD, EF").unwrap();
        let plan = compress_plan(&a).unwrap();
        assert_eq!(plan.resident_shares, 2);
        assert!(plan.diagram.starts_with("((3,5))"));
        assert!(!plan.is_simulable());
    }

    #[test]
    fn compressed_thresholds() {
        for (k, n) in [(1, 2), (2, 3), (3, 3), (2, 2), (1, 1)] {
            let plan = compress_threshold(k, n).unwrap();
            assert_eq!(plan.q_players.len(), n - k + 1);
            assert_eq!(plan.resident_shares, super::super::assisted_params(k, n).unwrap() + k - 1);
            let report = plan.simulate(&mut rng()).unwrap();
            assert!(report.holds(), "(({k},{n})): {:?}", report.failures);
        }
        // ((3,4)) keeps a ((3,4)) layer, which is only checked structurally.
        let plan = compress_threshold(3, 4).unwrap();
        assert!(!plan.is_simulable());
        assert!(matches!(plan.simulate(&mut rng()), Err(Error::Precondition(_))));
    }

    #[test]
    fn twin_scheme_one_simulates() {
        let spec = TwinThresholdSpec {
            k_c: 2,
            k_q: 2,
            n: 5,
            q: 3,
            common_set: BTreeSet::new(),
        };
        let plan = plan_twin_threshold(&spec, TwinVariant::Scheme1).unwrap();
        let report = plan.simulate(&mut rng()).unwrap();
        assert!(report.holds(), "{:?}", report.failures);
        assert!(report
            .coalitions
            .iter()
            .filter(|c| !c.authorized)
            .all(|c| c.leak.unwrap() < 1e-9));
    }

    #[test]
    fn twin_scheme_one_needs_majority() {
        let spec = TwinThresholdSpec {
            k_c: 1,
            k_q: 2,
            n: 6,
            q: 4,
            common_set: BTreeSet::new(),
        };
        assert!(matches!(
            plan_twin_threshold(&spec, TwinVariant::Scheme1),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn twin_scheme_two_cases() {
        let v = TwinVariant::Scheme2 {
            k1_over_common_c_only: false,
        };
        // Every q-player common: an all-of split among them.
        let all_common = TwinThresholdSpec {
            k_c: 1,
            k_q: 2,
            n: 4,
            q: 2,
            common_set: BTreeSet::from([0, 1]),
        };
        let plan = plan_twin_threshold(&all_common, v).unwrap();
        assert!(plan.simulate(&mut rng()).unwrap().holds());
        // No common q-player: a plain threshold.
        let none = TwinThresholdSpec {
            k_c: 1,
            k_q: 2,
            n: 5,
            q: 3,
            common_set: BTreeSet::from([4]),
        };
        let plan = plan_twin_threshold(&none, v).unwrap();
        assert!(plan.simulate(&mut rng()).unwrap().holds());
        // Mixed: common A, plus two of B, C, D.
        let mixed = TwinThresholdSpec {
            k_c: 1,
            k_q: 3,
            n: 5,
            q: 4,
            common_set: BTreeSet::from([0]),
        };
        let plan = plan_twin_threshold(&mixed, v).unwrap();
        assert!(plan.diagram.contains("((2,2))"));
        let report = plan.simulate(&mut rng()).unwrap();
        assert!(report.holds(), "{:?}", report.failures);
    }

    #[test]
    fn twin_scheme_two_rejections() {
        let v = TwinVariant::Scheme2 {
            k1_over_common_c_only: true,
        };
        let too_many_common = TwinThresholdSpec {
            k_c: 0,
            k_q: 1,
            n: 4,
            q: 2,
            common_set: BTreeSet::from([0, 1]),
        };
        assert!(matches!(plan_twin_threshold(&too_many_common, v), Err(Error::Constraint(_))));
        // One of the three others would be a ((1,2)) layer on B, C.
        let halves = TwinThresholdSpec {
            k_c: 1,
            k_q: 2,
            n: 4,
            q: 3,
            common_set: BTreeSet::from([0]),
        };
        assert!(matches!(plan_twin_threshold(&halves, v), Err(Error::Constraint(_))));
        let cloning = TwinThresholdSpec {
            k_c: 1,
            k_q: 2,
            n: 6,
            q: 5,
            common_set: BTreeSet::from([0]),
        };
        assert!(matches!(plan_twin_threshold(&cloning, v), Err(Error::Constraint(_))));
    }

    #[test]
    fn twin_scheme_three() {
        let outside = TwinThresholdSpec {
            k_c: 1,
            k_q: 2,
            n: 4,
            q: 2,
            common_set: BTreeSet::from([0]),
        };
        let v = TwinVariant::Scheme3 {
            reservoir: 3,
            theta: super::super::DEFAULT_THETA,
        };
        assert!(matches!(plan_twin_threshold(&outside, v), Err(Error::Constraint(_))));
        let ok = TwinThresholdSpec {
            common_set: BTreeSet::from([0, 1]),
            ..outside
        };
        let plan = plan_twin_threshold(&ok, v).unwrap();
        assert!(!plan.exact_security);
        let report = plan.simulate(&mut rng()).unwrap();
        assert!(report.holds(), "{:?}", report.failures);
        assert!(report.coalitions.iter().any(|c| c.fidelity.is_some()));
    }
}
