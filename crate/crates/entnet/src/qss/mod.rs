//! Hybrid quantum secret sharing.
//!
//! Quantum shares are hidden with classical one-time pads (Pauli on qubits,
//! Weyl on qutrits) and the pads are split with Shamir's scheme, so that
//! most players only ever hold classical data. The dealer may keep
//! resident shares, which lets disjoint coalitions each be authorized.

mod homogenize;
mod plan;

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::subsets_of_size;
use crate::statevec::{c64, Gate, Matrix, Register, C64};

pub use homogenize::{
    count_restoring_orderings, homogenize, homogenize_with, ordering_from_index, unwind,
    unwound_system, Homogenized, DEFAULT_THETA, MAX_RESERVOIR,
};
pub use plan::{
    compress_plan, compress_threshold, plan_twin_threshold, CNode, CoalitionResult, Holder,
    QNode, SchemePlan, SimulationReport, TwinThresholdSpec, TwinVariant,
};

/// Largest player count for exact hitting-set search.
pub const MAX_HITTING_SET_PLAYERS: usize = 20;
/// Field for byte-sized secrets.
pub const DEFAULT_PRIME: u64 = 257;
/// Field for keys too large for [`DEFAULT_PRIME`].
pub const KEY_PRIME: u64 = 2_147_483_647;

/// Players are numbered from 0 and written as letters A, B, C, ...
pub fn player_name(p: usize) -> String {
    if p < 26 {
        char::from(b'A' + p as u8).to_string()
    } else {
        format!("P{p}")
    }
}

/// Minimal authorized sets over players `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AccessJson", into = "AccessJson")]
pub struct AccessStructure {
    n: usize,
    minimal_sets: Vec<BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
struct AccessJson {
    #[serde(default)]
    n: Option<usize>,
    minimal_sets: Vec<String>,
}

impl TryFrom<AccessJson> for AccessStructure {
    type Error = Error;
    fn try_from(j: AccessJson) -> Result<Self> {
        let sets = j
            .minimal_sets
            .iter()
            .map(|s| parse_letters(s))
            .collect::<Result<Vec<_>>>()?;
        let n = j
            .n
            .unwrap_or_else(|| sets.iter().flatten().max().map_or(0, |m| m + 1));
        AccessStructure::new(n, sets)
    }
}

impl From<AccessStructure> for AccessJson {
    fn from(a: AccessStructure) -> Self {
        AccessJson {
            n: Some(a.n),
            minimal_sets: a.minimal_sets.iter().map(|s| letters(s)).collect(),
        }
    }
}

fn parse_letters(s: &str) -> Result<BTreeSet<usize>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            'A'..='Z' => Ok(c as usize - 'A' as usize),
            _ => Err(Error::invalid(format!("player names are letters A-Z, got {c:?}"))),
        })
        .collect()
}

pub(crate) fn letters<'a>(set: impl IntoIterator<Item = &'a usize>) -> String {
    set.into_iter().map(|&p| player_name(p)).collect()
}

impl AccessStructure {
    /// Sets are sorted; duplicates are dropped but a set containing another is rejected.
    pub fn new(n: usize, sets: Vec<BTreeSet<usize>>) -> Result<Self> {
        let mut sets = sets;
        sets.sort();
        sets.dedup();
        if sets.is_empty() || sets.iter().any(BTreeSet::is_empty) {
            return Err(Error::invalid("need at least one nonempty authorized set"));
        }
        if let Some(p) = sets.iter().flatten().find(|&&p| p >= n) {
            return Err(Error::invalid(format!("player {p} outside 0..{n}")));
        }
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate() {
                if i != j && a.is_subset(b) {
                    return Err(Error::invalid(format!(
                        "{} contains {}; list minimal sets only",
                        letters(b),
                        letters(a)
                    )));
                }
            }
        }
        Ok(AccessStructure { n, minimal_sets: sets })
    }

    /// Parses `"ABC, DE"` style notation.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let sets = text
            .split(',')
            .map(parse_letters)
            .collect::<Result<Vec<_>>>()?;
        AccessStructure::new(n, sets)
    }

    /// Every `k`-subset of `n` players.
    pub fn threshold(k: usize, n: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!("need 1 ≤ k ≤ n, got ({k},{n})")));
        }
        AccessStructure::new(n, subsets_of_size(n, k).into_iter().map(|s| s.into_iter().collect()).collect())
    }

    /// Minimal sets of a monotone predicate over bitmasks (bit `i` = player `i`).
    pub fn from_predicate(n: usize, authorized: impl Fn(u64) -> bool) -> Result<Self> {
        if n > MAX_HITTING_SET_PLAYERS {
            return Err(Error::LimitExceeded {
                what: "access structure players",
                limit: MAX_HITTING_SET_PLAYERS,
                got: n,
            });
        }
        let minimal = (1u64..1 << n)
            .filter(|&m| authorized(m) && (0..n).all(|i| m >> i & 1 == 0 || !authorized(m & !(1 << i))))
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect();
        AccessStructure::new(n, minimal)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn minimal_sets(&self) -> &[BTreeSet<usize>] {
        &self.minimal_sets
    }

    pub fn is_authorized(&self, coalition: &BTreeSet<usize>) -> bool {
        self.minimal_sets.iter().any(|s| s.is_subset(coalition))
    }

    pub(crate) fn is_authorized_mask(&self, mask: u64) -> bool {
        self.minimal_sets
            .iter()
            .any(|s| s.iter().all(|&p| mask >> p & 1 == 1))
    }
}

impl fmt::Display for AccessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets: Vec<String> = self.minimal_sets.iter().map(|s| letters(s)).collect();
        write!(f, "{{{}}}", sets.join(", "))
    }
}

/// Two authorized sets that are disjoint would each rebuild the secret.
pub fn violates_no_cloning(a: &AccessStructure) -> bool {
    let s = a.minimal_sets();
    s.iter()
        .enumerate()
        .any(|(i, x)| s[i + 1..].iter().any(|y| x.is_disjoint(y)))
}

/// Two key bits per qubit: 00 → I, 01 → X, 10 → Y, 11 → Z.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PauliKey(Vec<u8>);

impl PauliKey {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.len() % 2 != 0 || bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("a Pauli key is an even-length bit string"));
        }
        Ok(PauliKey(bits))
    }

    /// Key number `index` among the `4^qubits` keys, first qubit most significant.
    pub fn from_index(qubits: usize, index: u64) -> Self {
        PauliKey(
            (0..2 * qubits)
                .map(|i| (index >> (2 * qubits - 1 - i) & 1) as u8)
                .collect(),
        )
    }

    pub fn random(qubits: usize, rng: &mut impl Rng) -> Self {
        PauliKey((0..2 * qubits).map(|_| rng.gen_range(0..=1)).collect())
    }

    pub fn qubits(&self) -> usize {
        self.0.len() / 2
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    /// The Pauli applied to qubit `i`, or `None` for the identity.
    pub fn pauli(&self, i: usize) -> Option<Gate> {
        pauli_gate(2 * self.0[2 * i] + self.0[2 * i + 1])
    }
}

fn pauli_gate(v: u8) -> Option<Gate> {
    match v {
        0 => None,
        1 => Some(Gate::X),
        2 => Some(Gate::Y),
        _ => Some(Gate::Z),
    }
}

fn check_pauli_fit(reg: &Register, key: &PauliKey) -> Result<()> {
    if reg.dims().iter().any(|&d| d != 2) || key.qubits() != reg.num_sites() {
        return Err(Error::invalid(format!(
            "key for {} qubits cannot encrypt dims {:?}",
            key.qubits(),
            reg.dims()
        )));
    }
    Ok(())
}

pub fn pauli_encrypt(reg: &Register, key: &PauliKey) -> Result<Register> {
    check_pauli_fit(reg, key)?;
    let mut out = reg.clone();
    for i in 0..reg.num_sites() {
        if let Some(g) = key.pauli(i) {
            out.apply_gate(g, &[i])?;
        }
    }
    Ok(out)
}

/// Paulis are self-inverse, so this undoes [`pauli_encrypt`] exactly.
pub fn pauli_decrypt(reg: &Register, key: &PauliKey) -> Result<Register> {
    pauli_encrypt(reg, key)
}

pub(crate) fn density(reg: &Register) -> Matrix {
    let v = DMatrix::from_column_slice(reg.amplitudes().len(), 1, reg.amplitudes());
    &v * v.adjoint()
}

/// The ciphertext averaged over all `4^s` keys.
pub fn pauli_average(reg: &Register) -> Result<Matrix> {
    let s = reg.num_sites();
    if s > 6 {
        return Err(Error::LimitExceeded {
            what: "qubits in Pauli average",
            limit: 6,
            got: s,
        });
    }
    let d = reg.amplitudes().len();
    let mut acc = Matrix::zeros(d, d);
    for idx in 0..1u64 << (2 * s) {
        acc += density(&pauli_encrypt(reg, &PauliKey::from_index(s, idx))?);
    }
    Ok(acc / c64((1u64 << (2 * s)) as f64, 0.0))
}

fn omega(k: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k % 3) as f64 / 3.0)
}

fn qutrit_shift(a: usize) -> Gate {
    Gate::QutritPermutation([a % 3, (1 + a) % 3, (2 + a) % 3])
}

fn qutrit_clock(b: usize) -> Gate {
    Gate::Custom(Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        3,
        (0..3).map(|i| omega(b * i)),
    )))
}

/// Applies `X^a Z^b` to a qutrit site.
pub fn weyl_encrypt(reg: &mut Register, site: usize, a: usize, b: usize) -> Result<()> {
    reg.apply_gate(qutrit_clock(b), &[site])?;
    reg.apply_gate(qutrit_shift(a), &[site])
}

/// Inverse of [`weyl_encrypt`].
pub fn weyl_decrypt(reg: &mut Register, site: usize, a: usize, b: usize) -> Result<()> {
    reg.apply_gate(qutrit_shift(3 - a % 3), &[site])?;
    reg.apply_gate(qutrit_clock(3 - b % 3), &[site])
}

/// Number of pad values for a site of dimension `d`.
pub(crate) fn pad_space(d: usize) -> Result<u64> {
    match d {
        2 => Ok(4),
        3 => Ok(9),
        _ => Err(Error::invalid(format!("no one-time pad for dimension {d}"))),
    }
}

/// Pads (or unpads) one site with key value `v` in `0..pad_space(pad_dim)`.
///
/// A qubit pad on a qutrit site acts on levels 0 and 1 only.
pub(crate) fn pad_site(reg: &mut Register, site: usize, pad_dim: usize, v: u64, undo: bool) -> Result<()> {
    let d = reg.dims()[site];
    match pad_dim {
        2 => {
            let Some(g) = pauli_gate(v as u8) else {
                return Ok(());
            };
            if d == 2 {
                return reg.apply_gate(g, &[site]);
            }
            let small = g.matrix(&[2])?;
            let mut m = Matrix::identity(d, d);
            m.view_mut((0, 0), (2, 2)).copy_from(&small);
            reg.apply_gate(Gate::Custom(m), &[site])
        }
        3 if d == 3 => {
            let (a, b) = ((v / 3) as usize, (v % 3) as usize);
            if undo {
                weyl_decrypt(reg, site, a, b)
            } else {
                weyl_encrypt(reg, site, a, b)
            }
        }
        _ => Err(Error::invalid(format!("no {pad_dim}-level pad for a site of dimension {d}"))),
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(p)) as u64
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// A point `(x, f(x))` on the dealer's polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShamirShare {
    pub x: u64,
    pub y: u64,
}

/// Splits `secret` into `n` shares over `GF(p)`; any `k` reconstruct it.
pub fn shamir_split(
    secret: u64,
    k: usize,
    n: usize,
    p: u64,
    rng: &mut impl Rng,
) -> Result<Vec<ShamirShare>> {
    if !is_prime(p) || p > KEY_PRIME {
        return Err(Error::invalid(format!("{p} is not a supported prime")));
    }
    if secret >= p || k == 0 || k > n || n as u64 >= p {
        return Err(Error::invalid(format!(
            "need secret < p and 1 ≤ k ≤ n < p, got secret={secret} k={k} n={n} p={p}"
        )));
    }
    let coeffs: Vec<u64> = std::iter::once(secret)
        .chain((1..k).map(|_| rng.gen_range(0..p)))
        .collect();
    Ok((1..=n as u64)
        .map(|x| ShamirShare {
            x,
            y: coeffs.iter().rev().fold(0, |acc, &c| (mul_mod(acc, x, p) + c) % p),
        })
        .collect())
}

/// Lagrange interpolation at zero through all given shares.
pub fn shamir_reconstruct(shares: &[ShamirShare], p: u64) -> Result<u64> {
    if !is_prime(p) || p > KEY_PRIME {
        return Err(Error::invalid(format!("{p} is not a supported prime")));
    }
    let xs: BTreeSet<u64> = shares.iter().map(|s| s.x % p).collect();
    if shares.is_empty() || xs.len() != shares.len() || xs.contains(&0) {
        return Err(Error::invalid("shares need distinct nonzero x coordinates"));
    }
    Ok(shares.iter().fold(0, |acc, si| {
        let basis = shares.iter().filter(|sj| sj.x != si.x).fold(1, |b, sj| {
            let den = (sj.x + p - si.x % p) % p;
            mul_mod(mul_mod(b, sj.x % p, p), inv_mod(den, p), p)
        });
        (acc + mul_mod(si.y % p, basis, p)) % p
    }))
}

/// Strides for mixed-radix indexing, site 0 most significant.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Raises the dimension of `site`, keeping amplitudes on the old levels.
pub fn embed_site(reg: &Register, site: usize, new_dim: usize) -> Result<Register> {
    let dims = reg.dims().to_vec();
    if site >= dims.len() || new_dim < dims[site] {
        return Err(Error::invalid(format!("cannot embed site {site} of {dims:?} into dimension {new_dim}")));
    }
    let mut nd = dims.clone();
    nd[site] = new_dim;
    let (os, ns) = (strides(&dims), strides(&nd));
    let mut amps = vec![c64(0.0, 0.0); nd.iter().product()];
    for (i, &a) in reg.amplitudes().iter().enumerate() {
        let j: usize = (0..dims.len()).map(|s| (i / os[s] % dims[s]) * ns[s]).sum();
        amps[j] = a;
    }
    Register::new(nd, amps)
}

/// The qutrit `|j⟩` mapped to `Σ_a |a, a+j, a+2j⟩ / √3` on `site` plus two
/// appended qutrits. Share `i` of the code ends up at `[site, last-1, last][i]`.
pub(crate) fn qts23_expand(reg: &Register, site: usize) -> Result<Register> {
    if reg.dims().get(site) != Some(&3) {
        return Err(Error::invalid("the (2,3) code encodes a qutrit"));
    }
    let mut out = reg.tensor(&Register::basis_state(&[3, 3], &[0, 0])?)?;
    let (e1, e2) = (out.num_sites() - 2, out.num_sites() - 1);
    let h = c64(1.0 / 3f64.sqrt(), 0.0);
    let fourier = Matrix::from_fn(3, 3, |x, y| omega(x * y) * h);
    out.apply_gate(Gate::Custom(fourier), &[e1])?;
    // (j, a, c) ↦ (a, a + j, a + 2j + c)
    let perm: Vec<usize> = (0..27)
        .map(|i| {
            let (j, a, c) = (i / 9, i / 3 % 3, i % 3);
            9 * a + 3 * ((a + j) % 3) + (a + 2 * j + c) % 3
        })
        .collect();
    out.apply_gate(Gate::permutation(&perm), &[site, e1, e2])?;
    Ok(out)
}

/// Encodes one qutrit (a qubit is embedded in levels 0 and 1) into three qutrit shares.
pub fn qts23_encode(secret: &Register) -> Result<Register> {
    let secret = match secret.dims() {
        [3] => secret.clone(),
        [2] => embed_site(secret, 0, 3)?,
        d => return Err(Error::invalid(format!("secret must be one qutrit or qubit, got {d:?}"))),
    };
    qts23_expand(&secret, 0)
}

/// Applies the recovery unitary to two shares at `sites` that were shares
/// `positions` of the code. The secret is then carried by `sites[1]`.
pub(crate) fn qts23_recover(reg: &mut Register, sites: [usize; 2], positions: [usize; 2]) -> Result<()> {
    let [p1, p2] = positions;
    if p1 > 2 || p2 > 2 || p1 == p2 {
        return Err(Error::invalid("share positions are two distinct values in 0..3"));
    }
    let p3 = 3 - p1 - p2;
    let step = (p2 + 3 - p1) % 3;
    // step is 1 or 2, and each is its own inverse mod 3.
    let perm: Vec<usize> = (0..9)
        .map(|i| {
            let (x, y) = (i / 3, i % 3);
            let j = (y + 3 - x) * step % 3;
            let z = (x + (p3 + 3 - p1) * j) % 3;
            3 * z + j
        })
        .collect();
    reg.apply_gate(Gate::permutation(&perm), &sites)
}

/// Recovers the secret qutrit from two shares given their code positions.
pub fn qts23_decode(shares: &Register, sites: [usize; 2], positions: [usize; 2]) -> Result<Register> {
    let mut reg = shares.clone();
    qts23_recover(&mut reg, sites, positions)?;
    Ok(reg.factor_out(&[sites[1]])?.0)
}

/// Resident shares needed to run a `((k,n))` scheme with dealer assistance.
pub fn assisted_params(k: usize, n: usize) -> Result<usize> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 ≤ k ≤ n, got ({k},{n})")));
    }
    Ok(if 2 * k > n { 0 } else { n - 2 * k + 1 })
}

/// The smallest set of players meeting every authorized set, first in
/// lexicographic order among those of minimum size.
pub fn min_q_players(a: &AccessStructure) -> Result<(usize, BTreeSet<usize>)> {
    let n = a.n();
    if n > MAX_HITTING_SET_PLAYERS {
        return Err(Error::LimitExceeded {
            what: "hitting set players",
            limit: MAX_HITTING_SET_PLAYERS,
            got: n,
        });
    }
    (1..=n)
        .find_map(|size| {
            subsets_of_size(n, size).into_iter().find_map(|cand| {
                let set: BTreeSet<usize> = cand.into_iter().collect();
                a.minimal_sets()
                    .iter()
                    .all(|s| !s.is_disjoint(&set))
                    .then_some((size, set))
            })
        })
        .ok_or_else(|| Error::Internal("no hitting set".into()))
}

/// A threshold scheme enlarged by added classical players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Inflation {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub added_c_players: usize,
}

/// Grows a valid `((k,n))` scheme to `((k',n'))` using only classical players.
///
/// Raising `n` at fixed `k` is rejected: dropping the new players would
/// leave a scheme with a lower threshold than the one asked for.
pub fn inflate(k: usize, n: usize, new_k: usize, new_n: usize) -> Result<Inflation> {
    if k == 0 || k > n || 2 * k <= n {
        return Err(Error::invalid(format!("(({k},{n})) is not a valid quantum threshold scheme")));
    }
    if new_n <= n {
        return Err(Error::invalid("inflation must add players"));
    }
    if new_k == k {
        return Err(Error::Constraint(format!(
            "(({k},{n})) cannot be inflated at constant threshold to (({new_k},{new_n}))"
        )));
    }
    if new_k < k || new_k - k != new_n - n {
        return Err(Error::Constraint(format!(
            "only conformal inflation (({k}+γ,{n}+γ)) is supported, got (({new_k},{new_n}))"
        )));
    }
    Ok(Inflation {
        from: (k, n),
        to: (new_k, new_n),
        added_c_players: new_n - n,
    })
}

pub fn inflate_conformal(k: usize, n: usize, gamma: usize) -> Result<Inflation> {
    inflate(k, n, k + gamma, n + gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(s: &str) -> BTreeSet<usize> {
        parse_letters(s).unwrap()
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn identity(d: usize) -> Matrix {
        Matrix::identity(d, d)
    }

    fn qutrit(amps: [C64; 3]) -> Register {
        Register::normalized(vec![3], amps.to_vec()).unwrap()
    }

    #[test]
    fn access_structure_parsing() {
        let a = AccessStructure::parse(6, "ABC, AD, AEF").unwrap();
        assert_eq!(a.to_string(), "{ABC, AD, AEF}");
        assert!(a.is_authorized(&set("ADF")));
        assert!(!a.is_authorized(&set("BCDEF")));
        assert!(AccessStructure::parse(4, "AB, ABC").is_err());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"n":6,"minimal_sets":["ABC","AD","AEF"]}"#);
        let back: AccessStructure = serde_json::from_str(r#"{"minimal_sets":["ABC","DE"]}"#).unwrap();
        assert_eq!(back.n(), 5);
    }

    #[test]
    fn no_cloning_examples() {
        assert!(!violates_no_cloning(&AccessStructure::parse(6, "ABC,AD,AEF").unwrap()));
        assert!(violates_no_cloning(&AccessStructure::parse(5, "ABC,DE").unwrap()));
        assert!(!violates_no_cloning(&AccessStructure::parse(3, "AB").unwrap()));
    }

    #[test]
    fn pauli_round_trip_and_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = Register::normalized(vec![2, 2], vec![c64(0.3, 0.1), c64(-0.5, 0.2), c64(0.1, 0.7), c64(0.2, 0.0)])
            .unwrap();
        let zero = PauliKey::new(vec![0; 4]).unwrap();
        assert_eq!(pauli_encrypt(&s, &zero).unwrap(), s);
        for _ in 0..10 {
            let k = PauliKey::random(2, &mut rng);
            let back = pauli_decrypt(&pauli_encrypt(&s, &k).unwrap(), &k).unwrap();
            assert!(back.equal_up_to_global_phase(&s, 1e-12));
        }
        let avg = pauli_average(&s).unwrap();
        assert!(close(&avg, &(identity(4) / c64(4.0, 0.0)), 1e-12));
        let one = Register::normalized(vec![2], vec![c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap();
        assert!(close(&pauli_average(&one).unwrap(), &(identity(2) / c64(2.0, 0.0)), 1e-12));
    }

    #[test]
    fn weyl_round_trip() {
        let s = qutrit([c64(0.5, 0.0), c64(0.1, 0.6), c64(-0.3, 0.2)]);
        let mut avg = Matrix::zeros(3, 3);
        for a in 0..3 {
            for b in 0..3 {
                let mut r = s.clone();
                weyl_encrypt(&mut r, 0, a, b).unwrap();
                avg += density(&r);
                weyl_decrypt(&mut r, 0, a, b).unwrap();
                assert!(r.equal_up_to_global_phase(&s, 1e-12));
            }
        }
        assert!(close(&(avg / c64(9.0, 0.0)), &(identity(3) / c64(3.0, 0.0)), 1e-12));
    }

    #[test]
    fn shamir_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shares = shamir_split(42, 2, 3, DEFAULT_PRIME, &mut rng).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(shamir_reconstruct(&[shares[i], shares[j]], DEFAULT_PRIME).unwrap(), 42);
                }
            }
        }
        let ones = shamir_split(99, 1, 4, DEFAULT_PRIME, &mut rng).unwrap();
        assert!(ones.iter().all(|s| s.y == 99));
        let big = shamir_split(1_000_000, 3, 5, KEY_PRIME, &mut rng).unwrap();
        assert_eq!(shamir_reconstruct(&big[1..4], KEY_PRIME).unwrap(), 1_000_000);
        assert!(shamir_split(300, 2, 3, DEFAULT_PRIME, &mut rng).is_err());
        assert!(shamir_split(1, 2, 3, 15, &mut rng).is_err());
    }

    #[test]
    fn shamir_short_of_threshold_is_uninformative() {
        // With k = 3 over GF(7), two shares fit exactly one polynomial per secret.
        let p = 7;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for secret in 0..p {
            let shares = shamir_split(secret, 3, 4, p, &mut rng).unwrap();
            let seen = &shares[1..3];
            let mut per_secret = vec![0; p as usize];
            for s in 0..p {
                for c1 in 0..p {
                    for c2 in 0..p {
                        let fits = seen
                            .iter()
                            .all(|sh| (s + c1 * sh.x + c2 * sh.x * sh.x) % p == sh.y);
                        per_secret[s as usize] += usize::from(fits);
                    }
                }
            }
            assert!(per_secret.iter().all(|&c| c == 1), "{per_secret:?}");
        }
    }

    #[test]
    fn qts23_recovery_from_any_pair() {
        let s = qutrit([c64(0.2, 0.1), c64(0.7, -0.3), c64(0.1, 0.5)]);
        let enc = qts23_encode(&s).unwrap();
        for p1 in 0..3 {
            for p2 in 0..3 {
                if p1 != p2 {
                    let got = qts23_decode(&enc, [p1, p2], [p1, p2]).unwrap();
                    assert!(got.equal_up_to_global_phase(&s, 1e-10), "{p1} {p2}");
                }
            }
        }
        for site in 0..3 {
            let rho = enc.reduced_density_matrix(&[site]).unwrap();
            assert!(close(&rho, &(identity(3) / c64(3.0, 0.0)), 1e-10));
        }
    }

    #[test]
    fn qts23_swap_symmetry() {
        let basis = |j: usize| Register::basis_state(&[3], &[j]).unwrap();
        for (j, want) in [(0, 0), (1, 2), (2, 1)] {
            let swapped = qts23_encode(&basis(j)).unwrap().permute_sites(&[1, 0, 2]).unwrap();
            let got = qts23_decode(&swapped, [0, 1], [0, 1]).unwrap();
            assert!(got.equal_up_to_global_phase(&basis(want), 1e-10));
        }
    }

    #[test]
    fn qubit_secret_embeds() {
        let q = Register::normalized(vec![2], vec![c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap();
        let enc = qts23_encode(&q).unwrap();
        let got = qts23_decode(&enc, [2, 0], [2, 0]).unwrap();
        assert!(got.equal_up_to_global_phase(&embed_site(&q, 0, 3).unwrap(), 1e-10));
    }

    #[test]
    fn assisted_examples() {
        assert_eq!(assisted_params(2, 10).unwrap(), 7);
        assert_eq!(assisted_params(2, 3).unwrap(), 0);
        assert_eq!(assisted_params(1, 2).unwrap(), 1);
        for n in 1..30 {
            for k in 1..=n {
                let g = assisted_params(k, n).unwrap();
                assert!(2 * (k + g) > n + g);
            }
        }
        assert!(assisted_params(0, 3).is_err());
    }

    #[test]
    fn hitting_sets() {
        let a = AccessStructure::parse(5, "ABC,DE").unwrap();
        assert_eq!(min_q_players(&a).unwrap(), (2, set("AD")));
        let b = AccessStructure::parse(6, "ABC,AD,AEF").unwrap();
        assert_eq!(min_q_players(&b).unwrap(), (1, set("A")));
        for n in 1..=7 {
            for k in 1..=n {
                let t = AccessStructure::threshold(k, n).unwrap();
                assert_eq!(min_q_players(&t).unwrap().0, n - k + 1);
            }
        }
    }

    #[test]
    fn inflation_rules() {
        let i = inflate_conformal(2, 3, 2).unwrap();
        assert_eq!((i.to, i.added_c_players), ((4, 5), 2));
        assert!(matches!(inflate(2, 3, 2, 4), Err(Error::Constraint(_))));
        assert!(matches!(inflate(2, 3, 4, 4), Err(Error::Constraint(_))));
        assert!(inflate(1, 3, 2, 4).is_err());
    }
}
