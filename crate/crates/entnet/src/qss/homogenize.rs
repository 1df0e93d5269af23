//! Diluting a qubit into a reservoir with partial swaps, and undoing it.
//!
//! The system qubit is placed at position `K[0]` among `N + 1` qubits and
//! then partially swapped with `K[1], K[2], …, K[N]` in turn. Only the right
//! ordering `K` runs the chain backwards.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::statevec::{Gate, Matrix, Register};

/// Interaction angle used when none is given.
pub const DEFAULT_THETA: f64 = std::f64::consts::PI / 5.0;
/// Largest reservoir simulated.
pub const MAX_RESERVOIR: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct Homogenized {
    pub register: Register,
    pub ordering: Vec<usize>,
}

fn check_ordering(ordering: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if ordering.len() != len || ordering.iter().any(|&i| i >= len || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::invalid(format!("ordering must permute 0..{len}")));
    }
    Ok(())
}

/// Runs the chain on `group`, whose first site holds the system and the
/// rest hold reservoir qubits in a common state.
pub(crate) fn homogenize_sites(
    reg: &mut Register,
    group: &[usize],
    ordering: &[usize],
    theta: f64,
) -> Result<()> {
    check_ordering(ordering, group.len())?;
    let sys = group[ordering[0]];
    if sys != group[0] {
        reg.apply_gate(Gate::PartialSwap(std::f64::consts::FRAC_PI_2), &[group[0], sys])?;
    }
    for &j in &ordering[1..] {
        reg.apply_gate(Gate::PartialSwap(theta), &[sys, group[j]])?;
    }
    Ok(())
}

/// Reverses [`homogenize_sites`] for a claimed ordering; the system is
/// then expected at `group[ordering[0]]`.
pub(crate) fn unwind_sites(
    reg: &mut Register,
    group: &[usize],
    ordering: &[usize],
    theta: f64,
) -> Result<()> {
    check_ordering(ordering, group.len())?;
    let sys = group[ordering[0]];
    for &j in ordering[1..].iter().rev() {
        reg.apply_gate(Gate::PartialSwap(-theta), &[sys, group[j]])?;
    }
    Ok(())
}

fn check_system(system: &Register, reservoir: usize) -> Result<()> {
    if system.dims() != [2] {
        return Err(Error::invalid("the system is a single qubit"));
    }
    if reservoir > MAX_RESERVOIR {
        return Err(Error::LimitExceeded {
            what: "reservoir qubits",
            limit: MAX_RESERVOIR,
            got: reservoir,
        });
    }
    Ok(())
}

/// Homogenizes `system` with `reservoir` qubits in `|0⟩` using a given ordering.
pub fn homogenize_with(
    system: &Register,
    reservoir: usize,
    theta: f64,
    ordering: &[usize],
) -> Result<Register> {
    check_system(system, reservoir)?;
    let mut reg = system.tensor(&Register::basis_state(&vec![2; reservoir], &vec![0; reservoir])?)?;
    let group: Vec<usize> = (0..=reservoir).collect();
    homogenize_sites(&mut reg, &group, ordering, theta)?;
    Ok(reg)
}

/// Homogenizes with a uniformly random ordering, which is returned as the key.
pub fn homogenize(
    system: &Register,
    reservoir: usize,
    theta: f64,
    rng: &mut impl Rng,
) -> Result<Homogenized> {
    let mut ordering: Vec<usize> = (0..=reservoir).collect();
    ordering.shuffle(rng);
    let register = homogenize_with(system, reservoir, theta, &ordering)?;
    Ok(Homogenized { register, ordering })
}

/// Runs the chain backwards according to `ordering`.
pub fn unwind(reg: &Register, ordering: &[usize], theta: f64) -> Result<Register> {
    let mut out = reg.clone();
    let group: Vec<usize> = (0..reg.num_sites()).collect();
    unwind_sites(&mut out, &group, ordering, theta)?;
    Ok(out)
}

/// Reduced state of the site an ordering names as the system, after unwinding.
pub fn unwound_system(reg: &Register, ordering: &[usize], theta: f64) -> Result<Matrix> {
    unwind(reg, ordering, theta)?.reduced_density_matrix(&[ordering[0]])
}

/// Permutation number `index` of `0..len` in lexicographic order.
pub fn ordering_from_index(len: usize, mut index: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..len).collect();
    let mut fact: u64 = (1..len as u64).product();
    let mut out = Vec::with_capacity(len);
    for left in (1..=len).rev() {
        let pick = (index / fact) as usize;
        index %= fact;
        out.push(pool.remove(pick));
        if left > 1 {
            fact /= (left - 1) as u64;
        }
    }
    out
}

/// How many of the `(N + 1)!` orderings bring `secret` back with fidelity
/// at least `1 − 1e-9`, and the total.
pub fn count_restoring_orderings(
    secret: &Register,
    reservoir: usize,
    theta: f64,
    key: &[usize],
) -> Result<(usize, usize)> {
    let reg = homogenize_with(secret, reservoir, theta, key)?;
    let want = crate::qss::density(secret);
    let total: u64 = (1..=reservoir as u64 + 1).product();
    let mut good = 0;
    for idx in 0..total {
        let k = ordering_from_index(reservoir + 1, idx);
        let rho = unwound_system(&reg, &k, theta)?;
        let fid = (&want * &rho).trace().re;
        good += usize::from(fid >= 1.0 - 1e-9);
    }
    Ok((good, total as usize))
}
