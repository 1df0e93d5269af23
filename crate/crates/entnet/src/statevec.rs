//! Dense state vectors over mixed-dimension sites.
//!
//! Site 0 is the most significant digit of the basis index, so a register
//! with dims `[2, 2, 3]` orders its amplitudes as `|000⟩, |001⟩, |002⟩,
//! |010⟩, ...`. All randomness comes in through an [`OutcomeSource`].

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

/// Tolerance for norms, unitarity and state comparisons.
pub const TOLERANCE: f64 = 1e-10;
/// Largest amplitude vector a register may hold.
pub const MAX_AMPLITUDES: usize = 1 << 22;
/// Branches with less probability than this are treated as impossible.
const ZERO_BRANCH: f64 = 1e-14;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Computational,
    /// `{(|0⟩+|1⟩)/√2, (|0⟩−|1⟩)/√2}`, qubits only.
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub value: usize,
    pub basis: Basis,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X,
    Y,
    Z,
    H,
    /// First target is the control.
    Cnot,
    /// Maps `|i⟩` to `|p[i]⟩` on a qutrit.
    QutritPermutation([usize; 3]),
    /// `cos θ·I + i sin θ·SWAP` on two sites of equal dimension.
    PartialSwap(f64),
    Custom(Matrix),
}

impl Gate {
    /// Unitary mapping basis state `i` to `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Gate {
        let d = perm.len();
        let mut m = Matrix::zeros(d, d);
        for (i, &p) in perm.iter().enumerate() {
            if p < d {
                m[(p, i)] = C64::new(1.0, 0.0);
            }
        }
        Gate::Custom(m)
    }

    /// Dense matrix of the gate acting on sites of the given dimensions.
    pub fn matrix(&self, dims: &[usize]) -> Result<Matrix> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let expect = |want: &[usize]| -> Result<()> {
            if dims == want {
                Ok(())
            } else {
                Err(Error::InvalidGate(format!(
                    "{self:?} acts on dims {want:?}, targets have {dims:?}"
                )))
            }
        };
        let m = match self {
            Gate::X => {
                expect(&[2])?;
                Matrix::from_row_slice(2, 2, &[zero, one, one, zero])
            }
            Gate::Y => {
                expect(&[2])?;
                Matrix::from_row_slice(2, 2, &[zero, -i, i, zero])
            }
            Gate::Z => {
                expect(&[2])?;
                Matrix::from_row_slice(2, 2, &[one, zero, zero, -one])
            }
            Gate::H => {
                expect(&[2])?;
                let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                Matrix::from_row_slice(2, 2, &[h, h, h, -h])
            }
            Gate::Cnot => {
                expect(&[2, 2])?;
                let mut m = Matrix::zeros(4, 4);
                for ctrl in 0..2 {
                    for tgt in 0..2 {
                        m[(2 * ctrl + (tgt ^ ctrl), 2 * ctrl + tgt)] = one;
                    }
                }
                m
            }
            Gate::QutritPermutation(p) => {
                expect(&[3])?;
                let mut seen = [false; 3];
                for &v in p {
                    if v >= 3 || seen[v] {
                        return Err(Error::InvalidGate(format!("{p:?} is not a permutation")));
                    }
                    seen[v] = true;
                }
                let mut m = Matrix::zeros(3, 3);
                for (from, &to) in p.iter().enumerate() {
                    m[(to, from)] = one;
                }
                m
            }
            Gate::PartialSwap(theta) => {
                if dims.len() != 2 || dims[0] != dims[1] {
                    return Err(Error::InvalidGate(format!(
                        "partial swap needs two sites of equal dimension, got {dims:?}"
                    )));
                }
                let d = dims[0];
                let (s, c) = theta.sin_cos();
                let mut m = Matrix::zeros(d * d, d * d);
                for a in 0..d {
                    for b in 0..d {
                        m[(a * d + b, a * d + b)] += C64::new(c, 0.0);
                        m[(b * d + a, a * d + b)] += C64::new(0.0, s);
                    }
                }
                m
            }
            Gate::Custom(m) => {
                let d: usize = dims.iter().product();
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::InvalidGate(format!(
                        "matrix is {}x{}, targets need {d}x{d}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                m.clone()
            }
        };
        check_unitary(&m)?;
        Ok(m)
    }
}

/// Fails unless `U†U` is within [`TOLERANCE`] of the identity (Frobenius norm).
pub fn check_unitary(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidGate("matrix is not square".into()));
    }
    let dev = (m.adjoint() * m - Matrix::identity(m.nrows(), m.ncols())).norm();
    if dev < TOLERANCE {
        Ok(())
    } else {
        Err(Error::InvalidGate(format!("matrix is not unitary (deviation {dev:.3e})")))
    }
}

/// A gate together with the sites it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl GateSpec {
    pub fn new(gate: Gate, targets: &[usize]) -> Self {
        GateSpec {
            gate,
            targets: targets.to_vec(),
        }
    }
}

/// Supplies measurement outcomes given Born probabilities.
///
/// Every `RngCore` samples; [`ForcedOutcomes`] replays a fixed branch.
pub trait OutcomeSource {
    fn choose(&mut self, site: usize, probs: &[f64]) -> Result<usize>;
}

impl<R: RngCore + ?Sized> OutcomeSource for R {
    fn choose(&mut self, _site: usize, probs: &[f64]) -> Result<usize> {
        let r: f64 = self.gen();
        let mut acc = 0.0;
        let mut last = None;
        for (v, &p) in probs.iter().enumerate() {
            if p <= ZERO_BRANCH {
                continue;
            }
            acc += p;
            last = Some(v);
            if r < acc {
                return Ok(v);
            }
        }
        last.ok_or_else(|| Error::Internal("all outcomes have zero probability".into()))
    }
}

/// Outcomes fixed in advance, consumed in measurement order.
#[derive(Clone, Debug, Default)]
pub struct ForcedOutcomes(VecDeque<usize>);

impl ForcedOutcomes {
    pub fn new(values: impl IntoIterator<Item = usize>) -> Self {
        ForcedOutcomes(values.into_iter().collect())
    }

    pub fn remaining(&self) -> usize {
        self.0.len()
    }
}

impl OutcomeSource for ForcedOutcomes {
    fn choose(&mut self, site: usize, probs: &[f64]) -> Result<usize> {
        let v = self
            .0
            .pop_front()
            .ok_or_else(|| Error::invalid("forced outcome list exhausted"))?;
        match probs.get(v) {
            Some(&p) if p > ZERO_BRANCH => Ok(v),
            _ => Err(Error::ZeroNormBranch { site, outcome: v }),
        }
    }
}

/// Amplitude vector over sites of dimension ≥ 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RegisterRepr", try_from = "RegisterRepr")]
pub struct Register {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct RegisterRepr {
    dims: Vec<usize>,
    amplitudes: Vec<[f64; 2]>,
}

impl From<Register> for RegisterRepr {
    fn from(r: Register) -> Self {
        RegisterRepr {
            dims: r.dims,
            amplitudes: r.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<RegisterRepr> for Register {
    type Error = Error;
    fn try_from(r: RegisterRepr) -> Result<Self> {
        Register::new(
            r.dims,
            r.amplitudes.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
        )
    }
}

fn checked_len(dims: &[usize]) -> Result<usize> {
    let mut len: usize = 1;
    for &d in dims {
        if d < 2 {
            return Err(Error::invalid(format!("site dimension {d} is below 2")));
        }
        len = len.checked_mul(d).filter(|&l| l <= MAX_AMPLITUDES).ok_or(
            Error::LimitExceeded {
                what: "register size",
                limit: MAX_AMPLITUDES,
                got: usize::MAX,
            },
        )?;
    }
    Ok(len)
}

/// Nonzero amplitudes as a ket sum, four decimals each, site 0 first.
impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() < 5e-5 {
                continue;
            }
            let mut rest = i;
            let mut digits = vec![0; self.dims.len()];
            for (d, &dim) in digits.iter_mut().zip(&self.dims).rev() {
                *d = rest % dim;
                rest /= dim;
            }
            let label: String = digits.iter().map(|d| d.to_string()).collect();
            // Adding 0.0 turns -0.0 into 0.0.
            let (re, im) = (a.re + 0.0, a.im + 0.0);
            let coef = if im.abs() < 5e-5 {
                format!("{re:.4}")
            } else if re.abs() < 5e-5 {
                format!("{im:.4}i")
            } else {
                format!("({re:.4}{im:+.4}i)")
            };
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{coef}|{label}⟩")?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Register {
    /// Validates dimensions, length and normalisation.
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let len = checked_len(&dims)?;
        if amps.len() != len {
            return Err(Error::invalid(format!(
                "{} amplitudes for a space of dimension {len}",
                amps.len()
            )));
        }
        let reg = Register { dims, amps };
        let norm = reg.norm_sqr();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::invalid(format!("state has squared norm {norm}")));
        }
        Ok(reg)
    }

    /// Like [`Register::new`] but rescales the amplitudes to unit norm.
    pub fn normalized(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n < TOLERANCE {
            return Err(Error::invalid("zero vector"));
        }
        Register::new(dims, amps.into_iter().map(|a| a / n).collect())
    }

    /// The zero-site register holding the scalar 1.
    pub fn empty() -> Self {
        Register {
            dims: Vec::new(),
            amps: vec![C64::new(1.0, 0.0)],
        }
    }

    pub fn basis_state(dims: &[usize], labels: &[usize]) -> Result<Self> {
        if dims.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} sites",
                labels.len(),
                dims.len()
            )));
        }
        let len = checked_len(dims)?;
        let mut idx = 0;
        for (&d, &l) in dims.iter().zip(labels) {
            if l >= d {
                return Err(Error::invalid(format!("label {l} out of range for dimension {d}")));
            }
            idx = idx * d + l;
        }
        let mut amps = vec![C64::new(0.0, 0.0); len];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Register {
            dims: dims.to_vec(),
            amps,
        })
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n ≥ 1` qubits.
    pub fn cat(n: usize) -> Result<Self> {
        let dims = vec![2; n];
        let len = checked_len(&dims)?;
        let mut amps = vec![C64::new(0.0, 0.0); len];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] += h;
        amps[len - 1] += h;
        Register::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude of the basis state with the given digits.
    pub fn amplitude(&self, labels: &[usize]) -> C64 {
        let idx = labels
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&l, &d)| acc * d + l);
        self.amps[idx]
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        for (j, &s) in sites.iter().enumerate() {
            if s >= self.dims.len() {
                return Err(Error::invalid(format!(
                    "site {s} out of range for {} sites",
                    self.dims.len()
                )));
            }
            if sites[..j].contains(&s) {
                return Err(Error::invalid(format!("site {s} listed twice")));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, spec: &GateSpec) -> Result<()> {
        self.check_sites(&spec.targets)?;
        let tdims: Vec<usize> = spec.targets.iter().map(|&t| self.dims[t]).collect();
        let m = spec.gate.matrix(&tdims)?;
        self.apply_matrix(&m, &spec.targets);
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        self.apply(&GateSpec::new(gate, targets))
    }

    /// Applies an already validated matrix to distinct target sites.
    fn apply_matrix(&mut self, m: &Matrix, targets: &[usize]) {
        let strides = self.strides();
        let tdims: Vec<usize> = targets.iter().map(|&t| self.dims[t]).collect();
        let d = m.nrows();
        let offsets: Vec<usize> = (0..d)
            .map(|cfg| {
                let mut rem = cfg;
                let mut off = 0;
                for j in (0..targets.len()).rev() {
                    off += (rem % tdims[j]) * strides[targets[j]];
                    rem /= tdims[j];
                }
                off
            })
            .collect();
        let dense: Vec<C64> = (0..d * d).map(|k| m[(k / d, k % d)]).collect();
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for base in 0..self.amps.len() {
            if targets
                .iter()
                .any(|&t| (base / strides[t]) % self.dims[t] != 0)
            {
                continue;
            }
            for (b, &off) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base + off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let row = &dense[r * d..(r + 1) * d];
                self.amps[base + off] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
            }
        }
    }

    /// Born probabilities of each computational outcome on `site`.
    pub fn probabilities(&self, site: usize) -> Result<Vec<f64>> {
        self.check_sites(&[site])?;
        let stride = self.strides()[site];
        let d = self.dims[site];
        let mut p = vec![0.0; d];
        for (i, a) in self.amps.iter().enumerate() {
            p[(i / stride) % d] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Projects `site` onto `|value⟩` and renormalises; returns the branch probability.
    pub fn collapse(&mut self, site: usize, value: usize) -> Result<f64> {
        let p = self.probabilities(site)?;
        let prob = *p
            .get(value)
            .ok_or_else(|| Error::invalid(format!("outcome {value} out of range")))?;
        if prob <= ZERO_BRANCH {
            return Err(Error::ZeroNormBranch {
                site,
                outcome: value,
            });
        }
        let stride = self.strides()[site];
        let d = self.dims[site];
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i / stride) % d == value {
                *a *= scale;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        Ok(prob)
    }

    /// Measures one site, leaving it in the observed eigenstate.
    ///
    /// A diagonal measurement is a Hadamard, a computational measurement,
    /// and a second Hadamard to return the site to `|±⟩`.
    pub fn measure(
        &mut self,
        site: usize,
        basis: Basis,
        source: &mut (impl OutcomeSource + ?Sized),
    ) -> Result<Outcome> {
        self.check_sites(&[site])?;
        if basis == Basis::Diagonal {
            if self.dims[site] != 2 {
                return Err(Error::invalid("diagonal basis is only defined for qubits"));
            }
            self.apply_gate(Gate::H, &[site])?;
        }
        let probs = self.probabilities(site)?;
        let value = source.choose(site, &probs)?;
        self.collapse(site, value)?;
        if basis == Basis::Diagonal {
            self.apply_gate(Gate::H, &[site])?;
        }
        Ok(Outcome { value, basis })
    }

    pub fn inner(&self, other: &Register) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`, or 0 when the shapes differ.
    pub fn fidelity(&self, other: &Register) -> f64 {
        if self.dims != other.dims {
            return 0.0;
        }
        self.inner(other).norm_sqr()
    }

    /// True when `‖self − c·other‖ ≤ tol` for some unit `c`.
    ///
    /// `c` is read off the largest-magnitude amplitude of `other`.
    pub fn equal_up_to_global_phase(&self, other: &Register, tol: f64) -> bool {
        if self.dims != other.dims {
            return false;
        }
        let Some((k, bk)) = other
            .amps
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))
        else {
            return false;
        };
        let ratio = self.amps[k] / bk;
        if ratio.norm() < TOLERANCE {
            return false;
        }
        let phase = ratio / ratio.norm();
        let dist: f64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - phase * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        dist <= tol
    }

    pub fn tensor(&self, other: &Register) -> Result<Register> {
        let dims: Vec<usize> = self.dims.iter().chain(&other.dims).copied().collect();
        checked_len(&dims)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(Register { dims, amps })
    }

    /// Reorders sites: site `i` of the result is site `order[i]` of `self`.
    pub fn permute_sites(&self, order: &[usize]) -> Result<Register> {
        if order.len() != self.dims.len() {
            return Err(Error::invalid("permutation length does not match site count"));
        }
        self.check_sites(order)?;
        let old_strides = self.strides();
        let dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (new_idx, slot) in amps.iter_mut().enumerate() {
            let mut rem = new_idx;
            let mut old_idx = 0;
            for j in (0..dims.len()).rev() {
                old_idx += (rem % dims[j]) * old_strides[order[j]];
                rem /= dims[j];
            }
            *slot = self.amps[old_idx];
        }
        Ok(Register { dims, amps })
    }

    /// Moves `keep` to the front, returning the permuted register and the split point.
    fn front_loaded(&self, keep: &[usize]) -> Result<(Register, usize)> {
        self.check_sites(keep)?;
        let order: Vec<usize> = keep
            .iter()
            .copied()
            .chain((0..self.dims.len()).filter(|s| !keep.contains(s)))
            .collect();
        let reg = self.permute_sites(&order)?;
        let dk = keep.iter().map(|&s| self.dims[s]).product();
        Ok((reg, dk))
    }

    /// Reduced density matrix of `keep`, in the listed site order.
    pub fn reduced_density_matrix(&self, keep: &[usize]) -> Result<Matrix> {
        let (reg, dk) = self.front_loaded(keep)?;
        let dr = reg.amps.len() / dk;
        let mut rho = Matrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..=i {
                let v: C64 = (0..dr)
                    .map(|r| reg.amps[i * dr + r] * reg.amps[j * dr + r].conj())
                    .sum();
                rho[(i, j)] = v;
                rho[(j, i)] = v.conj();
            }
        }
        Ok(rho)
    }

    /// `tr ρ²` of the reduced state on `sites`.
    pub fn purity(&self, sites: &[usize]) -> Result<f64> {
        let rho = self.reduced_density_matrix(sites)?;
        Ok((&rho * &rho).trace().re)
    }

    /// Splits off `keep` when it is unentangled with the other sites.
    ///
    /// Returns `(state of keep, state of the rest)`; each is fixed only up to
    /// a global phase.
    pub fn factor_out(&self, keep: &[usize]) -> Result<(Register, Register)> {
        let purity = self.purity(keep)?;
        if (purity - 1.0).abs() > TOLERANCE {
            return Err(Error::EntangledSite(keep.first().copied().unwrap_or(0)));
        }
        let (reg, dk) = self.front_loaded(keep)?;
        let dr = reg.amps.len() / dk;
        let (best, _) = reg
            .amps
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))
            .expect("register is never empty");
        let (bi, br) = (best / dr, best % dr);
        let kept: Vec<C64> = (0..dk).map(|i| reg.amps[i * dr + br]).collect();
        let rest: Vec<C64> = (0..dr).map(|r| reg.amps[bi * dr + r]).collect();
        let kd = reg.dims[..keep.len()].to_vec();
        let rd = reg.dims[keep.len()..].to_vec();
        Ok((Register::normalized(kd, kept)?, Register::normalized(rd, rest)?))
    }

    /// Removes an unentangled site.
    pub fn discard_site(&self, site: usize) -> Result<Register> {
        self.factor_out(&[site])
            .map(|(_, rest)| rest)
            .map_err(|e| match e {
                Error::EntangledSite(_) => Error::EntangledSite(site),
                other => other,
            })
    }
}
