//! Dense statevector simulation.
//!
//! Qubit 0 is the most significant bit of a basis index: for an `n`-qubit
//! register the basis state `|q_0 q_1 ... q_{n-1}>` has index
//! `sum_q q_q * 2^(n-1-q)`. Every other module follows the same ordering.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest register the dense simulator will allocate.
pub const MAX_DENSE_QUBITS: usize = 30;

const NORM_TOLERANCE: f64 = 1e-8;

/// Bit mask selecting `qubit` inside a basis index of an `n_qubits` register.
#[inline]
pub fn qubit_mask(n_qubits: usize, qubit: usize) -> usize {
    1usize << (n_qubits - 1 - qubit)
}

/// A gate of the simulator's native set. Rotations use `exp(-i angle sigma / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    /// `Cnot(control, target)`
    Cnot(usize, usize),
}

impl Gate {
    /// Qubits the gate acts on, control first for `Cnot`.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::X(q)
            | Gate::Z(q) => (q, None),
            Gate::Cnot(c, t) => (c, Some(t)),
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::Rx(..) | Gate::Ry(..) | Gate::Rz(..))
    }

    /// Checks the gate's qubit indices against a register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (a, b) = self.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if b == Some(a) {
            return Err(Error::DuplicateQubit(a));
        }
        Ok(())
    }

    /// Appends gates whose product is the inverse of `self`.
    ///
    /// `S^dagger` is emitted as `S` followed by `Z`, keeping the output inside the
    /// native gate set.
    pub fn push_inverse(&self, out: &mut Vec<Gate>) {
        match *self {
            Gate::Rx(q, a) => out.push(Gate::Rx(q, -a)),
            Gate::Ry(q, a) => out.push(Gate::Ry(q, -a)),
            Gate::Rz(q, a) => out.push(Gate::Rz(q, -a)),
            Gate::S(q) => {
                out.push(Gate::S(q));
                out.push(Gate::Z(q));
            }
            g => out.push(g),
        }
    }

    /// 2x2 matrix of a single-qubit gate, `None` for `Cnot`.
    pub fn matrix(&self) -> Option<[[C64; 2]; 2]> {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let m = match *self {
            Gate::Rx(_, a) => {
                let (s, c) = (a / 2.0).sin_cos();
                [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
            }
            Gate::Ry(_, a) => {
                let (s, c) = (a / 2.0).sin_cos();
                [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
            }
            Gate::Rz(_, a) => {
                let (s, c) = (a / 2.0).sin_cos();
                [[C64::new(c, -s), zero], [zero, C64::new(c, s)]]
            }
            Gate::H(_) => {
                let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Gate::S(_) => [[one, zero], [zero, C64::new(0.0, 1.0)]],
            Gate::X(_) => [[zero, one], [one, zero]],
            Gate::Z(_) => [[one, zero], [zero, -one]],
            Gate::Cnot(..) => return None,
        };
        Some(m)
    }
}

/// Text form used in snapshot dumps: `H 0`, `CNOT 0 1`, `RY 2 0.25`.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Rx(q, a) => write!(f, "RX {q} {a:?}"),
            Gate::Ry(q, a) => write!(f, "RY {q} {a:?}"),
            Gate::Rz(q, a) => write!(f, "RZ {q} {a:?}"),
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::Cnot(c, t) => write!(f, "CNOT {c} {t}"),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts.next().ok_or_else(|| Error::Parse("empty gate".into()))?;
        let mut next_qubit = || -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("missing operand in `{s}`")))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad operand in `{s}`: {e}")))
        };
        let gate = match name.to_ascii_uppercase().as_str() {
            "H" => Gate::H(next_qubit()?),
            "S" => Gate::S(next_qubit()?),
            "X" => Gate::X(next_qubit()?),
            "Z" => Gate::Z(next_qubit()?),
            "CNOT" | "CX" => {
                let c = next_qubit()?;
                Gate::Cnot(c, next_qubit()?)
            }
            rot @ ("RX" | "RY" | "RZ") => {
                let q = next_qubit()?;
                let a: f64 = s
                    .split_whitespace()
                    .nth(2)
                    .ok_or_else(|| Error::Parse(format!("missing angle in `{s}`")))?
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad angle in `{s}`: {e}")))?;
                match rot {
                    "RX" => Gate::Rx(q, a),
                    "RY" => Gate::Ry(q, a),
                    _ => Gate::Rz(q, a),
                }
            }
            other => return Err(Error::Parse(format!("unknown gate `{other}`"))),
        };
        Ok(gate)
    }
}

/// Dense `2^n` complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { n: n_qubits, max: MAX_DENSE_QUBITS });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps an amplitude vector whose length is a power of two and whose norm is one.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let state = Self::from_amplitudes_unnormalized(amps)?;
        let norm = state.norm_sqr().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Like [`Statevector::from_amplitudes`] but rescales the input to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let mut state = Self::from_amplitudes_unnormalized(amps)?;
        let norm = state.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn from_amplitudes_unnormalized(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { n: n_qubits, max: MAX_DENSE_QUBITS });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies every amplitude by `exp(i alpha)`.
    pub fn with_global_phase(mut self, alpha: f64) -> Self {
        let phase = C64::from_polar(1.0, alpha);
        self.amps.iter_mut().for_each(|a| *a *= phase);
        self
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Applies a gate whose indices are already known to be valid.
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        let n = self.n_qubits;
        let amps = &mut self.amps[..];
        match *gate {
            Gate::Cnot(c, t) => {
                let (cm, tm) = (qubit_mask(n, c), qubit_mask(n, t));
                for_each_pair(amps.len(), tm, |i| {
                    if i & cm != 0 {
                        amps.swap(i, i | tm);
                    }
                });
            }
            Gate::X(q) => {
                let m = qubit_mask(n, q);
                for_each_pair(amps.len(), m, |i| amps.swap(i, i | m));
            }
            Gate::Z(q) => {
                let m = qubit_mask(n, q);
                for_each_pair(amps.len(), m, |i| amps[i | m] = -amps[i | m]);
            }
            Gate::S(q) => {
                let m = qubit_mask(n, q);
                for_each_pair(amps.len(), m, |i| {
                    let a = amps[i | m];
                    amps[i | m] = C64::new(-a.im, a.re);
                });
            }
            Gate::H(q) => {
                let m = qubit_mask(n, q);
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for_each_pair(amps.len(), m, |i| {
                    let (a0, a1) = (amps[i], amps[i | m]);
                    amps[i] = (a0 + a1) * h;
                    amps[i | m] = (a0 - a1) * h;
                });
            }
            _ => {
                let (q, _) = gate.qubits();
                let u = gate.matrix().expect("single-qubit gate");
                let m = qubit_mask(n, q);
                for_each_pair(amps.len(), m, |i| {
                    let (a0, a1) = (amps[i], amps[i | m]);
                    amps[i] = u[0][0] * a0 + u[0][1] * a1;
                    amps[i | m] = u[1][0] * a0 + u[1][1] * a1;
                });
            }
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Probability of reading `0` on `qubit`, marginalized over the rest.
    pub fn prob_zero(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits: self.n_qubits });
        }
        let m = qubit_mask(self.n_qubits, qubit);
        let (p0, p1) = self.amps.iter().enumerate().fold((0.0, 0.0), |(p0, p1), (i, a)| {
            if i & m == 0 {
                (p0 + a.norm_sqr(), p1)
            } else {
                (p0, p1 + a.norm_sqr())
            }
        });
        Ok(p0 / (p0 + p1))
    }

    /// `Pr(0) - Pr(1)` on `qubit`.
    pub fn z_expectation(&self, qubit: usize) -> Result<f64> {
        let p0 = self.prob_zero(qubit)?;
        Ok(p0 - (1.0 - p0))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws one computational-basis outcome.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.gen::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if r < acc {
                return i;
            }
        }
        // rounding can leave r just above the final partial sum
        self.amps
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(0)
    }
}

/// Calls `f(i)` for every index with bit `m` clear, in increasing order.
#[inline(always)]
fn for_each_pair(len: usize, m: usize, mut f: impl FnMut(usize)) {
    let mut base = 0;
    while base < len {
        for i in base..base + m {
            f(i);
        }
        base += 2 * m;
    }
}

/// Returns `gate` applied to a copy of `state`.
pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

pub fn inner_product(a: &Statevector, b: &Statevector) -> Result<C64> {
    a.inner(b)
}

pub fn fidelity_exact(a: &Statevector, b: &Statevector) -> Result<f64> {
    a.fidelity(b)
}

pub fn ancilla_z_expectation(state: &Statevector, ancilla: usize) -> Result<f64> {
    state.z_expectation(ancilla)
}
