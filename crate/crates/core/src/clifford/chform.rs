//! Phase-exact stabilizer states in CH-form,
//! `|phi> = omega * U_C * U_H * |s>`, where `U_C` is generated by S, CZ and CNOT
//! (so `U_C|0> = |0>`), `U_H` is a layer of Hadamards and `s` a basis state.
//!
//! `U_C` is stored through its inverse action on Paulis:
//! `U_C^-1 Z_p U_C = Z^{G_p}` and `U_C^-1 X_p U_C = i^{gamma_p} X^{F_p} Z^{M_p}`.
//! Because every state reachable from a basis state by Clifford gates has unit
//! norm, `omega` is always an eighth root of unity and is tracked as an integer,
//! which keeps amplitudes free of accumulated rounding.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::statevector::{Gate, C64};

#[inline]
fn parity(x: u64) -> u8 {
    (x.count_ones() & 1) as u8
}

/// `exp(i pi k / 4)` for `k = 0..8`.
fn eighth_root(k: u8) -> C64 {
    const H: f64 = FRAC_1_SQRT_2;
    match k & 7 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(H, H),
        2 => C64::new(0.0, 1.0),
        3 => C64::new(-H, H),
        4 => C64::new(-1.0, 0.0),
        5 => C64::new(-H, -H),
        6 => C64::new(0.0, -1.0),
        _ => C64::new(H, -H),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    f: Vec<u64>,
    g: Vec<u64>,
    m: Vec<u64>,
    gamma: Vec<u8>,
    v: u64,
    s: u64,
    /// Global phase `exp(i pi omega / 4)`.
    omega: u8,
}

impl StabilizerState {
    /// The basis state `|index>` (qubit 0 is the most significant bit).
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidArgument(format!("unsupported register size {n}")));
        }
        if n < 64 && index >> n != 0 {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let diag: Vec<u64> = (0..n).map(|p| 1u64 << (n - 1 - p)).collect();
        Ok(Self {
            n,
            f: diag.clone(),
            g: diag,
            m: vec![0; n],
            gamma: vec![0; n],
            v: 0,
            s: index,
            omega: 0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(&self, q: usize) -> u64 {
        1u64 << (self.n - 1 - q)
    }

    #[inline]
    fn full(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    #[inline]
    fn qubit_of(&self, mask: u64) -> usize {
        self.n - 1 - mask.trailing_zeros() as usize
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        match *gate {
            Gate::H(q) => self.apply_h(q),
            Gate::S(q) => self.left_s(q),
            Gate::Z(q) => {
                self.left_s(q);
                self.left_s(q);
            }
            Gate::X(q) => {
                self.apply_h(q);
                self.left_s(q);
                self.left_s(q);
                self.apply_h(q);
            }
            Gate::Cnot(c, t) => self.left_cx(c, t),
            _ => return Err(Error::InvalidArgument(format!("{gate} is not a Clifford gate"))),
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    // Left multiplication U_C <- g U_C for C-type gates.

    fn left_s(&mut self, q: usize) {
        self.m[q] ^= self.g[q];
        self.gamma[q] = (self.gamma[q] + 3) & 3;
    }

    fn left_cx(&mut self, c: usize, t: usize) {
        self.g[t] ^= self.g[c];
        let extra = 2 * parity(self.m[c] & self.f[t]);
        self.gamma[c] = (self.gamma[c] + self.gamma[t] + extra) & 3;
        self.f[c] ^= self.f[t];
        self.m[c] ^= self.m[t];
    }

    // Right multiplication U_C <- U_C g for C-type gates (column operations).

    fn right_s(&mut self, q: usize) {
        let b = self.bit(q);
        for p in 0..self.n {
            if self.f[p] & b != 0 {
                self.m[p] ^= b;
                self.gamma[p] = (self.gamma[p] + 3) & 3;
            }
        }
    }

    fn right_cz(&mut self, q: usize, r: usize) {
        let (bq, br) = (self.bit(q), self.bit(r));
        for p in 0..self.n {
            let fq = self.f[p] & bq != 0;
            let fr = self.f[p] & br != 0;
            if fr {
                self.m[p] ^= bq;
            }
            if fq {
                self.m[p] ^= br;
            }
            if fq && fr {
                self.gamma[p] = (self.gamma[p] + 2) & 3;
            }
        }
    }

    fn right_cx(&mut self, c: usize, t: usize) {
        let (bc, bt) = (self.bit(c), self.bit(t));
        for p in 0..self.n {
            if self.g[p] & bt != 0 {
                self.g[p] ^= bc;
            }
            if self.f[p] & bc != 0 {
                self.f[p] ^= bt;
            }
            if self.m[p] & bt != 0 {
                self.m[p] ^= bc;
            }
        }
    }

    fn apply_h(&mut self, q: usize) {
        let v = self.v;
        let nv = !v & self.full();
        let s = self.s;
        // H_q = (X_q + Z_q)/sqrt2, pushed through U_C and then U_H onto |s>
        let t = s ^ (self.g[q] & v);
        let beta = parity(self.g[q] & nv & s);
        let u = s ^ (self.f[q] & nv) ^ (self.m[q] & v);
        let alpha = parity(self.m[q] & nv & s) ^ parity(self.f[q] & v & u);
        let delta = (self.gamma[q] + 2 * alpha + 2 * beta) & 3;
        self.omega = (self.omega + 4 * beta) & 7;
        // now |phi> = omega/sqrt2 U_C U_H (|t> + i^delta |u>)
        if t == u {
            self.omega = match delta {
                1 => (self.omega + 1) & 7,
                3 => (self.omega + 7) & 7,
                _ => unreachable!("norm-preserving update cannot cancel or double"),
            };
            self.s = t;
            return;
        }
        self.collapse_pair(t, u, delta);
    }

    /// Rewrites `U_H (|t> + i^delta |u>) / sqrt2` with `t != u` as
    /// `phase * V * S^c * U_H' |s'>` and absorbs `V * S^c` into `U_C`.
    fn collapse_pair(&mut self, t: u64, u: u64, mut delta: u8) {
        let v = self.v;
        let nv = !v & self.full();
        let y = t ^ u;
        let pivot_mask = if y & nv != 0 { y & nv & (!(y & nv) + 1) } else { y & (!y + 1) };
        let pivot = self.qubit_of(pivot_mask);
        let others = y & !pivot_mask;

        let mut rest = others;
        while rest != 0 {
            let jm = rest & (!rest + 1);
            rest &= rest - 1;
            let j = self.qubit_of(jm);
            if v & pivot_mask == 0 {
                if v & jm == 0 {
                    self.right_cx(pivot, j);
                } else {
                    self.right_cz(pivot, j);
                }
            } else {
                self.right_cx(j, pivot);
            }
        }
        // basis relabelling by prod CNOT(pivot -> j) leaves t, u differing only at the pivot
        let (mut t2, mut u2) = (t, u);
        if t2 & pivot_mask != 0 {
            t2 ^= others;
        }
        if u2 & pivot_mask != 0 {
            u2 ^= others;
        }
        debug_assert_eq!(t2 ^ u2, pivot_mask);
        if t2 & pivot_mask != 0 {
            self.omega = (self.omega + 2 * delta) & 7;
            delta = (4 - delta) & 3;
            std::mem::swap(&mut t2, &mut u2);
        }
        // pivot qubit holds (|0> + i^delta |1>) / sqrt2 before its optional Hadamard
        self.s = t2;
        if v & pivot_mask == 0 {
            self.v |= pivot_mask;
            for _ in 0..delta {
                self.right_s(pivot);
            }
        } else {
            match delta {
                0 => self.v &= !pivot_mask,
                2 => {
                    self.v &= !pivot_mask;
                    self.s |= pivot_mask;
                }
                1 => {
                    // H S H = e^{i pi/4} S^dagger H S^dagger
                    for _ in 0..3 {
                        self.right_s(pivot);
                    }
                    self.omega = (self.omega + 1) & 7;
                }
                _ => {
                    self.right_s(pivot);
                    self.omega = (self.omega + 7) & 7;
                }
            }
        }
    }

    /// Returns `U_C^dagger |x> = i^mu |f>` as `(mu, f)`.
    #[inline]
    fn pull_back(&self, x: u64) -> (u8, u64) {
        let mut mu = 0u8;
        let mut fx = 0u64;
        let mut mz = 0u64;
        let mut rest = x;
        while rest != 0 {
            let p = self.qubit_of(rest & (!rest + 1));
            rest &= rest - 1;
            mu = mu.wrapping_add(self.gamma[p] + 2 * parity(mz & self.f[p]));
            fx ^= self.f[p];
            mz ^= self.m[p];
        }
        (mu & 3, fx)
    }

    #[inline]
    fn finish(&self, mu: u8, fx: u64) -> C64 {
        let nv = !self.v & self.full();
        if (fx ^ self.s) & nv != 0 {
            return C64::new(0.0, 0.0);
        }
        let sign = parity(fx & self.s & self.v);
        let phase = (self.omega + 2 * (4 - mu) + 4 * sign) & 7;
        let scale = FRAC_1_SQRT_2.powi(self.v.count_ones() as i32);
        eighth_root(phase) * scale
    }

    /// `<x|phi>` for a basis index `x`.
    pub fn amplitude(&self, x: u64) -> C64 {
        let (mu, fx) = self.pull_back(x);
        self.finish(mu, fx)
    }

    /// All `2^n` amplitudes, walking the basis in Gray-code order so each step
    /// multiplies in a single Pauli image.
    pub fn amplitudes(&self) -> Result<Vec<C64>> {
        if self.n > crate::statevector::MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { n: self.n, max: crate::statevector::MAX_DENSE_QUBITS });
        }
        let dim = 1usize << self.n;
        let mut out = vec![C64::new(0.0, 0.0); dim];
        let (mut mu, mut fx, mut mz) = (0u8, 0u64, 0u64);
        out[0] = self.finish(0, 0);
        for i in 1..dim {
            let flip = i.trailing_zeros() as usize;
            let p = self.n - 1 - flip;
            mu = mu.wrapping_add(self.gamma[p] + 2 * parity(mz & self.f[p]));
            fx ^= self.f[p];
            mz ^= self.m[p];
            let gray = i ^ (i >> 1);
            out[gray] = self.finish(mu & 3, fx);
        }
        Ok(out)
    }
}
