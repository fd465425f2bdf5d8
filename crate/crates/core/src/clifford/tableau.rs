use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::statevector::Gate;

/// Largest register the bit-packed tableau supports.
pub const MAX_CLIFFORD_QUBITS: usize = 64;

#[inline]
fn bit(n: usize, q: usize) -> u64 {
    1u64 << (n - 1 - q)
}

#[inline]
fn parity(x: u64) -> bool {
    x.count_ones() & 1 == 1
}

/// Hermitian Pauli string `(-1)^sign * prod_q P_q`. On qubit `q`,
/// `(x, z) = (1, 0)` is X, `(0, 1)` is Z and `(1, 1)` is Y. Bit masks follow the
/// statevector ordering (qubit 0 is the most significant bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliRow {
    pub x: u64,
    pub z: u64,
    pub sign: bool,
}

impl PauliRow {
    fn anticommutes(&self, other: &PauliRow) -> bool {
        parity((self.x & other.z) ^ (self.z & other.x))
    }
}

/// Tableau of an `n`-qubit Clifford `C`: row `i` is `C X_i C^dagger`, row `n + i`
/// is `C Z_i C^dagger`.
///
/// The tableau fixes `C` only up to a global phase. The unitary this crate
/// associates with it is the exact product of [`CliffordTableau::circuit`],
/// which is synthesized once and cached.
#[derive(Clone)]
pub struct CliffordTableau {
    n: usize,
    rows: Vec<PauliRow>,
    circuit: OnceLock<Vec<Gate>>,
}

impl PartialEq for CliffordTableau {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rows == other.rows
    }
}

impl Eq for CliffordTableau {}

impl Hash for CliffordTableau {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.rows.hash(state);
    }
}

impl fmt::Debug for CliffordTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CliffordTableau({} qubits)", self.n)?;
        for (i, r) in self.rows.iter().enumerate() {
            let label = if i < self.n { "X" } else { "Z" };
            writeln!(f, "  {label}{} -> {}", i % self.n, self.pauli_string(r))?;
        }
        Ok(())
    }
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Result<Self> {
        check_size(n)?;
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|q| PauliRow { x: bit(n, q), z: 0, sign: false }));
        rows.extend((0..n).map(|q| PauliRow { x: 0, z: bit(n, q), sign: false }));
        Ok(Self { n, rows, circuit: OnceLock::new() })
    }

    /// Builds a tableau from explicit rows and checks the symplectic conditions.
    pub fn from_rows(n: usize, rows: Vec<PauliRow>) -> Result<Self> {
        check_size(n)?;
        if rows.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: rows.len() });
        }
        let t = Self { n, rows, circuit: OnceLock::new() };
        t.validate()?;
        Ok(t)
    }

    /// Tableau of the Clifford circuit `gates`; the circuit itself is kept as the
    /// cached realization, so the associated unitary is exactly its product.
    pub fn from_circuit(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut t = Self::identity(n)?;
        for g in &gates {
            t.apply(g)?;
        }
        t.circuit = OnceLock::from(gates);
        Ok(t)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliRow] {
        &self.rows
    }

    /// `C X_q C^dagger`.
    pub fn destabilizer(&self, q: usize) -> PauliRow {
        self.rows[q]
    }

    /// `C Z_q C^dagger`.
    pub fn stabilizer(&self, q: usize) -> PauliRow {
        self.rows[self.n + q]
    }

    /// Checks the binary symplectic form: `X_i`, `Z_i` images anticommute and
    /// every other pair of rows commutes. This also implies row independence.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        for (i, a) in self.rows.iter().enumerate() {
            if (a.x | a.z) & !full != 0 {
                return Err(Error::InvalidTableau(format!("row {i} has bits outside the register")));
            }
            for (j, b) in self.rows.iter().enumerate().skip(i + 1) {
                let expect = j == i + n;
                if a.anticommutes(b) != expect {
                    return Err(Error::InvalidTableau(format!(
                        "rows {i} and {j} violate the symplectic condition"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Conjugates every row by `gate`, i.e. replaces `C` with `gate * C`.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        if !gate.is_clifford() {
            return Err(Error::InvalidArgument(format!("{gate} is not a Clifford gate")));
        }
        self.apply_unchecked(gate);
        self.circuit = OnceLock::new();
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        conjugate_rows(self.n, &mut self.rows, gate);
    }

    /// Gate sequence over `{H, S, CNOT, X, Z}` realizing this Clifford.
    pub fn circuit(&self) -> &[Gate] {
        self.circuit.get_or_init(|| synthesize(self))
    }

    /// Gates of `C^dagger`, in application order.
    pub fn inverse_circuit(&self) -> Vec<Gate> {
        let mut out = Vec::with_capacity(self.circuit().len() + 8);
        for g in self.circuit().iter().rev() {
            g.push_inverse(&mut out);
        }
        out
    }

    fn pauli_string(&self, r: &PauliRow) -> String {
        let mut s = String::from(if r.sign { "-" } else { "+" });
        for q in 0..self.n {
            let m = bit(self.n, q);
            s.push(match (r.x & m != 0, r.z & m != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            });
        }
        s
    }
}

fn conjugate_rows(n: usize, rows: &mut [PauliRow], gate: &Gate) {
    match *gate {
        Gate::H(q) => {
            let m = bit(n, q);
            for r in rows.iter_mut() {
                let (x, z) = (r.x & m, r.z & m);
                r.sign ^= x != 0 && z != 0;
                r.x = (r.x & !m) | z;
                r.z = (r.z & !m) | x;
            }
        }
        Gate::S(q) => {
            let m = bit(n, q);
            for r in rows.iter_mut() {
                r.sign ^= r.x & r.z & m != 0;
                r.z ^= r.x & m;
            }
        }
        Gate::X(q) => {
            let m = bit(n, q);
            for r in rows.iter_mut() {
                r.sign ^= r.z & m != 0;
            }
        }
        Gate::Z(q) => {
            let m = bit(n, q);
            for r in rows.iter_mut() {
                r.sign ^= r.x & m != 0;
            }
        }
        Gate::Cnot(c, t) => {
            let (cm, tm) = (bit(n, c), bit(n, t));
            for r in rows.iter_mut() {
                let xc = r.x & cm != 0;
                let zc = r.z & cm != 0;
                let xt = r.x & tm != 0;
                let zt = r.z & tm != 0;
                r.sign ^= xc && zt && (xt == zc);
                if xc {
                    r.x ^= tm;
                }
                if zt {
                    r.z ^= cm;
                }
            }
        }
        _ => unreachable!("rotation gates are rejected before reaching the tableau"),
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("Clifford register needs at least one qubit".into()));
    }
    if n > MAX_CLIFFORD_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_CLIFFORD_QUBITS });
    }
    Ok(())
}

/// Reduces a copy of the tableau to the identity by appending gates, then
/// returns the inverse of the reduction.
fn synthesize(t: &CliffordTableau) -> Vec<Gate> {
    let n = t.n;
    let mut work = CliffordTableau { n, rows: t.rows.clone(), circuit: OnceLock::new() };
    let mut applied = Vec::new();
    // while reducing qubit i, rows already reduced to X_k, Z_k (k < i) have no
    // support on the qubits being touched, so only the rest are updated
    let mut push = |w: &mut CliffordTableau, i: usize, g: Gate| {
        let (destab, stab) = w.rows.split_at_mut(n);
        conjugate_rows(n, &mut destab[i..], &g);
        conjugate_rows(n, &mut stab[i..], &g);
        applied.push(g);
    };
    let has = |v: u64, q: usize| v & bit(n, q) != 0;

    for i in 0..n {
        // destabilizer row i -> X_i; it has no support on qubits < i
        for q in i..n {
            let r = work.rows[i];
            match (has(r.x, q), has(r.z, q)) {
                (false, true) => push(&mut work, i, Gate::H(q)),
                (true, true) => push(&mut work, i, Gate::S(q)),
                _ => {}
            }
        }
        if !has(work.rows[i].x, i) {
            let q = (i + 1..n)
                .find(|&q| has(work.rows[i].x, q))
                .expect("destabilizer row is a non-identity Pauli");
            push(&mut work, i, Gate::Cnot(q, i));
        }
        for q in i + 1..n {
            if has(work.rows[i].x, q) {
                push(&mut work, i, Gate::Cnot(i, q));
            }
        }

        // stabilizer row n+i -> Z_i without disturbing X_i
        if has(work.rows[n + i].x, i) {
            push(&mut work, i, Gate::H(i));
            push(&mut work, i, Gate::S(i));
            push(&mut work, i, Gate::H(i));
        }
        for q in i + 1..n {
            let r = work.rows[n + i];
            match (has(r.x, q), has(r.z, q)) {
                (true, false) => push(&mut work, i, Gate::H(q)),
                (true, true) => {
                    push(&mut work, i, Gate::S(q));
                    push(&mut work, i, Gate::H(q));
                }
                _ => {}
            }
        }
        for q in i + 1..n {
            if has(work.rows[n + i].z, q) {
                push(&mut work, i, Gate::Cnot(q, i));
            }
        }
    }
    for i in 0..n {
        if work.rows[i].sign {
            push(&mut work, i, Gate::Z(i));
        }
        if work.rows[n + i].sign {
            push(&mut work, i, Gate::X(i));
        }
    }
    debug_assert!(work.rows == CliffordTableau::identity(n).unwrap().rows);

    let mut circuit = Vec::with_capacity(applied.len() + n);
    for g in applied.iter().rev() {
        g.push_inverse(&mut circuit);
    }
    circuit
}

/// Square GF(2) matrix with row-bitmask storage; column `j` is bit `j`.
#[derive(Clone, Debug, PartialEq)]
struct BitMatrix {
    rows: Vec<u128>,
}

impl BitMatrix {
    fn zeros(n: usize) -> Self {
        Self { rows: vec![0; n] }
    }

    fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|i| 1u128 << i).collect() }
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    fn set(&mut self, i: usize, j: usize, v: bool) {
        if v {
            self.rows[i] |= 1 << j;
        } else {
            self.rows[i] &= !(1 << j);
        }
    }

    fn mul(&self, other: &BitMatrix) -> BitMatrix {
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                let mut acc = 0u128;
                let mut bits = r;
                while bits != 0 {
                    let k = bits.trailing_zeros() as usize;
                    acc ^= other.rows[k];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
        BitMatrix { rows }
    }

    fn transpose(&self) -> BitMatrix {
        let n = self.rows.len();
        let mut t = BitMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Inverse of a unit lower-triangular matrix by forward substitution.
    fn inverse_unit_lower(&self) -> BitMatrix {
        let n = self.rows.len();
        let mut inv = BitMatrix::identity(n);
        for i in 0..n {
            let mut row = 1u128 << i;
            for k in 0..i {
                if self.get(i, k) {
                    row ^= inv.rows[k];
                }
            }
            inv.rows[i] = row;
        }
        inv
    }
}

/// Sample from the quantum Mallows distribution over (Hadamard pattern, permutation).
fn sample_qmallows<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<bool>, Vec<usize>) {
    let mut had = vec![false; n];
    let mut perm = vec![0; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let m = n - i;
        let eps = 4f64.powi(-(m as i32));
        let r: f64 = rng.gen();
        let index = -((r + (1.0 - r) * eps).log2().ceil()) as usize;
        had[i] = index < m;
        let k = if index < m { index } else { 2 * m - index - 1 };
        perm[i] = remaining.remove(k);
    }
    (had, perm)
}

/// Random symmetric matrix (with random diagonal) or random unit lower-triangular.
fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitMatrix {
    let mut m = BitMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, rng.gen());
    }
    for i in 0..n {
        for j in 0..i {
            let b = rng.gen();
            m.set(i, j, b);
            m.set(j, i, b);
        }
    }
    m
}

fn random_unit_lower<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitMatrix {
    let mut m = BitMatrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            m.set(i, j, rng.gen());
        }
    }
    m
}

/// `[[delta, 0], [gamma * delta, delta^{-T}]]` as a `2n x 2n` matrix.
fn borel_block(delta: &BitMatrix, gamma: &BitMatrix) -> BitMatrix {
    let n = delta.rows.len();
    let prod = gamma.mul(delta);
    let inv_t = delta.inverse_unit_lower().transpose();
    let mut rows = Vec::with_capacity(2 * n);
    rows.extend(delta.rows.iter().copied());
    rows.extend((0..n).map(|i| prod.rows[i] | (inv_t.rows[i] << n)));
    BitMatrix { rows }
}

/// Uniformly random element of the `n`-qubit Clifford group (modulo global phase).
///
/// Uses the Bruhat-style decomposition `B_1 * (hadamards, permutation) * B_2`
/// with the middle layer drawn from the quantum Mallows distribution and both
/// Borel factors uniform, followed by uniformly random row signs.
pub fn sample_random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CliffordTableau> {
    check_size(n)?;
    let (had, perm) = sample_qmallows(n, rng);

    let gamma1 = random_symmetric(n, rng);
    let gamma2 = random_symmetric(n, rng);
    let delta1 = random_unit_lower(n, rng);
    let delta2 = random_unit_lower(n, rng);

    let table1 = borel_block(&delta1, &gamma1);
    let table2 = borel_block(&delta2, &gamma2);

    let mut table = BitMatrix::zeros(2 * n);
    for i in 0..n {
        table.rows[i] = table2.rows[perm[i]];
        table.rows[n + i] = table2.rows[n + perm[i]];
    }
    for i in 0..n {
        if had[i] {
            table.rows.swap(i, n + i);
        }
    }
    let symp = table1.mul(&table);

    let mut rows = Vec::with_capacity(2 * n);
    for r in &symp.rows {
        let mut x = 0u64;
        let mut z = 0u64;
        for q in 0..n {
            if r >> q & 1 == 1 {
                x |= bit(n, q);
            }
            if r >> (n + q) & 1 == 1 {
                z |= bit(n, q);
            }
        }
        rows.push(PauliRow { x, z, sign: rng.gen() });
    }
    let t = CliffordTableau { n, rows, circuit: OnceLock::new() };
    debug_assert!(t.validate().is_ok());
    Ok(t)
}

/// Every element of the `n`-qubit Clifford group (modulo phase), found by
/// breadth-first closure under `{H, S, CNOT}`. Limited to `n <= 2`
/// (24 and 11,520 elements).
pub fn enumerate_clifford_group(n: usize) -> Result<Vec<CliffordTableau>> {
    if n == 0 || n > 2 {
        return Err(Error::InvalidArgument(format!(
            "group enumeration supports 1 or 2 qubits, got {n}"
        )));
    }
    let mut generators = Vec::new();
    for q in 0..n {
        generators.push(Gate::H(q));
        generators.push(Gate::S(q));
        for t in 0..n {
            if t != q {
                generators.push(Gate::Cnot(q, t));
            }
        }
    }
    let start = CliffordTableau::identity(n)?;
    let mut seen: HashSet<Vec<PauliRow>> = HashSet::new();
    seen.insert(start.rows.clone());
    let mut queue = VecDeque::from([(start, Vec::<Gate>::new())]);
    let mut out = Vec::new();
    while let Some((t, path)) = queue.pop_front() {
        for g in &generators {
            let mut next = t.clone();
            next.apply_unchecked(g);
            if seen.insert(next.rows.clone()) {
                let mut p = path.clone();
                p.push(*g);
                queue.push_back((next, p));
            }
        }
        out.push(CliffordTableau { n, rows: t.rows, circuit: OnceLock::from(path) });
    }
    Ok(out)
}
