//! Hardware-efficient layered ansatz: one single-qubit rotation per qubit per
//! layer, followed by a fixed CNOT entangling pattern between layers.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Gate, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn rotation(self, qubit: usize, angle: f64) -> Gate {
        match self {
            Axis::X => Gate::Rx(qubit, angle),
            Axis::Y => Gate::Ry(qubit, angle),
            Axis::Z => Gate::Rz(qubit, angle),
        }
    }

    fn as_char(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'X' => Ok(Axis::X),
            'Y' => Ok(Axis::Y),
            'Z' => Ok(Axis::Z),
            other => Err(Error::Parse(format!("invalid rotation axis `{other}`"))),
        }
    }
}

/// CNOT pattern applied after every layer except the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Entangler {
    /// `CNOT(q, q+1)` for `q = 0..n-2`.
    #[default]
    Linear,
    /// The linear chain plus `CNOT(n-1, 0)` when `n > 2`.
    Circular,
    None,
}

impl Entangler {
    pub fn name(self) -> &'static str {
        match self {
            Entangler::Linear => "linear",
            Entangler::Circular => "circular",
            Entangler::None => "none",
        }
    }

    fn push_gates(self, n: usize, out: &mut Vec<Gate>) {
        if self == Entangler::None {
            return;
        }
        for q in 0..n.saturating_sub(1) {
            out.push(Gate::Cnot(q, q + 1));
        }
        if self == Entangler::Circular && n > 2 {
            out.push(Gate::Cnot(n - 1, 0));
        }
    }
}

impl fmt::Display for Entangler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Entangler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Entangler::Linear),
            "circular" => Ok(Entangler::Circular),
            "none" => Ok(Entangler::None),
            other => Err(Error::Parse(format!("unknown entangler `{other}`"))),
        }
    }
}

/// Layout of the parameterized circuit. Parameter `r = layer * n_qubits + qubit`
/// drives the rotation on `qubit` in `layer`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AnsatzRecord", into = "AnsatzRecord")]
pub struct AnsatzSpec {
    n_qubits: usize,
    axes: Vec<Vec<Axis>>,
    entangler: Entangler,
}

/// Serialized form: one axis string per layer, e.g. `"XZYYZ"`.
#[derive(Serialize, Deserialize)]
struct AnsatzRecord {
    n_qubits: usize,
    layers: usize,
    axes: Vec<String>,
    entangler: String,
}

impl From<AnsatzSpec> for AnsatzRecord {
    fn from(spec: AnsatzSpec) -> Self {
        AnsatzRecord {
            n_qubits: spec.n_qubits,
            layers: spec.layers(),
            axes: spec
                .axes
                .iter()
                .map(|layer| layer.iter().map(|a| a.as_char()).collect())
                .collect(),
            entangler: spec.entangler.name().to_string(),
        }
    }
}

impl TryFrom<AnsatzRecord> for AnsatzSpec {
    type Error = Error;

    fn try_from(rec: AnsatzRecord) -> Result<Self> {
        let axes = rec
            .axes
            .iter()
            .map(|layer| layer.chars().map(Axis::from_char).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if axes.len() != rec.layers {
            return Err(Error::Parse(format!(
                "ansatz record declares {} layers but lists {}",
                rec.layers,
                axes.len()
            )));
        }
        AnsatzSpec::new(rec.n_qubits, axes, rec.entangler.parse()?)
    }
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, axes: Vec<Vec<Axis>>, entangler: Entangler) -> Result<Self> {
        if n_qubits == 0 || axes.is_empty() {
            return Err(Error::InvalidArgument(
                "ansatz needs at least one qubit and one layer".into(),
            ));
        }
        if let Some(bad) = axes.iter().find(|l| l.len() != n_qubits) {
            return Err(Error::DimensionMismatch { expected: n_qubits, found: bad.len() });
        }
        Ok(Self { n_qubits, axes, entangler })
    }

    /// Every rotation about the same axis.
    pub fn uniform(n_qubits: usize, layers: usize, axis: Axis, entangler: Entangler) -> Result<Self> {
        Self::new(n_qubits, vec![vec![axis; n_qubits]; layers], entangler)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<Axis>] {
        &self.axes
    }

    pub fn entangler(&self) -> Entangler {
        self.entangler
    }

    /// `R = layers * n_qubits`.
    pub fn num_params(&self) -> usize {
        self.layers() * self.n_qubits
    }

    pub fn with_entangler(mut self, entangler: Entangler) -> Self {
        self.entangler = entangler;
        self
    }

    /// The circuit `U(theta)` as a flat gate list.
    pub fn gates(&self, params: &ParamVector) -> Result<Vec<Gate>> {
        self.check_params(params)?;
        let mut gates = Vec::with_capacity(self.num_params() + self.layers() * self.n_qubits);
        let last = self.layers() - 1;
        for (l, layer) in self.axes.iter().enumerate() {
            for (q, axis) in layer.iter().enumerate() {
                gates.push(axis.rotation(q, params.0[l * self.n_qubits + q]));
            }
            if l != last {
                self.entangler.push_gates(self.n_qubits, &mut gates);
            }
        }
        Ok(gates)
    }

    /// `U(theta)|0...0>`.
    pub fn build_state(&self, params: &ParamVector) -> Result<Statevector> {
        let mut state = Statevector::zero(self.n_qubits)?;
        for g in self.gates(params)? {
            state.apply_unchecked(&g);
        }
        Ok(state)
    }

    fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: params.len(),
            });
        }
        Ok(())
    }
}

/// Rotation angles in radians, one per ansatz parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Copy with parameter `r` shifted by `delta`.
    pub fn shifted(&self, r: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.0[r] += delta;
        out
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

/// Random axes (uniform over X, Y, Z) and angles (uniform over `[0, 2pi)`),
/// with the default linear entangler. Deterministic in `seed`.
pub fn random_init(n_qubits: usize, layers: usize, seed: u64) -> Result<(AnsatzSpec, ParamVector)> {
    if n_qubits == 0 || layers == 0 {
        return Err(Error::InvalidArgument(format!(
            "ansatz sizes must be positive (n_qubits={n_qubits}, layers={layers})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axes = Vec::with_capacity(layers);
    let mut angles = Vec::with_capacity(layers * n_qubits);
    for _ in 0..layers {
        let mut layer = Vec::with_capacity(n_qubits);
        for _ in 0..n_qubits {
            layer.push(match rng.gen_range(0..3) {
                0 => Axis::X,
                1 => Axis::Y,
                _ => Axis::Z,
            });
            angles.push(rng.gen_range(0.0..TAU));
        }
        axes.push(layer);
    }
    let spec = AnsatzSpec::new(n_qubits, axes, Entangler::Linear)?;
    Ok((spec, ParamVector(angles)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::C64;
    use std::f64::consts::PI;

    #[test]
    fn five_qubit_twelve_layer_ansatz_has_sixty_parameters() {
        let (spec, params) = random_init(5, 12, 7).unwrap();
        assert_eq!(spec.num_params(), 60);
        assert_eq!(params.len(), 60);
        assert!(params.values().iter().all(|&a| (0.0..TAU).contains(&a)));
    }

    #[test]
    fn single_qubit_single_layer() {
        let (spec, params) = random_init(1, 1, 99).unwrap();
        assert_eq!(spec.axes().len(), 1);
        assert_eq!(spec.axes()[0].len(), 1);
        assert_eq!(params.len(), 1);
    }

    #[test]
    fn seeded_init_is_deterministic() {
        assert_eq!(random_init(4, 3, 11).unwrap(), random_init(4, 3, 11).unwrap());
        assert_ne!(random_init(4, 3, 11).unwrap(), random_init(4, 3, 12).unwrap());
    }

    #[test]
    fn init_rejects_empty_sizes() {
        assert!(random_init(0, 3, 1).is_err());
        assert!(random_init(3, 0, 1).is_err());
    }

    #[test]
    fn zero_angles_leave_vacuum() {
        let spec = AnsatzSpec::uniform(3, 4, Axis::Z, Entangler::Linear).unwrap();
        let state = spec.build_state(&ParamVector::zeros(12)).unwrap();
        let vacuum = Statevector::zero(3).unwrap();
        assert!((state.fidelity(&vacuum).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ry_pi_flips() {
        let spec = AnsatzSpec::uniform(1, 1, Axis::Y, Entangler::Linear).unwrap();
        let state = spec.build_state(&ParamVector(vec![PI])).unwrap();
        assert!((state.amplitudes()[1].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_length_is_checked() {
        let spec = AnsatzSpec::uniform(2, 2, Axis::X, Entangler::Linear).unwrap();
        assert!(matches!(
            spec.build_state(&ParamVector::zeros(3)),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn no_entangler_after_last_layer() {
        let spec = AnsatzSpec::uniform(3, 2, Axis::X, Entangler::Linear).unwrap();
        let gates = spec.gates(&ParamVector::zeros(6)).unwrap();
        assert_eq!(gates.len(), 6 + 2);
        assert!(matches!(gates.last(), Some(Gate::Rx(2, _))));
        let ring = spec.clone().with_entangler(Entangler::Circular);
        assert_eq!(ring.gates(&ParamVector::zeros(6)).unwrap().len(), 6 + 3);
    }

    #[test]
    fn matches_dense_matrix_product() {
        // oracle: multiply the full 8x8 gate matrices and apply to e_0
        let (spec, params) = random_init(3, 2, 2024).unwrap();
        let dim = 8;
        let mut u = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        for (i, row) in u.iter_mut().enumerate() {
            row[i] = C64::new(1.0, 0.0);
        }
        for g in spec.gates(&params).unwrap() {
            let gm = full_matrix(&g, 3);
            u = matmul(&gm, &u);
        }
        let state = spec.build_state(&params).unwrap();
        for k in 0..dim {
            assert!((state.amplitudes()[k] - u[k][0]).norm() < 1e-12);
        }
    }

    fn full_matrix(g: &Gate, n: usize) -> Vec<Vec<C64>> {
        let dim = 1 << n;
        let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
        for col in 0..dim {
            for row in 0..dim {
                m[row][col] = match *g {
                    Gate::Cnot(c, t) => {
                        let target = if bit(col, c) == 1 { col ^ (1 << (n - 1 - t)) } else { col };
                        C64::new(if row == target { 1.0 } else { 0.0 }, 0.0)
                    }
                    _ => {
                        let q = g.qubits().0;
                        let others_equal = (row ^ col) & !(1 << (n - 1 - q)) == 0;
                        if others_equal {
                            g.matrix().unwrap()[bit(row, q)][bit(col, q)]
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }
                };
            }
        }
        m
    }

    fn matmul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }

    #[test]
    fn spec_serializes_axes_as_strings() {
        let spec = AnsatzSpec::new(
            2,
            vec![vec![Axis::X, Axis::Z], vec![Axis::Y, Axis::Y]],
            Entangler::Circular,
        )
        .unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"XZ\""), "{json}");
        assert!(json.contains("circular"));
        let back: AnsatzSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let bad = json.replace("\"XZ\"", "\"XQ\"");
        assert!(serde_json::from_str::<AnsatzSpec>(&bad).is_err());
    }
}
