//! Compact Hadamard classifier.
//!
//! Pair `j` of training vectors is packed into one state `x+_j + i x-_j`; the
//! ancilla-0 half of the initial state holds those pairs, the ancilla-1 half
//! holds the test vector with a relative phase `e^{-i phi}`. A Hadamard on the
//! ancilla makes `<Z>` a weighted kernel sum whose sign is the predicted label.
//!
//! Basis layout, most significant first: ancilla, index register `j`, data
//! register.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::ansatz::{random_init, AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::statevector::{Gate, Statevector, C64};
use crate::trainer::{train, TrainingConfig, TrainingTrace};

const WEIGHT_TOL: f64 = 1e-12;
pub const TIE_TOL: f64 = 1e-12;

/// Balanced training data: `plus[j]` and `minus[j]` form pair `j` with weight
/// `weights[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TrainingSet {
    /// Uniform weights `b_j = 2/M`.
    pub fn uniform(plus: Vec<Vec<f64>>, minus: Vec<Vec<f64>>) -> Result<Self> {
        let k = plus.len().max(1);
        let weights = vec![1.0 / k as f64; plus.len()];
        Self::new(plus, minus, weights)
    }

    pub fn new(plus: Vec<Vec<f64>>, minus: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if plus.is_empty() {
            return Err(Error::InvalidArgument("training set is empty".into()));
        }
        if plus.len() != minus.len() {
            return Err(Error::InvalidArgument(format!(
                "compact encoding needs as many +1 as -1 samples ({} vs {})",
                plus.len(),
                minus.len()
            )));
        }
        if weights.len() != plus.len() {
            return Err(Error::DimensionMismatch { expected: plus.len(), found: weights.len() });
        }
        let dim = plus[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument("feature vectors are empty".into()));
        }
        for v in plus.iter().chain(&minus) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            if norm(v) == 0.0 {
                return Err(Error::ZeroNorm);
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { plus, minus, weights })
    }

    pub fn plus(&self) -> &[Vec<f64>] {
        &self.plus
    }

    pub fn minus(&self) -> &[Vec<f64>] {
        &self.minus
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pairs(&self) -> usize {
        self.plus.len()
    }

    /// `M`, the total number of training vectors.
    pub fn len(&self) -> usize {
        2 * self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.plus[0].len()
    }

    /// Swaps the roles of the two classes.
    pub fn swapped(&self) -> Self {
        Self { plus: self.minus.clone(), minus: self.plus.clone(), weights: self.weights.clone() }
    }
}

/// How raw vectors are scaled before encoding. Test vectors are always unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Every training vector scaled to norm `1/sqrt 2`.
    #[default]
    PerVector,
    /// All training vectors divided by one constant `C` with
    /// `sum_j b_j (|x+_j|^2 + |x-_j|^2) = C^2`.
    Global,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::PerVector => "per-vector",
            Normalization::Global => "global",
        })
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-vector" => Ok(Normalization::PerVector),
            "global" => Ok(Normalization::Global),
            _ => Err(Error::Parse(format!("unknown normalization `{s}` (per-vector|global)"))),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// Training vectors after normalization, in the same pair order.
fn normalized_pairs(train: &TrainingSet, norm_kind: Normalization) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    match norm_kind {
        Normalization::PerVector => {
            let f = |v: &Vec<f64>| scaled(v, FRAC_1_SQRT_2 / norm(v));
            (train.plus.iter().map(f).collect(), train.minus.iter().map(f).collect())
        }
        Normalization::Global => {
            let c2: f64 = (0..train.pairs())
                .map(|j| train.weights[j] * (dot(&train.plus[j], &train.plus[j]) + dot(&train.minus[j], &train.minus[j])))
                .sum();
            let s = 1.0 / c2.sqrt();
            let f = |v: &Vec<f64>| scaled(v, s);
            (train.plus.iter().map(f).collect(), train.minus.iter().map(f).collect())
        }
    }
}

fn unit_test_vector(test: &[f64]) -> Result<Vec<f64>> {
    let n = norm(test);
    if n == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(scaled(test, 1.0 / n))
}

fn ceil_log2(x: usize) -> usize {
    x.next_power_of_two().trailing_zeros() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierLayout {
    /// Data-register qubits, `ceil(log2 N)`.
    pub n: usize,
    /// Index-register qubits, `ceil(log2 (M/2))`.
    pub m: usize,
    pub phi: f64,
}

impl ClassifierLayout {
    pub fn for_training(train: &TrainingSet, phi: f64) -> Self {
        Self { n: ceil_log2(train.dim()), m: ceil_log2(train.pairs()), phi }
    }

    pub fn total_qubits(&self) -> usize {
        self.n + self.m + 1
    }

    fn check(&self, train: &TrainingSet, test_len: usize) -> Result<()> {
        if train.dim() > 1 << self.n || train.pairs() > 1 << self.m {
            return Err(Error::InvalidArgument(format!(
                "layout n={}, m={} cannot hold N={} and M/2={}",
                self.n,
                self.m,
                train.dim(),
                train.pairs()
            )));
        }
        if test_len != train.dim() {
            return Err(Error::DimensionMismatch { expected: train.dim(), found: test_len });
        }
        Ok(())
    }
}

/// Relative ancilla phase `atan(M- / M+)`; `pi/4` for balanced classes.
pub fn phi_for_imbalance(m_plus: usize, m_minus: usize) -> Result<f64> {
    if m_plus == 0 || m_minus == 0 {
        return Err(Error::InvalidArgument("both classes need at least one sample".into()));
    }
    Ok((m_minus as f64).atan2(m_plus as f64))
}

/// `x+_l + i x-_l`, zero-padded to `2^ceil(log2 N)` entries.
///
/// With per-vector normalization the result is a unit vector for any nonzero
/// pair.
pub fn build_compact_state(x_plus: &[f64], x_minus: &[f64]) -> Result<Vec<C64>> {
    if x_plus.len() != x_minus.len() || x_plus.is_empty() {
        return Err(Error::DimensionMismatch { expected: x_plus.len(), found: x_minus.len() });
    }
    let (np, nm) = (norm(x_plus), norm(x_minus));
    if np == 0.0 || nm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut out = vec![C64::new(0.0, 0.0); x_plus.len().next_power_of_two()];
    for (l, (p, q)) in x_plus.iter().zip(x_minus).enumerate() {
        out[l] = C64::new(p * FRAC_1_SQRT_2 / np, q * FRAC_1_SQRT_2 / nm);
    }
    Ok(out)
}

/// The classifier's initial state on `n + m + 1` qubits.
pub fn build_psi_init(
    train: &TrainingSet,
    test: &[f64],
    layout: &ClassifierLayout,
    norm_kind: Normalization,
) -> Result<Statevector> {
    layout.check(train, test.len())?;
    let (plus, minus) = normalized_pairs(train, norm_kind);
    let test = unit_test_vector(test)?;
    let data_dim = 1usize << layout.n;
    let half = data_dim << layout.m;
    let phase = C64::from_polar(1.0, -layout.phi);
    let mut amps = vec![C64::new(0.0, 0.0); 2 * half];
    for j in 0..train.pairs() {
        let w = (train.weights[j] / 2.0).sqrt();
        let base = j * data_dim;
        for l in 0..train.dim() {
            amps[base + l] = w * C64::new(plus[j][l], minus[j][l]);
            amps[half + base + l] = w * phase * test[l];
        }
    }
    Statevector::from_amplitudes(amps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierMode {
    Exact,
    Trained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub sigma_z: f64,
    pub label: i8,
    /// `|sigma_z|` within `TIE_TOL` of zero; the label then defaults to +1.
    pub tie: bool,
    pub mode: ClassifierMode,
    pub shots: Option<u64>,
}

impl ClassificationResult {
    fn new(sigma_z: f64, mode: ClassifierMode, shots: Option<u64>) -> Self {
        let tie = sigma_z.abs() <= TIE_TOL;
        let label = if tie || sigma_z > 0.0 { 1 } else { -1 };
        Self { sigma_z, label, tie, mode, shots }
    }
}

fn ancilla_sigma_z(state: &Statevector, layout: &ClassifierLayout) -> Result<f64> {
    if state.n_qubits() != layout.total_qubits() {
        return Err(Error::DimensionMismatch { expected: layout.total_qubits(), found: state.n_qubits() });
    }
    let mut s = state.clone();
    s.apply(&Gate::H(0))?;
    s.z_expectation(0)
}

/// Hadamard on the ancilla, then the exact ancilla `<Z>`.
pub fn classify_exact(psi_init: &Statevector, layout: &ClassifierLayout) -> Result<ClassificationResult> {
    Ok(ClassificationResult::new(ancilla_sigma_z(psi_init, layout)?, ClassifierMode::Exact, None))
}

/// Same readout on the trained state `U(theta)|0>`. With `shots`, `<Z>` is
/// estimated from that many simulated ancilla measurements.
pub fn classify_trained<R: Rng + ?Sized>(
    spec: &AnsatzSpec,
    params: &ParamVector,
    layout: &ClassifierLayout,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<ClassificationResult> {
    let exact = ancilla_sigma_z(&spec.build_state(params)?, layout)?;
    let sigma_z = match shots {
        None => exact,
        Some(0) => return Err(Error::InvalidArgument("shots must be at least 1".into())),
        Some(s) => {
            let p0 = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
            let zeros = Binomial::new(s, p0).map_err(|e| Error::Numeric(e.to_string()))?.sample(rng);
            2.0 * zeros as f64 / s as f64 - 1.0
        }
    };
    Ok(ClassificationResult::new(sigma_z, ClassifierMode::Trained, shots))
}

/// Classical evaluation of the classifier output,
/// `sum_j b_j (cos phi <x~|x+_j> - sin phi <x~|x-_j>)`, on normalized data.
pub fn kernel_sum_reference(train: &TrainingSet, test: &[f64], phi: f64, norm_kind: Normalization) -> Result<f64> {
    if test.len() != train.dim() {
        return Err(Error::DimensionMismatch { expected: train.dim(), found: test.len() });
    }
    let (plus, minus) = normalized_pairs(train, norm_kind);
    let test = unit_test_vector(test)?;
    let (c, s) = (phi.cos(), phi.sin());
    Ok((0..train.pairs())
        .map(|j| train.weights[j] * (c * dot(&test, &plus[j]) - s * dot(&test, &minus[j])))
        .sum())
}

/// A labelled vector to classify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSample {
    pub id: u64,
    pub class_label: String,
    pub features: Vec<f64>,
    /// Expected label, +1 for the first class of the pair.
    pub label: i8,
}

/// `auto` picks `atan(M-/M+)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhiChoice {
    #[default]
    Auto,
    Value(f64),
}

impl PhiChoice {
    pub fn resolve(self, train: &TrainingSet) -> Result<f64> {
        match self {
            PhiChoice::Auto => phi_for_imbalance(train.pairs(), train.pairs()),
            PhiChoice::Value(v) if v.is_finite() => Ok(v),
            PhiChoice::Value(v) => Err(Error::InvalidArgument(format!("phi {v} is not finite"))),
        }
    }
}

impl FromStr for PhiChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(PhiChoice::Auto);
        }
        s.parse::<f64>()
            .map(PhiChoice::Value)
            .map_err(|_| Error::Parse(format!("phi must be `auto` or a number, got `{s}`")))
    }
}

/// One row of a result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub test_id: u64,
    pub class: String,
    pub sigma_z: f64,
    pub label: i8,
    pub correct: bool,
}

impl ClassificationRow {
    pub fn new(sample: &TestSample, result: &ClassificationResult) -> Self {
        Self {
            test_id: sample.id,
            class: sample.class_label.clone(),
            sigma_z: result.sigma_z,
            label: result.label,
            correct: result.label == sample.label,
        }
    }
}

pub fn write_results_csv<W: Write>(w: W, rows: &[ClassificationRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Training data, test samples and encoding choices for one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChcProblem {
    pub train: TrainingSet,
    pub tests: Vec<TestSample>,
    pub normalization: Normalization,
    pub phi: f64,
}

impl ChcProblem {
    pub fn new(train: TrainingSet, tests: Vec<TestSample>, normalization: Normalization, phi: PhiChoice) -> Result<Self> {
        let phi = phi.resolve(&train)?;
        Ok(Self { train, tests, normalization, phi })
    }

    pub fn layout(&self) -> ClassifierLayout {
        ClassifierLayout::for_training(&self.train, self.phi)
    }

    pub fn psi_init(&self, test: &TestSample) -> Result<Statevector> {
        build_psi_init(&self.train, &test.features, &self.layout(), self.normalization)
    }

    pub fn kernel(&self, test: &TestSample) -> Result<f64> {
        kernel_sum_reference(&self.train, &test.features, self.phi, self.normalization)
    }

    pub fn classify_exact(&self) -> Result<Vec<ClassificationRow>> {
        self.tests
            .iter()
            .map(|t| Ok(ClassificationRow::new(t, &classify_exact(&self.psi_init(t)?, &self.layout())?)))
            .collect()
    }

    /// Trains a fresh random ansatz on the test sample's initial state and
    /// reads the classifier out of the trained circuit.
    pub fn classify_with_training(
        &self,
        test: &TestSample,
        layers: usize,
        ansatz_seed: u64,
        config: &TrainingConfig,
    ) -> Result<(ClassificationResult, TrainingTrace)> {
        let layout = self.layout();
        let target = self.psi_init(test)?.into_amplitudes();
        let (spec, init) = random_init(layout.total_qubits(), layers, ansatz_seed)?;
        let (params, trace) = train(&spec, &init, &target, config)?;
        let sigma_z = ancilla_sigma_z(&spec.build_state(&params)?, &layout)?;
        Ok((ClassificationResult::new(sigma_z, ClassifierMode::Trained, None), trace))
    }
}
