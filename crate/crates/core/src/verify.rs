//! Self-checks of the core invariants, run by `acae verify`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{random_init, ParamVector};
use crate::chc::{build_psi_init, classify_exact, kernel_sum_reference, ClassifierLayout, Normalization, TrainingSet};
use crate::clifford::{amplitude, enumerate_clifford_group, overlap_with_target, sample_random_clifford, BasisBitstring};
use crate::error::Result;
use crate::parallel::Executor;
use crate::shadow::{estimate_gradient, GradientOptions};
use crate::statevector::{Statevector, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest deviation seen, where the check compares numbers.
    pub max_deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl CheckResult {
    fn numeric(name: &str, dev: f64, tol: f64, detail: String) -> Self {
        Self { name: name.into(), passed: dev <= tol, max_deviation: Some(dev), tolerance: Some(tol), detail }
    }
}

pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Statevector {
    let amps = (0..1usize << n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    Statevector::normalized(amps).expect("nonzero random vector")
}

fn clifford_group_orders() -> Result<CheckResult> {
    let orders = [enumerate_clifford_group(1)?.len(), enumerate_clifford_group(2)?.len()];
    Ok(CheckResult {
        name: "clifford-group-order".into(),
        passed: orders == [24, 11520],
        max_deviation: None,
        tolerance: None,
        detail: format!("orders {orders:?}, expected [24, 11520]"),
    })
}

fn sampled_tableaux_are_symplectic(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut bad = 0;
    for n in 1..=12 {
        for _ in 0..20 {
            if sample_random_clifford(n, rng)?.validate().is_err() {
                bad += 1;
            }
        }
    }
    Ok(CheckResult {
        name: "clifford-samples-symplectic".into(),
        passed: bad == 0,
        max_deviation: None,
        tolerance: None,
        detail: format!("{bad} of 240 samples failed"),
    })
}

fn stabilizer_amplitudes(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for _ in 0..40 {
        let n = rng.gen_range(1..=4);
        let t = sample_random_clifford(n, rng)?;
        for k in 0..1u64 << n {
            let mut dense = Statevector::basis(n, k as usize)?;
            dense.apply_all(t.circuit())?;
            for b in 0..1u64 << n {
                let a = amplitude(&t, &BasisBitstring::new(n, b)?, &BasisBitstring::new(n, k)?)?;
                dev = dev.max((a - dense.amplitudes()[b as usize]).norm());
            }
        }
    }
    Ok(CheckResult::numeric("stabilizer-amplitudes", dev, 1e-10, "40 random Cliffords, n <= 4, all (b, k)".into()))
}

/// Expectation of the single-snapshot estimator over the whole group and all
/// outcomes, which must equal the exact fidelity.
pub fn exhaustive_shadow_expectation(state: &Statevector, target: &Statevector) -> Result<f64> {
    let n = state.n_qubits();
    let group = enumerate_clifford_group(n)?;
    let scale = ((1u64 << n) + 1) as f64;
    let mut total = 0.0;
    for c in &group {
        let mut rotated = state.clone();
        rotated.apply_all(c.circuit())?;
        for (b, p) in rotated.probabilities().into_iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let o = overlap_with_target(c, &BasisBitstring::new(n, b as u64)?, target.amplitudes(), 0.0)?;
            total += p * (scale * o.norm_sqr() - 1.0);
        }
    }
    Ok(total / group.len() as f64)
}

fn shadow_channel(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for _ in 0..5 {
        let (a, b) = (random_state(1, rng), random_state(1, rng));
        dev = dev.max((exhaustive_shadow_expectation(&a, &b)? - a.fidelity(&b)?).abs());
    }
    Ok(CheckResult::numeric("shadow-channel-exactness", dev, 1e-12, "5 random one-qubit pairs".into()))
}

fn gradient_vs_finite_difference(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    let h = 1e-5;
    for _ in 0..5 {
        let n = rng.gen_range(2..=3);
        let (spec, params) = random_init(n, 3, rng.gen())?;
        let target = random_state(n, rng);
        let grad = estimate_gradient(&spec, &params, target.amplitudes(), &GradientOptions::exact(), rng, &Executor::serial())?;
        let f = |p: &ParamVector| -> Result<f64> { spec.build_state(p)?.fidelity(&target) };
        for (r, g) in grad.iter().enumerate() {
            let fd = (f(&params.shifted(r, h))? - f(&params.shifted(r, -h))?) / (2.0 * h);
            dev = dev.max((g - fd).abs());
        }
    }
    Ok(CheckResult::numeric("parameter-shift-gradient", dev, 1e-6, "5 random ansatze against central differences".into()))
}

fn random_training_set(rng: &mut ChaCha8Rng, dim: usize, pairs: usize) -> Result<TrainingSet> {
    let mut v = || (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect::<Vec<_>>();
    let plus = (0..pairs).map(|_| v()).collect();
    let minus = (0..pairs).map(|_| v()).collect();
    let mut w: Vec<f64> = (0..pairs).map(|_| rng.gen::<f64>() + 0.1).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let last = 1.0 - w[..pairs - 1].iter().sum::<f64>();
    w[pairs - 1] = last;
    TrainingSet::new(plus, minus, w)
}

fn chc_identity(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for k in 0..20 {
        let dim = rng.gen_range(1..=8);
        let pairs = rng.gen_range(1..=8);
        let train = random_training_set(rng, dim, pairs)?;
        let test: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let phi = rng.gen_range(0.0..TAU);
        let norm = if k % 2 == 0 { Normalization::PerVector } else { Normalization::Global };
        let layout = ClassifierLayout::for_training(&train, phi);
        let psi = build_psi_init(&train, &test, &layout, norm)?;
        let quantum = classify_exact(&psi, &layout)?.sigma_z;
        let shifted = classify_exact(&psi.clone().with_global_phase(rng.gen_range(0.0..TAU)), &layout)?.sigma_z;
        let classical = kernel_sum_reference(&train, &test, phi, norm)?;
        dev = dev.max((quantum - classical).abs()).max((shifted - quantum).abs());
    }
    Ok(CheckResult::numeric("chc-kernel-identity", dev, 1e-12, "20 random instances, both normalizations".into()))
}

/// Runs every check with a fixed seed.
pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        clifford_group_orders()?,
        sampled_tableaux_are_symplectic(&mut rng)?,
        stabilizer_amplitudes(&mut rng)?,
        shadow_channel(&mut rng)?,
        gradient_vs_finite_difference(&mut rng)?,
        chc_identity(&mut rng)?,
    ])
}
