mod common;

use std::collections::HashMap;

use acae::ansatz::{random_init, ParamVector};
use acae::chc::{build_psi_init, classify_exact, ClassifierLayout, Normalization, TrainingSet};
use acae::clifford::{
    amplitude, enumerate_clifford_group, sample_random_clifford, BasisBitstring, CliffordTableau, PauliRow,
};
use acae::parallel::Executor;
use acae::shadow::{estimate_fidelity, estimate_gradient, shadow_budget, GradientOptions, ShadowBudget, Snapshot};
use acae::statevector::{Gate, Statevector, C64};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_circuit(n: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    (0..len)
        .map(|_| {
            let q = rng.gen_range(0..n);
            let a = rng.gen_range(-4.0..4.0);
            match rng.gen_range(0..8) {
                0 => Gate::Rx(q, a),
                1 => Gate::Ry(q, a),
                2 => Gate::Rz(q, a),
                3 => Gate::H(q),
                4 => Gate::S(q),
                5 => Gate::X(q),
                6 => Gate::Z(q),
                _ if n > 1 => Gate::Cnot(q, (q + rng.gen_range(1..n)) % n),
                _ => Gate::H(q),
            }
        })
        .collect()
}

#[test]
fn simulator_matches_kronecker_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let n = rng.gen_range(1..=4);
        let gates = random_circuit(n, 30, &mut rng);
        let mut s = Statevector::zero(n).unwrap();
        s.apply_all(&gates).unwrap();
        let oracle = circuit_state(n, &gates);
        for (a, b) in s.amplitudes().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn ansatz_state_matches_oracle() {
    for seed in 0..10 {
        let (spec, params) = random_init(3, 4, seed).unwrap();
        let oracle = circuit_state(3, &spec.gates(&params).unwrap());
        let s = spec.build_state(&params).unwrap();
        assert!(fidelity(s.amplitudes(), &oracle) > 1.0 - 1e-12);
        assert!((inner(s.amplitudes(), &oracle) - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

fn pauli_matrix(n: usize, row: &PauliRow) -> Matrix {
    let mut gates = Vec::new();
    for q in 0..n {
        let m = 1u64 << (n - 1 - q);
        match (row.x & m != 0, row.z & m != 0) {
            (true, false) => gates.push(Gate::X(q)),
            (false, true) => gates.push(Gate::Z(q)),
            // Y = i X Z; the factor i is restored below
            (true, true) => gates.extend([Gate::Z(q), Gate::X(q)]),
            _ => {}
        }
    }
    let ys = (row.x & row.z).count_ones();
    let phase = C64::new(0.0, 1.0).powu(ys) * if row.sign { -1.0 } else { 1.0 };
    circuit_matrix(n, &gates).into_iter().map(|r| r.into_iter().map(|x| x * phase).collect()).collect()
}

fn dagger(m: &Matrix) -> Matrix {
    (0..m.len()).map(|i| (0..m.len()).map(|j| m[j][i].conj()).collect()).collect()
}

#[test]
fn synthesized_circuit_realizes_tableau_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..30 {
        let n = rng.gen_range(1..=3);
        let t = sample_random_clifford(n, &mut rng).unwrap();
        let u = circuit_matrix(n, t.circuit());
        for q in 0..n {
            for (i, g) in [(q, Gate::X(q)), (n + q, Gate::Z(q))] {
                let conj = matmul(&matmul(&u, &gate_matrix(n, &g)), &dagger(&u));
                let want = pauli_matrix(n, &t.rows()[i]);
                for (a, b) in conj.iter().flatten().zip(want.iter().flatten()) {
                    assert!((a - b).norm() < 1e-10, "row {i} of {t:?}");
                }
            }
        }
    }
}

#[test]
fn stabilizer_amplitudes_match_dense_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..25 {
        let n = rng.gen_range(1..=5);
        let t = sample_random_clifford(n, &mut rng).unwrap();
        let u = circuit_matrix(n, t.circuit());
        for _ in 0..8 {
            let (b, k) = (rng.gen_range(0..1u64 << n), rng.gen_range(0..1u64 << n));
            let a = amplitude(&t, &BasisBitstring::new(n, b).unwrap(), &BasisBitstring::new(n, k).unwrap()).unwrap();
            assert!((a - u[b as usize][k as usize]).norm() < 1e-10);
        }
    }
}

/// Expected single-snapshot estimate over the full group and every outcome,
/// with outcome probabilities from the oracle.
fn exhaustive_expectation(group: &[CliffordTableau], state: &[C64], target: &[C64], n: usize) -> f64 {
    let exec = Executor::serial();
    let mut total = 0.0;
    for c in group {
        let rotated = matvec(&circuit_matrix(n, c.circuit()), state);
        for (b, amp) in rotated.iter().enumerate() {
            let p = amp.norm_sqr();
            if p < 1e-300 {
                continue;
            }
            let snap = Snapshot { clifford: c.clone(), outcome: BasisBitstring::new(n, b as u64).unwrap() };
            total += p * estimate_fidelity(&[snap], target, &exec).unwrap().value;
        }
    }
    total / group.len() as f64
}

#[test]
fn shadow_estimator_is_unbiased_over_the_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [1, 2] {
        let group = enumerate_clifford_group(n).unwrap();
        for _ in 0..3 {
            let (s, t) = (random_unit(n, &mut rng), random_unit(n, &mut rng));
            let e = exhaustive_expectation(&group, &s, &t, n);
            assert!((e - fidelity(&s, &t)).abs() < 1e-12, "n={n}: {e} vs {}", fidelity(&s, &t));
        }
    }
}

#[test]
fn clifford_sampling_is_uniform() {
    for (n, draws, seed) in [(1usize, 100_000usize, 5u64), (2, 300_000, 6)] {
        let group = enumerate_clifford_group(n).unwrap();
        let index: HashMap<CliffordTableau, usize> = group.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut counts = vec![0u64; group.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..draws {
            counts[index[&sample_random_clifford(n, &mut rng).unwrap()]] += 1;
        }
        let p = chi_square_p(&counts, draws as f64 / group.len() as f64);
        assert!(p > 1e-3, "n={n}: p={p}");
    }
}

#[test]
fn parameter_shift_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    for seed in 0..8 {
        let n = 2 + seed as usize % 3;
        let (spec, params) = random_init(n, 3, seed).unwrap();
        let target = random_unit(n, &mut rng);
        let f = |p: &ParamVector| fidelity(&circuit_state(n, &spec.gates(p).unwrap()), &target);
        let g = estimate_gradient(&spec, &params, &target, &GradientOptions::exact(), &mut rng, &Executor::serial()).unwrap();
        for r in 0..params.len() {
            let fd = (f(&params.shifted(r, h)) - f(&params.shifted(r, -h))) / (2.0 * h);
            assert!((g[r] - fd).abs() < 1e-6, "param {r}: {} vs {fd}", g[r]);
        }
    }
}

#[test]
fn classifier_readout_equals_kernel_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..40 {
        let dim = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=8);
        let (plus, minus) = (random_vectors(&mut rng, m, dim), random_vectors(&mut rng, m, dim));
        let w = random_weights(&mut rng, m);
        let test = random_vectors(&mut rng, 1, dim).remove(0);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let per_vector = k % 2 == 0;
        let norm = if per_vector { Normalization::PerVector } else { Normalization::Global };
        let train = TrainingSet::new(plus.clone(), minus.clone(), w.clone()).unwrap();
        let layout = ClassifierLayout::for_training(&train, phi);
        let psi = build_psi_init(&train, &test, &layout, norm).unwrap();
        let got = classify_exact(&psi, &layout).unwrap().sigma_z;
        let want = kernel_oracle(&plus, &minus, &w, &test, phi, per_vector);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn fidelity_budget_values() {
    // ceil(ln 2 / eps^2) for one observable
    for (eps, n) in [(0.1, 70), (0.05, 278), (0.2, 18)] {
        assert_eq!(shadow_budget(&ShadowBudget::fidelity(eps)).unwrap(), n);
    }
    let many = ShadowBudget { epsilon: 0.1, observables: 100, max_shadow_norm_sq: 3.0, constant: 2.0 };
    assert_eq!(shadow_budget(&many).unwrap(), (2.0 * 100f64.ln() * 3.0 / 0.01f64).ceil() as u64);
}
