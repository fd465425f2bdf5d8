mod common;

use std::f64::consts::{FRAC_PI_4, TAU};

use acae::ansatz::random_init;
use acae::chc::{build_psi_init, classify_exact, kernel_sum_reference, ClassifierLayout, Normalization, TrainingSet};
use acae::clifford::{sample_random_clifford, CliffordTableau};
use acae::parallel::Executor;
use acae::shadow::{collect_snapshots, read_snapshots, write_snapshots};
use acae::statevector::{Gate, Statevector};
use acae::trainer::{adam_update, AdamParams, AdamState, LrSchedule};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let a = -10.0..10.0f64;
    prop_oneof![
        (q.clone(), a.clone()).prop_map(|(q, a)| Gate::Rx(q, a)),
        (q.clone(), a.clone()).prop_map(|(q, a)| Gate::Ry(q, a)),
        (q.clone(), a).prop_map(|(q, a)| Gate::Rz(q, a)),
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::S),
        (q.clone(), 1..n.max(2)).prop_map(move |(c, d)| if n > 1 { Gate::Cnot(c, (c + d) % n) } else { Gate::X(c) }),
    ]
}

fn circuit() -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (1usize..=5).prop_flat_map(|n| (Just(n), prop::collection::vec(gate(n), 0..40)))
}

fn training_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(m, dim)| {
        let v = prop::collection::vec(prop::collection::vec(-1.0..1.0f64, dim), m);
        (v.clone(), v, prop::collection::vec(-1.0..1.0f64, dim))
    })
}

fn nonzero(v: &[Vec<f64>]) -> bool {
    v.iter().all(|x| x.iter().map(|a| a * a).sum::<f64>() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm((n, gates) in circuit()) {
        let mut s = Statevector::zero(n).unwrap();
        s.apply_all(&gates).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ancilla_probabilities_sum_to_one((n, gates) in circuit(), q in 0usize..5) {
        let mut s = Statevector::zero(n).unwrap();
        s.apply_all(&gates).unwrap();
        let q = q % n;
        let p0 = s.prob_zero(q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p0));
        prop_assert!((s.z_expectation(q).unwrap() - (2.0 * p0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn inverse_circuit_restores_state((n, gates) in circuit()) {
        let mut s = Statevector::zero(n).unwrap();
        s.apply_all(&gates).unwrap();
        let mut inv = Vec::new();
        for g in gates.iter().rev() {
            g.push_inverse(&mut inv);
        }
        s.apply_all(&inv).unwrap();
        prop_assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_ignores_global_phase((n, gates) in circuit(), alpha in 0.0..TAU) {
        let mut s = Statevector::zero(n).unwrap();
        s.apply_all(&gates).unwrap();
        let t = s.clone().with_global_phase(alpha);
        prop_assert!((s.fidelity(&t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_turn_of_an_angle_is_a_global_phase(seed in any::<u64>(), r in 0usize..12) {
        let (spec, params) = random_init(3, 4, seed).unwrap();
        let a = spec.build_state(&params).unwrap();
        let b = spec.build_state(&params.shifted(r, TAU)).unwrap();
        prop_assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tableau_tracks_gate_sequences((n, gates) in circuit()) {
        let clifford: Vec<Gate> = gates.into_iter().filter(Gate::is_clifford).collect();
        let mut t = CliffordTableau::identity(n).unwrap();
        for g in &clifford {
            t.apply(g).unwrap();
        }
        prop_assert!(t.validate().is_ok());
        prop_assert_eq!(t, CliffordTableau::from_circuit(n, clifford).unwrap());
    }

    #[test]
    fn sampled_cliffords_are_valid(n in 1usize..=20, seed in any::<u64>()) {
        let t = sample_random_clifford(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(t.validate().is_ok());
        prop_assert_eq!(CliffordTableau::from_circuit(n, t.circuit().to_vec()).unwrap(), t);
    }

    #[test]
    fn classifier_matches_kernel_and_flips_with_classes(
        (plus, minus, test) in training_case(),
        alpha in 0.0..TAU,
        global in any::<bool>(),
    ) {
        prop_assume!(nonzero(&plus) && nonzero(&minus) && nonzero(&[test.clone()]));
        let norm = if global { Normalization::Global } else { Normalization::PerVector };
        let train = TrainingSet::uniform(plus, minus).unwrap();
        let layout = ClassifierLayout::for_training(&train, FRAC_PI_4);
        let psi = build_psi_init(&train, &test, &layout, norm).unwrap();
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        let sigma = classify_exact(&psi, &layout).unwrap().sigma_z;
        prop_assert!((sigma - kernel_sum_reference(&train, &test, FRAC_PI_4, norm).unwrap()).abs() < 1e-12);
        let shifted = classify_exact(&psi.with_global_phase(alpha), &layout).unwrap().sigma_z;
        prop_assert!((shifted - sigma).abs() < 1e-12);
        let swapped = train.swapped();
        let psi2 = build_psi_init(&swapped, &test, &layout, norm).unwrap();
        prop_assert!((classify_exact(&psi2, &layout).unwrap().sigma_z + sigma).abs() < 1e-12);
    }

    #[test]
    fn quartered_schedule_covers_every_iteration(iters in 1usize..2000) {
        let s = LrSchedule::quartered(iters);
        prop_assert!(s.validate(iters).is_ok());
        let rates: Vec<f64> = (0..iters).map(|i| s.rate_at(i).unwrap()).collect();
        prop_assert!(rates.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(s.rate_at(iters).is_none());
    }

    #[test]
    fn first_adam_step_has_the_learning_rate_as_size(
        grad in prop::collection::vec(-5.0..5.0f64, 1..10),
        rate in 1e-4..1.0f64,
    ) {
        prop_assume!(grad.iter().all(|g| g.abs() > 1e-3));
        let mut st = AdamState::new(grad.len(), AdamParams::default());
        let mut p = vec![0.0; grad.len()];
        adam_update(&mut st, &mut p, &grad, rate).unwrap();
        for (x, g) in p.iter().zip(&grad) {
            prop_assert!((x - rate * g / (g.abs() + 1e-8)).abs() < 1e-12);
        }
    }

    #[test]
    fn snapshot_dump_round_trips(seed in any::<u64>(), n in 1usize..=4) {
        let (spec, params) = random_init(n, 2, seed).unwrap();
        let snaps = collect_snapshots(&spec, &params, 5, &mut ChaCha8Rng::seed_from_u64(seed), &Executor::serial()).unwrap();
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &snaps).unwrap();
        prop_assert_eq!(read_snapshots(&buf[..]).unwrap(), snaps);
    }
}
