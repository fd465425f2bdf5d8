//! Train a hardware-efficient ansatz to prepare a random three-qubit state,
//! first with exact gradients and then from classical shadows.

use acae::ansatz::random_init;
use acae::trainer::{train, TrainingConfig, TrainingMode};
use acae::verify::random_state;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> acae::Result<()> {
    let n = 3;
    let target = random_state(n, &mut ChaCha8Rng::seed_from_u64(7));
    let (spec, init) = random_init(n, 6, 1)?;

    for mode in [TrainingMode::Exact, TrainingMode::Shadow] {
        let config = TrainingConfig { mode, seed: 1, ..TrainingConfig::default() }.with_iterations(200);
        let (_, trace) = train(&spec, &init, target.amplitudes(), &config)?;
        println!(
            "{mode:>6}: fidelity {:.4} -> {:.4}, {} gradient snapshots",
            trace.initial_exact_fidelity,
            trace.final_exact_fidelity(),
            trace.cost.gradient_snapshots
        );
        for r in trace.records.iter().step_by(50) {
            let est = r.fidelity_estimate.map_or("-".to_string(), |f| format!("{f:.3}"));
            println!("    iter {:>3}  lr {:<6}  estimate {est:>6}  exact {:.4}", r.iteration, r.learning_rate, r.exact_fidelity);
        }
    }
    Ok(())
}
