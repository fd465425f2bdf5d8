//! Estimate the overlap of two random states from random Clifford snapshots
//! and watch the error shrink with the number of snapshots.

use acae::ansatz::random_init;
use acae::parallel::Executor;
use acae::shadow::{collect_snapshots, estimate_fidelity, shadow_budget, ShadowBudget};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> acae::Result<()> {
    let (spec, params) = random_init(4, 3, 11)?;
    let (tspec, tparams) = random_init(4, 3, 12)?;
    let target = tspec.build_state(&tparams)?;
    let exact = spec.build_state(&params)?.fidelity(&target)?;
    println!("exact fidelity {exact:.5}");

    let exec = Executor::new(4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for n_shot in [100, 1_000, 10_000, 100_000] {
        let snaps = collect_snapshots(&spec, &params, n_shot, &mut rng, &exec)?;
        let est = estimate_fidelity(&snaps, target.amplitudes(), &exec)?;
        println!(
            "{n_shot:>7} snapshots: {:.5} +/- {:.5} (error {:+.5})",
            est.value,
            est.std_error,
            est.value - exact
        );
    }

    for eps in [0.1, 0.05, 0.01] {
        println!("epsilon {eps}: {} snapshots", shadow_budget(&ShadowBudget::fidelity(eps))?);
    }
    Ok(())
}
