//! Compact Hadamard classifier on Iris. Every test sample is classified from
//! its exactly prepared state; pass `--trained` to also prepare each state
//! with a shadow-trained ansatz (slow: about a minute per sample).

use acae::chc::{ChcProblem, Normalization, PhiChoice};
use acae::data::{load_iris, IrisSplit, SpeciesPair};
use acae::trainer::TrainingConfig;

fn main() -> acae::Result<()> {
    let trained = std::env::args().any(|a| a == "--trained");
    for pair in ["setosa:versicolor", "versicolor:virginica"] {
        let pair: SpeciesPair = pair.parse()?;
        let (train_set, tests) = load_iris(None, pair, &IrisSplit::default_for(pair))?;
        let problem = ChcProblem::new(train_set, tests, Normalization::PerVector, PhiChoice::Auto)?;
        println!("{pair}, {} qubits", problem.layout().total_qubits());
        for (k, row) in problem.classify_exact()?.iter().enumerate() {
            print!("  #{:<4} {:<11} sigma_z {:+.5}  {}", row.test_id, row.class, row.sigma_z, if row.correct { "ok" } else { "wrong" });
            if trained {
                let config = TrainingConfig { seed: k as u64, ..TrainingConfig::default() };
                let (res, trace) = problem.classify_with_training(&problem.tests[k], 12, k as u64, &config)?;
                print!("  | trained F {:.3} sigma_z {:+.5}", trace.final_exact_fidelity(), res.sigma_z);
            }
            println!();
        }
    }
    Ok(())
}
