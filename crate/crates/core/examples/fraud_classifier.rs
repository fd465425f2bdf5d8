//! Classify credit-card transactions from four labelled examples of each
//! class. Needs the Kaggle `creditcard.csv`, found through `--data <path>`
//! or `$ACAE_DATA_DIR`.

use acae::chc::{ChcProblem, Normalization, PhiChoice};
use acae::data::{default_creditcard_path, read_creditcard, CreditCardSplit};

fn main() -> acae::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let path = match args.iter().position(|a| a == "--data") {
        Some(i) => args.get(i + 1).map(Into::into),
        None => default_creditcard_path(),
    };
    let Some(path) = path else {
        eprintln!("creditcard.csv not found; pass --data or set ACAE_DATA_DIR");
        return Ok(());
    };
    let data = read_creditcard(path, &CreditCardSplit::default())?;
    println!("{} transactions, {} fraudulent", data.total_rows, data.fraud_rows);
    for norm in [Normalization::PerVector, Normalization::Global] {
        let problem = ChcProblem::new(data.train.clone(), data.tests.clone(), norm, PhiChoice::Auto)?;
        let rows = problem.classify_exact()?;
        println!("{norm}: {}/{} correct", rows.iter().filter(|r| r.correct).count(), rows.len());
        for r in rows {
            println!("  row {:<5} {:<6} sigma_z {:+.5}", r.test_id, r.class, r.sigma_z);
        }
    }
    Ok(())
}
