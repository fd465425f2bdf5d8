//! Sample a uniformly random Clifford, print its synthesized circuit and
//! compare stabilizer-formalism amplitudes with a dense simulation.

use acae::clifford::{amplitude, sample_random_clifford, BasisBitstring};
use acae::statevector::Statevector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> acae::Result<()> {
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = sample_random_clifford(n, &mut rng)?;
    let circuit: Vec<String> = c.circuit().iter().map(|g| g.to_string()).collect();
    println!("{} gates: {}", circuit.len(), circuit.join(" "));

    let mut dense = Statevector::zero(n)?;
    dense.apply_all(c.circuit())?;
    let zero = BasisBitstring::zeros(n)?;
    println!("  b    stabilizer            dense");
    for b in 0..1u64 << n {
        let a = amplitude(&c, &BasisBitstring::new(n, b)?, &zero)?;
        let d = dense.amplitudes()[b as usize];
        println!("{b:03b}  {:+.4}{:+.4}i   {:+.4}{:+.4}i", a.re, a.im, d.re, d.im);
    }
    Ok(())
}
