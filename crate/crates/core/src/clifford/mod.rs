//! Clifford group machinery for the shadow protocol: uniform sampling,
//! tableau-to-circuit synthesis and phase-exact evaluation of `<b|U|k>`.

mod chform;
mod tableau;

use std::fmt;
use std::str::FromStr;

pub use chform::StabilizerState;
pub use tableau::{
    enumerate_clifford_group, sample_random_clifford, CliffordTableau, PauliRow,
    MAX_CLIFFORD_QUBITS,
};

use crate::error::{Error, Result};
use crate::statevector::{Gate, C64};

/// Computational-basis outcome of an `n`-qubit measurement. `bits` uses the
/// statevector index convention, so it doubles as a basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisBitstring {
    n: usize,
    bits: u64,
}

impl BasisBitstring {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > 64 || (n < 64 && bits >> n != 0) {
            return Err(Error::InvalidArgument(format!("{bits} is not an {n}-bit string")));
        }
        Ok(Self { n, bits })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }
}

/// Written as `0`/`1` characters, qubit 0 first.
impl fmt::Display for BasisBitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.n)
    }
}

impl FromStr for BasisBitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.len() > 64 || !s.bytes().all(|c| c == b'0' || c == b'1') {
            return Err(Error::Parse(format!("`{s}` is not a bitstring")));
        }
        let bits = u64::from_str_radix(s, 2).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(s.len(), bits)
    }
}

fn check_len(t: &CliffordTableau, b: &BasisBitstring) -> Result<()> {
    if b.len() != t.n_qubits() {
        return Err(Error::DimensionMismatch { expected: t.n_qubits(), found: b.len() });
    }
    Ok(())
}

/// `U^dagger |b>` as a stabilizer state, where `U` is the tableau's circuit.
pub fn pulled_back_outcome(t: &CliffordTableau, b: &BasisBitstring) -> Result<StabilizerState> {
    check_len(t, b)?;
    let mut state = StabilizerState::basis(t.n_qubits(), b.bits())?;
    let inverse: Vec<Gate> = t.inverse_circuit();
    state.apply_all(&inverse)?;
    Ok(state)
}

/// Exact `<b|U|k>` (phase included) by propagating `|k>` through the circuit
/// in stabilizer form. Polynomial in `n`.
pub fn amplitude(t: &CliffordTableau, b: &BasisBitstring, k: &BasisBitstring) -> Result<C64> {
    check_len(t, b)?;
    check_len(t, k)?;
    let mut state = StabilizerState::basis(t.n_qubits(), k.bits())?;
    state.apply_all(t.circuit())?;
    Ok(state.amplitude(b.bits()))
}

/// `sum_k c_k <b|U|k>`, skipping coefficients with `|c_k| < floor`.
pub fn overlap_with_target(
    t: &CliffordTableau,
    b: &BasisBitstring,
    coeffs: &[C64],
    floor: f64,
) -> Result<C64> {
    check_len(t, b)?;
    if coeffs.len() != 1usize << t.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << t.n_qubits(),
            found: coeffs.len(),
        });
    }
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized(norm));
    }
    let back = pulled_back_outcome(t, b)?;
    Ok(overlap_from_pullback(&back, coeffs, floor))
}

/// `<b|U|k> = conj(<k|U^dagger|b>)`, so the overlap is `sum_k c_k conj(phi_k)`
/// with `phi = U^dagger |b>`.
pub(crate) fn overlap_from_pullback(back: &StabilizerState, coeffs: &[C64], floor: f64) -> C64 {
    if floor > 0.0 {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() >= floor)
            .map(|(k, c)| c * back.amplitude(k as u64).conj())
            .sum()
    } else {
        let amps = back.amplitudes().expect("dense-sized register");
        coeffs.iter().zip(&amps).map(|(c, a)| c * a.conj()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::Statevector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bs(n: usize, v: u64) -> BasisBitstring {
        BasisBitstring::new(n, v).unwrap()
    }

    #[test]
    fn identity_amplitudes_are_deltas() {
        let t = CliffordTableau::identity(3).unwrap();
        for b in 0..8 {
            for k in 0..8 {
                let a = amplitude(&t, &bs(3, b), &bs(3, k)).unwrap();
                let want = if b == k { 1.0 } else { 0.0 };
                assert!((a - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hadamard_tableau() {
        let t = CliffordTableau::from_circuit(1, vec![Gate::H(0)]).unwrap();
        let resynth = CliffordTableau::from_rows(1, t.rows().to_vec()).unwrap();
        for tab in [&t, &resynth] {
            let h = FRAC_1_SQRT_2;
            let a00 = amplitude(tab, &bs(1, 0), &bs(1, 0)).unwrap();
            let a10 = amplitude(tab, &bs(1, 1), &bs(1, 0)).unwrap();
            // the resynthesized circuit may differ from H by a global phase
            assert!((a00.norm() - h).abs() < 1e-15);
            assert!((a10.norm() - h).abs() < 1e-15);
            assert!((a00 - a10).norm() < 1e-15);
        }
    }

    #[test]
    fn one_hot_overlap_reduces_to_amplitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = sample_random_clifford(3, &mut rng).unwrap();
        for k in 0..8u64 {
            let mut c = vec![C64::new(0.0, 0.0); 8];
            c[k as usize] = C64::new(1.0, 0.0);
            for b in 0..8u64 {
                let o = overlap_with_target(&t, &bs(3, b), &c, 0.0).unwrap();
                let a = amplitude(&t, &bs(3, b), &bs(3, k)).unwrap();
                assert!((o - a).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn overlap_under_identity_is_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = random_unit(3, &mut rng);
        let t = CliffordTableau::identity(3).unwrap();
        for b in 0..8 {
            let o = overlap_with_target(&t, &bs(3, b), &c, 0.0).unwrap();
            assert!((o - c[b as usize]).norm() < 1e-14);
        }
    }

    #[test]
    fn overlap_matches_dense_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let t = sample_random_clifford(3, &mut rng).unwrap();
            let c = random_unit(3, &mut rng);
            let mut dense = Statevector::from_amplitudes(c.clone()).unwrap();
            dense.apply_all(t.circuit()).unwrap();
            for b in 0..8u64 {
                let o = overlap_with_target(&t, &bs(3, b), &c, 0.0).unwrap();
                assert!((o - dense.amplitudes()[b as usize]).norm() < 1e-10);
                let floored = overlap_with_target(&t, &bs(3, b), &c, 1e-300).unwrap();
                assert!((o - floored).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn overlap_rejects_bad_input() {
        let t = CliffordTableau::identity(2).unwrap();
        let c = vec![C64::new(1.0, 0.0); 4];
        assert!(matches!(
            overlap_with_target(&t, &bs(2, 0), &c, 0.0),
            Err(Error::NotNormalized(_))
        ));
        assert!(overlap_with_target(&t, &bs(3, 0), &c, 0.0).is_err());
        assert!(amplitude(&t, &bs(2, 0), &bs(1, 0)).is_err());
    }

    #[test]
    fn bitstring_text() {
        let b: BasisBitstring = "0110".parse().unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.bits(), 6);
        assert_eq!(b.to_string(), "0110");
        assert!("01a".parse::<BasisBitstring>().is_err());
        assert!(BasisBitstring::new(2, 4).is_err());
    }

    fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let v: Vec<C64> = (0..1 << n)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        Statevector::normalized(v).unwrap().into_amplitudes()
    }
}
