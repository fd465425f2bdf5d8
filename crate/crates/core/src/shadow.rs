//! Classical-shadow fidelity estimation with random Clifford measurements.
//!
//! One snapshot is a random Clifford `U` and the outcome `b` of measuring
//! `U|psi>` in the computational basis. With the inverted Clifford channel
//! `M^-1(rho) = (2^n + 1) rho - I`, each snapshot contributes
//! `(2^n + 1) |<b|U|target>|^2 - 1` to an unbiased fidelity estimate.

use std::f64::consts::FRAC_PI_2;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParamVector};
use crate::clifford::{
    overlap_from_pullback, pulled_back_outcome, sample_random_clifford, BasisBitstring,
    CliffordTableau,
};
use crate::error::{Error, Result};
use crate::parallel::Executor;
use crate::statevector::{Gate, Statevector, C64};

/// One classical-shadow sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub clifford: CliffordTableau,
    pub outcome: BasisBitstring,
}

/// Where snapshot Cliffords come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CliffordSource {
    #[default]
    Uniform,
    /// Always the identity; measures in the computational basis.
    Identity,
}

impl CliffordSource {
    fn draw<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Result<CliffordTableau> {
        match self {
            CliffordSource::Uniform => sample_random_clifford(n, rng),
            CliffordSource::Identity => CliffordTableau::identity(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    /// Empirical mean; finite samples can fall outside `[0, 1]`.
    pub value: f64,
    pub n_shot: usize,
    /// Standard error of the mean over snapshots.
    pub std_error: f64,
}

impl FidelityEstimate {
    fn from_terms(terms: &[f64]) -> Self {
        let n = terms.len();
        let mut sum = 0.0;
        for t in terms {
            sum += t;
        }
        let mean = sum / n as f64;
        let std_error = if n > 1 {
            let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::NAN
        };
        Self { value: mean, n_shot: n, std_error }
    }
}

/// Inputs of the sample-complexity bound
/// `N >= C * ln(max(L, 2)) * max ||O||^2_shadow / eps^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowBudget {
    pub epsilon: f64,
    pub observables: usize,
    pub max_shadow_norm_sq: f64,
    pub constant: f64,
}

impl ShadowBudget {
    /// A single pure-state fidelity target, whose Clifford shadow norm is 1.
    pub fn fidelity(epsilon: f64) -> Self {
        Self { epsilon, observables: 1, max_shadow_norm_sq: 1.0, constant: 1.0 }
    }
}

pub fn shadow_budget(b: &ShadowBudget) -> Result<u64> {
    if !(b.epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", b.epsilon)));
    }
    if b.observables == 0 || !(b.max_shadow_norm_sq > 0.0) || !(b.constant > 0.0) {
        return Err(Error::InvalidArgument("budget fields must be positive".into()));
    }
    let l = b.observables.max(2) as f64;
    Ok((b.constant * l.ln() * b.max_shadow_norm_sq / (b.epsilon * b.epsilon)).ceil() as u64)
}

/// Per-shot RNG streams derived from one draw of the caller's generator, so
/// results do not depend on how shots are spread over workers.
fn shot_rngs<R: Rng + ?Sized>(rng: &mut R) -> impl Fn(usize) -> ChaCha8Rng + Sync + Send {
    let base = rng.next_u64();
    move |i| {
        let mut r = ChaCha8Rng::seed_from_u64(base);
        r.set_stream(i as u64);
        r
    }
}

fn take_snapshot(
    state: &Statevector,
    source: CliffordSource,
    rng: &mut ChaCha8Rng,
) -> Result<Snapshot> {
    let n = state.n_qubits();
    let clifford = source.draw(n, rng)?;
    let mut rotated = state.clone();
    for g in clifford.circuit() {
        rotated.apply_unchecked(g);
    }
    let outcome = BasisBitstring::new(n, rotated.sample_index(rng) as u64)?;
    Ok(Snapshot { clifford, outcome })
}

/// Snapshots of an arbitrary state.
pub fn collect_snapshots_from_state<R: Rng + ?Sized>(
    state: &Statevector,
    n_shot: usize,
    source: CliffordSource,
    rng: &mut R,
    exec: &Executor,
) -> Result<Vec<Snapshot>> {
    if n_shot == 0 {
        return Err(Error::InvalidArgument("n_shot must be at least 1".into()));
    }
    let streams = shot_rngs(rng);
    exec.try_map(n_shot, |i| take_snapshot(state, source, &mut streams(i)))
}

/// Snapshots of the model state `U(theta)|0>`.
pub fn collect_snapshots<R: Rng + ?Sized>(
    spec: &AnsatzSpec,
    params: &ParamVector,
    n_shot: usize,
    rng: &mut R,
    exec: &Executor,
) -> Result<Vec<Snapshot>> {
    let state = spec.build_state(params)?;
    collect_snapshots_from_state(&state, n_shot, CliffordSource::Uniform, rng, exec)
}

fn check_target(n: usize, target: &[C64]) -> Result<()> {
    if target.len() != 1usize << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: target.len() });
    }
    let norm = target.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

fn snapshot_term(snap: &Snapshot, target: &[C64]) -> Result<f64> {
    let n = snap.clifford.n_qubits();
    let back = pulled_back_outcome(&snap.clifford, &snap.outcome)?;
    let overlap = overlap_from_pullback(&back, target, 0.0);
    Ok(((1u64 << n) + 1) as f64 * overlap.norm_sqr() - 1.0)
}

/// Empirical-mean fidelity estimate from stored snapshots.
pub fn estimate_fidelity(
    snapshots: &[Snapshot],
    target: &[C64],
    exec: &Executor,
) -> Result<FidelityEstimate> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::InvalidArgument("no snapshots to estimate from".into()))?;
    check_target(first.clifford.n_qubits(), target)?;
    let terms = exec.try_map(snapshots.len(), |i| snapshot_term(&snapshots[i], target))?;
    Ok(FidelityEstimate::from_terms(&terms))
}

/// Collects `n_shot` snapshots of `state` and estimates its fidelity with
/// `target` without keeping them. Draws the same snapshots as
/// [`collect_snapshots_from_state`] for the same RNG; the overlap is read off
/// the target rotated by the same circuit instead of the stabilizer pullback,
/// which agrees to rounding.
pub fn sampled_fidelity<R: Rng + ?Sized>(
    state: &Statevector,
    target: &[C64],
    n_shot: usize,
    rng: &mut R,
    exec: &Executor,
) -> Result<FidelityEstimate> {
    if n_shot == 0 {
        return Err(Error::InvalidArgument("n_shot must be at least 1".into()));
    }
    let n = state.n_qubits();
    check_target(n, target)?;
    let target = Statevector::from_amplitudes(target.to_vec())?;
    let scale = ((1u64 << n) + 1) as f64;
    let streams = shot_rngs(rng);
    let terms = exec.try_map(n_shot, |i| {
        let mut rng = streams(i);
        let clifford = CliffordSource::Uniform.draw(n, &mut rng)?;
        let (mut rotated, mut rotated_target) = (state.clone(), target.clone());
        for g in clifford.circuit() {
            rotated.apply_unchecked(g);
            rotated_target.apply_unchecked(g);
        }
        let b = rotated.sample_index(&mut rng);
        Ok(scale * rotated_target.amplitudes()[b].norm_sqr() - 1.0)
    })?;
    Ok(FidelityEstimate::from_terms(&terms))
}

/// How fidelities at the shifted points are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GradientMode {
    /// Exact statevector fidelity.
    Exact,
    /// Fresh classical shadows at every shifted point.
    Shadow { shots_per_shift: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientOptions {
    pub mode: GradientMode,
    /// Multiplies `f(theta_r + pi/2) - f(theta_r - pi/2)`. `0.5` gives the true
    /// derivative for `exp(-i theta sigma / 2)` rotations; `1.0` is the
    /// unhalved difference.
    pub scale: f64,
}

impl GradientOptions {
    pub fn exact() -> Self {
        Self { mode: GradientMode::Exact, scale: 0.5 }
    }

    pub fn shadow(shots_per_shift: usize) -> Self {
        Self { mode: GradientMode::Shadow { shots_per_shift }, scale: 0.5 }
    }
}

/// Parameter-shift gradient of the fidelity between `U(theta)|0>` and `target`.
pub fn estimate_gradient<R: Rng + ?Sized>(
    spec: &AnsatzSpec,
    params: &ParamVector,
    target: &[C64],
    opts: &GradientOptions,
    rng: &mut R,
    exec: &Executor,
) -> Result<Vec<f64>> {
    check_target(spec.n_qubits(), target)?;
    let r_count = spec.num_params();
    if params.len() != r_count {
        return Err(Error::DimensionMismatch { expected: r_count, found: params.len() });
    }
    let target_state = Statevector::from_amplitudes(target.to_vec())?;
    let shift = |p: usize| {
        let delta = if p % 2 == 0 { FRAC_PI_2 } else { -FRAC_PI_2 };
        params.shifted(p / 2, delta)
    };
    let values: Vec<f64> = match opts.mode {
        GradientMode::Exact => exec.try_map(2 * r_count, |p| {
            spec.build_state(&shift(p))?.fidelity(&target_state)
        })?,
        GradientMode::Shadow { shots_per_shift } => {
            if shots_per_shift == 0 {
                return Err(Error::InvalidArgument("shots_per_shift must be at least 1".into()));
            }
            let streams = shot_rngs(rng);
            let serial = Executor::serial();
            exec.try_map(2 * r_count, |p| {
                let state = spec.build_state(&shift(p))?;
                let mut prng = streams(p);
                Ok(sampled_fidelity(&state, target, shots_per_shift, &mut prng, &serial)?.value)
            })?
        }
    };
    Ok(values.chunks(2).map(|pm| opts.scale * (pm[0] - pm[1])).collect())
}

/// Writes one snapshot per line: the Clifford circuit as `;`-separated gates,
/// a tab, then the outcome bits (qubit 0 first).
pub fn write_snapshots<W: Write>(mut w: W, snapshots: &[Snapshot]) -> Result<()> {
    for s in snapshots {
        let circuit: Vec<String> = s.clifford.circuit().iter().map(Gate::to_string).collect();
        writeln!(w, "{}\t{}", circuit.join(";"), s.outcome)?;
    }
    Ok(())
}

pub fn read_snapshots<R: BufRead>(r: R) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (circuit, bits) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse(format!("line {}: missing tab separator", lineno + 1)))?;
        let outcome: BasisBitstring = bits.parse()?;
        let gates = circuit
            .split(';')
            .filter(|g| !g.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Gate>>>()?;
        let clifford = CliffordTableau::from_circuit(outcome.len(), gates)?;
        out.push(Snapshot { clifford, outcome });
    }
    Ok(out)
}
