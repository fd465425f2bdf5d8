//! Adam gradient ascent on the fidelity between the ansatz state and a target.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::parallel::Executor;
use crate::shadow::{estimate_gradient, sampled_fidelity, GradientMode, GradientOptions};
use crate::statevector::{Statevector, C64};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    hp: AdamParams,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(dim: usize, hp: AdamParams) -> Self {
        Self { hp, m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam step in the ascent direction.
pub fn adam_update(state: &mut AdamState, params: &mut [f64], grad: &[f64], rate: f64) -> Result<()> {
    let dim = state.m.len();
    for len in [params.len(), grad.len()] {
        if len != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: len });
        }
    }
    let AdamParams { beta1, beta2, eps } = state.hp;
    state.t += 1;
    let c1 = 1.0 - beta1.powi(state.t as i32);
    let c2 = 1.0 - beta2.powi(state.t as i32);
    for i in 0..dim {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] += rate * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// Learning rate `rate` on iterations `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSpan {
    pub start: usize,
    pub end: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LrSchedule(pub Vec<LrSpan>);

impl LrSchedule {
    /// 0.1, 0.01, 0.005 and 0.001 for 100 iterations each.
    pub fn standard() -> Self {
        Self::quartered(400)
    }

    /// The standard four rates over four near-equal spans of `iterations`.
    pub fn quartered(iterations: usize) -> Self {
        let rates = [0.1, 0.01, 0.005, 0.001];
        let mut spans = Vec::new();
        for (k, rate) in rates.iter().enumerate() {
            let start = iterations * k / 4;
            let end = iterations * (k + 1) / 4;
            if end > start {
                spans.push(LrSpan { start, end, rate: *rate });
            }
        }
        LrSchedule(spans)
    }

    pub fn constant(iterations: usize, rate: f64) -> Self {
        LrSchedule(vec![LrSpan { start: 0, end: iterations, rate }])
    }

    pub fn rate_at(&self, iteration: usize) -> Option<f64> {
        self.0.iter().find(|s| (s.start..s.end).contains(&iteration)).map(|s| s.rate)
    }

    /// Spans must be contiguous and cover exactly `[0, iterations)`.
    pub fn validate(&self, iterations: usize) -> Result<()> {
        let mut next = 0;
        for s in &self.0 {
            if s.start != next || s.end <= s.start {
                return Err(Error::InvalidArgument(format!(
                    "learning-rate span {}..{} does not continue from {next}",
                    s.start, s.end
                )));
            }
            if !(s.rate.is_finite() && s.rate > 0.0) {
                return Err(Error::InvalidArgument(format!("learning rate {} is not positive", s.rate)));
            }
            next = s.end;
        }
        if next != iterations {
            return Err(Error::InvalidArgument(format!(
                "learning-rate schedule covers {next} iterations, expected {iterations}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    #[default]
    Shadow,
    Exact,
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainingMode::Shadow => "shadow",
            TrainingMode::Exact => "exact",
        })
    }
}

impl FromStr for TrainingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shadow" => Ok(TrainingMode::Shadow),
            "exact" => Ok(TrainingMode::Exact),
            _ => Err(Error::Parse(format!("unknown training mode `{s}` (shadow|exact)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub iterations: usize,
    /// Snapshots per logged fidelity estimate.
    pub n_shot: usize,
    /// Snapshots per shifted circuit in the gradient.
    pub n_shot_grad: usize,
    pub lr_schedule: LrSchedule,
    pub adam: AdamParams,
    pub mode: TrainingMode,
    pub seed: u64,
    pub gradient_scale: f64,
    pub workers: usize,
    /// Stop once the monitored fidelity reaches this value.
    pub early_stop: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            iterations: 400,
            n_shot: 1000,
            n_shot_grad: 100,
            lr_schedule: LrSchedule::standard(),
            adam: AdamParams::default(),
            mode: TrainingMode::Shadow,
            seed: 0,
            gradient_scale: 0.5,
            workers: 1,
            early_stop: None,
        }
    }
}

impl TrainingConfig {
    /// Sets `iterations` and rescales the standard schedule to match.
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self.lr_schedule = LrSchedule::quartered(iterations);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        if self.mode == TrainingMode::Shadow && (self.n_shot == 0 || self.n_shot_grad == 0) {
            return Err(Error::InvalidArgument("shot counts must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        if !(self.gradient_scale.is_finite() && self.gradient_scale > 0.0) {
            return Err(Error::InvalidArgument("gradient_scale must be positive".into()));
        }
        self.lr_schedule.validate(self.iterations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Shadow estimate after the update; absent in exact mode.
    pub fidelity_estimate: Option<f64>,
    pub exact_fidelity: f64,
    pub learning_rate: f64,
}

/// Total quantum-side work of a run, counted in snapshots and circuit runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrainingCost {
    pub gradient_snapshots: u64,
    pub evaluation_snapshots: u64,
    pub shifted_circuits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub schema_version: u32,
    pub ansatz: AnsatzSpec,
    pub config: TrainingConfig,
    pub seed: u64,
    pub initial_params: ParamVector,
    pub initial_exact_fidelity: f64,
    pub records: Vec<TraceRecord>,
    pub final_params: ParamVector,
    pub cost: TrainingCost,
}

impl TrainingTrace {
    pub fn final_exact_fidelity(&self) -> f64 {
        self.records.last().map_or(self.initial_exact_fidelity, |r| r.exact_fidelity)
    }

    /// Running maximum of the exact fidelity, one entry per record.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = self.initial_exact_fidelity;
        self.records
            .iter()
            .map(|r| {
                best = best.max(r.exact_fidelity);
                best
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let trace: Self = serde_json::from_str(s)?;
        if trace.schema_version != TRACE_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported trace schema version {}",
                trace.schema_version
            )));
        }
        Ok(trace)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Maximizes `|<target|U(theta)|0>|^2` starting from `init`.
///
/// Randomness comes only from `config.seed`, so a single-worker run is
/// reproducible bit for bit; with more workers results are unchanged as well,
/// since every shot owns its RNG stream.
pub fn train(
    spec: &AnsatzSpec,
    init: &ParamVector,
    target: &[C64],
    config: &TrainingConfig,
) -> Result<(ParamVector, TrainingTrace)> {
    config.validate()?;
    if init.len() != spec.num_params() {
        return Err(Error::DimensionMismatch { expected: spec.num_params(), found: init.len() });
    }
    if target.len() != 1usize << spec.n_qubits() {
        return Err(Error::DimensionMismatch { expected: 1 << spec.n_qubits(), found: target.len() });
    }
    let target_state = Statevector::from_amplitudes(target.to_vec())?;
    let exec = Executor::new(config.workers)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let grad_opts = GradientOptions {
        mode: match config.mode {
            TrainingMode::Shadow => GradientMode::Shadow { shots_per_shift: config.n_shot_grad },
            TrainingMode::Exact => GradientMode::Exact,
        },
        scale: config.gradient_scale,
    };

    let r = spec.num_params() as u64;
    let mut params = init.clone();
    let mut adam = AdamState::new(params.len(), config.adam);
    let mut records = Vec::with_capacity(config.iterations);
    let mut cost = TrainingCost::default();
    let initial_exact_fidelity = spec.build_state(&params)?.fidelity(&target_state)?;

    for iteration in 0..config.iterations {
        let rate = config.lr_schedule.rate_at(iteration).expect("validated schedule");
        let grad = estimate_gradient(spec, &params, target, &grad_opts, &mut rng, &exec)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient at iteration {iteration}")));
        }
        adam_update(&mut adam, &mut params.0, &grad, rate)?;
        cost.shifted_circuits += 2 * r;

        let state = spec.build_state(&params)?;
        let exact_fidelity = state.fidelity(&target_state)?;
        let fidelity_estimate = match config.mode {
            TrainingMode::Shadow => {
                cost.gradient_snapshots += 2 * r * config.n_shot_grad as u64;
                cost.evaluation_snapshots += config.n_shot as u64;
                Some(sampled_fidelity(&state, target, config.n_shot, &mut rng, &exec)?.value)
            }
            TrainingMode::Exact => None,
        };
        records.push(TraceRecord { iteration, fidelity_estimate, exact_fidelity, learning_rate: rate });

        let monitored = fidelity_estimate.unwrap_or(exact_fidelity);
        if config.early_stop.is_some_and(|t| monitored >= t) {
            break;
        }
    }

    let trace = TrainingTrace {
        schema_version: TRACE_SCHEMA_VERSION,
        ansatz: spec.clone(),
        config: config.clone(),
        seed: config.seed,
        initial_params: init.clone(),
        initial_exact_fidelity,
        records,
        final_params: params.clone(),
        cost,
    };
    Ok((params, trace))
}
