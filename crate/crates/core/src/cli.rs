//! Command-line front end. Every run writes `manifest.json` next to its
//! outputs; failures exit with 2 (config), 3 (data) or 4 (numeric).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::ansatz::random_init;
use crate::chc::{
    classify_exact, write_results_csv, ChcProblem, ClassificationResult, ClassificationRow, Normalization,
    PhiChoice, TestSample, TrainingSet,
};
use crate::data::{self, CreditCardSplit, IrisSplit, SpeciesPair};
use crate::error::{Error, Result};
use crate::parallel::Executor;
use crate::shadow::sampled_fidelity;
use crate::statevector::{Statevector, C64};
use crate::trainer::{train, TrainingConfig, TrainingMode};
use crate::verify;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "acae", version, about = "Variational amplitude encoding with classical shadows, and a compact Hadamard classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an ansatz to prepare a target state
    Encode(EncodeArgs),
    /// Classify Iris test samples for a species pair
    ClassifyIris(IrisArgs),
    /// Classify credit-card transactions as normal or fraudulent
    ClassifyFraud(FraudArgs),
    /// Bias and spread of the shadow fidelity estimator against the exact value
    BenchShadow(BenchArgs),
    /// Run the built-in invariant checks
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value = "acae-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gradient {
    Shadow,
    Exact,
}

impl From<Gradient> for TrainingMode {
    fn from(g: Gradient) -> Self {
        match g {
            Gradient::Shadow => TrainingMode::Shadow,
            Gradient::Exact => TrainingMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 12)]
    pub layers: usize,
    #[arg(long, default_value_t = 400)]
    pub iters: usize,
    /// Snapshots per logged fidelity estimate
    #[arg(long, default_value_t = 1000)]
    pub shots: usize,
    /// Snapshots per shifted circuit in the gradient
    #[arg(long, default_value_t = 100)]
    pub shots_grad: usize,
    /// Source of training gradients
    #[arg(long, value_enum, default_value_t = Gradient::Shadow)]
    pub gradient: Gradient,
}

impl TrainArgs {
    fn config(&self, seed: u64, workers: usize) -> TrainingConfig {
        TrainingConfig {
            n_shot: self.shots,
            n_shot_grad: self.shots_grad,
            mode: self.gradient.into(),
            seed,
            workers,
            ..TrainingConfig::default()
        }
        .with_iterations(self.iters)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EncodeArgs {
    /// Target coefficients as CSV with `real,imag` columns in basis order
    #[arg(long, conflicts_with = "pair")]
    pub target: Option<PathBuf>,
    /// Scale the target to unit norm instead of rejecting it
    #[arg(long)]
    pub normalize: bool,
    /// Use the classifier initial state of this Iris pair as the target
    #[arg(long)]
    pub pair: Option<SpeciesPair>,
    /// Iris test sample whose initial state is encoded (with --pair)
    #[arg(long, default_value_t = 5)]
    pub test_id: u64,
    #[arg(long, default_value = "per-vector")]
    pub norm: Normalization,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Trained,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// `auto` or a value in radians
    #[arg(long, default_value = "auto")]
    pub phi: PhiChoice,
    #[arg(long, default_value = "per-vector")]
    pub norm: Normalization,
    /// Ancilla measurements per test sample in trained mode; exact readout if absent
    #[arg(long)]
    pub readout_shots: Option<u64>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IrisArgs {
    /// Iris CSV; the bundled copy is used if absent
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "setosa:versicolor")]
    pub pair: SpeciesPair,
    #[arg(long, value_delimiter = ',')]
    pub train_ids: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub test_ids: Option<Vec<u64>>,
    #[command(flatten)]
    pub classify: ClassifyArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FraudArgs {
    /// Kaggle credit-card CSV; defaults to `$ACAE_DATA_DIR/creditcard.csv`
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "V1,V2,V3,V4")]
    pub features: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub normal_ids: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub fraud_ids: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub test_ids: Option<Vec<u64>>,
    #[command(flatten)]
    pub classify: ClassifyArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 3)]
    pub qubits: usize,
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    /// Snapshot counts to evaluate
    #[arg(long, value_delimiter = ',', default_value = "10,30,100,300,1000")]
    pub shots: Vec<usize>,
    /// Independent estimates per snapshot count
    #[arg(long, default_value_t = 50)]
    pub repeats: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    argv: Vec<String>,
    config: &'a T,
    seed: u64,
    workers: usize,
    outputs: Vec<String>,
}

struct Run<'a> {
    out_dir: &'a Path,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    fn start(common: &'a CommonArgs) -> Result<Self> {
        if common.workers == 0 {
            return Err(Error::InvalidArgument("--workers must be at least 1".into()));
        }
        fs::create_dir_all(&common.out_dir).map_err(|e| {
            Error::InvalidArgument(format!("cannot create output directory {}: {e}", common.out_dir.display()))
        })?;
        Ok(Self { out_dir: &common.out_dir, outputs: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out_dir.join(name)
    }

    fn finish<T: Serialize>(mut self, command: &'static str, argv: &[String], config: &T, common: &CommonArgs) -> Result<()> {
        let path = self.path("manifest.json");
        let manifest = Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: "acae",
            version: env!("CARGO_PKG_VERSION"),
            command,
            argv: argv.to_vec(),
            config,
            seed: common.seed,
            workers: common.workers,
            outputs: self.outputs.clone(),
        };
        fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Data(format!("file not found: {}", path.display())));
    }
    Ok(())
}

/// Reads target coefficients: a CSV with `real` and `imag` columns, one row
/// per basis state in index order.
pub fn read_target_csv(path: &Path, normalize: bool) -> Result<Vec<C64>> {
    #[derive(serde::Deserialize)]
    struct Row {
        real: f64,
        imag: f64,
    }
    let mut amps = Vec::new();
    for row in csv::Reader::from_path(path)?.deserialize() {
        let r: Row = row?;
        amps.push(C64::new(r.real, r.imag));
    }
    if amps.len() < 2 || !amps.len().is_power_of_two() {
        return Err(Error::Data(format!("target has {} coefficients, need a power of two >= 2", amps.len())));
    }
    let state = if normalize { Statevector::normalized(amps)? } else { Statevector::from_amplitudes(amps)? };
    Ok(state.into_amplitudes())
}

/// Target and model amplitudes, with the model's global phase aligned to the
/// target.
pub fn write_amplitudes_csv(path: &Path, target: &[C64], model: &Statevector) -> Result<()> {
    let overlap: C64 = target.iter().zip(model.amplitudes()).map(|(t, m)| t.conj() * m).sum();
    let align = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { C64::new(1.0, 0.0) };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "target_real", "target_imag", "model_real", "model_imag"])?;
    for (i, (t, m)) in target.iter().zip(model.amplitudes()).enumerate() {
        let m = m * align;
        w.write_record([i.to_string(), t.re.to_string(), t.im.to_string(), m.re.to_string(), m.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn encode(args: &EncodeArgs, argv: &[String]) -> Result<()> {
    if let Some(t) = &args.target {
        require_file(t)?;
    }
    let mut run = Run::start(&args.common)?;
    let target = match (&args.target, args.pair) {
        (Some(path), _) => read_target_csv(path, args.normalize)?,
        (None, Some(pair)) => {
            let split = IrisSplit { test_ids: vec![args.test_id], ..IrisSplit::default_for(pair) };
            let (train_set, tests) = data::load_iris(None, pair, &split)?;
            let problem = ChcProblem::new(train_set, tests, args.norm, PhiChoice::Auto)?;
            problem.psi_init(&problem.tests[0])?.into_amplitudes()
        }
        (None, None) => return Err(Error::InvalidArgument("encode needs --target or --pair".into())),
    };
    let n = target.len().trailing_zeros() as usize;
    let (spec, init) = random_init(n, args.train.layers, args.common.seed)?;
    let config = args.train.config(args.common.seed, args.common.workers);
    let (params, trace) = train(&spec, &init, &target, &config)?;
    trace.write(run.path("trace.json"))?;
    write_amplitudes_csv(&run.path("amplitudes.csv"), &target, &spec.build_state(&params)?)?;
    eprintln!("final exact fidelity {:.6} after {} iterations", trace.final_exact_fidelity(), trace.records.len());
    run.finish("encode", argv, args, &args.common)
}

fn classify(
    run: &mut Run<'_>,
    train_set: TrainingSet,
    tests: Vec<TestSample>,
    args: &ClassifyArgs,
    common: &CommonArgs,
) -> Result<Vec<ClassificationRow>> {
    let problem = ChcProblem::new(train_set, tests, args.norm, args.phi)?;
    let layout = problem.layout();
    let mut rows = Vec::new();
    let mut readout_rng = ChaCha8Rng::seed_from_u64(common.seed ^ 0x5eed);
    for (k, test) in problem.tests.iter().enumerate() {
        let result: ClassificationResult = match args.mode {
            Mode::Exact => classify_exact(&problem.psi_init(test)?, &layout)?,
            Mode::Trained => {
                let seed = common.seed.wrapping_add(k as u64);
                let config = args.train.config(seed, common.workers);
                let target = problem.psi_init(test)?.into_amplitudes();
                let (spec, init) = random_init(layout.total_qubits(), args.train.layers, seed)?;
                let (params, trace) = train(&spec, &init, &target, &config)?;
                fs::create_dir_all(run.out_dir.join("traces"))?;
                trace.write(run.path(&format!("traces/trace_{}.json", test.id)))?;
                crate::chc::classify_trained(&spec, &params, &layout, args.readout_shots, &mut readout_rng)?
            }
        };
        rows.push(ClassificationRow::new(test, &result));
    }
    let file = fs::File::create(run.path("results.csv"))?;
    write_results_csv(file, &rows)?;
    let correct = rows.iter().filter(|r| r.correct).count();
    eprintln!("{correct} of {} test samples classified correctly", rows.len());
    Ok(rows)
}

fn classify_iris(args: &IrisArgs, argv: &[String]) -> Result<()> {
    if let Some(p) = &args.data {
        require_file(p)?;
    }
    let mut run = Run::start(&args.common)?;
    let mut split = IrisSplit::default_for(args.pair);
    if let Some(ids) = &args.train_ids {
        split.train_ids = ids.clone();
    }
    if let Some(ids) = &args.test_ids {
        split.test_ids = ids.clone();
    }
    let (train_set, tests) = data::load_iris(args.data.as_deref(), args.pair, &split)?;
    classify(&mut run, train_set, tests, &args.classify, &args.common)?;
    run.finish("classify-iris", argv, args, &args.common)
}

fn classify_fraud(args: &FraudArgs, argv: &[String]) -> Result<()> {
    let path = match &args.data {
        Some(p) => p.clone(),
        None => data::default_creditcard_path().ok_or_else(|| {
            Error::Data(format!("no --data given and ${} does not contain {}", data::DATA_DIR_ENV, data::CREDITCARD_FILE))
        })?,
    };
    require_file(&path)?;
    let mut run = Run::start(&args.common)?;
    let mut split = CreditCardSplit { features: args.features.clone(), ..Default::default() };
    if let Some(ids) = &args.normal_ids {
        split.normal_train_ids = ids.clone();
    }
    if let Some(ids) = &args.fraud_ids {
        split.fraud_train_ids = ids.clone();
    }
    if let Some(ids) = &args.test_ids {
        split.test_ids = ids.clone();
    }
    let d = data::read_creditcard(&path, &split)?;
    eprintln!("{} transactions, {} fraudulent", d.total_rows, d.fraud_rows);
    classify(&mut run, d.train, d.tests, &args.classify, &args.common)?;
    run.finish("classify-fraud", argv, args, &args.common)
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n_shot: usize,
    pub exact: f64,
    pub mean: f64,
    pub bias: f64,
    pub std_dev: f64,
    pub rmse: f64,
    /// Epsilon whose fidelity budget equals this snapshot count.
    pub epsilon_bound: f64,
}

pub fn bench_shadow(qubits: usize, layers: usize, shots: &[usize], repeats: usize, seed: u64, exec: &Executor) -> Result<Vec<BenchRow>> {
    if repeats < 2 {
        return Err(Error::InvalidArgument("--repeats must be at least 2".into()));
    }
    let (s1, p1) = random_init(qubits, layers, seed)?;
    let (s2, p2) = random_init(qubits, layers, seed.wrapping_add(1))?;
    let (state, target) = (s1.build_state(&p1)?, s2.build_state(&p2)?);
    let exact = state.fidelity(&target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &n_shot in shots {
        let values = (0..repeats)
            .map(|_| Ok(sampled_fidelity(&state, target.amplitudes(), n_shot, &mut rng, exec)?.value))
            .collect::<Result<Vec<f64>>>()?;
        let mean = values.iter().sum::<f64>() / repeats as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64;
        let mse = values.iter().map(|v| (v - exact).powi(2)).sum::<f64>() / repeats as f64;
        // smallest epsilon whose fidelity budget fits in n_shot
        let eps = (2f64.ln() / n_shot as f64).sqrt();
        rows.push(BenchRow { n_shot, exact, mean, bias: mean - exact, std_dev: var.sqrt(), rmse: mse.sqrt(), epsilon_bound: eps });
    }
    Ok(rows)
}

fn bench(args: &BenchArgs, argv: &[String]) -> Result<()> {
    let mut run = Run::start(&args.common)?;
    let exec = Executor::new(args.common.workers)?;
    let rows = bench_shadow(args.qubits, args.layers, &args.shots, args.repeats, args.common.seed, &exec)?;
    let mut w = csv::Writer::from_path(run.path("bench.csv"))?;
    for r in &rows {
        w.serialize(r)?;
        eprintln!("n_shot {:>6}: bias {:+.4}, std {:.4}", r.n_shot, r.bias, r.std_dev);
    }
    w.flush()?;
    run.finish("bench-shadow", argv, args, &args.common)
}

fn verify_cmd(args: &VerifyArgs, argv: &[String]) -> Result<()> {
    let mut run = Run::start(&args.common)?;
    let checks = verify::run_all(args.common.seed)?;
    fs::write(run.path("verify.json"), serde_json::to_string_pretty(&json!({ "checks": checks }))? + "\n")?;
    for c in &checks {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    run.finish("verify", argv, args, &args.common)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Error::Numeric(format!("checks failed: {}", failed.join(", "))));
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Encode(a) => encode(a, &argv),
        Command::ClassifyIris(a) => classify_iris(a, &argv),
        Command::ClassifyFraud(a) => classify_fraud(a, &argv),
        Command::BenchShadow(a) => bench(a, &argv),
        Command::Verify(a) => verify_cmd(a, &argv),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let category = e.category();
            eprintln!("{}", json!({ "error": { "category": category.as_str(), "message": e.to_string() } }));
            category.exit_code()
        }
    }
}
