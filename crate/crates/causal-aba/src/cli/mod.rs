//! Batch command-line front end.
//!
//! Five commands tie the pipeline together: `discover` runs causal
//! discovery on a dataset (or a known graph) and writes the selected
//! structure plus a run log; `simulate` samples datasets from Bayesian
//! networks or random linear-Gaussian models; `eval` scores an estimated
//! graph against a ground truth; `bench` runs the full dataset × method ×
//! seed grid and aggregates; `aba enumerate` lists the extensions of an
//! argumentation framework under a chosen semantics.
//!
//! Every command is deterministic given its inputs and seeds — worker
//! counts (env `CAUSAL_ABA_WORKERS`) change wall time, never bytes.
//! Exit codes: 0 success, 1 input error, 2 timeout.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::aba::{AbaFramework, EnumLimits, Semantics};
use crate::abapc::{run_abapc, AbapcConfig, AbapcError};
use crate::citest::{CiTester, Dataset, FisherZ, OracleTester};
use crate::data::{
    ancestral_sample, parse_bif, random_dag, read_csv_path, sem_sample, write_csv_path, BayesNet,
    SemSpec,
};
use crate::facts::mpc::{majority_pc, MpcOptions, MpcResult};
use crate::graph::{format_edge_list, parse_edge_list, Dag, Pdag};
use crate::eval::MetricsReport;
use crate::solver::{SolveMode, SolverConfig};

/// Environment variable naming the worker count for the benchmark grid.
pub const WORKERS_ENV: &str = "CAUSAL_ABA_WORKERS";

/// Cap on Markov-equivalence-class expansion during metric computation.
pub const DEFAULT_MEC_CAP: usize = 100_000;

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

/// Everything a command can fail with, already sorted into the two
/// non-zero exit classes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable, or contradictory inputs — exit code 1.
    Input(String),
    /// A time budget ran out — exit code 2.
    Timeout(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Timeout(msg) => write!(f, "timeout: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// The stable exit-code mapping: input errors 1, timeouts 2.
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Input(_) => 1,
        CliError::Timeout(_) => 2,
    }
}

fn input_err(err: impl fmt::Display) -> CliError {
    CliError::Input(err.to_string())
}

fn in_file(path: &Path, err: impl fmt::Display) -> CliError {
    CliError::Input(format!("{}: {err}", path.display()))
}

impl From<AbapcError> for CliError {
    fn from(err: AbapcError) -> Self {
        match err {
            AbapcError::Budget { .. } => CliError::Timeout(err.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// Flag-level types
// ---------------------------------------------------------------------------

/// Discovery method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Method {
    /// Fact-dropping discovery over weighted test results.
    Abapc,
    /// The majority-vote skeleton/collider baseline alone.
    Mpc,
    /// A seeded random DAG — the floor any method must beat.
    Random,
    /// Exact d-separation answers from a known graph.
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Abapc => "abapc",
            Method::Mpc => "mpc",
            Method::Random => "random",
            Method::Oracle => "oracle",
        }
    }
}

/// Solver mode flag; mirrored into [`SolverConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverModeArg {
    /// Enumerate every DAG satisfying all facts.
    Hard,
    /// Return only maximum-weight DAGs.
    Soft,
}

impl From<SolverModeArg> for SolveMode {
    fn from(m: SolverModeArg) -> SolveMode {
        match m {
            SolverModeArg::Hard => SolveMode::Hard,
            SolverModeArg::Soft => SolveMode::Soft,
        }
    }
}

// ---------------------------------------------------------------------------
// Command-line grammar
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "causal-aba",
    version,
    about = "Causal discovery by argumentation over conditional-independence facts",
    long_about = "Causal discovery by argumentation over conditional-independence facts.\n\
                  Outputs are deterministic given inputs and seeds; the environment\n\
                  variable CAUSAL_ABA_WORKERS sets the benchmark worker count without\n\
                  affecting results. Exit codes: 0 success, 1 input error, 2 timeout."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Discover a causal graph from data (or from a known graph, as an oracle)
    Discover(DiscoverArgs),
    /// Sample a dataset from a Bayesian network or a random linear-Gaussian model
    Simulate(SimulateArgs),
    /// Score an estimated graph against a ground-truth DAG
    Eval(EvalArgs),
    /// Run the dataset x method x seed benchmark grid and aggregate
    Bench(BenchArgs),
    /// Argumentation-framework utilities
    Aba(AbaArgs),
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// CSV dataset (methods: abapc, mpc, random)
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Ground-truth edge list (method: oracle)
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Significance level for independence tests
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Discovery method
    #[arg(long, value_enum, default_value_t = Method::Abapc)]
    pub method: Method,
    /// Seed (used by the random baseline)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Wall-clock budget for the solve, in seconds
    #[arg(long = "time-budget-s", value_name = "S", default_value_t = 3600)]
    pub time_budget_s: u64,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Score satisfied dependences as +S instead of the literal rule
    #[arg(long)]
    pub symmetric_scoring: bool,
    /// Solver mode (recorded; discovery manages hard/soft itself)
    #[arg(long, value_enum, default_value_t = SolverModeArg::Hard)]
    pub solver: SolverModeArg,
    /// Largest conditioning-set size tested (default: all sizes)
    #[arg(long, value_name = "K")]
    pub max_cond: Option<usize>,
    /// Model cap before the soft fallback engages
    #[arg(long, value_name = "N", default_value_t = 100_000)]
    pub max_models: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Bayesian-network file to sample from
    #[arg(long, value_name = "FILE")]
    pub bif: Option<PathBuf>,
    /// Draw a random DAG over this many variables instead
    #[arg(long = "random-dag", value_name = "D")]
    pub random_dag: Option<usize>,
    /// Edge count for --random-dag (default: one per variable)
    #[arg(long, value_name = "M")]
    pub edges: Option<usize>,
    /// Structural-equation family for --random-dag
    #[arg(long, default_value = "linear-gaussian")]
    pub sem: String,
    /// Sample size
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    /// Seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth DAG edge list
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,
    /// Estimated graph edge list (may be partially directed)
    #[arg(long, value_name = "FILE")]
    pub estimate: PathBuf,
    /// Dataset label for the metrics row (default: truth file stem)
    #[arg(long)]
    pub dataset: Option<String>,
    /// Method label for the metrics row
    #[arg(long, default_value = "eval")]
    pub method: String,
    /// Seed label for the metrics row
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on equivalence-class expansion for interventional distances
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MEC_CAP)]
    pub mec_cap: usize,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Bayesian-network file(s); repeat the flag for several
    #[arg(long, value_name = "FILE")]
    pub bif: Vec<PathBuf>,
    /// Random linear-Gaussian benchmark size(s); repeat for several
    #[arg(long = "random-dag", value_name = "D")]
    pub random_dag: Vec<usize>,
    /// Edge count for --random-dag benchmarks (default: one per variable)
    #[arg(long, value_name = "M")]
    pub edges: Option<usize>,
    /// Methods to compare
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Abapc, Method::Mpc, Method::Random])]
    pub methods: Vec<Method>,
    /// Number of seeds (runs seeds 0..N-1)
    #[arg(long, default_value_t = 50)]
    pub seeds: u64,
    /// Sample size per seed
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    /// Significance level for independence tests
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Wall-clock budget per solve, in seconds
    #[arg(long = "time-budget-s", value_name = "S", default_value_t = 3600)]
    pub time_budget_s: u64,
    /// Emit a grouped bar chart of mean normalized intervention distance
    #[arg(long)]
    pub svg: bool,
    /// Cap on equivalence-class expansion for interventional distances
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MEC_CAP)]
    pub mec_cap: usize,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AbaArgs {
    #[command(subcommand)]
    pub command: AbaSub,
}

#[derive(Debug, Subcommand)]
pub enum AbaSub {
    /// Enumerate the extensions of a framework under a semantics
    Enumerate(AbaEnumerateArgs),
}

#[derive(Debug, Args)]
pub struct AbaEnumerateArgs {
    /// Framework file: `head <- a1,a2` rules and `contrary(a)=c` lines
    #[arg(long, value_name = "FILE")]
    pub framework: PathBuf,
    /// conflict-free | admissible | complete | grounded | preferred | stable
    #[arg(long, default_value = "stable")]
    pub semantics: String,
    /// Refuse frameworks with more assumptions than this
    #[arg(long, value_name = "N")]
    pub max_assumptions: Option<usize>,
}

// ---------------------------------------------------------------------------
// RunConfig: the validated domain form of a command line
// ---------------------------------------------------------------------------

/// Which pipeline command a [`RunConfig`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Discover,
    Simulate,
    Eval,
    Bench,
}

/// One validated run: the union of the pipeline commands' knobs.
///
/// Invariants enforced by [`RunConfig::validate`]: exactly one input
/// source per run (`data` | `graph` | `bif`(s) | `random_dag`(s); the
/// grid command accepts several datasets of its one source kind), and
/// `alpha ∈ (0, 1)`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub data: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub bif: Vec<PathBuf>,
    pub random_dag: Vec<usize>,
    pub edges: Option<usize>,
    pub alpha: f64,
    pub method: Method,
    pub methods: Vec<Method>,
    pub n: usize,
    pub seed: u64,
    pub seeds: u64,
    pub time_budget: Duration,
    pub out: PathBuf,
    pub symmetric_scoring: bool,
    pub solver_mode: SolveMode,
    pub max_cond: Option<usize>,
    pub max_models: usize,
    pub mec_cap: usize,
    pub svg: bool,
}

impl RunConfig {
    /// Checks the cross-flag invariants the grammar cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha >= 1.0 {
            return Err(CliError::Input(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        let sources = [
            self.data.is_some(),
            self.graph.is_some(),
            !self.bif.is_empty(),
            !self.random_dag.is_empty(),
        ];
        let kinds = sources.iter().filter(|&&s| s).count();
        match self.command {
            CommandKind::Discover | CommandKind::Simulate => {
                if kinds != 1 {
                    return Err(CliError::Input(
                        "exactly one input source is required (--data | --graph | --bif | --random-dag)"
                            .into(),
                    ));
                }
            }
            CommandKind::Bench => {
                if kinds != 1 {
                    return Err(CliError::Input(
                        "pick one benchmark source kind: --bif file(s) or --random-dag size(s)"
                            .into(),
                    ));
                }
                if self.seeds == 0 {
                    return Err(CliError::Input("--seeds must be at least 1".into()));
                }
                if self.methods.is_empty() {
                    return Err(CliError::Input("--methods must name at least one method".into()));
                }
            }
            CommandKind::Eval => {}
        }
        if self.n == 0 {
            return Err(CliError::Input("sample size must be at least 1".into()));
        }
        Ok(())
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            mode: self.solver_mode,
            max_models: self.max_models,
            time_budget: self.time_budget,
            workers: workers_from_env().max(1),
        }
    }

    fn abapc_config(&self) -> AbapcConfig {
        AbapcConfig {
            solver: self.solver_config(),
            symmetric_scoring: self.symmetric_scoring,
        }
    }
}

impl From<&DiscoverArgs> for RunConfig {
    fn from(a: &DiscoverArgs) -> Self {
        RunConfig {
            command: CommandKind::Discover,
            data: a.data.clone(),
            graph: a.graph.clone(),
            bif: Vec::new(),
            random_dag: Vec::new(),
            edges: None,
            alpha: a.alpha,
            method: a.method,
            methods: vec![a.method],
            n: 1,
            seed: a.seed,
            seeds: 1,
            time_budget: Duration::from_secs(a.time_budget_s.max(1)),
            out: a.out.clone(),
            symmetric_scoring: a.symmetric_scoring,
            solver_mode: a.solver.into(),
            max_cond: a.max_cond,
            max_models: a.max_models,
            mec_cap: DEFAULT_MEC_CAP,
            svg: false,
        }
    }
}

impl From<&SimulateArgs> for RunConfig {
    fn from(a: &SimulateArgs) -> Self {
        RunConfig {
            command: CommandKind::Simulate,
            data: None,
            graph: None,
            bif: a.bif.clone().into_iter().collect(),
            random_dag: a.random_dag.into_iter().collect(),
            edges: a.edges,
            alpha: 0.05,
            method: Method::Abapc,
            methods: Vec::new(),
            n: a.n,
            seed: a.seed,
            seeds: 1,
            time_budget: Duration::from_secs(3600),
            out: a.out.clone(),
            symmetric_scoring: false,
            solver_mode: SolveMode::Hard,
            max_cond: None,
            max_models: 100_000,
            mec_cap: DEFAULT_MEC_CAP,
            svg: false,
        }
    }
}

impl From<&BenchArgs> for RunConfig {
    fn from(a: &BenchArgs) -> Self {
        RunConfig {
            command: CommandKind::Bench,
            data: None,
            graph: None,
            bif: a.bif.clone(),
            random_dag: a.random_dag.clone(),
            edges: a.edges,
            alpha: a.alpha,
            method: Method::Abapc,
            methods: a.methods.clone(),
            n: a.n,
            seed: 0,
            seeds: a.seeds,
            time_budget: Duration::from_secs(a.time_budget_s.max(1)),
            out: a.out.clone(),
            symmetric_scoring: false,
            solver_mode: SolveMode::Hard,
            max_cond: None,
            max_models: 100_000,
            mec_cap: a.mec_cap,
            svg: a.svg,
        }
    }
}

fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Parses `argv`, runs the command, and returns the process exit code.
/// Argument errors print to stderr and return 1 (help/version print to
/// stdout and return 0); command failures print and map per
/// [`exit_code`].
pub fn main_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap renders help to stdout and errors to stderr by itself
            let _ = err.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("causal-aba: {err}");
            exit_code(&err)
        }
    }
}

/// Dispatches one parsed command.
pub fn run(cmd: &CliCommand) -> Result<(), CliError> {
    match cmd {
        CliCommand::Discover(a) => {
            let cfg = RunConfig::from(a);
            cfg.validate()?;
            cmd_discover(&cfg)
        }
        CliCommand::Simulate(a) => {
            let cfg = RunConfig::from(a);
            cfg.validate()?;
            cmd_simulate(&cfg)
        }
        CliCommand::Eval(a) => cmd_eval(a),
        CliCommand::Bench(a) => {
            let cfg = RunConfig::from(a);
            cfg.validate()?;
            cmd_bench(&cfg)
        }
        CliCommand::Aba(a) => match &a.command {
            AbaSub::Enumerate(e) => cmd_aba_enumerate(e),
        },
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| in_file(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| in_file(path, e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| in_file(path, e))
}

// ---------------------------------------------------------------------------
// discover
// ---------------------------------------------------------------------------

/// What one discovery produced, before it is written out.
struct Discovery {
    /// The point estimate as a DAG, when the method yields one.
    selected: Option<Dag>,
    /// The class-level estimate used for metrics.
    cpdag: Pdag,
    /// The sourced facts, when the method tests.
    facts_tsv: Option<String>,
    /// Method-specific log body.
    log: serde_json::Value,
}

/// Runs one discovery method over one input. `seed` only matters for the
/// random baseline.
fn run_method(
    method: Method,
    tester: Option<&dyn CiTester>,
    d: usize,
    seed: u64,
    cfg: &RunConfig,
) -> Result<Discovery, CliError> {
    match method {
        Method::Abapc | Method::Oracle => {
            let tester = tester.expect("testing methods have a tester");
            let MpcResult { facts, .. } = majority_pc(
                tester,
                &MpcOptions { alpha: cfg.alpha, max_cond: cfg.max_cond },
            )
            .map_err(input_err)?;
            let run = run_abapc(&facts, &cfg.abapc_config())?;
            let log = json!({
                "tests_performed": facts.len(),
                "run": serde_json::from_str::<serde_json::Value>(&run.to_json())
                    .expect("run log serializes"),
            });
            Ok(Discovery {
                cpdag: run.selected.to_cpdag(),
                facts_tsv: Some(facts.to_tsv()),
                selected: Some(run.selected),
                log,
            })
        }
        Method::Mpc => {
            let tester = tester.expect("testing methods have a tester");
            let MpcResult { facts, cpdag } = majority_pc(
                tester,
                &MpcOptions { alpha: cfg.alpha, max_cond: cfg.max_cond },
            )
            .map_err(input_err)?;
            let log = json!({
                "tests_performed": facts.len(),
                "estimate": {
                    "directed": cpdag.directed(),
                    "undirected": cpdag.undirected(),
                },
            });
            Ok(Discovery { selected: None, cpdag, facts_tsv: Some(facts.to_tsv()), log })
        }
        Method::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max_edges = d * (d - 1) / 2;
            let m = rng.gen_range(0..=max_edges);
            let g = random_dag(d, m, rng.gen()).map_err(input_err)?;
            let log = json!({ "edges": m, "selected": g.edges() });
            Ok(Discovery {
                cpdag: g.to_cpdag(),
                selected: Some(g),
                facts_tsv: None,
                log,
            })
        }
    }
}

fn cmd_discover(cfg: &RunConfig) -> Result<(), CliError> {
    // Resolve the input into (tester, d, names).
    let fisher; // keeps the tester alive across the match
    let oracle;
    let (tester, d, names): (Option<&dyn CiTester>, usize, Vec<String>) = match cfg.method {
        Method::Oracle => {
            let path = cfg.graph.as_ref().ok_or_else(|| {
                CliError::Input("--method oracle needs --graph <edge list>".into())
            })?;
            let (pdag, names) = parse_edge_list(&read_text(path)?).map_err(|e| in_file(path, e))?;
            let dag = pdag.to_dag().map_err(|e| {
                in_file(path, format!("oracle input must be a DAG: {e}"))
            })?;
            let d = dag.d();
            oracle = OracleTester::new(dag);
            (Some(&oracle as &dyn CiTester), d, names)
        }
        Method::Abapc | Method::Mpc => {
            let path = cfg.data.as_ref().ok_or_else(|| {
                CliError::Input(format!("--method {} needs --data <csv>", cfg.method.name()))
            })?;
            let ds = read_csv_path(path).map_err(|e| in_file(path, e))?;
            let names = ds.names().to_vec();
            let d = ds.d();
            fisher = FisherZ::new(&ds).map_err(|e| in_file(path, e))?;
            (Some(&fisher as &dyn CiTester), d, names)
        }
        Method::Random => {
            let path = cfg.data.as_ref().ok_or_else(|| {
                CliError::Input("--method random needs --data <csv> (for the variable set)".into())
            })?;
            let ds = read_csv_path(path).map_err(|e| in_file(path, e))?;
            (None, ds.d(), ds.names().to_vec())
        }
    };

    let result = run_method(cfg.method, tester, d, cfg.seed, cfg)?;

    ensure_out_dir(&cfg.out)?;
    if let Some(tsv) = &result.facts_tsv {
        write_text(&cfg.out.join("facts.tsv"), tsv)?;
    }
    if let Some(dag) = &result.selected {
        write_text(
            &cfg.out.join("selected.edges"),
            &format_edge_list(&Pdag::from_dag(dag), Some(&names)),
        )?;
    }
    write_text(
        &cfg.out.join("selected.cpdag"),
        &format_edge_list(&result.cpdag, Some(&names)),
    )?;

    let log = json!({
        "command": "discover",
        "method": cfg.method.name(),
        "alpha": cfg.alpha,
        "d": d,
        "seed": cfg.seed,
        "solver_mode": cfg.solver_mode.to_string(),
        "symmetric_scoring": cfg.symmetric_scoring,
        "detail": result.log,
    });
    write_text(
        &cfg.out.join("run.json"),
        &format!("{}\n", serde_json::to_string_pretty(&log).expect("log is valid JSON")),
    )?;
    println!(
        "discover: method {} over {} variables -> {}",
        cfg.method.name(),
        d,
        cfg.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// Samples one dataset and its ground truth per the config. Shared by
/// `simulate` and each benchmark cell.
fn sample_dataset(
    source: &DatasetSource,
    n: usize,
    seed: u64,
) -> Result<(Dataset, Dag, Vec<String>), CliError> {
    match source {
        DatasetSource::Bif(net) => {
            let ds = ancestral_sample(net, n, seed).map_err(input_err)?;
            Ok((ds, net.structure().clone(), net.variable_names()))
        }
        DatasetSource::Sem { d, edges } => {
            let g = random_dag(*d, *edges, seed).map_err(input_err)?;
            let spec = SemSpec::random(g.clone(), seed);
            let ds = sem_sample(&spec, n).map_err(input_err)?;
            let names = ds.names().to_vec();
            Ok((ds, g, names))
        }
    }
}

/// Where a benchmark/simulation dataset comes from.
enum DatasetSource {
    /// A fixed network: same truth every seed, fresh samples.
    Bif(BayesNet),
    /// A linear-Gaussian model over a fresh random DAG per seed.
    Sem { d: usize, edges: usize },
}

fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let source = if let Some(path) = cfg.bif.first() {
        DatasetSource::Bif(parse_bif(&read_text(path)?).map_err(|e| in_file(path, e))?)
    } else {
        let d = cfg.random_dag[0];
        DatasetSource::Sem { d, edges: cfg.edges.unwrap_or(d) }
    };
    let (ds, truth, names) = sample_dataset(&source, cfg.n, cfg.seed)?;

    ensure_out_dir(&cfg.out)?;
    let csv_path = cfg.out.join("data.csv");
    write_csv_path(&ds, &csv_path).map_err(|e| in_file(&csv_path, e))?;
    write_text(
        &cfg.out.join("truth.edges"),
        &format_edge_list(&Pdag::from_dag(&truth), Some(&names)),
    )?;
    println!(
        "simulate: {} rows over {} variables -> {}",
        ds.n(),
        ds.d(),
        cfg.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let (truth_pdag, _) =
        parse_edge_list(&read_text(&args.truth)?).map_err(|e| in_file(&args.truth, e))?;
    let truth = truth_pdag
        .to_dag()
        .map_err(|e| in_file(&args.truth, format!("truth must be a DAG: {e}")))?;
    let (estimate, _) =
        parse_edge_list(&read_text(&args.estimate)?).map_err(|e| in_file(&args.estimate, e))?;

    let report = MetricsReport::compute(&truth, &estimate, args.mec_cap).map_err(input_err)?;
    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.truth
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let row = report.to_json_row(&dataset, args.seed, &args.method, 0.0);
    let rendered = serde_json::to_string_pretty(&row).expect("metrics row is valid JSON");

    ensure_out_dir(&args.out)?;
    write_text(&args.out.join("metrics.json"), &format!("{rendered}\n"))?;
    println!("{rendered}");
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

/// One benchmark grid cell, fully keyed.
struct Cell {
    dataset: String,
    source_index: usize,
    method: Method,
    seed: u64,
}

fn cmd_bench(cfg: &RunConfig) -> Result<(), CliError> {
    // Materialize the dataset sources once.
    let mut sources: Vec<(String, DatasetSource)> = Vec::new();
    for path in &cfg.bif {
        let net = parse_bif(&read_text(path)?).map_err(|e| in_file(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bif".into());
        sources.push((name, DatasetSource::Bif(net)));
    }
    for &d in &cfg.random_dag {
        let edges = cfg.edges.unwrap_or(d);
        sources.push((format!("sem-d{d}"), DatasetSource::Sem { d, edges }));
    }

    let cells: Vec<Cell> = sources
        .iter()
        .enumerate()
        .flat_map(|(i, (name, _))| {
            cfg.methods.iter().flat_map(move |&method| {
                (0..cfg.seeds).map(move |seed| Cell {
                    dataset: name.clone(),
                    source_index: i,
                    method,
                    seed,
                })
            })
        })
        .collect();

    // The grid runs in parallel; every cell is self-contained and seeded,
    // so the row set is identical for any worker count.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers_from_env())
        .build()
        .map_err(|e| CliError::Input(format!("worker pool: {e}")))?;
    use rayon::prelude::*;
    let rows: Vec<serde_json::Value> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| bench_cell(cell, &sources[cell.source_index].1, cfg))
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    // Canonical order: dataset, method, seed.
    let mut rows = rows;
    rows.sort_by_key(|r| {
        (
            r["dataset"].as_str().unwrap_or("").to_string(),
            r["method"].as_str().unwrap_or("").to_string(),
            r["seed"].as_u64().unwrap_or(0),
        )
    });

    ensure_out_dir(&cfg.out)?;
    let mut jsonl = String::new();
    for row in &rows {
        jsonl.push_str(&serde_json::to_string(row).expect("row is valid JSON"));
        jsonl.push('\n');
    }
    write_text(&cfg.out.join("rows.jsonl"), &jsonl)?;

    let summary = aggregate_rows(&rows);
    write_text(
        &cfg.out.join("summary.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary).expect("summary is valid JSON")),
    )?;

    if cfg.svg {
        let chart = render_nsid_chart(&summary);
        write_text(&cfg.out.join("chart.svg"), &chart)?;
    }
    println!(
        "bench: {} rows over {} dataset(s) x {} method(s) x {} seed(s) -> {}",
        rows.len(),
        sources.len(),
        cfg.methods.len(),
        cfg.seeds,
        cfg.out.display()
    );
    Ok(())
}

fn bench_cell(cell: &Cell, source: &DatasetSource, cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let started = Instant::now();
    let (ds, truth, _names) = sample_dataset(source, cfg.n, cell.seed)?;

    let est_cpdag = match cell.method {
        Method::Abapc | Method::Mpc => {
            let fisher = FisherZ::new(&ds).map_err(input_err)?;
            run_method(cell.method, Some(&fisher), ds.d(), cell.seed, cfg)?.cpdag
        }
        Method::Random => run_method(cell.method, None, ds.d(), cell.seed, cfg)?.cpdag,
        Method::Oracle => {
            let oracle = OracleTester::new(truth.clone());
            run_method(Method::Oracle, Some(&oracle), ds.d(), cell.seed, cfg)?.cpdag
        }
    };

    let report = MetricsReport::compute(&truth, &est_cpdag, cfg.mec_cap).map_err(input_err)?;
    let elapsed = started.elapsed().as_secs_f64();
    Ok(report.to_json_row(&cell.dataset, cell.seed, cell.method.name(), elapsed))
}

/// The metric columns summarized per (dataset, method) group.
const SUMMARY_METRICS: [&str; 9] = [
    "shd", "nshd", "sid_low", "sid_high", "nsid_low", "nsid_high", "precision", "recall", "f1",
];

/// Mean and sample standard deviation (n−1; zero for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, std)
}

/// Groups rows by (dataset, method) and attaches mean ± std per metric,
/// in the rows' (already canonical) order.
pub fn aggregate_rows(rows: &[serde_json::Value]) -> serde_json::Value {
    let mut groups: Vec<(String, String, Vec<&serde_json::Value>)> = Vec::new();
    for row in rows {
        let dataset = row["dataset"].as_str().unwrap_or("").to_string();
        let method = row["method"].as_str().unwrap_or("").to_string();
        match groups.iter_mut().find(|(d, m, _)| *d == dataset && *m == method) {
            Some((_, _, members)) => members.push(row),
            None => groups.push((dataset, method, vec![row])),
        }
    }
    let summaries: Vec<serde_json::Value> = groups
        .iter()
        .map(|(dataset, method, members)| {
            let mut metrics = serde_json::Map::new();
            for &name in &SUMMARY_METRICS {
                let xs: Vec<f64> = members
                    .iter()
                    .filter_map(|r| r[name].as_f64())
                    .collect();
                let (mean, std) = mean_std(&xs);
                metrics.insert(name.to_string(), json!({ "mean": mean, "std": std }));
            }
            json!({
                "dataset": dataset,
                "method": method,
                "seeds": members.len(),
                "metrics": metrics,
            })
        })
        .collect();
    json!(summaries)
}

// ---------------------------------------------------------------------------
// SVG chart
// ---------------------------------------------------------------------------

fn method_color(method: &str) -> &'static str {
    match method {
        "abapc" => "#4c78a8",
        "mpc" => "#f58518",
        "random" => "#54a24b",
        "oracle" => "#e45756",
        _ => "#9d9d9d",
    }
}

/// Renders mean `nsid_high` ± std per (dataset, method) as a grouped bar
/// chart. Self-contained static SVG, no external references.
pub fn render_nsid_chart(summary: &serde_json::Value) -> String {
    let empty = Vec::new();
    let entries = summary.as_array().unwrap_or(&empty);
    let mut datasets: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    let mut bars: Vec<(String, String, f64, f64)> = Vec::new();
    for e in entries {
        let dataset = e["dataset"].as_str().unwrap_or("").to_string();
        let method = e["method"].as_str().unwrap_or("").to_string();
        let mean = e["metrics"]["nsid_high"]["mean"].as_f64().unwrap_or(0.0);
        let std = e["metrics"]["nsid_high"]["std"].as_f64().unwrap_or(0.0);
        if !datasets.contains(&dataset) {
            datasets.push(dataset.clone());
        }
        if !methods.contains(&method) {
            methods.push(method.clone());
        }
        bars.push((dataset, method, mean, std));
    }

    let bar_w = 34.0;
    let gap = 28.0;
    let group_w = methods.len() as f64 * bar_w;
    let left = 64.0;
    let top = 44.0;
    let plot_h = 240.0;
    let bottom = top + plot_h;
    let width = left + datasets.len() as f64 * (group_w + gap) + 140.0;
    let height = bottom + 60.0;
    let y_max = bars
        .iter()
        .map(|&(_, _, m, s)| m + s)
        .fold(0.0_f64, f64::max)
        .max(1e-9)
        * 1.1;
    let y = |v: f64| bottom - v / y_max * plot_h;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    s.push_str(&format!(
        "  <text x=\"{left}\" y=\"22\" font-size=\"14\">mean normalized intervention distance \
         (upper bound), error bars ± std</text>\n"
    ));
    // axes and ticks
    s.push_str(&format!(
        "  <line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{bottom}\" stroke=\"#333\"/>\n"
    ));
    s.push_str(&format!(
        "  <line x1=\"{left}\" y1=\"{bottom}\" x2=\"{:.1}\" y2=\"{bottom}\" stroke=\"#333\"/>\n",
        left + datasets.len() as f64 * (group_w + gap)
    ));
    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let yy = y(v);
        s.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{yy:.1}\" x2=\"{left}\" y2=\"{yy:.1}\" stroke=\"#333\"/>\n",
            left - 5.0
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{v:.2}</text>\n",
            left - 9.0,
            yy + 4.0
        ));
    }
    // bars
    for (di, dataset) in datasets.iter().enumerate() {
        let gx = left + gap / 2.0 + di as f64 * (group_w + gap);
        for (mi, method) in methods.iter().enumerate() {
            if let Some(&(_, _, mean, std)) =
                bars.iter().find(|(d, m, _, _)| d == dataset && m == method)
            {
                let x = gx + mi as f64 * bar_w;
                let yv = y(mean);
                s.push_str(&format!(
                    "  <rect x=\"{x:.1}\" y=\"{yv:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
                     fill=\"{}\"/>\n",
                    bar_w - 4.0,
                    bottom - yv,
                    method_color(method)
                ));
                if std > 0.0 {
                    let cx = x + (bar_w - 4.0) / 2.0;
                    let (y_hi, y_lo) = (y(mean + std), y((mean - std).max(0.0)));
                    s.push_str(&format!(
                        "  <line x1=\"{cx:.1}\" y1=\"{y_hi:.1}\" x2=\"{cx:.1}\" y2=\"{y_lo:.1}\" \
                         stroke=\"#333\"/>\n"
                    ));
                    for yy in [y_hi, y_lo] {
                        s.push_str(&format!(
                            "  <line x1=\"{:.1}\" y1=\"{yy:.1}\" x2=\"{:.1}\" y2=\"{yy:.1}\" \
                             stroke=\"#333\"/>\n",
                            cx - 5.0,
                            cx + 5.0
                        ));
                    }
                }
            }
        }
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{dataset}</text>\n",
            gx + group_w / 2.0,
            bottom + 18.0
        ));
    }
    // legend
    for (mi, method) in methods.iter().enumerate() {
        let lx = left + datasets.len() as f64 * (group_w + gap) + 16.0;
        let ly = top + mi as f64 * 22.0;
        s.push_str(&format!(
            "  <rect x=\"{lx:.1}\" y=\"{ly:.1}\" width=\"14\" height=\"14\" fill=\"{}\"/>\n",
            method_color(method)
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\">{method}</text>\n",
            lx + 20.0,
            ly + 12.0
        ));
    }
    s.push_str("</svg>\n");
    s
}

// ---------------------------------------------------------------------------
// aba enumerate
// ---------------------------------------------------------------------------

fn cmd_aba_enumerate(args: &AbaEnumerateArgs) -> Result<(), CliError> {
    let fw = AbaFramework::from_text(&read_text(&args.framework)?)
        .map_err(|e| in_file(&args.framework, e))?;
    let sem: Semantics = args.semantics.parse().map_err(CliError::Input)?;
    let mut limits = EnumLimits::default();
    if let Some(max) = args.max_assumptions {
        limits.max_assumptions = max;
    }
    let extensions = fw.semantics_enumerate(sem, &limits).map_err(input_err)?;
    for ext in &extensions {
        let members: Vec<&str> = ext.iter().collect();
        println!("{{{}}}", members.join(", "));
    }
    eprintln!("{} {} extension(s)", extensions.len(), sem);
    Ok(())
}
