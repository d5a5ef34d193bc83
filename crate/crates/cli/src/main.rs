use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sled_core::engine::{
    permutation_test, Centering, Method, PValueRule, RelationshipKind, TestConfig, DEFAULT_CUMULATIVE_CUT,
};
use sled_core::io::{self, MatrixFile, Orientation, ResultDocument, Runtime};
use sled_core::rng::RNG_ID;
use sled_core::simgen::{
    draw_repetition, power_study, BaseKind, DiffKind, Noise, PdShift, PowerTable, Scales, Scenario,
};
use sled_core::sparse_eig::{FpsOptions, PmdOptions, Solver};
use sled_core::{SledError, SymmetricMatrix};

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  2  invalid arguments or configuration (bad flags, mismatched dimensions, bad budget)
  3  data or runtime error (unreadable files, degenerate features, solver failure)";

fn version() -> &'static str {
    Box::leak(format!("{}\nrng: {RNG_ID}", env!("CARGO_PKG_VERSION")).into_boxed_str())
}

#[derive(Parser)]
#[command(name = "sled", version = version(), about = "Sparse leading-eigenvalue two-sample test for covariance matrices", after_help = EXIT_HELP)]
struct Cli {
    /// Worker threads; never changes any numeric output.
    #[arg(long, global = true, env = "SLED_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Permutation test of equal covariance (or correlation/adjacency) matrices.
    #[command(after_help = EXIT_HELP)]
    Test(TestArgs),
    /// Write one draw of (Sigma_1, Sigma_2, X, Y) from a simulation scenario.
    #[command(after_help = EXIT_HELP)]
    Simulate(SimulateArgs),
    /// Monte-Carlo power study over a JSON grid of scenarios.
    #[command(after_help = EXIT_HELP)]
    Power(PowerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Sled,
    Frobenius,
    Max,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sled => Method::Sled,
            MethodArg::Frobenius => Method::Frobenius,
            MethodArg::Max => Method::Max,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum KindArg {
    Covariance,
    Correlation,
    Adjacency,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Pmd,
    Fps,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Pmd => Solver::Pmd(PmdOptions::default()),
            SolverArg::Fps => Solver::Fps(FpsOptions::default()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    SamplesByFeatures,
    FeaturesBySamples,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    NoisyDiagonal,
    BlockDiagonal,
    ExpDecay,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiffArg {
    SparseBlock,
    SoftSparseSpiked,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Normal,
    Gamma,
    T12,
    NegBinomial,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalesArg {
    PerRepetition,
    PerScenario,
    Unit,
}

impl From<ScalesArg> for Scales {
    fn from(s: ScalesArg) -> Self {
        match s {
            ScalesArg::PerRepetition => Scales::PerRepetition,
            ScalesArg::PerScenario => Scales::PerScenario,
            ScalesArg::Unit => Scales::Unit,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Input files have no header row.
    #[arg(long)]
    no_header: bool,
    /// The first column of each input holds row labels.
    #[arg(long)]
    row_labels: bool,
    #[arg(long, value_enum, default_value = "samples-by-features")]
    orientation: OrientationArg,
}

impl InputArgs {
    fn file(&self, path: &Path) -> MatrixFile {
        MatrixFile {
            has_header: !self.no_header,
            row_labels: self.row_labels,
            orientation: match self.orientation {
                OrientationArg::SamplesByFeatures => Orientation::SamplesByFeatures,
                OrientationArg::FeaturesBySamples => Orientation::FeaturesBySamples,
            },
            ..MatrixFile::new(path)
        }
    }
}

#[derive(Args)]
struct TestArgs {
    /// First sample (CSV or TSV).
    x: PathBuf,
    /// Second sample, same features.
    y: PathBuf,
    #[arg(long, value_enum, default_value = "sled")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "correlation")]
    kind: KindArg,
    /// Soft-threshold power for --kind adjacency.
    #[arg(long)]
    beta: Option<f64>,
    /// Sparsity constant: sqrt(R) = c sqrt(p).
    #[arg(short, long, default_value_t = 0.1)]
    c: f64,
    #[arg(short = 'B', long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "pmd")]
    solver: SolverArg,
    /// Level used only for the printed verdict.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Report (1 + #{T* >= T}) / (B + 1) instead of #{T* > T} / B.
    #[arg(long)]
    add_one: bool,
    /// Center all samples at pooled means once instead of per group.
    #[arg(long)]
    global_centering: bool,
    /// Intersect the inputs on feature names instead of matching by position.
    #[arg(long)]
    align_by_name: bool,
    #[command(flatten)]
    input: InputArgs,
    /// Result document path (JSON); printed to stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    include_null_stats: bool,
    /// Omit the runtime section so documents compare byte for byte.
    #[arg(long)]
    reproducible: bool,
    /// Number of top-leverage features printed.
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    #[arg(long, default_value_t = DEFAULT_CUMULATIVE_CUT)]
    cumulative_cut: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    base: BaseArg,
    #[arg(long, value_enum, default_value = "sparse-block")]
    diff: DiffArg,
    #[arg(long, value_enum, default_value = "normal")]
    noise: NoiseArg,
    #[arg(short, default_value_t = 100)]
    n: usize,
    #[arg(short, default_value_t = 100)]
    m: usize,
    #[arg(short, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which repetition of the scenario to draw.
    #[arg(long, default_value_t = 0)]
    rep: usize,
    /// Sigma_2 = Sigma_1.
    #[arg(long)]
    null: bool,
    #[arg(long, value_enum, default_value = "per-repetition")]
    scales: ScalesArg,
    /// Add the positive-definiteness cushion only when an eigenvalue is negative.
    #[arg(long)]
    pd_shift_only_if_needed: bool,
    /// Directory receiving sigma1.csv, sigma2.csv, x.csv and y.csv.
    #[arg(short, long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PowerArgs {
    /// JSON array of scenarios.
    grid: PathBuf,
    /// Comma-separated methods.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sled,frobenius,max")]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "pmd")]
    solver: SolverArg,
    /// Replace the generated base covariance by this p x p matrix (CSV, no header).
    #[arg(long)]
    base_covariance: Option<PathBuf>,
    /// Power table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Power table as JSON; printed to stdout when neither output is given.
    #[arg(long)]
    json: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Sled(SledError),
}

impl From<SledError> for Failure {
    fn from(e: SledError) -> Self {
        Failure::Sled(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Sled(e) if e.is_validation() => 2,
            Failure::Sled(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Sled(e) => write!(f, "{e}"),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test(args) => cmd_test(args, cli.threads),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Power(args) => cmd_power(args, cli.threads),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|source| SledError::Io { path: path.to_path_buf(), source }.into())
}

fn relationship_kind(kind: KindArg, beta: Option<f64>) -> std::result::Result<RelationshipKind, Failure> {
    match (kind, beta) {
        (KindArg::Adjacency, Some(beta)) => Ok(RelationshipKind::Adjacency { beta }),
        (KindArg::Adjacency, None) => Err(Failure::Usage("--kind adjacency needs --beta".into())),
        (_, Some(_)) => Err(Failure::Usage("--beta only applies to --kind adjacency".into())),
        (KindArg::Covariance, None) => Ok(RelationshipKind::Covariance),
        (KindArg::Correlation, None) => Ok(RelationshipKind::Correlation),
    }
}

fn cmd_test(args: TestArgs, threads: Option<usize>) -> CliResult {
    let config = TestConfig {
        method: args.method.into(),
        kind: relationship_kind(args.kind, args.beta)?,
        centering: if args.global_centering { Centering::Global } else { Centering::PerGroup },
        c: args.c,
        solver: args.solver.into(),
        permutations: args.permutations,
        seed: args.seed,
        p_value_rule: if args.add_one { PValueRule::AddOne } else { PValueRule::Strict },
    };
    config.validate()?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Usage(format!("--alpha {} is outside (0, 1)", args.alpha)));
    }
    if !(args.cumulative_cut > 0.0 && args.cumulative_cut <= 1.0) {
        return Err(Failure::Usage(format!("--cumulative-cut {} is outside (0, 1]", args.cumulative_cut)));
    }

    let mut x = io::read_matrix(&args.input.file(&args.x))?;
    let mut y = io::read_matrix(&args.input.file(&args.y))?;
    if args.align_by_name {
        (x, y) = io::align_by_name(&x, &y)?;
    }
    if x.p() != y.p() {
        return Err(SledError::DimensionMismatch { expected: x.p(), found: y.p() }.into());
    }
    if config.method == Method::Sled && config.c * (x.p() as f64).sqrt() < 1.0 {
        eprintln!("warning: c sqrt(p) = {:.3} < 1; using sqrt(R) = 1", config.c * (x.p() as f64).sqrt());
    }

    let started = Instant::now();
    let result = permutation_test(&x, &y, &config, threads)?;
    let mut doc = ResultDocument::new(&config, &x, &y, &result, args.cumulative_cut)?;
    if !args.reproducible {
        doc.runtime = Some(Runtime {
            threads: threads.unwrap_or_else(rayon_threads),
            wall_seconds: started.elapsed().as_secs_f64(),
        });
    }
    if result.null_stats.iter().all(|&t| t == result.statistic) {
        eprintln!("warning: the statistic does not vary under permutation; the p-value carries no information (try a larger -c or --add-one)");
    }
    if result.nonconverged > 0 {
        eprintln!("warning: {} of {} solves hit the iteration cap", result.nonconverged, result.permutations + 1);
    }

    let json = doc.to_json(args.include_null_stats);
    match &args.output {
        Some(path) => write_text(path, &json)?,
        None => print!("{json}"),
    }

    let summary = if args.output.is_some() { print_summary } else { eprint_summary };
    summary(&format!("statistic {}", result.statistic));
    summary(&format!(
        "p-value {} ({} at alpha {})",
        result.p_value,
        if result.p_value < args.alpha { "reject" } else { "do not reject" },
        args.alpha
    ));
    if !result.leverage.is_empty() && args.top_k > 0 {
        let mut order: Vec<usize> = (0..result.leverage.len()).filter(|&i| result.leverage[i] > 0.0).collect();
        order.sort_by(|&a, &b| result.leverage[b].total_cmp(&result.leverage[a]).then(a.cmp(&b)));
        for &i in order.iter().take(args.top_k) {
            summary(&format!("  {}\t{:.6}", x.feature_label(i), result.leverage[i]));
        }
    }
    Ok(())
}

fn print_summary(line: &str) {
    println!("{line}");
}

fn eprint_summary(line: &str) {
    eprintln!("{line}");
}

fn rayon_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let mut scenario = Scenario::new(
        match args.base {
            BaseArg::NoisyDiagonal => BaseKind::NoisyDiagonal,
            BaseArg::BlockDiagonal => BaseKind::BlockDiagonal,
            BaseArg::ExpDecay => BaseKind::ExpDecay,
        },
        match args.diff {
            DiffArg::SparseBlock => DiffKind::SparseBlock,
            DiffArg::SoftSparseSpiked => DiffKind::SoftSparseSpiked,
        },
        match args.noise {
            NoiseArg::Normal => Noise::Normal,
            NoiseArg::Gamma => Noise::CenteredGamma,
            NoiseArg::T12 => Noise::StudentT12,
            NoiseArg::NegBinomial => Noise::CenteredNegBinomial,
        },
        args.n,
        args.m,
        args.p,
    );
    scenario.seed = args.seed;
    scenario.reps = args.rep + 1;
    scenario.null = args.null;
    scenario.scales = args.scales.into();
    scenario.pd_shift = if args.pd_shift_only_if_needed { PdShift::IfNeeded } else { PdShift::Literal };

    let (mats, x, y) = draw_repetition(&scenario, args.rep, None)?;
    let names: Vec<String> = (1..=args.p).map(|j| format!("v{j}")).collect();
    let x = x.with_feature_names(names.clone())?;
    let y = y.with_feature_names(names)?;
    fs::create_dir_all(&args.out_dir).map_err(|source| SledError::Io { path: args.out_dir.clone(), source })?;
    let csv = io::Delimiter::Csv;
    io::write_matrix(&args.out_dir.join("sigma1.csv"), mats.sigma1.as_matrix(), None, csv)?;
    io::write_matrix(&args.out_dir.join("sigma2.csv"), mats.sigma2.as_matrix(), None, csv)?;
    io::write_data_matrix(&args.out_dir.join("x.csv"), &x, csv)?;
    io::write_data_matrix(&args.out_dir.join("y.csv"), &y, csv)?;
    println!("wrote sigma1.csv, sigma2.csv, x.csv, y.csv to {} (delta {})", args.out_dir.display(), mats.delta);
    Ok(())
}

fn cmd_power(args: PowerArgs, threads: Option<usize>) -> CliResult {
    let text = fs::read_to_string(&args.grid).map_err(|source| SledError::Io { path: args.grid.clone(), source })?;
    let grid: Vec<Scenario> =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", args.grid.display())))?;
    if grid.is_empty() {
        return Err(Failure::Usage(format!("{}: empty scenario grid", args.grid.display())));
    }
    let methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    let base = match &args.base_covariance {
        Some(path) => {
            let file = MatrixFile { has_header: false, ..MatrixFile::new(path) };
            Some(SymmetricMatrix::new(io::read_matrix(&file)?.values().clone())?)
        }
        None => None,
    };
    let solver: Solver = args.solver.into();

    let mut table = PowerTable::default();
    let mut last_error = None;
    for (i, scenario) in grid.iter().enumerate() {
        match power_study(scenario, &methods, args.alpha, &solver, base.as_ref(), threads) {
            Ok(rows) => table.extend(rows),
            Err(e) => {
                eprintln!("warning: cell {i} failed: {e}");
                last_error = Some(e);
            }
        }
    }
    if table.rows.is_empty() {
        return Err(last_error.map_or_else(|| Failure::Usage("no cells ran".into()), Failure::Sled));
    }

    if let Some(path) = &args.csv {
        write_text(path, &table.to_csv()?)?;
    }
    let json = table.to_json() + "\n";
    match &args.json {
        Some(path) => write_text(path, &json)?,
        None if args.csv.is_none() => print!("{json}"),
        None => {}
    }
    Ok(())
}
