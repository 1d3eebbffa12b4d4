use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_decompose::decompose::BranchOrder;
use sparse_decompose::io::read_system;
use sparse_decompose::numeric::TrackerConfig;
use sparse_decompose::polynomial::SparseSystem;
use sparse_decompose::solver::{BaseSolver, SolveOptions, Strategy};
use sparse_decompose_cli::{
    analysis_text, cmd_analyze, cmd_decompose, cmd_solve, decomposition_text, solutions_text, CliError, CliResult,
};

const SEED_VAR: &str = "SPARSE_DECOMPOSE_SEED";

/// Detect, decompose and solve sparse Laurent polynomial systems over the
/// complex torus.
#[derive(Parser)]
#[command(name = "sparse-decompose", version)]
struct Cli {
    /// Worker threads for path tracking (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report lacunarity, triangularity and the mixed volume.
    Analyze(Common),
    /// Compute all isolated torus solutions.
    Solve(SolveArgs),
    /// Emit one decomposition step as re-solvable system files.
    Decompose(DecomposeArgs),
}

#[derive(Args)]
struct Common {
    /// System file (JSON or text grammar); `-` reads stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Coordinates of modulus at most this count as zero.
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
    /// Compare against the mixed volume and retry deficient stages.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value_t = StrategyArg::Direct)]
    strategy: StrategyArg,
    /// `builtin` or `extern:COMMAND`.
    #[arg(long, default_value = "builtin", value_parser = parse_base_solver)]
    base_solver: BaseSolver,
    /// Overridden by the SPARSE_DECOMPOSE_SEED environment variable.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Include the decomposition trace.
    #[arg(long)]
    trace: bool,
    /// Try the triangular split before the lacunary one.
    #[arg(long)]
    triangular_first: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    triangular_first: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Direct,
    FromGeneric,
}

fn parse_base_solver(s: &str) -> Result<BaseSolver, String> {
    match s {
        "builtin" => Ok(BaseSolver::Builtin),
        _ => match s.strip_prefix("extern:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(BaseSolver::External(cmd.to_string())),
            _ => Err(format!("expected `builtin` or `extern:COMMAND`, got `{s}`")),
        },
    }
}

fn order(triangular_first: bool) -> BranchOrder {
    if triangular_first {
        BranchOrder::TriangularFirst
    } else {
        BranchOrder::LacunaryFirst
    }
}

fn read_input(path: &str) -> CliResult<SparseSystem> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Io(format!("reading stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {path}: {e}")))?;
    }
    Ok(read_system(&text)?)
}

fn emit(common: &Common, json: impl FnOnce() -> String, text: impl FnOnce() -> String) -> CliResult<()> {
    let mut out = match common.format {
        Format::Json => json(),
        Format::Text => text(),
    };
    if !out.ends_with('\n') {
        out.push('\n');
    }
    match &common.output {
        Some(path) => std::fs::write(path, out).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn seed(flag: u64) -> CliResult<u64> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Core(sparse_decompose::Error::InvalidInput(format!("{SEED_VAR}={v} is not a 64-bit seed")))),
        Err(_) => Ok(flag),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    match cli.command {
        Command::Analyze(common) => {
            let system = read_input(&common.input)?;
            let a = cmd_analyze(&system)?;
            emit(&common, || serde_json::to_string_pretty(&a).expect("serializes"), || analysis_text(&a))
        }
        Command::Solve(args) => {
            let system = read_input(&args.common.input)?;
            let opts = SolveOptions {
                tolerance: args.tolerance,
                verify: args.verify,
                strategy: match args.strategy {
                    StrategyArg::Direct => Strategy::Direct,
                    StrategyArg::FromGeneric => Strategy::FromGeneric,
                },
                base_solver: args.base_solver.clone(),
                tracker: TrackerConfig::default().with_seed(seed(args.seed)?),
                branch_order: order(args.triangular_first),
                ..SolveOptions::default()
            };
            let file = cmd_solve(&system, &opts, args.trace)?;
            emit(&args.common, || file.to_json(), || solutions_text(&file))
        }
        Command::Decompose(args) => {
            let system = read_input(&args.common.input)?;
            let d = cmd_decompose(&system, order(args.triangular_first))?;
            emit(&args.common, || serde_json::to_string_pretty(&d).expect("serializes"), || decomposition_text(&d))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
