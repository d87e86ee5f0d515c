use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use odyn_cli::{
    budget_csv, gen_opinions, gen_resistance, run_budgeted, run_equilibrium, run_unbudgeted,
    summary_csv, BudgetMethod, Dist, ExperimentConfig, ValueSource,
};
use odyn_core::{BoxBounds, Direction, Error};

/// Opinion dynamics with resistant agents: equilibria and interventions.
#[derive(Parser)]
#[command(name = "odyn", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the equilibrium and report total opinions.
    Equilibrium {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-assign every resistance within the box to push the total opinion.
    OptimizeUnbudgeted {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        direction: Dir,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Pick at most k agents and re-assign their resistances.
    OptimizeBudgeted {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated budgets, e.g. 1,2,5,10.
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<usize>,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Dir::Max)]
        direction: Dir,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Cap baseline targets at the box upper bound instead of 1.
        #[arg(long)]
        cap_baselines: bool,
    },
    /// Write a synthetic innate-opinion vector.
    GenOpinions {
        #[arg(short = 'n', long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = DistArg::Uniform)]
        dist: DistArg,
        /// Power-law exponent (used with --dist powerlaw; must exceed 1).
        #[arg(long, default_value_t = 2.0)]
        slope: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic resistance vector, uniform on [0.001, 1].
    GenResistance {
        #[arg(short = 'n', long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Edge-list file: one "u v" pair per line, '#' comments.
    #[arg(long)]
    graph: PathBuf,
    /// Values file, or a generator: gen | uniform | powerlaw[:SLOPE].
    #[arg(long)]
    opinions: String,
    /// Values file, or a generator: gen | uniform.
    #[arg(long)]
    resistance: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Map file-loaded opinions from [-1, 1] onto [0, 1] via (v+1)/2.
    #[arg(long)]
    normalize_signed: bool,
    /// Report wall_time_ms as 0 so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Emit a JSON array instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundsArgs {
    /// Lowest assignable resistance.
    #[arg(long, default_value_t = 0.001)]
    lower: f64,
    /// Highest assignable resistance.
    #[arg(long, default_value_t = 1.0)]
    upper: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Min,
    Max,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Min => Direction::Minimize,
            Dir::Max => Direction::Maximize,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Greedy,
    Baseline1,
    Baseline2,
    Exhaustive,
}

impl From<Method> for BudgetMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Greedy => BudgetMethod::Greedy,
            Method::Baseline1 => BudgetMethod::Baseline1,
            Method::Baseline2 => BudgetMethod::Baseline2,
            Method::Exhaustive => BudgetMethod::Exhaustive,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DistArg {
    Uniform,
    Powerlaw,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 = configuration error, 3 = input parse error, 4 = refusal.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 3,
        Error::Oversized { .. } => 4,
        _ => 2,
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Equilibrium { run } => {
            let rows = run_equilibrium(&config(&run)?)?;
            emit(&run, || summary_csv(&rows), || to_json(&rows))
        }
        Cmd::OptimizeUnbudgeted { run, direction, bounds } => {
            let rows =
                run_unbudgeted(&config(&run)?, direction.into(), &box_bounds(&bounds)?)?;
            emit(&run, || summary_csv(&rows), || to_json(&rows))
        }
        Cmd::OptimizeBudgeted { run, k_list, method, direction, bounds, cap_baselines } => {
            let rows = run_budgeted(
                &config(&run)?,
                method.into(),
                &k_list,
                direction.into(),
                &box_bounds(&bounds)?,
                cap_baselines,
            )?;
            emit(&run, || budget_csv(&rows), || to_json(&rows))
        }
        Cmd::GenOpinions { count, dist, slope, seed, out } => {
            let d = match dist {
                DistArg::Uniform => Dist::Uniform,
                DistArg::Powerlaw => Dist::Powerlaw(slope),
            };
            write_values(&gen_opinions(count, d, seed)?, out.as_deref())
        }
        Cmd::GenResistance { count, seed, out } => {
            write_values(&gen_resistance(count, seed)?, out.as_deref())
        }
    }
}

fn config(run: &RunArgs) -> Result<ExperimentConfig, Error> {
    Ok(ExperimentConfig {
        graph_path: run.graph.clone(),
        opinions: run.opinions.parse::<ValueSource>()?,
        resistance: run.resistance.parse::<ValueSource>()?,
        seed: run.seed,
        trials: run.trials,
        normalize_signed: run.normalize_signed,
        no_timing: run.no_timing,
    })
}

fn box_bounds(b: &BoundsArgs) -> Result<BoxBounds, Error> {
    BoxBounds::new(b.lower, b.upper)
}

fn emit(
    run: &RunArgs,
    csv: impl FnOnce() -> String,
    json: impl FnOnce() -> String,
) -> Result<(), Error> {
    write_output(&if run.json { json() } else { csv() }, run.out.as_deref())
}

fn to_json<T: serde::Serialize>(rows: &[T]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
    text.push('\n');
    text
}

fn write_values(values: &[f64], out: Option<&std::path::Path>) -> Result<(), Error> {
    let mut text = String::new();
    for (i, v) in values.iter().enumerate() {
        text.push_str(&format!("{i}\t{v}\n"));
    }
    write_output(&text, out)
}

fn write_output(text: &str, out: Option<&std::path::Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::Invalid(format!("cannot write to stdout: {e}")))
        }
    }
}
