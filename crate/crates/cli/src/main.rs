mod certificate;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Success.
const EXIT_OK: u8 = 0;
/// A claim or certificate failed verification.
const EXIT_VERIFY: u8 = 1;
/// A search ran out of budget.
const EXIT_BUDGET: u8 = 2;
/// Malformed input or arguments.
const EXIT_INPUT: u8 = 3;

const THREADS_ENV: &str = "HYPERTENT_THREADS";

#[derive(Debug, Parser, Serialize)]
#[command(name = "hypertent", version, about = "Turan densities of tent families: constructions, Lagrangians, the X_{r,k} optimum and certificates")]
struct Cli {
    /// Seed for every randomized routine.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Tolerance override (Lagrangian ascent, segment detection).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, short, global = true)]
    #[serde(skip)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Build tents and tent families.
    #[command(subcommand)]
    Tent(TentCmd),
    /// Homomorphism checks and tiny exact Turan numbers.
    #[command(subcommand)]
    Hom(HomCmd),
    /// Lagrangian and blowup density of a hypergraph.
    Lagrangian(LagrangianArgs),
    /// Optimization over X_{r,k}.
    #[command(subcommand)]
    Region(RegionCmd),
    /// Entropic density and ratio sequences.
    #[command(subcommand)]
    Entropy(EntropyCmd),
    /// Tables with certificates.
    #[command(subcommand)]
    Report(ReportCmd),
    /// Re-check certificates without re-optimizing.
    Verify {
        /// An output document with a `certificates` array, a certificate, or an array of them.
        certificate: PathBuf,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum TentCmd {
    /// The tent with parts (r-i, i), or a general tent from --lambda.
    Make {
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        i: Option<usize>,
        /// Partition of r, e.g. 3,1,1.
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<usize>>,
        /// Emit the partial tent (maximal edges only) instead.
        #[arg(long)]
        partial: bool,
    },
    /// The tents with parts (r-i, i) for 1 <= i <= k.
    Family {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
struct BudgetArgs {
    /// Node limit for each search.
    #[arg(long, default_value_t = 10_000_000)]
    max_nodes: u64,
    /// Wall-clock limit for each search, in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout_secs: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum HomCmd {
    /// Search for a homomorphism source -> host.
    Check {
        source: PathBuf,
        host: PathBuf,
        /// Read the source as a partial hypergraph ({"r", "n", "maximal_edges"}).
        #[arg(long)]
        partial: bool,
        /// Require an injective map (a subgraph copy).
        #[arg(long, conflicts_with = "partial")]
        injective: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// ex(n, family) with all extremal hypergraphs, for tiny n.
    ExactTuran {
        #[arg(long)]
        n: usize,
        /// Forbid the tent family F_{r,k}, given as r,k.
        #[arg(long, value_parser = parse_rk, required_unless_present = "forbid")]
        family: Option<(usize, usize)>,
        /// Forbid these hypergraphs.
        #[arg(long, conflicts_with = "family")]
        forbid: Vec<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Debug, Args, Serialize)]
struct LagrangianArgs {
    host: PathBuf,
    #[arg(long, default_value_t = 200)]
    restarts: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum RegionCmd {
    /// Maximize x_1 ... x_r over X_{r,k}.
    Max {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
        /// Rationalize the optimum and re-check it exactly.
        #[arg(long)]
        exact: bool,
        /// Start from a random convex profile drawn with --seed instead of (i/r)^1.5.
        #[arg(long)]
        random_start: bool,
    },
    /// A point of X_{r,k} beating r!/r^r, for k < floor(r/e).
    Counterexample {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
        /// Initial epsilon as a fraction (default 1/(4r)).
        #[arg(long)]
        eps: Option<String>,
    },
    /// Segment structure of a point {"r", "k", "x"}; fraction strings in x select exact arithmetic.
    Segments { point: PathBuf },
    /// The optimum at k = floor(r/e).
    ProbeFloor {
        #[arg(long)]
        r: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum EntropyCmd {
    /// Entropic density by multistart ascent, cross-checked with the Lagrangian.
    Density {
        host: PathBuf,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
    },
    /// Ratio sequence of the random edge with the given edge weights.
    Ratio { host: PathBuf, weights: PathBuf },
    /// Check that ratio sequences on an F_{r,k}-hom-free host lie in X_{r,k}.
    VerifyRatio {
        /// The family F_{r,k}, given as r,k.
        #[arg(long, value_parser = parse_rk)]
        family: (usize, usize),
        host: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum ReportCmd {
    /// Optimum over X_{r,ceil(r/e)} against r!/r^r for each r.
    TheoremTable {
        #[arg(long, default_value_t = 4)]
        r_min: usize,
        #[arg(long, default_value_t = 12)]
        r_max: usize,
    },
    /// Explicit points beating r!/r^r for every k < floor(r/e).
    CounterexampleTable {
        #[arg(long, default_value_t = 4)]
        r_min: usize,
        #[arg(long, default_value_t = 15)]
        r_max: usize,
    },
}

fn parse_rk(s: &str) -> Result<(usize, usize), String> {
    let (r, k) = s.split_once(',').ok_or_else(|| format!("expected r,k, got '{s}'"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}"));
    Ok((parse(r)?, parse(k)?))
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use hypertent::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::BudgetExhausted { .. } => EXIT_BUDGET,
                E::Numerical(_) => EXIT_VERIFY,
                _ => EXIT_INPUT,
            };
        }
    }
    EXIT_INPUT
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
        anyhow::ensure!(n > 0, "{THREADS_ENV} must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INPUT);
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
