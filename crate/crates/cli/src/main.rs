//! Command-line front end: generate network files, run trial batches for a
//! single scheme, or sweep an experiment axis over the whole scheme roster.
//!
//! Exit codes: 0 on success, 1 on usage or I/O errors, 2 when random network
//! generation cannot satisfy its constraints.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use layercast::harness::{self, HarnessError, Scheme, SweepAxis, Topology, TrialConfig};
use layercast::netgraph::GraphError;
use layercast::{Criterion, FieldSpec, GenParams, LayeredDag, Schedule};

const EXIT_USAGE: u8 = 1;
const EXIT_GENERATION: u8 = 2;

#[derive(Parser)]
#[command(
    name = "layercast",
    version,
    about = "Layered multicast network-coding simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network and write it as a network file.
    Gen(GenArgs),
    /// Run trials of one scheme and write a single-row CSV.
    Run(RunArgs),
    /// Sweep an axis; every scheme runs on the same graphs per value.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    receivers: usize,
    #[arg(long)]
    layers: u32,
    #[arg(long)]
    seed: u64,
    /// Output network file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Network file to reuse for every trial (instead of generating).
    #[arg(long, conflicts_with_all = ["nodes", "receivers", "layers"])]
    net: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    receivers: Option<usize>,
    #[arg(long)]
    layers: Option<u32>,
    /// pushback | pt2pt | steiner | intralayer
    #[arg(long)]
    scheme: Scheme,
    /// minreq | mincut (pushback only)
    #[arg(long, default_value = "mincut")]
    criterion: Criterion,
    /// sequential | flooding (pushback only)
    #[arg(long, default_value = "sequential")]
    schedule: Schedule,
    /// 2^1 .. 2^16, or `inf`
    #[arg(long)]
    field: FieldSpec,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// field | receivers | nodes
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values (e.g. `2^3,2^8,inf` or `15,25,40`).
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(err: HarnessError) -> Failure {
        let code = match err {
            HarnessError::Generation { .. } => EXIT_GENERATION,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(err: GraphError) -> Failure {
        let code = match err {
            // Unsatisfiable parameters count as generation failures, not
            // flag mistakes.
            GraphError::GenerationFailed(_) | GraphError::BadGenParams(_) => EXIT_GENERATION,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes, anything else is a
            // usage error.
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Run(args) => run(args.experiment),
        Command::Sweep(args) => sweep(args),
    }
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let params = GenParams::new(args.nodes, args.receivers, args.layers);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let g = LayeredDag::generate_random(params, &mut rng)?;
    std::fs::write(&args.out, g.to_text())?;
    Ok(())
}

fn trial_config(args: &ExperimentArgs) -> Result<TrialConfig, Failure> {
    let topology = match (&args.net, args.nodes, args.receivers, args.layers) {
        (Some(path), None, None, None) => {
            let text = std::fs::read_to_string(path)?;
            Topology::Fixed(LayeredDag::from_text(&text)?)
        }
        (None, Some(n), Some(k), Some(l)) => Topology::Generated(GenParams::new(n, k, l)),
        _ => {
            return Err(Failure::usage(
                "provide either --net FILE or all of --nodes/--receivers/--layers",
            ));
        }
    };
    Ok(TrialConfig {
        topology,
        scheme: args.scheme,
        criterion: args.criterion,
        schedule: args.schedule,
        field: args.field,
        trials: args.trials,
        base_seed: args.seed,
    })
}

fn run(args: ExperimentArgs) -> Result<(), Failure> {
    let cfg = trial_config(&args)?;
    let row = harness::run_aggregate(&cfg)?;
    std::fs::write(&args.out, harness::to_csv(&[row]))?;
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg = trial_config(&args.experiment)?;
    let axis = parse_axis(&args.axis, &args.values)?;
    let rows = harness::run_sweep(&cfg, &axis)?;
    std::fs::write(&args.experiment.out, harness::to_csv(&rows))?;
    Ok(())
}

fn parse_axis(axis: &str, values: &[String]) -> Result<SweepAxis, Failure> {
    match axis {
        "field" => {
            let specs = values
                .iter()
                .map(|v| v.parse::<FieldSpec>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::usage(e.to_string()))?;
            Ok(SweepAxis::Field(specs))
        }
        "receivers" | "nodes" => {
            let counts = values
                .iter()
                .map(|v| v.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::usage(format!("bad --values for axis `{axis}`")))?;
            Ok(if axis == "receivers" {
                SweepAxis::Receivers(counts)
            } else {
                SweepAxis::Nodes(counts)
            })
        }
        other => Err(Failure::usage(format!(
            "unknown axis `{other}` (expected field, receivers, or nodes)"
        ))),
    }
}
