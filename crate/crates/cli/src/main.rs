//! `bandedge`: band structures and band edges of periodic graphs.
//!
//! Exit codes: 0 on success, 2 for configuration or I/O errors, 3 when a
//! numerical routine fails.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::{CliError, Format, OpArg, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bandedge",
    version,
    about = "Band structures and band edges of periodic graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// builtin:gamma, builtin:lambda, builtin:square, builtin:square-pair, or a graph JSON file
    #[arg(long, default_value = "builtin:gamma")]
    graph: String,
    /// Grid resolution N (N×N points over the zone)
    #[arg(long, default_value_t = 64)]
    res: usize,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Restrict output to one band (1-based)
    #[arg(long)]
    band: Option<usize>,
    /// Format of tabular outputs
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Sample all bands over the zone and write surfaces plus a spectrum report
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = OpArg::Delta)]
        op: OpArg,
    },
    /// Locate and classify every band edge (grid of at least 256)
    Edges {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = OpArg::Delta)]
        op: OpArg,
    },
    /// Map the normalized Laplacian spectrum to the quantum graph
    Quantum {
        #[command(flatten)]
        common: Common,
        /// Only `laplace` is meaningful here; accepted for uniformity
        #[arg(long, value_enum, default_value_t = OpArg::Laplace)]
        op: OpArg,
        #[arg(long, default_value_t = 3.0 * std::f64::consts::PI)]
        omega_max: f64,
    },
    /// Follow band edges under H_0 + g·diag(V) over a ladder of couplings
    Perturb {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = OpArg::Delta)]
        op: OpArg,
        /// Comma-separated couplings
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.001,0.01",
            allow_hyphen_values = true
        )]
        g: Vec<f64>,
        /// Comma-separated vertex potential (default: 1 on the first vertex)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        potential: Option<Vec<f64>>,
        /// Spectral window `lo,hi` for the edges considered
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        interval: Option<Vec<f64>>,
    },
}

fn base(command: &'static str, common: Common, op: OpArg) -> RunConfig {
    RunConfig {
        command,
        graph: common.graph,
        op,
        resolution: common.res,
        out: common.out,
        format: common.format,
        band: common.band,
        omega_max: None,
        g: Vec::new(),
        potential: None,
        interval: None,
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Sweep { common, op } => commands::cmd_sweep(&base("sweep", common, op)),
        Command::Edges { common, op } => commands::cmd_edges(&base("edges", common, op)),
        Command::Quantum { common, op, omega_max } => {
            if op != OpArg::Laplace {
                eprintln!("note: quantum always uses the normalized Laplacian");
            }
            let mut config = base("quantum", common, OpArg::Laplace);
            config.omega_max = Some(omega_max);
            commands::cmd_quantum(&config)
        }
        Command::Perturb {
            common,
            op,
            g,
            potential,
            interval,
        } => {
            let interval = match interval.as_deref() {
                None => None,
                Some(&[lo, hi]) => Some((lo, hi)),
                Some(_) => return Err(CliError::Config("--interval takes exactly two values lo,hi".into())),
            };
            let mut config = base("perturb", common, op);
            config.g = g;
            config.potential = potential;
            config.interval = interval;
            commands::cmd_perturb(&mut config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
