mod cmd;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mesofrac::eval::Percentile;

use cmd::evaluate::FrameSelection;
use error::{CliError, CliResult};

/// Concrete mesostructure fracture pipeline.
#[derive(Parser)]
#[command(name = "mesofrac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random mesostructures into numbered directories.
    Generate {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Geometry config (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        target_vf: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Rasterize mesostructures to phase images and material channels.
    Rasterize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        setup: SetupFlags,
    },
    /// Run the fracture simulation for one sample or a directory of samples.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        setup: SetupFlags,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Summarize a curve CSV and export tensor frames as FE-style CSVs.
    Postprocess {
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Summary JSON; printed when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tensor: Option<PathBuf>,
        #[arg(long)]
        fe_out: Option<PathBuf>,
        /// Specimen side, mm.
        #[arg(long, default_value_t = 50.0)]
        domain: f64,
    },
    /// Resample per-frame FE exports onto the regular grid.
    IngestFe {
        /// Frame files in order.
        files: Vec<PathBuf>,
        /// Directory whose CSV files are frames in name order.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 333)]
        grid: usize,
        #[arg(long, default_value_t = 50.0)]
        domain: f64,
        #[arg(long)]
        expected_frames: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted damage maps against reference ones.
    Evaluate {
        #[arg(long)]
        truth_tensor: PathBuf,
        #[arg(long)]
        pred_tensor: PathBuf,
        /// `all`, `final`, or a comma-separated list of frame indices.
        #[arg(long, default_value = "all")]
        frames: FrameSelection,
        #[arg(long, value_enum, default_value_t = PercentileArg::Linear)]
        percentile: PercentileArg,
        /// F1 CSV; printed when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Render a tensor channel as a 16-bit PGM, or a curve as CSV.
    Plot {
        #[arg(long)]
        tensor: Option<PathBuf>,
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        frame: usize,
        #[arg(long, default_value = "phi")]
        channel: String,
        /// Gray-scale value range `LO,HI`.
        #[arg(long, value_parser = cmd::plot::parse_range)]
        range: Option<(f64, f64)>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SetupFlags {
    /// Grid config (JSON).
    #[arg(long)]
    grid_config: Option<PathBuf>,
    /// Cells per side; overrides the grid config.
    #[arg(long)]
    grid: Option<usize>,
    /// Material table (JSON).
    #[arg(long)]
    materials: Option<PathBuf>,
    /// Solver config (JSON).
    #[arg(long)]
    solver_config: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    u_max: Option<f64>,
    #[arg(long)]
    lc: Option<f64>,
}

impl From<SetupFlags> for cmd::simulate::SetupArgs {
    fn from(f: SetupFlags) -> Self {
        cmd::simulate::SetupArgs {
            grid_config: f.grid_config,
            grid: f.grid,
            materials: f.materials,
            solver_config: f.solver_config,
            steps: f.steps,
            u_max: f.u_max,
            lc: f.lc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PercentileArg {
    Linear,
    NearestRank,
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("MESOFRAC_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::config(format!("MESOFRAC_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

fn run(command: Command) -> CliResult<()> {
    init_threads()?;
    match command {
        Command::Generate { seed, count, config, target_vf, out_dir, jobs } => {
            cmd::generate::run(&cmd::generate::GenerateArgs { seed, count, config, target_vf, out_dir, jobs })
        }
        Command::Rasterize { input, out_dir, setup } => {
            cmd::simulate::run_rasterize(&cmd::simulate::RasterizeArgs { input, out_dir, setup: setup.into() })
        }
        Command::Simulate { input, out_dir, setup, jobs } => {
            cmd::simulate::run_simulate(&cmd::simulate::SimulateArgs { input, out_dir, setup: setup.into(), jobs })
        }
        Command::Postprocess { curve, out, tensor, fe_out, domain } => {
            cmd::data::run_postprocess(&cmd::data::PostprocessArgs { curve, out, tensor, fe_out, domain })
        }
        Command::IngestFe { files, dir, grid, domain, expected_frames, out } => {
            cmd::data::run_ingest(&cmd::data::IngestArgs { files, dir, grid, domain, expected_frames, out })
        }
        Command::Evaluate { truth_tensor, pred_tensor, frames, percentile, out, summary } => {
            let percentile = match percentile {
                PercentileArg::Linear => Percentile::Linear,
                PercentileArg::NearestRank => Percentile::NearestRank,
            };
            cmd::evaluate::run(&cmd::evaluate::EvaluateArgs {
                truth: truth_tensor,
                pred: pred_tensor,
                frames,
                percentile,
                out,
                summary,
            })
        }
        Command::Plot { tensor, curve, frame, channel, range, out } => {
            cmd::plot::run(&cmd::plot::PlotArgs { tensor, curve, frame, channel, range, out })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments").to_string();
            let msg = first.trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::config(msg));
            return ExitCode::from(error::Kind::Config.code() as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.kind.code() as u8)
        }
    }
}
