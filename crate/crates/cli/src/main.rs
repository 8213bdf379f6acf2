use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod report;

/// Quantum volume benchmarking: generate, compile, simulate and score model circuits.
#[derive(Debug, Parser)]
#[command(name = "qvbench", version)]
struct Cli {
    /// Worker threads for parallel circuit execution (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a suite of model circuits and a manifest.
    Generate(GenerateArgs),
    /// List the connected qubit subsets of a device.
    Enumerate(EnumerateArgs),
    /// Compile circuit files onto a device.
    Compile(CompileArgs),
    /// Run the full protocol and persist results.
    Run(RunArgs),
    /// Turn result files into plot data.
    Report(ReportArgs),
    /// Combine per-width verdicts into the final quantum volume.
    Qv(QvArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(short, long)]
    pub m: usize,
    /// Layers per circuit (default: m).
    #[arg(short, long)]
    pub d: Option<usize>,
    #[arg(short, long, default_value_t = 1000)]
    pub count: usize,
    #[arg(short, long, env = "QVBENCH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, env = "QVBENCH_OUT", default_value = "qv-circuits")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    /// Built-in profile name or profile file.
    #[arg(short, long)]
    pub profile: String,
    #[arg(short, long)]
    pub n: usize,
    /// Print JSON instead of one subset per line.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[arg(short, long)]
    pub profile: String,
    /// Comma-separated physical qubits, or `auto`.
    #[arg(long, default_value = "auto")]
    pub subset: String,
    #[arg(long)]
    pub allow_spill: bool,
    #[arg(short, long, env = "QVBENCH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, env = "QVBENCH_OUT", default_value = "qv-compiled")]
    pub out: PathBuf,
    /// Circuit files to compile.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(short, long)]
    pub profile: String,
    /// Width, list (`2,3,5`) or inclusive range (`2-6`).
    #[arg(short, long)]
    pub m: String,
    /// Comma-separated physical qubits, `auto` or `enumerate`.
    #[arg(long, default_value = "auto")]
    pub subset: String,
    /// Maximum number of circuits per suite.
    #[arg(short, long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 100)]
    pub shots: u64,
    #[arg(short, long, env = "QVBENCH_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Keep running after the pass criteria are met.
    #[arg(long)]
    pub no_early_stop: bool,
    #[arg(long, default_value_t = 0.99)]
    pub early_stop_conf: f64,
    #[arg(long, default_value_t = 100)]
    pub min_circuits: usize,
    /// Keep running when a pass is out of reach.
    #[arg(long)]
    pub no_hopeless_stop: bool,
    #[arg(long, default_value_t = 100)]
    pub hopeless_after: usize,
    /// Use sqrt(mean(1-mean)/k) for the standard deviation.
    #[arg(long)]
    pub textbook_sigma: bool,
    /// Ignore the profile fidelities and sample noiselessly.
    #[arg(long)]
    pub ideal: bool,
    #[arg(long)]
    pub f2: Option<f64>,
    #[arg(long)]
    pub f1: Option<f64>,
    #[arg(long)]
    pub f_spam: Option<f64>,
    #[arg(long)]
    pub allow_spill: bool,
    #[arg(short, long, env = "QVBENCH_OUT", default_value = "qv-results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Result files, or directories searched for `result.json`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long, env = "QVBENCH_OUT", default_value = "qv-report")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QvArgs {
    /// Result files, or directories searched for `result.json`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Enumerate(a) => commands::enumerate(&a),
        Command::Compile(a) => commands::compile(&a),
        Command::Run(a) => commands::run(&a),
        Command::Report(a) => report::report(&a),
        Command::Qv(a) => report::qv(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
