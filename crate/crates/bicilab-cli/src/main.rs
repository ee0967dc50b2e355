//! `bicilab` — batch experiments for the bilateral CI sound-coding lab.
//!
//! Verbs: `encode` (WAV -> EGF), `synth` (scene manifest -> stereo WAV +
//! clean EGF pairs), `train` (corpus -> weights + history), `eval`
//! (metric CSVs + plot data over an SNR x azimuth grid), `report`
//! (aggregate metric CSVs by azimuth).
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
//! failure. Set `BICILAB_LOG` to error/warn/info/debug for diagnostics.

mod commands;
mod config;
mod errors;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use errors::CliError;

#[derive(Parser, Debug)]
#[command(name = "bicilab", version, about = "Bilateral CI sound-coding laboratory")]
struct Cli {
    /// Experiment configuration file (TOML-style key = value sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed override; takes precedence over the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker pool size for scene- and grid-level parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a WAV file into an EGF v1 electrodogram.
    Encode {
        input: PathBuf,
        output: PathBuf,
    },
    /// Render the scenes of a manifest into stereo WAV + clean EGF pairs.
    Synth {
        manifest: PathBuf,
    },
    /// Train a model on the configured corpus.
    Train {
        /// Continue from `checkpoint.dwt` in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Evaluate variants over the SNR x azimuth grid.
    Eval {
        /// Weight files (each carries its variant); may repeat.
        #[arg(long = "weights")]
        weights: Vec<PathBuf>,
        /// Comma-separated subset of {ace,bilateral,fused} to evaluate.
        #[arg(long)]
        variants: Option<String>,
    },
    /// Aggregate metric CSVs into an azimuth-keyed summary.
    Report {
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("BICILAB_LOG", "warn"),
    )
    .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successful exits.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let result = run(cli);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = config::ExperimentConfig::load(cli.config.as_deref(), cli.seed, cli.out.clone())?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::usage(format!("worker pool: {e}")))?;
    }

    match cli.command {
        Command::Encode { input, output } => commands::encode::run(&config, &input, &output),
        Command::Synth { manifest } => commands::synth::run(&config, &manifest),
        Command::Train { resume } => commands::train::run(&config, resume),
        Command::Eval { weights, variants } => {
            commands::eval::run(&config, &weights, variants.as_deref())
        }
        Command::Report { inputs } => commands::report::run(&config, &inputs),
    }
}
