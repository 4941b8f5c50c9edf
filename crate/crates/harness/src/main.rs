use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gechi_harness::{resolve_out_dir, run, ExperimentConfig, ExperimentKind, RunOptions};

#[derive(Parser)]
#[command(name = "gechi", about = "Generalized geometric entanglement experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config (TOML).
    #[arg(value_name = "CONFIG", conflicts_with = "config")]
    path: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn path(&self) -> Option<&PathBuf> {
        self.config.as_ref().or(self.path.as_ref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its records.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Parallel tasks.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output directory (overrides GECHI_OUT_DIR and the config).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Skip tasks already recorded in the output directory's journal.
        #[arg(long)]
        resume: bool,
    },
    /// Check a config without running it.
    ValidateConfig {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// List the available experiments.
    ListExperiments,
    /// Print the version.
    Version,
}

fn load(arg: &ConfigArg) -> Result<(PathBuf, ExperimentConfig), ExitCode> {
    let Some(path) = arg.path() else {
        eprintln!("error: a config file is required (positional or --config)");
        return Err(ExitCode::from(2));
    };
    match ExperimentConfig::from_path(path) {
        Ok(cfg) => Ok((path.clone(), cfg)),
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            Err(ExitCode::from(2))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Version => {
            println!("gechi {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
        Command::ListExperiments => {
            for kind in ExperimentKind::ALL {
                println!("{:<13} {}", kind.name(), kind.description());
            }
            ExitCode::SUCCESS
        }
        Command::ValidateConfig { config } => match load(&config) {
            Ok((path, cfg)) => {
                println!("{}: ok ({}, hash {})", path.display(), cfg.experiment, cfg.hash());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, workers, out, resume } => {
            let (_, cfg) = match load(&config) {
                Ok(x) => x,
                Err(code) => return code,
            };
            let opts = RunOptions { workers, out_dir: resolve_out_dir(out, &cfg), resume };
            match run(&cfg, &opts) {
                Ok(summary) => {
                    println!(
                        "{}: {} tasks ({} resumed), {} records in {}",
                        cfg.experiment,
                        summary.tasks,
                        summary.resumed,
                        summary.records,
                        summary.out_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
