//! Command-line front end. Exit codes: 0 success, 1 runtime failure,
//! 2 configuration or input error, 3 resource refusal.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rmtmix::runner::{self, emit_plot_data, estimate_cost, ExperimentConfig, RunArtifact, RunOptions};
use rmtmix::Error;

#[derive(Parser)]
#[command(name = "rmtmix", version, about = "Random density matrices generated by random Hamiltonian dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file (or a preset name).
    Run {
        config: String,
        /// Artifact directory (default: runs/<name>-<hash prefix>).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Continue a partial artifact in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Built-in configurations.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Write plot tables for a figure from a run artifact.
    Emit {
        artifact: PathBuf,
        #[arg(long)]
        figure: String,
        /// Destination directory (default: <artifact>/plots).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the resource estimate of a config without running it.
    Estimate { config: String },
    /// Check the short-time expansion on GOE ensembles of dimension N.
    ShortTimeCheck {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        ensembles: u64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset's TOML.
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Parse { .. } => 2,
                Error::ResourceRefused { .. } => 3,
                _ => 1,
            })
        }
    }
}

/// A config file, or a preset when no such file exists.
fn load_config(arg: &str) -> rmtmix::Result<ExperimentConfig> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Ok(p) = runner::presets::find(arg) {
            return p.config();
        }
    }
    ExperimentConfig::load(path)
}

fn execute(command: Command) -> rmtmix::Result<()> {
    match command {
        Command::Run { config, output, resume } => {
            let cfg = load_config(&config)?;
            let dir = output.unwrap_or_else(|| default_dir(&cfg));
            let opts = RunOptions {
                output: Some(dir.clone()),
                resume,
                ..Default::default()
            };
            let artifact = runner::run_experiment(&cfg, &opts)?;
            print!("{}", artifact.summary());
            eprintln!("artifact written to {}", dir.display());
            Ok(())
        }
        Command::Presets { action: PresetAction::List } => {
            for p in runner::PRESETS {
                println!("{:<16} {}", p.name, p.description);
            }
            Ok(())
        }
        Command::Presets { action: PresetAction::Show { name } } => {
            print!("{}", runner::presets::find(&name)?.toml);
            Ok(())
        }
        Command::Emit { artifact, figure, output } => {
            let a = RunArtifact::read(&artifact)?;
            let out = output.unwrap_or_else(|| artifact.join("plots"));
            for f in emit_plot_data(&a, &figure, &out)? {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Estimate { config } => {
            let cfg = load_config(&config)?;
            let e = estimate_cost(&cfg)?;
            let b = &cfg.budget;
            println!("flops = {:.3e}", e.flops);
            println!("memory_bytes = {:.3e}", e.memory_bytes);
            println!("wall_seconds = {:.1}", e.wall_seconds);
            println!("workers = {}", e.workers);
            println!("propagator = {}", if e.krylov { "krylov" } else { "exact" });
            println!("budget_flops = {:.3e}", b.max_flops);
            println!("budget_memory_bytes = {:.3e}", b.max_memory_bytes);
            let fits = e.flops <= b.max_flops && e.memory_bytes <= b.max_memory_bytes;
            println!("within_budget = {fits}");
            Ok(())
        }
        Command::ShortTimeCheck { n, ensembles, seed, output } => {
            let cfg = ExperimentConfig::from_toml_str(&format!(
                "[experiment]\nkind = \"short-time-check\"\nseed = {seed}\n\
                 [system]\ndimension = {n}\n[short_time]\nensembles = {ensembles}\n"
            ))?;
            let artifact = runner::run_experiment(&cfg, &RunOptions { output, ..Default::default() })?;
            print!("{}", artifact.summary());
            Ok(())
        }
    }
}

fn default_dir(cfg: &ExperimentConfig) -> PathBuf {
    let name = cfg.experiment.name.clone().unwrap_or_else(|| cfg.kind().as_str().to_string());
    PathBuf::from("runs").join(format!("{name}-{}", &cfg.hash()[..12]))
}
