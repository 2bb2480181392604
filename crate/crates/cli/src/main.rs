use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgqed_cli::platforms::{eta, platforms_report};
use wgqed_cli::run::validation_config;
use wgqed_cli::{parse_with_overrides, run, RunOptions};

/// Delayed collective emission of two emitters on a waveguide.
#[derive(Parser)]
#[command(name = "wgqed", version)]
struct Cli {
    /// Directory for CSV tables and manifest.json.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config.
    Simulate {
        config: PathBuf,
        /// Override a config entry, e.g. `--set model.beta=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the cross-solver oracle suite.
    Validate,
    /// Print the platform table with computed delays, or `eta` for given values.
    Platforms {
        #[arg(long, requires_all = ["gamma_mhz", "vg_over_c"])]
        distance: Option<f64>,
        /// `gamma / 2 pi` in MHz.
        #[arg(long)]
        gamma_mhz: Option<f64>,
        #[arg(long)]
        vg_over_c: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("config error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    }
    let opts = RunOptions { output_dir: cli.output_dir, quiet: cli.quiet };
    let config = match cli.command {
        Command::Platforms { distance, gamma_mhz, vg_over_c } => {
            match (distance, gamma_mhz, vg_over_c) {
                (Some(d), Some(g), Some(v)) if d > 0.0 && g > 0.0 && v > 0.0 => println!("{}", eta(d, g, v)),
                (Some(_), _, _) => {
                    eprintln!("config error: distance, gamma and group velocity must be positive");
                    return ExitCode::from(1);
                }
                _ => print!("{}", platforms_report()),
            }
            return ExitCode::SUCCESS;
        }
        Command::Validate => validation_config(),
        Command::Simulate { config, set } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("config error: {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            match parse_with_overrides(&text, &set) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            }
        }
    };
    match run(&config, &opts) {
        Ok(manifest) if manifest.status != "ok" => {
            eprintln!("validation failed: {} check(s)", manifest.scalars.get("failed_checks").copied().unwrap_or(0.0));
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
