use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use ahlfors::cli::{list_catalog, run, LoadedConfig};

#[derive(Parser)]
#[command(version, about = "Degree functions, boundary masses and Ahlfors-current criteria for holomorphic maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a TOML configuration.
    Run {
        config: PathBuf,
        /// Replace a configuration value, e.g. `profile.n_samples=20000` (repeatable).
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (replaces `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed (replaces `profile.seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List catalog maps, targets and exhaustions with parameter ranges.
    ListCatalog,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListCatalog => {
            print!("{}", list_catalog());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            mut overrides,
            out,
            seed,
        } => {
            if let Some(out) = out {
                overrides.push(format!("output.dir={}", toml::Value::String(out.display().to_string())));
            }
            if let Some(seed) = seed {
                overrides.push(format!("profile.seed={seed}"));
            }
            let outcome = LoadedConfig::from_path(&config, &overrides).and_then(|loaded| run(&loaded));
            match outcome {
                Ok(outcome) => {
                    for path in &outcome.written {
                        println!("wrote {}", path.display());
                    }
                    if outcome.status == 2 {
                        println!("criterion hypothesis unsatisfied on this grid");
                    }
                    ExitCode::from(outcome.status as u8)
                }
                Err(e) => {
                    eprintln!("error [{}]: {e}", e.module());
                    ExitCode::from(1)
                }
            }
        }
    }
}
