use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scout_cli::{presets, run_experiment, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "scout", version, about = "Run DM sampler and Scout MCMC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a built-in preset.
    Run {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Base seed; replicate i uses seed + i.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    ListPresets,
    /// Print a preset as a JSON config.
    ShowPreset { name: String },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(config: Option<PathBuf>, preset: Option<String>) -> Result<ExperimentConfig, HarnessError> {
    match (config, preset) {
        (Some(path), _) => ExperimentConfig::load(&path),
        (None, Some(name)) => {
            presets::preset(&name).ok_or_else(|| HarnessError::Config(format!("unknown preset `{name}`")))
        }
        (None, None) => Err(HarnessError::Config("either --config or --preset is required".into())),
    }
}

fn main_inner(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            preset,
            seed,
            iterations,
            replicates,
            out,
        } => {
            let mut c = load(config, preset)?;
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(n) = iterations {
                c.iterations = n;
            }
            if let Some(r) = replicates {
                c.replicates = r;
            }
            if let Some(o) = out {
                c.output_dir = o;
            }
            let output = run_experiment(&c)?;
            for row in &output.aggregate {
                let cells: Vec<String> = row
                    .metrics
                    .iter()
                    .map(|(k, m)| {
                        if m.n > 1 {
                            format!("{k} {:.4} ± {:.4}", m.mean, m.sd)
                        } else {
                            format!("{k} {:.4}", m.mean)
                        }
                    })
                    .collect();
                println!("{:<14} {}", row.label, cells.join("  "));
            }
            println!("wrote {}", output.directory.display());
            if output.manifest.partial {
                let failures: Vec<String> = output
                    .manifest
                    .runs
                    .iter()
                    .filter_map(|r| r.error.as_ref().map(|e| format!("{} seed {}: {e}", r.label, r.seed)))
                    .collect();
                return Err(HarnessError::Numerical(failures.join("; ")));
            }
            Ok(())
        }
        Command::ListPresets => {
            for c in presets::presets() {
                println!("{:<26} {}", c.name, c.description);
            }
            Ok(())
        }
        Command::ShowPreset { name } => {
            let c = load(None, Some(name))?;
            println!("{}", c.to_json());
            Ok(())
        }
        Command::Validate { config } => {
            let c = ExperimentConfig::load(&config)?;
            let target = c.validate()?;
            println!(
                "{}: target `{}` (dimension {}), {} sampler row(s), {} replicate(s), {} iterations",
                c.name,
                c.target.id,
                target.dim(),
                c.samplers.len(),
                c.replicates,
                c.iterations
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
