use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use purex_core::harness::{
    aggregate, lil_validity_check, load_config, read_records, resolved_config_path, run_experiment, write_records,
    write_resolved, write_summary,
};
use purex_core::lil::{error_constant, LilParams, RadiusVariant};
use purex_core::Mode;

#[derive(Parser)]
#[command(name = "purex", version, about = "Fixed-confidence Best-K arm identification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Faithful,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Original,
    Shifted,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write one CSV row per trial.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_path` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `trials`.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Monte Carlo violation rate of the LIL radius on zero-mean Gaussian paths.
    ValidateLil {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        paths: u64,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, value_enum, default_value = "shifted")]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Summarize a trial CSV per (algorithm, family, n, k, mode).
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, seed, trials, mode } => {
            let mut cfg = load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(out) = out {
                cfg.output_path = out;
            }
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            if let Some(mode) = mode {
                cfg.mode = match mode {
                    ModeArg::Faithful => Mode::Faithful,
                    ModeArg::Heuristic => Mode::Heuristic,
                };
            }
            cfg.validate()?;
            if let Some(parent) = cfg.output_path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            let records = run_experiment(&cfg)?;
            write_records(&cfg.output_path, &records)?;
            let sidecar = resolved_config_path(&cfg.output_path);
            write_resolved(&cfg, &sidecar)?;
            let wrong = records.iter().filter(|r| !r.correct).count();
            let capped = records.iter().filter(|r| r.capped).count();
            println!(
                "{} trials written to {} ({wrong} incorrect, {capped} capped); resolved config in {}",
                records.len(),
                cfg.output_path.display(),
                sidecar.display()
            );
        }
        Command::ValidateLil { epsilon, delta, horizon, paths, sigma, variant, seed } => {
            let variant = match variant {
                VariantArg::Original => RadiusVariant::Original,
                VariantArg::Shifted => RadiusVariant::Shifted,
            };
            let params = LilParams::new(epsilon, sigma, variant)?;
            let rate = lil_validity_check(&params, delta, horizon, paths, seed)?;
            println!("violation_rate {rate}");
            if epsilon > 0.0 {
                let bound = (error_constant(epsilon)? * delta.powf(1.0 + epsilon)).min(1.0);
                println!("bound {bound}");
            }
        }
        Command::Aggregate { input, out } => {
            let records = read_records(&input).with_context(|| format!("reading {}", input.display()))?;
            let rows = aggregate(&records);
            write_summary(&out, &rows)?;
            println!("{} groups written to {}", rows.len(), out.display());
        }
    }
    Ok(())
}
