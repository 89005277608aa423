use clap::Parser;
use gaudin_lab::{run, write_outputs, Command, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Commuting-Hamiltonian experiments: commutation checks, joint
/// spectra, Bethe roots, differential-operator verification,
/// degenerations and eigenline coverings.
#[derive(Parser)]
#[command(name = "gaudin-lab", version, about)]
struct Cli {
    /// One of: commute-check, spectrum, cyclicity, bethe, oper-check,
    /// bijection-count, limit, cover
    command: String,
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json and CSV tables
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed from the config
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the tolerance from the config
    #[arg(long)]
    tol: Option<f64>,
    /// Caps the worker-thread count
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match Command::parse(&cli.command) {
        Some(c) => c,
        None => {
            eprintln!("error: unknown command {:?}", cli.command);
            return ExitCode::from(1);
        }
    };
    if let Some(n) = cli.threads {
        gaudin_core::parallel::configure_threads(n);
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {}", cli.config.display(), e);
            return ExitCode::from(1);
        }
    };
    let cfg = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let tol = cli.tol.or(cfg.tol).unwrap_or(1e-8);
    match run(command, &cfg, seed, tol) {
        Ok(output) => {
            if let Some(dir) = &cli.out {
                if let Err(e) = write_outputs(dir, &output) {
                    eprintln!("error: {}", e);
                    return ExitCode::from(1);
                }
            }
            match serde_json::to_string_pretty(&output.report) {
                Ok(s) => println!("{}", s),
                Err(e) => {
                    eprintln!("error: {}", e);
                    return ExitCode::from(1);
                }
            }
            if output.report.verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
