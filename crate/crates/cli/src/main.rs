use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use floquet_core::analysis::{dft, find_dtqc_peaks, PeakOptions, DEFAULT_N_MAX};
use floquet_core::harness::{compare, read_series, run, HarnessError, RunConfig};

/// Kicked-Ising Floquet simulations on heavy-hex and chain lattices.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every grid point of a config and write CSV artifacts.
    Run {
        config: PathBuf,
        /// Output directory (default: `out/<config name>`).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare the series of two run directories step by step.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Spectrum and peaks of a series file (mitigated column if present).
    Spectrum {
        series: PathBuf,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long, default_value_t = PeakOptions::default().window)]
        window: f64,
        #[arg(long, default_value_t = PeakOptions::default().prominence)]
        prominence: f64,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

/// Exit codes: 0 success, 1 validation failure, 2 runtime failure.
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, out } => {
            let prepared = RunConfig::load(&config)?;
            let out = out.unwrap_or_else(|| {
                let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let name = if prepared.config.name.is_empty() { stem } else { prepared.config.name.clone() };
                PathBuf::from("out").join(name)
            });
            let summary = run(&prepared, &out)?;
            println!("{} grid points written to {}", summary.points.len(), out.display());
            for p in summary.points.iter().filter(|p| p.error.is_some()) {
                eprintln!("point {}: {}", p.index, p.error.as_deref().unwrap_or_default());
            }
            if summary.failures() > 0 {
                return Err(Failure::Runtime(format!("{} grid points failed", summary.failures())));
            }
            Ok(())
        }
        Command::Compare { dir_a, dir_b, tol } => {
            let report = compare(&dir_a, &dir_b, tol)?;
            print!("{}", report.to_text());
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Validation(format!("max difference {:e} exceeds {tol:e}", report.max)))
            }
        }
        Command::Spectrum { series, n_max, window, prominence } => {
            let rows = read_series(&series)?;
            let values: Vec<f64> = rows.iter().map(|r| r.primary()).collect();
            let mut spectrum = dft(&values, n_max).map_err(|e| Failure::Validation(e.to_string()))?;
            let opts = PeakOptions { window, prominence, ..PeakOptions::default() };
            let peaks = find_dtqc_peaks(&mut spectrum, &opts).map_err(|e| Failure::Validation(e.to_string()))?;
            spectrum.write_csv(std::io::stdout().lock()).map_err(|e| Failure::Runtime(e.to_string()))?;
            eprint!("{}", peaks.to_text());
            Ok(())
        }
        Command::Validate { config } => {
            let p = RunConfig::load(&config)?;
            println!(
                "ok: {} qubits, {} edges in {} layers, {} grid points, backend {}",
                p.graph.num_qubits(),
                p.graph.num_edges(),
                p.graph.layers().len(),
                p.config.params.points().len(),
                p.config.backend.name
            );
            Ok(())
        }
    }
}
