mod config;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use pqapprox::error_analysis::{
    bound_report, subinterval_compare, ModulusTable, DEFAULT_MODULUS_GRID,
};
use pqapprox::moments::{moment_report, rn_report};
use pqapprox::operators::eval_report;
use pqapprox::output::{render, OutputFormat};
use pqapprox::statconv::{
    exception_trajectory, square_indicator_sequence, statistical_bound_check, DensityReport,
};
use pqapprox::{uniform_grid, ErrorKind};

use crate::config::{Args, Experiment, ExperimentConfig, Format};

/// Values of the squares-indicator sequence used by `--command density`.
const DENSITY_L1: f64 = 1.0;
const DENSITY_L2: f64 = 0.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] pqapprox::Error),
    #[error("writing output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Admissibility => 3,
                ErrorKind::Numeric => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}

fn run(config: &ExperimentConfig) -> Result<String, CliError> {
    let format = match config.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let grid = uniform_grid(config.grid)?;
    let f = config.function.target();
    let out = match &config.experiment {
        Experiment::Eval(spec) => render(&eval_report(&f, spec, &grid)?, format),
        Experiment::Moments(spec) => render(&moment_report(spec, &grid)?, format),
        Experiment::Rn { n, pq } => render(&rn_report(*n, *pq, &grid)?, format),
        Experiment::Bounds(spec, kind) => {
            let table = ModulusTable::new(&f, DEFAULT_MODULUS_GRID)?;
            render(&bound_report(&f, spec, &grid, *kind, &table)?, format)
        }
        Experiment::Compare { n, pq } => {
            let report = subinterval_compare(*n, *pq, &grid)?;
            for [a, b] in &report.win_intervals {
                eprintln!("king wins on [{a}, {b}]");
            }
            render(&report, format)
        }
        Experiment::Converge {
            family,
            seq,
            schedule,
        } => {
            let table = ModulusTable::new(&f, DEFAULT_MODULUS_GRID)?;
            render(
                &statistical_bound_check(&f, *family, seq, schedule, &grid, &table)?,
                format,
            )
        }
        Experiment::Density { epsilon, schedule } => {
            let x = square_indicator_sequence(DENSITY_L1, DENSITY_L2);
            let report = DensityReport {
                trajectories: vec![
                    exception_trajectory(&x, DENSITY_L2, *epsilon, schedule)?,
                    exception_trajectory(&x, DENSITY_L1, *epsilon, schedule)?,
                ],
            };
            render(&report, format)
        }
    };
    Ok(out)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PQAPPROX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "PQAPPROX_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = configure_threads()
        .and_then(|()| args.validate())
        .and_then(|config| {
            let text = run(&config)?;
            match &config.out {
                Some(path) => fs::write(path, text)?,
                None => io::stdout().lock().write_all(text.as_bytes())?,
            }
            Ok(())
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
