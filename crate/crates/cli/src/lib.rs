//! Configuration-driven experiment runner.
//!
//! A run reads one JSON configuration, executes the named experiment and
//! writes `<experiment>.csv` plus `summary.json` into the output directory.
//! Outputs depend only on the effective configuration (seed included), never
//! on the worker count or the wall clock.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind, Mode, SystemSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("runtime guard: {0}")]
    Guard(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Guard(_) => 4,
            CliError::Runtime(_) | CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Command-line overrides of a configuration file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Parses, validates and runs the configuration at `path`; returns the
/// output directory.
pub fn run_config_file(path: &Path, opts: &RunOptions) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    let out = match (&opts.out, &config.output) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => PathBuf::from(o),
        (None, None) => PathBuf::from("out"),
    };
    // the output location is not part of the experiment
    config.output = None;
    config.validate()?;
    let result = match opts.threads {
        Some(k) => lorentz::mc::with_threads(k, || experiments::run(&config)),
        None => experiments::run(&config),
    }?;
    output::write_all(&out, &config, &result)?;
    Ok(out)
}
