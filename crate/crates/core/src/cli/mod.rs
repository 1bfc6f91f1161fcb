//! Command-line front end: configuration, task execution and CSV output.
//!
//! The binary is a thin wrapper over [`run`]; everything it does is reachable
//! from here, so sweeps can also be scripted from Rust.

pub mod config;
pub mod csv;
pub mod tasks;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::gatesolve::SolveError;
use crate::noise::{NoiseError, DEFAULT_QUAD_ORDER};
use crate::propagate::PropagateError;
use config::{Job, JobKind, Overrides, RunConfig, Task};
use tasks::ReproduceOptions;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for configuration problems, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    /// One CSV, written to `--out` or stdout.
    Csv(String),
    /// Several files written into the `--out` directory.
    Files(Vec<Artifact>),
}

/// Runs a validated job. Nothing is written.
pub fn execute(job: &Job) -> Result<Output, CliError> {
    let check = job.check_convergence;
    Ok(match &job.kind {
        JobKind::Evolve(j) => Output::Csv(tasks::run_evolve(j, check)?.render()),
        JobKind::Trace(j) => Output::Csv(tasks::run_fidelity_trace(j, check)?.render()),
        JobKind::Solve(j) => Output::Csv(tasks::run_solve_gates(j)?.render()),
        JobKind::Noise(j) => Output::Csv(tasks::run_noise_sweep(j, check)?.render()),
        JobKind::Reproduce(figure) => {
            let options = ReproduceOptions {
                check_convergence: check,
                steps: job.steps,
                quad_order: job.quad_order.unwrap_or(DEFAULT_QUAD_ORDER),
            };
            Output::Files(tasks::reproduce(*figure, &options)?)
        }
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `output` to `out` (a file, or a directory for [`Output::Files`]),
/// or to `stdout` when `out` is `None` and the output is a single CSV.
/// Returns the paths written.
pub fn write_output(
    out: Option<&Path>,
    output: &Output,
    stdout: &mut dyn Write,
) -> Result<Vec<PathBuf>, CliError> {
    match output {
        Output::Csv(text) => match out {
            Some(path) => write_file(path, text).map(|()| vec![path.to_path_buf()]),
            None => {
                let io = |source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                };
                stdout.write_all(text.as_bytes()).map_err(io)?;
                stdout.flush().map_err(io)?;
                Ok(Vec::new())
            }
        },
        Output::Files(files) => {
            let dir = out.unwrap_or(Path::new("."));
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            files
                .iter()
                .map(|f| {
                    let path = dir.join(&f.file_name);
                    write_file(&path, &f.contents).map(|()| path)
                })
                .collect()
        }
    }
}

/// Loads (optionally) a config file, resolves `task`, runs it and writes
/// the result. Warnings go to `stderr`.
pub fn run(
    task: Task,
    config_path: Option<&Path>,
    overrides: &Overrides,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Vec<PathBuf>, CliError> {
    let config = match config_path {
        Some(path) => RunConfig::load(path)?,
        None if task == Task::Reproduce => RunConfig::default(),
        None => return Err(CliError::Config(format!("{task} needs --config PATH"))),
    };
    let job = config.resolve(task, overrides)?;
    for w in &job.warnings {
        // best effort: a closed stderr must not fail the run
        let _ = writeln!(stderr, "warning: {w}");
    }
    let output = execute(&job)?;
    write_output(job.out.as_deref(), &output, stdout)
}
