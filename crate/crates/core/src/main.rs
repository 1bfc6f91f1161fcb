use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xgate::cli::config::{FigureId, Overrides, Task};
use xgate::cli::run;

/// Simulate and calibrate two-qubit gates driven by an oscillating exchange
/// J(t) = J0 + J1 cos(omega t).
///
/// All frequencies in the config file (b, delta_b, j0, j1, omega) are angular
/// frequencies in rad/us, i.e. rad*MHz; times are in us. Set XGATE_THREADS to
/// cap the number of worker threads.
#[derive(Parser)]
#[command(name = "xgate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagator at evolve.t_end, one CSV row per matrix entry.
    Evolve(Common),
    /// Fidelity against target gate families over a time window.
    FidelityTrace(Common),
    /// Gate times and drive amplitudes for CZ and iSWAP recipes.
    SolveGates(Common),
    /// Noise-averaged fidelity against sigma/J0.
    NoiseSweep(Common),
    /// Regenerate the data behind a figure (fig2, fig3 or fig4) into --out DIR.
    Reproduce {
        figure: Option<FigureId>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (directory for reproduce); stdout if omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Propagation step count (minimum per trace).
    #[arg(long, value_name = "N")]
    steps: Option<usize>,
    /// Gauss-Hermite order for noise averages (odd).
    #[arg(long, value_name = "N")]
    quad_order: Option<usize>,
    /// Fail unless step doubling (or quadrature doubling) agrees.
    #[arg(long)]
    check_convergence: bool,
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("XGATE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("XGATE_THREADS must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (task, common, figure) = match cli.command {
        Command::Evolve(c) => (Task::Evolve, c, None),
        Command::FidelityTrace(c) => (Task::FidelityTrace, c, None),
        Command::SolveGates(c) => (Task::SolveGates, c, None),
        Command::NoiseSweep(c) => (Task::NoiseSweep, c, None),
        Command::Reproduce { figure, common } => (Task::Reproduce, common, figure),
    };
    let overrides = Overrides {
        out: common.out,
        steps: common.steps,
        quad_order: common.quad_order,
        check_convergence: common.check_convergence,
        figure,
    };
    let result = run(
        task,
        common.config.as_deref(),
        &overrides,
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    match result {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
