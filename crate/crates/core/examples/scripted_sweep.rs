//! Drives the command-line pipeline from Rust: parse a TOML config, resolve
//! it into a job and print the CSV the `xgate` binary would write.

use xgate::cli::config::{Overrides, RunConfig, Task};
use xgate::cli::{execute, Output};

const CONFIG: &str = r#"
[params]
b = 1000.0
delta_b = -100.0
j0 = 20.0
j1 = 20.0
omega = 200.0

[trace]
t_end = 0.4
points = 9

[[trace.series]]
family = "iswap_plus"

[[trace.series]]
family = "cz_nres_plus"
label = "far_detuned"
omega = 270.0
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let job = RunConfig::from_toml(CONFIG)?.resolve(Task::FidelityTrace, &Overrides::default())?;
    for w in &job.warnings {
        eprintln!("warning: {w}");
    }
    if let Output::Csv(text) = execute(&job)? {
        print!("{text}");
    }
    Ok(())
}
