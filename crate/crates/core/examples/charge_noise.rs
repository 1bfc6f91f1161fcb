//! Quasi-static charge noise on the static exchange: averaged gate fidelity
//! against noise strength for a resonant CZ, a far-detuned CZ and a plain
//! constant-exchange CZ.

use std::f64::consts::PI;

use xgate::analytic::GateFamily;
use xgate::gatesolve::{solve_nonresonant, solve_resonant, DEFAULT_ROOT_TOL};
use xgate::model::PulseParams;
use xgate::noise::{noise_sweep, Evolution, NoiseRecipe, SweepSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res = solve_resonant(20.0, 200.0, 5, 2, DEFAULT_ROOT_TOL)?;
    let nres = solve_nonresonant(20.0, 20.0, 270.0, 0, DEFAULT_ROOT_TOL)?;
    let recipes = vec![
        NoiseRecipe {
            label: "cz_res".into(),
            family: res.family,
            tau: res.tau,
            params: PulseParams::new(1000.0, -100.0, 20.0, res.j1, 200.0)?,
        },
        NoiseRecipe {
            label: "cz_nres".into(),
            family: nres.family,
            tau: nres.tau,
            params: PulseParams::new(1000.0, -100.0, 20.0, 20.0, 270.0)?,
        },
        NoiseRecipe {
            label: "cz_const".into(),
            family: GateFamily::CzNresPlus,
            tau: PI / 20.0,
            params: PulseParams::new(1000.0, -100.0, 20.0, 0.0, 270.0)?,
        },
    ];
    let ratios: Vec<f64> = (0..=10).map(|k| 0.02 * k as f64).collect();
    let settings = SweepSettings {
        evolution: Evolution::Numeric,
        ..Default::default()
    };
    let table = noise_sweep(&recipes, &ratios, &settings)?;

    println!(
        "{:>8} {}",
        "sigma/J0",
        table
            .labels
            .iter()
            .map(|l| format!("{l:>10}"))
            .collect::<String>()
    );
    for (r, row) in table.ratios.iter().zip(&table.values) {
        println!(
            "{r:>8.2} {}",
            row.iter().map(|v| format!("{v:>10.6}")).collect::<String>()
        );
    }
    match table.crossover("cz_nres", "cz_const") {
        Some(x) => {
            println!("constant exchange overtakes the far-detuned pulse at sigma/J0 = {x:.4}")
        }
        None => println!("no crossover on this grid"),
    }
    Ok(())
}
