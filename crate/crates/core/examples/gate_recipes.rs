//! Gate recipes for a fixed static exchange and drive frequency: the
//! shortest resonant CZ and iSWAP pulses, and far-detuned CZ pulse lengths
//! as a function of drive amplitude.

use xgate::gatesolve::{enumerate_resonant, solve_nonresonant, FamilyFilter, DEFAULT_ROOT_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (j0, omega) = (20.0, 200.0);
    println!("resonant recipes (J0 = {j0}, omega = {omega}):");
    println!(
        "{:>14} {:>3} {:>3} {:>10} {:>8}",
        "family", "n", "m", "tau [us]", "J1"
    );
    for s in enumerate_resonant(j0, omega, FamilyFilter::Any, 12, 4)
        .iter()
        .take(8)
    {
        println!(
            "{:>14} {:>3} {:>3} {:>10.6} {:>8.4}",
            s.family.name(),
            s.n,
            s.m,
            s.tau,
            s.j1
        );
    }

    let omega = 270.0;
    println!("\nfar-detuned CZ, n = 0 (omega = {omega}):");
    for j1 in [-20.0, -10.0, 0.0, 10.0, 20.0] {
        let s = solve_nonresonant(j0, j1, omega, 0, DEFAULT_ROOT_TOL)?;
        println!(
            "  J1 = {j1:>5}: tau = {:.6} us ({})",
            s.tau,
            s.family.name()
        );
    }
    Ok(())
}
