//! Local-equivalence classes: the Makhlin invariants of a gate do not move
//! under single-qubit dressing, so CZ and iSWAP are told apart regardless of
//! local frames.

use std::f64::consts::PI;

use xgate::equiv::{makhlin_invariants, InvariantPair};
use xgate::qmat::{local, su2_from_quaternion, Unitary4};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cz = Unitary4::from_phases([0.0, 0.0, 0.0, PI]);
    let dressed = (local(
        &su2_from_quaternion([0.3, -0.2, 0.9, 0.1]),
        &su2_from_quaternion([0.5, 0.5, -0.5, 0.5]),
    )? * cz)
        * local(
            &su2_from_quaternion([1.0, 2.0, 3.0, 4.0]),
            &su2_from_quaternion([-1.0, 0.0, 0.2, 0.0]),
        )?;

    for (name, u) in [
        ("identity", Unitary4::identity()),
        ("CZ", cz),
        ("dressed CZ", dressed),
    ] {
        let g = makhlin_invariants(&u);
        println!(
            "{name:>10}: {g}  CZ-class: {}  iSWAP-class: {}",
            g.distance(&InvariantPair::CZ) < 1e-9,
            g.distance(&InvariantPair::ISWAP) < 1e-9
        );
    }
    Ok(())
}
