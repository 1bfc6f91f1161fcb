//! Integrates the full lab-frame Hamiltonian for a resonant drive and
//! compares it against the closed-form rotating-wave propagator.

use xgate::analytic::u_res;
use xgate::equiv::fidelity;
use xgate::model::PulseParams;
use xgate::propagate::{
    propagate_checked, propagate_trace, PropagatorConfig, DEFAULT_CONVERGENCE_TOL,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // B, dB, J0, J1 in rad/us; drive at omega = 2|dB|
    let p = PulseParams::new(1000.0, -100.0, 20.0, 20.0, 200.0)?;
    let config = PropagatorConfig::for_params(&p, 1.1)?;
    println!("steps: {}, scheme: {:?}", config.steps(), config.scheme());

    propagate_checked(&p, &config, DEFAULT_CONVERGENCE_TOL)?;
    println!("step doubling agrees within {DEFAULT_CONVERGENCE_TOL:e}");

    let trace = propagate_trace(&p, &config);
    println!("{:>8} {:>10}", "t [us]", "F(U, Ures)");
    for (t, u) in trace.every(config.steps() / 11).iter() {
        println!("{t:8.4} {:10.6}", fidelity(&u_res(&p, t), u));
    }
    println!("rwa ratios: {:?}", p.rwa_validity());
    Ok(())
}
