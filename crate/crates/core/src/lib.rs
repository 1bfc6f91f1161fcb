//! Simulation and calibration of two-qubit gates between spin qubits driven by
//! an oscillating exchange interaction `J(t) = J₀ + J₁ cos(ωt)`.
//!
//! Units throughout: frequencies and energies in rad/μs, times in μs, ħ = 1.

pub mod analytic;
pub mod cli;
pub mod equiv;
pub mod gatesolve;
pub mod model;
pub mod noise;
pub mod propagate;
pub mod qmat;
pub mod scan;
