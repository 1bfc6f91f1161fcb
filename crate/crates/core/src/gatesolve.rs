//! Gate-time conditions and gate recipes.
//!
//! Resonant drive: a recipe `(n, m)` fixes `J₁ = 2mπ/τ` and requires
//! `f(τ) = J₀τ + (2mπ/(ωτ)) sin ωτ − nπ = 0`. Odd `n` with even `m` lands in
//! the CZ class, even `n` with odd `m` in the iSWAP class. The ± label follows
//! from the phases of the closed-form propagator at `τ`:
//!
//! * CZ, `n = 1 + 2n₁`, `m = 2m₁`: `CZ₊` iff `n₁ + m₁` is even.
//! * iSWAP, `n = 2n₂`, `m = 1 + 2m₂`: `iSWAP₊` iff `n₂ + m₂` is odd.
//!
//! Far-detuned drive: `g(τ) = J₀τ + (J₁/ω) sin ωτ − (2n+1)π = 0`, with `CZ₊`
//! for even `n` and `CZ₋` for odd `n`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::GateFamily;

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_N: u32 = 20;
pub const DEFAULT_MAX_M: u32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error("(n, m) = ({n}, {m}) has equal parity and selects neither a CZ nor an iSWAP gate")]
    NoGateClass { n: u32, m: u32 },
    #[error("no valid solution for (n, m) = ({n}, {m}) with J1 <= J0")]
    NoValidSolution { n: u32, m: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateSolutionRes {
    pub n: u32,
    pub m: u32,
    /// Gate time, μs.
    pub tau: f64,
    /// Drive amplitude `2mπ/τ`, rad/μs.
    pub j1: f64,
    pub family: GateFamily,
    /// `f(τ)` at the returned root.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateSolutionNres {
    pub n: u32,
    pub tau: f64,
    pub family: GateFamily,
    /// `g(τ)` at the returned root.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyFilter {
    Cz,
    Iswap,
    #[default]
    Any,
}

impl FamilyFilter {
    pub fn admits(self, family: GateFamily) -> bool {
        match self {
            FamilyFilter::Cz => matches!(family, GateFamily::CzResPlus | GateFamily::CzResMinus),
            FamilyFilter::Iswap => matches!(family, GateFamily::IswapPlus | GateFamily::IswapMinus),
            FamilyFilter::Any => true,
        }
    }
}

/// Gate family selected by the parities of `(n, m)`, if any.
pub fn resonant_family(n: u32, m: u32) -> Option<GateFamily> {
    match (n % 2, m % 2) {
        (1, 0) => {
            let (n1, m1) = ((n - 1) / 2, m / 2);
            Some(if (n1 + m1) % 2 == 0 {
                GateFamily::CzResPlus
            } else {
                GateFamily::CzResMinus
            })
        }
        (0, 1) => {
            let (n2, m2) = (n / 2, (m - 1) / 2);
            Some(if (n2 + m2) % 2 == 1 {
                GateFamily::IswapPlus
            } else {
                GateFamily::IswapMinus
            })
        }
        _ => None,
    }
}

pub fn nonresonant_family(n: u32) -> GateFamily {
    if n.is_multiple_of(2) {
        GateFamily::CzNresPlus
    } else {
        GateFamily::CzNresMinus
    }
}

/// `f(τ) = J₀τ + (2mπ/(ωτ)) sin ωτ − nπ`.
pub fn resonant_residual(j0: f64, omega: f64, n: u32, m: u32, tau: f64) -> f64 {
    j0 * tau + 2.0 * m as f64 * PI / (omega * tau) * (omega * tau).sin() - n as f64 * PI
}

/// `g(τ) = J₀τ + (J₁/ω) sin ωτ − (2n+1)π`.
pub fn nonresonant_residual(j0: f64, j1: f64, omega: f64, n: u32, tau: f64) -> f64 {
    j0 * tau + j1 / omega * (omega * tau).sin() - (2 * n + 1) as f64 * PI
}

/// Bisection on a sign-changing bracket (`f(lo) < 0 ≤ f(hi)` or the reverse),
/// followed by one secant step that is kept only if it stays inside the final
/// bracket and lowers |f|.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    debug_assert!(f_lo.signum() != f_hi.signum() || f_hi == 0.0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if (f_mid < 0.0) == (f_lo < 0.0) && f_mid != 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let best = if f_lo.abs() < f_hi.abs() { lo } else { hi };
    if f_hi != f_lo {
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        if secant > lo && secant < hi && f(secant).abs() < f(best).abs() {
            return secant;
        }
    }
    best
}

fn check_positive(name: &str, v: f64) -> Result<(), SolveError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SolveError::InvalidInput(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

/// Smallest gate time `τ ≥ 2mπ/J₀` solving the resonant condition for `(n, m)`.
pub fn solve_resonant(
    j0: f64,
    omega: f64,
    n: u32,
    m: u32,
    tol: f64,
) -> Result<GateSolutionRes, SolveError> {
    check_positive("J0", j0)?;
    check_positive("omega", omega)?;
    check_positive("tol", tol)?;
    if n < 1 || m < 1 {
        return Err(SolveError::InvalidInput(format!(
            "n and m must be >= 1, got ({n}, {m})"
        )));
    }
    let family = resonant_family(n, m).ok_or(SolveError::NoGateClass { n, m })?;
    let f = |tau: f64| resonant_residual(j0, omega, n, m, tau);
    let scale = n as f64 * PI;

    // J1 = 2mπ/τ ≤ J0
    let tau_min = 2.0 * m as f64 * PI / j0;
    // beyond tau_max the linear term dominates the bounded oscillation
    let amplitude = 2.0 * m as f64 * PI / (omega * tau_min);
    let step = PI / (4.0 * omega);
    let tau_max = (scale + amplitude) / j0 + step;

    let root = {
        let f_min = f(tau_min);
        if f_min.abs() <= 1e-12 * scale {
            Some(tau_min)
        } else {
            let mut lo = tau_min;
            let mut f_lo = f_min;
            let mut found = None;
            while lo < tau_max {
                let hi = (lo + step).min(tau_max);
                let f_hi = f(hi);
                if f_hi == 0.0 {
                    found = Some(hi);
                    break;
                }
                if (f_lo < 0.0) != (f_hi < 0.0) {
                    found = Some(bisect(f, lo, hi, tol));
                    break;
                }
                if hi >= tau_max {
                    break;
                }
                lo = hi;
                f_lo = f_hi;
            }
            found
        }
    };
    let tau = root
        .ok_or(SolveError::NoValidSolution { n, m })?
        .max(tau_min);
    let j1 = (2.0 * m as f64 * PI / tau).min(j0);
    Ok(GateSolutionRes {
        n,
        m,
        tau,
        j1,
        family,
        residual: f(tau),
    })
}

/// All CZ/iSWAP recipes with `n ≤ max_n`, `m ≤ max_m`, sorted by gate time
/// (ties by `(n, m)`).
pub fn enumerate_resonant(
    j0: f64,
    omega: f64,
    filter: FamilyFilter,
    max_n: u32,
    max_m: u32,
) -> Vec<GateSolutionRes> {
    let mut out: Vec<GateSolutionRes> = (1..=max_n)
        .flat_map(|n| (1..=max_m).map(move |m| (n, m)))
        .filter(|&(n, m)| resonant_family(n, m).is_some_and(|f| filter.admits(f)))
        .filter_map(|(n, m)| solve_resonant(j0, omega, n, m, DEFAULT_ROOT_TOL).ok())
        .collect();
    out.sort_by(|a, b| a.tau.total_cmp(&b.tau).then((a.n, a.m).cmp(&(b.n, b.m))));
    out
}

/// Root `τₙ` of the far-detuned condition. `g` is non-decreasing for
/// `|J₁| ≤ J₀`, so bisection from `[0, τ_hi]` returns the smallest root.
pub fn solve_nonresonant(
    j0: f64,
    j1: f64,
    omega: f64,
    n: u32,
    tol: f64,
) -> Result<GateSolutionNres, SolveError> {
    check_positive("J0", j0)?;
    check_positive("omega", omega)?;
    check_positive("tol", tol)?;
    if !(j1.is_finite() && j1.abs() <= j0) {
        return Err(SolveError::InvalidInput(format!(
            "need |J1| <= J0, got J1 = {j1}, J0 = {j0}"
        )));
    }
    let target = (2 * n + 1) as f64 * PI;
    let g = |tau: f64| nonresonant_residual(j0, j1, omega, n, tau);
    let tau = if j1 == 0.0 {
        target / j0
    } else {
        let hi = (target + j1.abs() / omega) / j0;
        bisect(g, 0.0, hi, tol)
    };
    Ok(GateSolutionNres {
        n,
        tau,
        family: nonresonant_family(n),
        residual: g(tau),
    })
}
