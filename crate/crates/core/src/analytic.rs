//! Closed-form RWA evolutions and the target gate families.
//!
//! Resonant drive (`ω = 2|ΔB|`): the central block rotates at `J₁/4` in a frame
//! co-rotating with the gradient, dressed with the phases `a±(t)`.
//! Far-detuned drive: in the Zeeman rotating frame only the accumulated
//! exchange phase `A(t)/2` survives on |↑↓⟩ and |↓↑⟩.
//!
//! The frame sense follows the sign of ΔB: with `ΔB ≥ 0` the |↑↓⟩ row carries
//! `a₊` and the targets carry `e^{+iωτ/2}` on |↑↓⟩; with `ΔB < 0` the two rows
//! swap roles (see [`PulseParams::gradient_sense`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equiv::{GateKind, InvariantPair};
use crate::model::PulseParams;
use crate::qmat::{c, cis, Mat2, Unitary4, C64};

/// Which side of a ± pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_parity_even(even: bool) -> Self {
        if even {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Frame in which a family's target is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    Rotating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateFamily {
    CzResPlus,
    CzResMinus,
    IswapPlus,
    IswapMinus,
    CzNresPlus,
    CzNresMinus,
    CzConst,
}

impl GateFamily {
    pub const ALL: [GateFamily; 7] = [
        GateFamily::CzResPlus,
        GateFamily::CzResMinus,
        GateFamily::IswapPlus,
        GateFamily::IswapMinus,
        GateFamily::CzNresPlus,
        GateFamily::CzNresMinus,
        GateFamily::CzConst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateFamily::CzResPlus => "cz_res_plus",
            GateFamily::CzResMinus => "cz_res_minus",
            GateFamily::IswapPlus => "iswap_plus",
            GateFamily::IswapMinus => "iswap_minus",
            GateFamily::CzNresPlus => "cz_nres_plus",
            GateFamily::CzNresMinus => "cz_nres_minus",
            GateFamily::CzConst => "cz_const",
        }
    }

    /// Resonant-drive families live in the lab frame; the rest in the Zeeman
    /// rotating frame.
    pub fn frame(self) -> Frame {
        match self {
            GateFamily::CzResPlus
            | GateFamily::CzResMinus
            | GateFamily::IswapPlus
            | GateFamily::IswapMinus => Frame::Lab,
            GateFamily::CzNresPlus | GateFamily::CzNresMinus | GateFamily::CzConst => {
                Frame::Rotating
            }
        }
    }

    pub fn is_resonant(self) -> bool {
        self.frame() == Frame::Lab
    }

    /// Local-equivalence class of the family's target.
    pub fn gate_kind(self) -> GateKind {
        match self {
            GateFamily::IswapPlus | GateFamily::IswapMinus => GateKind::ISwap,
            _ => GateKind::Cz,
        }
    }
}

impl fmt::Display for GateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateFamily {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        GateFamily::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown gate family '{s}' (expected one of: {})",
                    family_names()
                )
            })
    }
}

fn family_names() -> String {
    GateFamily::ALL.map(GateFamily::name).join(", ")
}

/// Accumulated exchange phase `A(t) = J₀t + (J₁/ω) sin ωt = ∫₀ᵗ J`.
pub fn exchange_area(params: &PulseParams, t: f64) -> f64 {
    params.j0() * t + params.j1() / params.omega() * (params.omega() * t).sin()
}

/// `a±(t) = ½((J₀ ± ω)t + (J₁/ω) sin ωt)`.
pub fn phase_a(params: &PulseParams, t: f64, sign: Sign) -> f64 {
    0.5 * ((params.j0() + sign.value() * params.omega()) * t
        + params.j1() / params.omega() * (params.omega() * t).sin())
}

/// Relative mismatch `| |ω| − 2|ΔB| | / ω` from exact resonance. The resonant
/// closed forms assume this is ≈ 0.
pub fn resonance_mismatch(params: &PulseParams) -> f64 {
    (params.omega() - 2.0 * params.delta_b().abs()).abs() / params.omega()
}

/// Resonant RWA propagator (lab frame).
pub fn u_res(params: &PulseParams, t: f64) -> Unitary4 {
    let (upper, lower) = if params.gradient_sense() > 0.0 {
        (Sign::Plus, Sign::Minus)
    } else {
        (Sign::Minus, Sign::Plus)
    };
    let e_up = cis(phase_a(params, t, upper));
    let e_down = cis(phase_a(params, t, lower));
    let theta = params.j1() * t / 4.0;
    let (cos, sin) = (c(theta.cos(), 0.0), c(0.0, -theta.sin()));
    let central = Mat2::new(e_up * cos, e_up * sin, e_down * sin, e_down * cos);
    Unitary4::from_blocks_unchecked(cis(-params.b() * t), &central, cis(params.b() * t))
}

/// Far-detuned RWA propagator in the Zeeman rotating frame:
/// `diag(1, e^{iA/2}, e^{iA/2}, 1)`.
pub fn u_nonres(params: &PulseParams, t: f64) -> Unitary4 {
    let half = 0.5 * exchange_area(params, t);
    Unitary4::from_phases([0.0, half, half, 0.0])
}

/// Target gate of `family` evaluated at gate time `t`.
pub fn target_gate(family: GateFamily, t: f64, params: &PulseParams) -> Unitary4 {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let i = c(0.0, 1.0);
    match family {
        GateFamily::CzResPlus
        | GateFamily::CzResMinus
        | GateFamily::IswapPlus
        | GateFamily::IswapMinus => {
            let sign = match family {
                GateFamily::CzResPlus | GateFamily::IswapPlus => 1.0,
                _ => -1.0,
            };
            let half_drive = 0.5 * params.gradient_sense() * params.omega() * t;
            let upper: C64 = i * sign * cis(half_drive);
            let lower: C64 = i * sign * cis(-half_drive);
            let central = if family.gate_kind() == GateKind::Cz {
                Mat2::new(upper, zero, zero, lower)
            } else {
                Mat2::new(zero, upper, lower, zero)
            };
            Unitary4::from_blocks_unchecked(cis(-params.b() * t), &central, cis(params.b() * t))
        }
        GateFamily::CzNresPlus | GateFamily::CzConst => {
            Unitary4::from_blocks_unchecked(one, &Mat2::new(i, zero, zero, i), one)
        }
        GateFamily::CzNresMinus => {
            Unitary4::from_blocks_unchecked(one, &Mat2::new(-i, zero, zero, -i), one)
        }
    }
}

/// Makhlin invariants of [`u_res`] from the closed forms
/// `G₁ = ¼α(1 + β/α)²`, `G₂ = ½α⁻¹ + ½α + 2β` with `α = e^{−iA(t)}`, `β = cos(J₁t/2)`.
pub fn res_invariants(params: &PulseParams, t: f64) -> InvariantPair {
    let alpha = cis(-exchange_area(params, t));
    let beta = (params.j1() * t / 2.0).cos();
    let g1 = 0.25 * alpha * (1.0 + beta / alpha).powi(2);
    let g2 = 0.5 / alpha + 0.5 * alpha + 2.0 * beta;
    InvariantPair { g1, g2: g2.re }
}

/// Makhlin invariants of [`u_nonres`]: `G₁ = cos²(A/2)`, `G₂ = 2 + cos A`.
pub fn nonres_invariants(params: &PulseParams, t: f64) -> InvariantPair {
    let area = exchange_area(params, t);
    InvariantPair {
        g1: c((0.5 * area).cos().powi(2), 0.0),
        g2: 2.0 + area.cos(),
    }
}
