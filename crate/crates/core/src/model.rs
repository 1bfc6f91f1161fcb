//! Physical parameters and the two-spin Hamiltonian.
//!
//! Units: every frequency is an angular frequency in rad/μs (numerically the
//! same as "MHz" in rad·MHz), times are in μs, ħ = 1 and spin operators are
//! σ/2. Basis ordering everywhere is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ with spin 1 the
//! left factor.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmat::{c, Mat4, Unitary4};

/// Two-qubit computational basis in the toolkit's fixed ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisState {
    UpUp,
    UpDown,
    DownUp,
    DownDown,
}

impl BasisState {
    pub const ORDER: [BasisState; 4] = [
        BasisState::UpUp,
        BasisState::UpDown,
        BasisState::DownUp,
        BasisState::DownDown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// (S₁z, S₂z) eigenvalues.
    pub fn spin_z(self) -> (f64, f64) {
        match self {
            BasisState::UpUp => (0.5, 0.5),
            BasisState::UpDown => (0.5, -0.5),
            BasisState::DownUp => (-0.5, 0.5),
            BasisState::DownDown => (-0.5, -0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter {name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("static exchange J0 must be >= 0, got {0}")]
    NegativeJ0(f64),
    #[error("drive amplitude must satisfy |J1| <= J0, got J1 = {j1}, J0 = {j0}")]
    DriveTooStrong { j0: f64, j1: f64 },
    #[error("drive frequency omega must be > 0, got {0}")]
    NonPositiveOmega(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RawPulseParams {
    b: f64,
    delta_b: f64,
    j0: f64,
    j1: f64,
    omega: f64,
}

/// Device and drive parameters `(B, ΔB, J₀, J₁, ω)`, rad/μs.
///
/// Constructed values satisfy `J₀ ≥ 0`, `|J₁| ≤ J₀` and `ω > 0`, so the total
/// exchange `J(t) = J₀ + J₁ cos ωt` never goes negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPulseParams", into = "RawPulseParams")]
pub struct PulseParams {
    b: f64,
    delta_b: f64,
    j0: f64,
    j1: f64,
    omega: f64,
}

impl TryFrom<RawPulseParams> for PulseParams {
    type Error = ParamError;
    fn try_from(r: RawPulseParams) -> Result<Self, ParamError> {
        PulseParams::new(r.b, r.delta_b, r.j0, r.j1, r.omega)
    }
}

impl From<PulseParams> for RawPulseParams {
    fn from(p: PulseParams) -> Self {
        RawPulseParams {
            b: p.b,
            delta_b: p.delta_b,
            j0: p.j0,
            j1: p.j1,
            omega: p.omega,
        }
    }
}

impl PulseParams {
    pub fn new(b: f64, delta_b: f64, j0: f64, j1: f64, omega: f64) -> Result<Self, ParamError> {
        for (name, value) in [
            ("B", b),
            ("delta_b", delta_b),
            ("J0", j0),
            ("J1", j1),
            ("omega", omega),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NonFinite { name, value });
            }
        }
        if j0 < 0.0 {
            return Err(ParamError::NegativeJ0(j0));
        }
        if j1.abs() > j0 {
            return Err(ParamError::DriveTooStrong { j0, j1 });
        }
        if omega <= 0.0 {
            return Err(ParamError::NonPositiveOmega(omega));
        }
        Ok(Self {
            b,
            delta_b,
            j0,
            j1,
            omega,
        })
    }

    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn delta_b(&self) -> f64 {
        self.delta_b
    }
    pub fn j0(&self) -> f64 {
        self.j0
    }
    pub fn j1(&self) -> f64 {
        self.j1
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn with_j1(&self, j1: f64) -> Result<Self, ParamError> {
        Self::new(self.b, self.delta_b, self.j0, j1, self.omega)
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self, ParamError> {
        Self::new(self.b, self.delta_b, self.j0, self.j1, omega)
    }

    /// Shifts the static exchange by a quasistatic offset, `J₀ → J₀ + dj`.
    ///
    /// Skips validation: a large negative noise sample may leave `J₀ + dj < |J₁|`,
    /// which is still a well-defined Hamiltonian.
    pub(crate) fn with_exchange_offset(&self, dj: f64) -> Self {
        Self {
            j0: self.j0 + dj,
            ..*self
        }
    }

    /// `J(t) = J₀ + J₁ cos(ωt)`.
    pub fn exchange_at(&self, t: f64) -> f64 {
        self.j0 + self.j1 * (self.omega * t).cos()
    }

    /// Entries `(h₁₁, h₂₂, h₁₂)` of the real symmetric central block on
    /// {|↑↓⟩, |↓↑⟩} for total exchange `j`.
    pub(crate) fn central_block(&self, j: f64) -> (f64, f64, f64) {
        (-self.delta_b - 0.5 * j, self.delta_b - 0.5 * j, 0.5 * j)
    }

    /// `H(t) = B(S₁z+S₂z) + ΔB(S₂z−S₁z) + J(t)(S₁·S₂ − ¼)`.
    pub fn hamiltonian_at(&self, t: f64) -> Mat4 {
        let (a, d, k) = self.central_block(self.exchange_at(t));
        let mut h = Mat4::zeros();
        h[(0, 0)] = c(self.b, 0.0);
        h[(1, 1)] = c(a, 0.0);
        h[(2, 2)] = c(d, 0.0);
        h[(1, 2)] = c(k, 0.0);
        h[(2, 1)] = c(k, 0.0);
        h[(3, 3)] = c(-self.b, 0.0);
        h
    }

    /// Diagonal of the Zeeman generator `K` for which `R(t) = exp(iKt)` removes
    /// all local Zeeman phases: spin 1 precesses at `B − ΔB`, spin 2 at `B + ΔB`.
    pub fn rotating_frame_generator(&self) -> [f64; 4] {
        let (w1, w2) = (self.b - self.delta_b, self.b + self.delta_b);
        BasisState::ORDER.map(|s| {
            let (s1, s2) = s.spin_z();
            w1 * s1 + w2 * s2
        })
    }

    /// `R(t) = exp(iKt)`.
    pub fn rotating_frame(&self, t: f64) -> Unitary4 {
        Unitary4::from_phases(self.rotating_frame_generator().map(|k| k * t))
    }

    /// `+1` if the Zeeman gradient is non-negative, `−1` otherwise. The
    /// resonant RWA frame co-rotates with the gradient, so this fixes which of
    /// |↑↓⟩, |↓↑⟩ picks up `e^{+iωt/2}`.
    pub fn gradient_sense(&self) -> f64 {
        if self.delta_b < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Off-resonant RWA figures of merit `(|J₀/4ΔB|, |J₁/(8ΔB+4ω)|, |J₁/(8ΔB−4ω)|)`.
    pub fn rwa_validity(&self) -> RwaRatios {
        let ratio = |num: f64, den: f64| {
            if den == 0.0 {
                if num == 0.0 {
                    RwaRatio::Defined(0.0)
                } else {
                    RwaRatio::Resonant
                }
            } else {
                RwaRatio::Defined((num / den).abs())
            }
        };
        RwaRatios {
            static_exchange: ratio(self.j0, 4.0 * self.delta_b),
            sum_sideband: ratio(self.j1, 8.0 * self.delta_b + 4.0 * self.omega),
            difference_sideband: ratio(self.j1, 8.0 * self.delta_b - 4.0 * self.omega),
        }
    }
}

/// One dimensionless RWA ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RwaRatio {
    Defined(f64),
    /// Vanishing denominator: the drive sits on a resonance.
    Resonant,
}

impl RwaRatio {
    pub fn value(self) -> Option<f64> {
        match self {
            RwaRatio::Defined(v) => Some(v),
            RwaRatio::Resonant => None,
        }
    }
}

impl fmt::Display for RwaRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RwaRatio::Defined(v) => write!(f, "{v:.4}"),
            RwaRatio::Resonant => write!(f, "ratio undefined: resonant"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaRatios {
    pub static_exchange: RwaRatio,
    pub sum_sideband: RwaRatio,
    pub difference_sideband: RwaRatio,
}

pub const DEFAULT_RWA_THRESHOLD: f64 = 0.1;

impl RwaRatios {
    pub fn as_array(&self) -> [RwaRatio; 3] {
        [
            self.static_exchange,
            self.sum_sideband,
            self.difference_sideband,
        ]
    }

    /// All three ratios defined and below `threshold`.
    pub fn within(&self, threshold: f64) -> bool {
        self.as_array()
            .iter()
            .all(|r| matches!(r.value(), Some(v) if v < threshold))
    }
}
