//! Gate fidelity, Makhlin invariants and local-equivalence classes.

use std::fmt;

use crate::qmat::{c, Mat4, QmatError, Unitary4, C64};

/// Default classification tolerance on both invariants.
pub const DEFAULT_CLASS_TOL: f64 = 1e-6;

/// `F = (d + |Tr(U_ideal† U_actual)|²) / (d(d+1))` at `d = 4`.
pub fn fidelity(ideal: &Unitary4, actual: &Unitary4) -> f64 {
    // Tr(A†B) = Σ conj(a_ij) b_ij, symmetric in modulus
    let overlap: C64 = ideal
        .matrix()
        .iter()
        .zip(actual.matrix().iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    (4.0 + overlap.norm_sqr()) / 20.0
}

/// Makhlin invariants `(G₁, G₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantPair {
    pub g1: C64,
    pub g2: f64,
}

impl InvariantPair {
    pub const IDENTITY: InvariantPair = InvariantPair {
        g1: c(1.0, 0.0),
        g2: 3.0,
    };
    pub const CZ: InvariantPair = InvariantPair {
        g1: c(0.0, 0.0),
        g2: 1.0,
    };
    pub const ISWAP: InvariantPair = InvariantPair {
        g1: c(0.0, 0.0),
        g2: -1.0,
    };

    /// `max(|ΔG₁|, |ΔG₂|)`.
    pub fn distance(&self, other: &InvariantPair) -> f64 {
        (self.g1 - other.g1).norm().max((self.g2 - other.g2).abs())
    }
}

impl fmt::Display for InvariantPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(G1 = {:.6}{:+.6}i, G2 = {:.6})",
            self.g1.re, self.g1.im, self.g2
        )
    }
}

// Bell basis with the phase convention that sends CZ to (0, 1).
fn magic_basis() -> Mat4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (c(s, 0.0), c(0.0, 0.0), c(0.0, s));
    Mat4::new(
        o, z, z, i, //
        z, i, o, z, //
        z, i, -o, z, //
        o, z, z, -i,
    )
}

/// Invariants under `U → (V₁⊗V₂) U (U₁⊗U₂)` and global phase.
///
/// With `m = (Q†UQ)ᵀ(Q†UQ)` in the magic basis `Q`:
/// `G₁ = tr²(m) / (16 det U)`, `G₂ = (tr²(m) − tr(m²)) / (4 det U)`.
pub fn makhlin_invariants(u: &Unitary4) -> InvariantPair {
    let q = magic_basis();
    let ub = q.adjoint() * u.matrix() * q;
    let m = ub.transpose() * ub;
    let det = u.det();
    let tr = m.trace();
    let g1 = tr * tr / (16.0 * det);
    let g2 = (tr * tr - (m * m).trace()) / (4.0 * det);
    debug_assert!(g2.im.abs() < 1e-9, "G2 imaginary part {}", g2.im);
    InvariantPair { g1, g2: g2.re }
}

/// [`makhlin_invariants`] for a raw matrix; rejects non-unitary input.
pub fn makhlin_invariants_of(m: &Mat4) -> Result<InvariantPair, QmatError> {
    Unitary4::new(*m).map(|u| makhlin_invariants(&u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Identity,
    Cz,
    ISwap,
    Other,
}

impl GateKind {
    pub fn invariants(self) -> Option<InvariantPair> {
        match self {
            GateKind::Identity => Some(InvariantPair::IDENTITY),
            GateKind::Cz => Some(InvariantPair::CZ),
            GateKind::ISwap => Some(InvariantPair::ISWAP),
            GateKind::Other => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateClass {
    pub kind: GateKind,
    /// Distance to the nearest of the three reference classes.
    pub distance: f64,
}

/// Nearest of {Identity, CZ, iSWAP} if within `tol`, otherwise `Other`.
pub fn classify_gate(u: &Unitary4, tol: f64) -> GateClass {
    classify_invariants(&makhlin_invariants(u), tol)
}

pub fn classify_invariants(inv: &InvariantPair, tol: f64) -> GateClass {
    let mut best = (GateKind::Other, f64::INFINITY);
    for kind in [GateKind::Identity, GateKind::Cz, GateKind::ISwap] {
        let d = inv.distance(&kind.invariants().unwrap());
        if d < best.1 {
            best = (kind, d);
        }
    }
    let kind = if best.1 <= tol {
        best.0
    } else {
        GateKind::Other
    };
    GateClass {
        kind,
        distance: best.1,
    }
}
