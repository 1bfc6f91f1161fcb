//! Dense 2×2 / 4×4 complex matrix kernel.
//!
//! Everything in the crate speaks [`Unitary4`]: propagators, closed-form
//! approximations and target gates. Generic linear algebra is delegated to
//! `nalgebra`; this module adds the unitarity bookkeeping and the exponential
//! of Hermitian generators.

use std::fmt;
use std::ops::Mul;

pub use nalgebra::Complex;
use nalgebra::{Matrix2, Matrix4};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Max-norm tolerance on `U†U − 𝟙` accepted by [`Unitary4::new`].
pub const UNITARITY_TOL: f64 = 1e-10;
/// Max-norm tolerance on `H − H†` accepted by [`hermitian_exp4`] and [`hermitian_exp2`].
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmatError {
    #[error("matrix is not unitary: max |U†U - 1| = {defect:.3e} (tolerance {UNITARITY_TOL:.0e})")]
    NotUnitary { defect: f64 },
    #[error(
        "generator is not Hermitian: max |H - H†| = {defect:.3e} (tolerance {HERMITICITY_TOL:.0e})"
    )]
    NotHermitian { defect: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("time step must be finite, got {0}")]
    BadTimeStep(f64),
}

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// `e^{iφ}`.
pub fn cis(phase: f64) -> C64 {
    Complex::from_polar(1.0, phase)
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff<const R: usize, const K: usize>(
    a: &nalgebra::SMatrix<C64, R, K>,
    b: &nalgebra::SMatrix<C64, R, K>,
) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn unitarity_defect4(m: &Mat4) -> f64 {
    max_abs_diff(&(m.adjoint() * m), &Mat4::identity())
}

/// A 4×4 unitary in the fixed basis |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.
#[derive(Clone, Copy, PartialEq)]
pub struct Unitary4(Mat4);

impl Unitary4 {
    /// Validates unitarity to [`UNITARITY_TOL`].
    pub fn new(m: Mat4) -> Result<Self, QmatError> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QmatError::NonFinite);
        }
        let defect = unitarity_defect4(&m);
        if defect > UNITARITY_TOL {
            return Err(QmatError::NotUnitary { defect });
        }
        Ok(Self(m))
    }

    /// For matrices unitary by construction (phases, rotations, products of those).
    pub(crate) fn new_unchecked(m: Mat4) -> Self {
        debug_assert!(
            unitarity_defect4(&m) < 1e-8,
            "new_unchecked on non-unitary matrix"
        );
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Mat4::identity())
    }

    /// Diagonal unitary from four unit-modulus entries.
    pub fn diagonal(entries: [C64; 4]) -> Result<Self, QmatError> {
        Self::new(Mat4::from_diagonal(&nalgebra::Vector4::from(entries)))
    }

    /// Diagonal unitary `diag(e^{iφ₀}, …, e^{iφ₃})`.
    pub fn from_phases(phases: [f64; 4]) -> Self {
        Self(Mat4::from_diagonal(&nalgebra::Vector4::from(
            phases.map(cis),
        )))
    }

    /// Assembles the S_z-conserving block form: corner phases on |↑↑⟩, |↓↓⟩
    /// and a 2×2 unitary on {|↑↓⟩, |↓↑⟩}.
    pub fn from_blocks(up_up: C64, central: &Mat2, down_down: C64) -> Result<Self, QmatError> {
        Self::new(block_matrix(up_up, central, down_down))
    }

    pub(crate) fn from_blocks_unchecked(up_up: C64, central: &Mat2, down_down: C64) -> Self {
        Self::new_unchecked(block_matrix(up_up, central, down_down))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn det(&self) -> C64 {
        det4(self)
    }

    /// Current `max |U†U − 𝟙|`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect4(&self.0)
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    /// The central {|↑↓⟩, |↓↑⟩} block.
    pub fn central_block(&self) -> Mat2 {
        self.0.fixed_view::<2, 2>(1, 1).into_owned()
    }

    /// Multiplies by a global phase `e^{iφ}`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        Self(self.0 * cis(phase))
    }
}

impl fmt::Debug for Unitary4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Unitary4 [")?;
        for r in 0..4 {
            write!(f, "  ")?;
            for k in 0..4 {
                let z = self.0[(r, k)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: Unitary4) -> Unitary4 {
        Unitary4(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a Unitary4> for &'a Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: &'a Unitary4) -> Unitary4 {
        Unitary4(self.0 * rhs.0)
    }
}

fn block_matrix(up_up: C64, central: &Mat2, down_down: C64) -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = up_up;
    m.fixed_view_mut::<2, 2>(1, 1).copy_from(central);
    m[(3, 3)] = down_down;
    m
}

/// Determinant of a 4×4 unitary.
pub fn det4(u: &Unitary4) -> C64 {
    u.0.determinant()
}

fn check_step(dt: f64) -> Result<(), QmatError> {
    if dt.is_finite() {
        Ok(())
    } else {
        Err(QmatError::BadTimeStep(dt))
    }
}

/// `exp(−i·H·dt)` for a Hermitian 4×4 generator, via eigendecomposition.
pub fn hermitian_exp4(h: &Mat4, dt: f64) -> Result<Unitary4, QmatError> {
    check_step(dt)?;
    let defect = max_abs_diff(h, &h.adjoint());
    if !defect.is_finite() {
        return Err(QmatError::NonFinite);
    }
    if defect > HERMITICITY_TOL {
        return Err(QmatError::NotHermitian { defect });
    }
    let eig = h.symmetric_eigen();
    let phases = nalgebra::Vector4::from_iterator(eig.eigenvalues.iter().map(|&e| cis(-e * dt)));
    let v = eig.eigenvectors;
    Unitary4::new(v * Mat4::from_diagonal(&phases) * v.adjoint())
}

/// `exp(−i·H·dt)` for a Hermitian 2×2 generator, via eigendecomposition.
pub fn hermitian_exp2(h: &Mat2, dt: f64) -> Result<Mat2, QmatError> {
    check_step(dt)?;
    let defect = max_abs_diff(h, &h.adjoint());
    if !defect.is_finite() {
        return Err(QmatError::NonFinite);
    }
    if defect > HERMITICITY_TOL {
        return Err(QmatError::NotHermitian { defect });
    }
    let eig = h.symmetric_eigen();
    let phases = nalgebra::Vector2::from_iterator(eig.eigenvalues.iter().map(|&e| cis(-e * dt)));
    let v = eig.eigenvectors;
    Ok(v * Mat2::from_diagonal(&phases) * v.adjoint())
}

/// `exp(−i·h·dt)` for the real symmetric 2×2 generator `[[a, k], [k, b]]`,
/// in closed form: `e^{−i m dt}(cos(r dt)𝟙 − i sin(r dt)/r · (d σ_z + k σ_x))`
/// with `m = (a+b)/2`, `d = (a−b)/2`, `r = √(d² + k²)`.
pub fn real_symmetric_exp2(a: f64, b: f64, k: f64, dt: f64) -> Mat2 {
    let mean = 0.5 * (a + b);
    let half_gap = 0.5 * (a - b);
    let r = half_gap.hypot(k);
    let theta = r * dt;
    let cos = theta.cos();
    // sin(r dt)/r, with the r → 0 limit
    let sinc = if r * dt.abs() > 1e-8 {
        theta.sin() / r
    } else {
        dt * (1.0 - theta * theta / 6.0)
    };
    let global = cis(-mean * dt);
    Mat2::new(
        global * c(cos, -half_gap * sinc),
        global * c(0.0, -k * sinc),
        global * c(0.0, -k * sinc),
        global * c(cos, half_gap * sinc),
    )
}

pub mod pauli {
    use super::{c, Mat2};

    pub fn identity() -> Mat2 {
        Mat2::identity()
    }
    pub fn x() -> Mat2 {
        Mat2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
    }
    pub fn y() -> Mat2 {
        Mat2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.))
    }
    pub fn z() -> Mat2 {
        Mat2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.))
    }
}

/// `a ⊗ b`, with `a` acting on spin 1 (the left factor of each basis ket).
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m.fixed_view_mut::<2, 2>(2 * i, 2 * j)
                .copy_from(&(b * a[(i, j)]));
        }
    }
    m
}

/// Local two-qubit operation `a ⊗ b` from two single-qubit unitaries.
pub fn local(a: &Mat2, b: &Mat2) -> Result<Unitary4, QmatError> {
    Unitary4::new(kron(a, b))
}

/// SU(2) element `q₀𝟙 − i(q₁σ_x + q₂σ_y + q₃σ_z)` from a (normalised) quaternion.
///
/// Feeding four i.i.d. normal samples gives a Haar-random element.
pub fn su2_from_quaternion(q: [f64; 4]) -> Mat2 {
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    Mat2::new(c(w, -z), c(-y, -x), c(y, -x), c(w, z))
}
