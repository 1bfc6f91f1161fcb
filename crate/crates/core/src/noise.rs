//! Quasistatic Gaussian charge noise on the static exchange.
//!
//! A noise sample shifts `J₀ → J₀ + J` for a whole gate, `J ~ N(0, σ²)`; the
//! drive amplitude and frequency are untouched. The averaged fidelity
//!
//! ```text
//! F_N(τ) = ∫ F(U'(τ; J₀ + J), X(τ)) p(J) dJ
//! ```
//!
//! is evaluated by Gauss–Hermite quadrature after `J = √2 σ x`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{target_gate, u_nonres, u_res, Frame, GateFamily};
use crate::equiv::fidelity;
use crate::model::PulseParams;
use crate::propagate::{propagate, to_rotating_frame_at, PropagatorConfig};
use crate::qmat::Unitary4;

pub const DEFAULT_QUAD_ORDER: usize = 41;
/// Order-doubling tolerance for [`noisy_fidelity_checked`].
pub const QUAD_CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("invalid noise model: {0}")]
    InvalidModel(String),
    #[error("family {family} is defined in the {expected:?} frame, requested {requested:?}")]
    FrameMismatch {
        family: GateFamily,
        expected: Frame,
        requested: Frame,
    },
    #[error("quadrature not converged: order {order} -> {doubled} changed F_N by {delta:.3e} (tolerance {tol:.0e})")]
    NotConverged {
        order: usize,
        doubled: usize,
        delta: f64,
        tol: f64,
    },
    #[error(transparent)]
    Propagate(#[from] crate::propagate::PropagateError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
    quad_order: usize,
}

impl NoiseModel {
    /// `sigma ≥ 0` (rad/μs); `quad_order` odd so the zero-offset node is included.
    pub fn new(sigma: f64, quad_order: usize) -> Result<Self, NoiseError> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(NoiseError::InvalidModel(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        if quad_order.is_multiple_of(2) {
            return Err(NoiseError::InvalidModel(format!(
                "quad_order must be odd, got {quad_order}"
            )));
        }
        Ok(Self { sigma, quad_order })
    }

    pub fn with_sigma(sigma: f64) -> Result<Self, NoiseError> {
        Self::new(sigma, DEFAULT_QUAD_ORDER)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Next odd order used by the doubling check.
    pub fn doubled(&self) -> Self {
        Self {
            quad_order: 2 * self.quad_order + 1,
            ..*self
        }
    }
}

/// How `U'(τ)` is obtained for each noise sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evolution {
    /// Time-ordered propagation with default settings.
    #[default]
    Numeric,
    /// The RWA closed forms (`u_res` in the lab frame, `u_nonres` rotating).
    Analytic,
}

/// Gauss–Hermite nodes and weights for `∫ e^{−x²} f(x) dx`, ascending nodes.
///
/// Roots are bracketed by sign changes of the orthonormal Hermite recurrence
/// on a grid finer than the root spacing, then polished by safeguarded Newton.
/// The recurrence is renormalised on the fly so large orders neither overflow
/// nor underflow; far-tail weights underflow to 0.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_hermite needs at least one node");
    let nf = n as f64;
    // Positive roots lie below √(2n+1); adjacent roots are at least ~π/√(2n+1) apart.
    let edge = (2.0 * nf + 1.0).sqrt();
    let wanted = n / 2;
    let mut h = 0.1 * std::f64::consts::PI / edge;
    let brackets = loop {
        let mut found = Vec::with_capacity(wanted);
        // start just above zero so the central root of odd orders is not counted
        let mut a = 0.5 * h;
        let mut fa = hermite_orthonormal(n, a).0;
        while a < edge + 1.0 {
            let b = a + h;
            let fb = hermite_orthonormal(n, b).0;
            if fa == 0.0 || fa.signum() != fb.signum() {
                found.push((a, b));
            }
            a = b;
            fa = fb;
        }
        if found.len() == wanted {
            break found;
        }
        h *= 0.5;
    };

    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for (i, &(mut a, mut b)) in brackets.iter().rev().enumerate() {
        let sa = hermite_orthonormal(n, a).0.signum();
        let mut z = 0.5 * (a + b);
        for _ in 0..200 {
            let (p, dp, _) = hermite_orthonormal(n, z);
            if p.signum() == sa {
                a = z;
            } else {
                b = z;
            }
            let newton = z - p / dp;
            let next = if newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            let done = (next - z).abs() <= 1e-15 * z.abs().max(1.0);
            z = next;
            if done || b - a <= 1e-15 * z {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = gh_weight(n, z);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
        w[n / 2] = gh_weight(n, 0.0);
    }
    x.reverse();
    w.reverse();
    (x, w)
}

// Orthonormal Hermite recurrence at z: returns (p_n, p_n', ln scale), both
// values divided by e^{scale} to stay finite at large orders.
fn hermite_orthonormal(n: usize, z: f64) -> (f64, f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    const RESCALE: f64 = 1e150;
    let (mut p1, mut p2) = (PIM4, 0.0_f64);
    let mut log_scale = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        if p1.abs() > RESCALE {
            p1 /= RESCALE;
            p2 /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    (p1, (2.0 * n as f64).sqrt() * p2, log_scale)
}

// w = 2 / p_n'(x)²
fn gh_weight(n: usize, z: f64) -> f64 {
    let (_, dp, log_scale) = hermite_orthonormal(n, z);
    (2.0_f64.ln() - 2.0 * dp.abs().ln() - 2.0 * log_scale).exp()
}

/// `F_N = (3 + 2 e^{−σ²τ²/8}) / 5`: the closed-form decay at a gate time.
pub fn analytic_noise_decay(tau: f64, sigma: f64) -> f64 {
    (3.0 + 2.0 * (-(sigma * tau).powi(2) / 8.0).exp()) / 5.0
}

fn evolve(
    params: &PulseParams,
    tau: f64,
    frame: Frame,
    evolution: Evolution,
) -> Result<Unitary4, NoiseError> {
    Ok(match (evolution, frame) {
        (Evolution::Analytic, Frame::Lab) => u_res(params, tau),
        (Evolution::Analytic, Frame::Rotating) => u_nonres(params, tau),
        (Evolution::Numeric, frame) => {
            let u = propagate(params, &PropagatorConfig::for_params(params, tau)?);
            match frame {
                Frame::Lab => u,
                Frame::Rotating => to_rotating_frame_at(&u, params, tau),
            }
        }
    })
}

fn check_frame(family: GateFamily, frame: Frame) -> Result<(), NoiseError> {
    if family.frame() != frame {
        return Err(NoiseError::FrameMismatch {
            family,
            expected: family.frame(),
            requested: frame,
        });
    }
    Ok(())
}

/// Fidelity of the evolution at `tau` against the family's target at `tau`,
/// without noise.
pub fn noiseless_fidelity(
    params: &PulseParams,
    family: GateFamily,
    tau: f64,
    frame: Frame,
    evolution: Evolution,
) -> Result<f64, NoiseError> {
    check_frame(family, frame)?;
    let target = target_gate(family, tau, params);
    Ok(fidelity(&target, &evolve(params, tau, frame, evolution)?))
}

/// Noise-averaged fidelity `F_N(τ)`; the target stays at the noiseless `X(τ)`.
pub fn noisy_fidelity(
    params: &PulseParams,
    family: GateFamily,
    tau: f64,
    noise: &NoiseModel,
    frame: Frame,
    evolution: Evolution,
) -> Result<f64, NoiseError> {
    check_frame(family, frame)?;
    if noise.sigma == 0.0 {
        return noiseless_fidelity(params, family, tau, frame, evolution);
    }
    let target = target_gate(family, tau, params);
    let (nodes, weights) = gauss_hermite(noise.quad_order);
    let scale = std::f64::consts::SQRT_2 * noise.sigma;
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        if *w == 0.0 {
            continue;
        }
        let shifted = params.with_exchange_offset(scale * x);
        total += w * fidelity(&target, &evolve(&shifted, tau, frame, evolution)?);
    }
    Ok((total / std::f64::consts::PI.sqrt()).clamp(0.2, 1.0))
}

/// [`noisy_fidelity`] with an order-doubling check at [`QUAD_CONVERGENCE_TOL`].
/// Returns the higher-order value.
pub fn noisy_fidelity_checked(
    params: &PulseParams,
    family: GateFamily,
    tau: f64,
    noise: &NoiseModel,
    frame: Frame,
    evolution: Evolution,
) -> Result<f64, NoiseError> {
    let coarse = noisy_fidelity(params, family, tau, noise, frame, evolution)?;
    let doubled = noise.doubled();
    let fine = noisy_fidelity(params, family, tau, &doubled, frame, evolution)?;
    let delta = (fine - coarse).abs();
    if delta > QUAD_CONVERGENCE_TOL {
        return Err(NoiseError::NotConverged {
            order: noise.quad_order,
            doubled: doubled.quad_order,
            delta,
            tol: QUAD_CONVERGENCE_TOL,
        });
    }
    Ok(fine)
}

/// One curve of a noise sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRecipe {
    pub label: String,
    pub family: GateFamily,
    pub tau: f64,
    pub params: PulseParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub quad_order: usize,
    pub evolution: Evolution,
    pub check_convergence: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            quad_order: DEFAULT_QUAD_ORDER,
            evolution: Evolution::Numeric,
            check_convergence: false,
        }
    }
}

/// `F_N` per (noise ratio σ/J₀, recipe).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTable {
    pub ratios: Vec<f64>,
    pub labels: Vec<String>,
    /// `values[row][col]`: row per ratio, column per recipe.
    pub values: Vec<Vec<f64>>,
}

impl NoiseTable {
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let col = self.labels.iter().position(|l| l == label)?;
        Some(self.values.iter().map(|row| row[col]).collect())
    }

    /// First ratio at which `column(a) − column(b)` changes sign, linearly
    /// interpolated between grid points.
    pub fn crossover(&self, a: &str, b: &str) -> Option<f64> {
        let (ca, cb) = (self.column(a)?, self.column(b)?);
        let diff: Vec<f64> = ca.iter().zip(&cb).map(|(x, y)| x - y).collect();
        (1..diff.len()).find_map(|k| {
            let (d0, d1) = (diff[k - 1], diff[k]);
            if d0 == 0.0 {
                return None;
            }
            if d1 == 0.0 || (d0 > 0.0) != (d1 > 0.0) {
                let (r0, r1) = (self.ratios[k - 1], self.ratios[k]);
                Some(r0 + (r1 - r0) * d0 / (d0 - d1))
            } else {
                None
            }
        })
    }
}

/// Evaluates every (ratio, recipe) cell; `σ = ratio · J₀` of the recipe.
/// Cells run in parallel and are collected in grid order.
pub fn noise_sweep(
    recipes: &[NoiseRecipe],
    ratios: &[f64],
    settings: &SweepSettings,
) -> Result<NoiseTable, NoiseError> {
    if let Some(bad) = ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(NoiseError::InvalidModel(format!(
            "noise ratios must be finite and >= 0, got {bad}"
        )));
    }
    let cells: Vec<(usize, usize)> = (0..ratios.len())
        .flat_map(|r| (0..recipes.len()).map(move |c| (r, c)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(r, c)| {
            let recipe = &recipes[c];
            let noise = NoiseModel::new(ratios[r] * recipe.params.j0(), settings.quad_order)?;
            let frame = recipe.family.frame();
            if settings.check_convergence {
                noisy_fidelity_checked(
                    &recipe.params,
                    recipe.family,
                    recipe.tau,
                    &noise,
                    frame,
                    settings.evolution,
                )
            } else {
                noisy_fidelity(
                    &recipe.params,
                    recipe.family,
                    recipe.tau,
                    &noise,
                    frame,
                    settings.evolution,
                )
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(NoiseTable {
        ratios: ratios.to_vec(),
        labels: recipes.iter().map(|r| r.label.clone()).collect(),
        values: values
            .chunks(recipes.len().max(1))
            .map(<[f64]>::to_vec)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_hermite_reference_values() {
        // numpy.polynomial.hermite.hermgauss(5)
        let (x, w) = gauss_hermite(5);
        let x_ref = [
            -2.0201828704560856,
            -0.9585724646138185,
            0.0,
            0.9585724646138185,
            2.0201828704560856,
        ];
        let w_ref = [
            0.019953242059045917,
            0.3936193231522411,
            0.9453087204829418,
            0.3936193231522411,
            0.019953242059045917,
        ];
        for i in 0..5 {
            assert!((x[i] - x_ref[i]).abs() < 1e-13);
            assert!((w[i] - w_ref[i]).abs() < 1e-13);
        }
        let (x, w) = gauss_hermite(41);
        assert!((x[40] - 8.213000895598281).abs() < 1e-12);
        assert!((w[20] - 0.34482208361638944).abs() < 1e-13);
        assert!((w[40] / 4.0019596646664215e-30 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gauss_hermite_moments_at_large_order() {
        for n in [1, 2, 41, 83, 401, 1001] {
            let (x, w) = gauss_hermite(n);
            let m0: f64 = w.iter().sum();
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            assert!((m0 - PI.sqrt()).abs() < 1e-12, "n={n} m0={m0}");
            if n > 1 {
                assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12, "n={n} m2={m2}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn decay_formula() {
        assert_eq!(analytic_noise_decay(0.7, 0.0), 1.0);
        assert!((analytic_noise_decay(PI / 20.0, 2.0) - 0.9950955133446575).abs() < 1e-15);
        assert!((analytic_noise_decay(1.0, 1e3) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn model_validation() {
        assert!(NoiseModel::new(-1.0, 41).is_err());
        assert!(NoiseModel::new(1.0, 40).is_err());
        assert_eq!(NoiseModel::new(1.0, 41).unwrap().doubled().quad_order(), 83);
    }

    #[test]
    fn frame_must_match_family() {
        let p = PulseParams::new(1000.0, -100.0, 20.0, 16.0, 200.0).unwrap();
        let noise = NoiseModel::with_sigma(1.0).unwrap();
        let err = noisy_fidelity(
            &p,
            GateFamily::CzResMinus,
            PI / 4.0,
            &noise,
            Frame::Rotating,
            Evolution::Analytic,
        );
        assert!(matches!(err, Err(NoiseError::FrameMismatch { .. })));
    }

    #[test]
    fn zero_sigma_is_noiseless() {
        let p = PulseParams::new(1000.0, -100.0, 20.0, 16.0, 200.0).unwrap();
        let noise = NoiseModel::with_sigma(0.0).unwrap();
        for ev in [Evolution::Analytic, Evolution::Numeric] {
            let a = noisy_fidelity(&p, GateFamily::CzResMinus, PI / 4.0, &noise, Frame::Lab, ev)
                .unwrap();
            let b =
                noiseless_fidelity(&p, GateFamily::CzResMinus, PI / 4.0, Frame::Lab, ev).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn analytic_resonant_noise_follows_decay_law() {
        let p = PulseParams::new(1000.0, -100.0, 20.0, 16.0, 200.0).unwrap();
        let tau = PI / 4.0;
        for ratio in [0.0, 0.01, 0.05, 0.1, 0.2] {
            let sigma = ratio * 20.0;
            let noise = NoiseModel::with_sigma(sigma).unwrap();
            let f = noisy_fidelity(
                &p,
                GateFamily::CzResMinus,
                tau,
                &noise,
                Frame::Lab,
                Evolution::Analytic,
            )
            .unwrap();
            assert!(
                (f - analytic_noise_decay(tau, sigma)).abs() < 1e-6,
                "ratio {ratio}"
            );
        }
    }

    #[test]
    fn quadrature_matches_dense_trapezoid() {
        // oracle: trapezoid of F(J) p(J) over [−6σ, 6σ], independent of the nodes
        let p = PulseParams::new(1000.0, -100.0, 20.0, 20.0, 270.0).unwrap();
        let tau = 0.16;
        let sigma = 2.4;
        let target = target_gate(GateFamily::CzNresPlus, tau, &p);
        let integrand = |j: f64| {
            let u = u_nonres(&p.with_exchange_offset(j), tau);
            fidelity(&target, &u) * (-j * j / (2.0 * sigma * sigma)).exp()
                / ((2.0 * PI).sqrt() * sigma)
        };
        let n = 20_000;
        let h = 12.0 * sigma / n as f64;
        let trap: f64 = (0..=n)
            .map(|k| {
                let v = integrand(-6.0 * sigma + k as f64 * h);
                if k == 0 || k == n {
                    0.5 * v
                } else {
                    v
                }
            })
            .sum::<f64>()
            * h;
        let noise = NoiseModel::with_sigma(sigma).unwrap();
        let gh = noisy_fidelity(
            &p,
            GateFamily::CzNresPlus,
            tau,
            &noise,
            Frame::Rotating,
            Evolution::Analytic,
        )
        .unwrap();
        assert!((gh - trap).abs() < 1e-7, "gh {gh} trap {trap}");
    }

    #[test]
    fn crossover_interpolates() {
        let table = NoiseTable {
            ratios: vec![0.0, 0.1, 0.2],
            labels: vec!["a".into(), "b".into()],
            values: vec![vec![1.0, 0.9], vec![0.8, 0.85], vec![0.7, 0.8]],
        };
        let x = table.crossover("a", "b").unwrap();
        assert!((x - 0.1 * 0.1 / 0.15).abs() < 1e-12);
        assert!(table.crossover("a", "missing").is_none());
    }
}
