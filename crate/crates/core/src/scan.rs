//! Fidelity of numerically propagated evolutions against a target family as a
//! function of time, and peak location on such traces.
//!
//! Resonant families are compared in the lab frame against the time-dependent
//! target `X(t)`; the other families in the Zeeman rotating frame against a
//! fixed target.

use crate::analytic::{target_gate, Frame, GateFamily};
use crate::equiv::fidelity;
use crate::model::PulseParams;
use crate::propagate::{
    default_steps, propagate, propagate_trace, to_rotating_frame_at, PropagateError,
    PropagatorConfig, Scheme,
};
use crate::qmat::Unitary4;

fn frame_fidelity(params: &PulseParams, family: GateFamily, t: f64, u: &Unitary4) -> f64 {
    let target = target_gate(family, t, params);
    match family.frame() {
        Frame::Lab => fidelity(&target, u),
        Frame::Rotating => fidelity(&target, &to_rotating_frame_at(u, params, t)),
    }
}

/// `F(U(t), X(t))` from a fresh propagation to `t` with default step count.
pub fn fidelity_at(
    params: &PulseParams,
    family: GateFamily,
    t: f64,
    scheme: Scheme,
) -> Result<f64, PropagateError> {
    let config = PropagatorConfig::for_params(params, t)?.with_scheme(scheme);
    Ok(frame_fidelity(
        params,
        family,
        t,
        &propagate(params, &config),
    ))
}

/// Step count used by [`fidelity_trace`]: the default (or `min_steps`, if
/// larger) rounded up to a multiple of `points − 1`.
pub fn trace_steps(
    params: &PulseParams,
    t_end: f64,
    points: usize,
    min_steps: Option<usize>,
) -> usize {
    let intervals = points.saturating_sub(1).max(1);
    let wanted = default_steps(params, t_end).max(min_steps.unwrap_or(0));
    wanted.div_ceil(intervals).max(1) * intervals
}

/// Samples `(t, F)` on `points` uniformly spaced times over `[0, t_end]`.
///
/// One propagation covers the whole window with [`trace_steps`] steps, so
/// every sample sits on the propagation grid.
pub fn fidelity_trace(
    params: &PulseParams,
    family: GateFamily,
    t_end: f64,
    points: usize,
    scheme: Scheme,
    min_steps: Option<usize>,
) -> Result<Vec<(f64, f64)>, PropagateError> {
    if points < 2 {
        return Err(PropagateError::InvalidConfig(format!(
            "a trace needs at least 2 points, got {points}"
        )));
    }
    let steps = trace_steps(params, t_end, points, min_steps);
    let config = PropagatorConfig::new(t_end, steps, scheme)?;
    let trace = propagate_trace(params, &config).every(steps / (points - 1));
    Ok(trace
        .iter()
        .map(|(t, u)| (t, frame_fidelity(params, family, t, u)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub fidelity: f64,
}

/// Maximum of `F(U(t), X(t))` on `[center − half_width, center + half_width]`.
///
/// A dense pass on the propagation grid brackets the maximum, then a
/// golden-section search on fresh propagations refines it to ~1e−9 μs.
pub fn peak_near(
    params: &PulseParams,
    family: GateFamily,
    center: f64,
    half_width: f64,
    scheme: Scheme,
) -> Result<Peak, PropagateError> {
    let lo = (center - half_width).max(0.0);
    let hi = center + half_width;
    let config = PropagatorConfig::for_params(params, hi)?.with_scheme(scheme);
    let trace = propagate_trace(params, &config);
    let dt = config.dt();
    let (t_best, _) = trace
        .iter()
        .filter(|(t, _)| *t >= lo && *t <= hi)
        .map(|(t, u)| (t, frame_fidelity(params, family, t, u)))
        .fold((lo, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });

    let f = |t: f64| fidelity_at(params, family, t, scheme);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((t_best - dt).max(lo), (t_best + dt).min(hi));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let time = 0.5 * (a + b);
    Ok(Peak {
        time,
        fidelity: f(time)?,
    })
}
