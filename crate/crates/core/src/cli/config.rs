//! Run configuration: a TOML file plus command-line overrides, resolved into a
//! fully validated [`Job`] before anything is computed.
//!
//! All frequencies (`b`, `delta_b`, `j0`, `j1`, `omega`) are angular, in
//! rad/μs (numerically equal to rad·MHz); times are in μs.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::analytic::{resonance_mismatch, Frame, GateFamily};
use crate::gatesolve::{
    solve_nonresonant, solve_resonant, FamilyFilter, DEFAULT_MAX_M, DEFAULT_MAX_N, DEFAULT_ROOT_TOL,
};
use crate::model::{PulseParams, DEFAULT_RWA_THRESHOLD};
use crate::noise::{Evolution, NoiseRecipe, DEFAULT_QUAD_ORDER};
use crate::propagate::Scheme;

pub const DEFAULT_TRACE_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Evolve,
    FidelityTrace,
    SolveGates,
    NoiseSweep,
    Reproduce,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Evolve => "evolve",
            Task::FidelityTrace => "fidelity-trace",
            Task::SolveGates => "solve-gates",
            Task::NoiseSweep => "noise-sweep",
            Task::Reproduce => "reproduce",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
}

impl FigureId {
    pub const ALL: [FigureId; 3] = [FigureId::Fig2, FigureId::Fig3, FigureId::Fig4];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure '{s}' (expected fig2, fig3 or fig4)"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<PulseParams>,
    /// When present it must agree with the subcommand.
    pub task: Option<Task>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub trace: TraceSection,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub reproduce: ReproduceSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub t_end: Option<f64>,
    #[serde(default = "lab")]
    pub frame: Frame,
    #[serde(default)]
    pub scheme: Scheme,
    pub steps: Option<usize>,
}

fn lab() -> Frame {
    Frame::Lab
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            t_end: None,
            frame: Frame::Lab,
            scheme: Scheme::default(),
            steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    pub t_end: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub scheme: Scheme,
    pub steps: Option<usize>,
    #[serde(default)]
    pub series: Vec<SeriesSpec>,
}

fn default_points() -> usize {
    DEFAULT_TRACE_POINTS
}

impl Default for TraceSection {
    fn default() -> Self {
        Self {
            t_end: None,
            points: DEFAULT_TRACE_POINTS,
            scheme: Scheme::default(),
            steps: None,
            series: Vec::new(),
        }
    }
}

/// One trace column: a target family, optionally with its own drive.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub family: GateFamily,
    pub label: Option<String>,
    pub j1: Option<f64>,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    #[serde(default = "default_max_n")]
    pub max_n: u32,
    #[serde(default = "default_max_m")]
    pub max_m: u32,
    #[serde(default)]
    pub filter: FamilyFilter,
    /// Far-detuned orders to add, solved at the configured `j1`.
    #[serde(default)]
    pub nonresonant_n: Vec<u32>,
}

fn default_max_n() -> u32 {
    DEFAULT_MAX_N
}
fn default_max_m() -> u32 {
    DEFAULT_MAX_M
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            max_n: DEFAULT_MAX_N,
            max_m: DEFAULT_MAX_M,
            filter: FamilyFilter::default(),
            nonresonant_n: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Explicit σ/J₀ grid; alternatively `ratio_max` with `ratio_points`.
    pub ratios: Option<Vec<f64>>,
    pub ratio_max: Option<f64>,
    pub ratio_points: Option<usize>,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default)]
    pub evolution: Evolution,
    #[serde(default, rename = "recipe")]
    pub recipes: Vec<RecipeSpec>,
}

fn default_quad_order() -> usize {
    DEFAULT_QUAD_ORDER
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            ratios: None,
            ratio_max: None,
            ratio_points: None,
            quad_order: DEFAULT_QUAD_ORDER,
            evolution: Evolution::default(),
            recipes: Vec::new(),
        }
    }
}

/// A gate to average over noise. The gate time is `tau` when given,
/// otherwise solved from `(n, m)` (resonant families) or `n` (far-detuned).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeSpec {
    pub family: GateFamily,
    pub label: Option<String>,
    pub j1: Option<f64>,
    pub omega: Option<f64>,
    pub tau: Option<f64>,
    pub n: Option<u32>,
    pub m: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceSection {
    pub figure: Option<FigureId>,
}

/// Command-line flags that override the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub steps: Option<usize>,
    pub quad_order: Option<usize>,
    pub check_convergence: bool,
    pub figure: Option<FigureId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveJob {
    pub params: PulseParams,
    pub t_end: f64,
    pub frame: Frame,
    pub scheme: Scheme,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSeries {
    pub label: String,
    pub family: GateFamily,
    pub params: PulseParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceJob {
    pub t_end: f64,
    pub points: usize,
    pub scheme: Scheme,
    pub steps: Option<usize>,
    pub series: Vec<TraceSeries>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveJob {
    pub params: PulseParams,
    pub max_n: u32,
    pub max_m: u32,
    pub filter: FamilyFilter,
    pub nonresonant_n: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseJob {
    pub ratios: Vec<f64>,
    pub quad_order: usize,
    pub evolution: Evolution,
    pub recipes: Vec<NoiseRecipe>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobKind {
    Evolve(EvolveJob),
    Trace(TraceJob),
    Solve(SolveJob),
    Noise(NoiseJob),
    Reproduce(FigureId),
}

/// A validated, ready-to-run task.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub kind: JobKind,
    /// File (or directory for `reproduce`); `None` writes to stdout.
    pub out: Option<PathBuf>,
    pub check_convergence: bool,
    pub steps: Option<usize>,
    pub quad_order: Option<usize>,
    /// Advisory messages about approximation validity.
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Validates the section for `task` and applies `overrides`.
    pub fn resolve(&self, task: Task, overrides: &Overrides) -> Result<Job, CliError> {
        if let Some(declared) = self.task {
            if declared != task {
                return Err(CliError::Config(format!(
                    "config declares task '{declared}' but '{task}' was requested"
                )));
            }
        }
        if overrides.steps == Some(0) {
            return Err(CliError::Config("--steps must be >= 1".into()));
        }
        let quad_order = overrides.quad_order.unwrap_or(self.noise.quad_order);
        check_quad_order(quad_order)?;

        let mut warnings = Vec::new();
        let kind = match task {
            Task::Evolve => JobKind::Evolve(self.resolve_evolve(overrides)?),
            Task::FidelityTrace => JobKind::Trace(self.resolve_trace(overrides, &mut warnings)?),
            Task::SolveGates => JobKind::Solve(self.resolve_solve()?),
            Task::NoiseSweep => JobKind::Noise(self.resolve_noise(quad_order, &mut warnings)?),
            Task::Reproduce => {
                JobKind::Reproduce(overrides.figure.or(self.reproduce.figure).ok_or_else(|| {
                    CliError::Config("reproduce needs a figure id (fig2, fig3 or fig4)".into())
                })?)
            }
        };
        Ok(Job {
            kind,
            out: overrides.out.clone().or_else(|| self.out.clone()),
            check_convergence: overrides.check_convergence,
            steps: overrides.steps,
            quad_order: overrides.quad_order,
            warnings,
        })
    }

    fn params(&self) -> Result<PulseParams, CliError> {
        self.params.ok_or_else(|| {
            CliError::Config("missing [params] section (b, delta_b, j0, j1, omega)".into())
        })
    }

    fn resolve_evolve(&self, overrides: &Overrides) -> Result<EvolveJob, CliError> {
        let s = &self.evolve;
        let t_end = positive_time("evolve.t_end", s.t_end)?;
        if s.steps == Some(0) {
            return Err(CliError::Config("evolve.steps must be >= 1".into()));
        }
        Ok(EvolveJob {
            params: self.params()?,
            t_end,
            frame: s.frame,
            scheme: s.scheme,
            steps: overrides.steps.or(s.steps),
        })
    }

    fn resolve_trace(
        &self,
        overrides: &Overrides,
        warnings: &mut Vec<String>,
    ) -> Result<TraceJob, CliError> {
        let s = &self.trace;
        let base = self.params()?;
        let t_end = positive_time("trace.t_end", s.t_end)?;
        if s.points < 2 {
            return Err(CliError::Config(format!(
                "trace.points must be >= 2, got {}",
                s.points
            )));
        }
        if s.series.is_empty() {
            return Err(CliError::Config(
                "fidelity-trace needs at least one [[trace.series]] entry".into(),
            ));
        }
        if s.steps == Some(0) {
            return Err(CliError::Config("trace.steps must be >= 1".into()));
        }
        let mut series = Vec::with_capacity(s.series.len());
        for (i, spec) in s.series.iter().enumerate() {
            let params = with_drive(&base, spec.j1, spec.omega)
                .map_err(|e| at(&format!("trace.series[{i}]"), e))?;
            advise(spec.family, &params, warnings);
            series.push(TraceSeries {
                label: spec
                    .label
                    .clone()
                    .unwrap_or_else(|| spec.family.name().to_string()),
                family: spec.family,
                params,
            });
        }
        check_labels(series.iter().map(|s| s.label.as_str()))?;
        Ok(TraceJob {
            t_end,
            points: s.points,
            scheme: s.scheme,
            steps: overrides.steps.or(s.steps),
            series,
        })
    }

    fn resolve_solve(&self) -> Result<SolveJob, CliError> {
        let s = &self.solve;
        let params = self.params()?;
        if params.j0() <= 0.0 {
            return Err(CliError::Config("solve-gates needs j0 > 0".into()));
        }
        if s.max_n == 0 || s.max_m == 0 {
            return Err(CliError::Config(
                "solve.max_n and solve.max_m must be >= 1".into(),
            ));
        }
        Ok(SolveJob {
            params,
            max_n: s.max_n,
            max_m: s.max_m,
            filter: s.filter,
            nonresonant_n: s.nonresonant_n.clone(),
        })
    }

    fn resolve_noise(
        &self,
        quad_order: usize,
        warnings: &mut Vec<String>,
    ) -> Result<NoiseJob, CliError> {
        let s = &self.noise;
        let base = self.params()?;
        let ratios =
            match (&s.ratios, s.ratio_max, s.ratio_points) {
                (Some(r), None, None) => r.clone(),
                (None, Some(max), Some(points)) => {
                    if !(max.is_finite() && max > 0.0) || points < 2 {
                        return Err(CliError::Config(
                            "noise.ratio_max must be > 0 and noise.ratio_points >= 2".into(),
                        ));
                    }
                    (0..points)
                        .map(|k| max * k as f64 / (points - 1) as f64)
                        .collect()
                }
                _ => return Err(CliError::Config(
                    "noise needs either `ratios = [...]` or both `ratio_max` and `ratio_points`"
                        .into(),
                )),
            };
        if ratios.is_empty() {
            return Err(CliError::Config("noise.ratios must not be empty".into()));
        }
        if let Some(bad) = ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(CliError::Config(format!(
                "noise ratios must be finite and >= 0, got {bad}"
            )));
        }
        if s.recipes.is_empty() {
            return Err(CliError::Config(
                "noise-sweep needs at least one [[noise.recipe]] entry".into(),
            ));
        }
        let mut recipes = Vec::with_capacity(s.recipes.len());
        for (i, spec) in s.recipes.iter().enumerate() {
            let recipe =
                resolve_recipe(&base, spec).map_err(|e| at(&format!("noise.recipe[{i}]"), e))?;
            advise(recipe.family, &recipe.params, warnings);
            recipes.push(recipe);
        }
        check_labels(recipes.iter().map(|r| r.label.as_str()))?;
        Ok(NoiseJob {
            ratios,
            quad_order,
            evolution: s.evolution,
            recipes,
        })
    }
}

fn at(place: &str, e: CliError) -> CliError {
    match e {
        CliError::Config(msg) => CliError::Config(format!("{place}: {msg}")),
        other => other,
    }
}

fn positive_time(name: &str, t: Option<f64>) -> Result<f64, CliError> {
    match t {
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(CliError::Config(format!(
            "{name} must be finite and > 0, got {t}"
        ))),
        None => Err(CliError::Config(format!("missing {name}"))),
    }
}

fn check_quad_order(order: usize) -> Result<(), CliError> {
    if order == 0 || order.is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "quadrature order must be odd and >= 1, got {order}"
        )));
    }
    Ok(())
}

fn with_drive(
    base: &PulseParams,
    j1: Option<f64>,
    omega: Option<f64>,
) -> Result<PulseParams, CliError> {
    let j1 = j1.unwrap_or(base.j1());
    let omega = omega.unwrap_or(base.omega());
    PulseParams::new(base.b(), base.delta_b(), base.j0(), j1, omega)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn resolve_recipe(base: &PulseParams, spec: &RecipeSpec) -> Result<NoiseRecipe, CliError> {
    let label = spec
        .label
        .clone()
        .unwrap_or_else(|| spec.family.name().to_string());
    let omega = spec.omega.unwrap_or(base.omega());
    let (tau, j1) = match (spec.tau, spec.family.is_resonant()) {
        (Some(tau), _) => {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(CliError::Config(format!(
                    "tau must be finite and > 0, got {tau}"
                )));
            }
            if spec.n.is_some() || spec.m.is_some() {
                return Err(CliError::Config(
                    "give either tau or (n, m), not both".into(),
                ));
            }
            (tau, spec.j1.unwrap_or(base.j1()))
        }
        (None, true) => {
            let (Some(n), Some(m)) = (spec.n, spec.m) else {
                return Err(CliError::Config(
                    "resonant recipes need tau or both n and m".into(),
                ));
            };
            let sol = solve_resonant(base.j0(), omega, n, m, DEFAULT_ROOT_TOL)
                .map_err(|e| CliError::Config(e.to_string()))?;
            if sol.family != spec.family {
                return Err(CliError::Config(format!(
                    "(n, m) = ({n}, {m}) yields {}, not {}",
                    sol.family, spec.family
                )));
            }
            if let Some(j1) = spec.j1 {
                if (j1 - sol.j1).abs() > 1e-9 * base.j0().max(1.0) {
                    return Err(CliError::Config(format!(
                        "j1 = {j1} conflicts with the solved drive amplitude {} for (n, m) = ({n}, {m})",
                        sol.j1
                    )));
                }
            }
            (sol.tau, sol.j1)
        }
        (None, false) => {
            let Some(n) = spec.n else {
                return Err(CliError::Config("far-detuned recipes need tau or n".into()));
            };
            if spec.m.is_some() {
                return Err(CliError::Config("far-detuned recipes take n only".into()));
            }
            let j1 = spec.j1.unwrap_or(base.j1());
            let sol = solve_nonresonant(base.j0(), j1, omega, n, DEFAULT_ROOT_TOL)
                .map_err(|e| CliError::Config(e.to_string()))?;
            if sol.family != spec.family {
                return Err(CliError::Config(format!(
                    "order n = {n} yields {}, not {}",
                    sol.family, spec.family
                )));
            }
            (sol.tau, j1)
        }
    };
    let params = with_drive(base, Some(j1), Some(omega))?;
    Ok(NoiseRecipe {
        label,
        family: spec.family,
        tau,
        params,
    })
}

fn check_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Result<(), CliError> {
    let mut seen = HashSet::new();
    for label in labels {
        let ok = !label.is_empty()
            && label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "_-+.".contains(c));
        if !ok {
            return Err(CliError::Config(format!(
                "label '{label}' must be non-empty [A-Za-z0-9_+.-]"
            )));
        }
        if !seen.insert(label) {
            return Err(CliError::Config(format!(
                "duplicate column label '{label}'; set `label` explicitly"
            )));
        }
    }
    Ok(())
}

/// Pushes a warning when the closed forms behind `family` are a poor guide
/// for `params`.
pub fn advise(family: GateFamily, params: &PulseParams, warnings: &mut Vec<String>) {
    if family.is_resonant() {
        let mismatch = resonance_mismatch(params);
        if mismatch > 1e-9 {
            warnings.push(format!(
                "{family}: omega = {} is off resonance with 2|delta_b| = {} (relative mismatch {mismatch:.3e})",
                params.omega(),
                2.0 * params.delta_b().abs()
            ));
        }
    } else {
        let rwa = params.rwa_validity();
        if !rwa.within(DEFAULT_RWA_THRESHOLD) {
            warnings.push(format!(
                "{family} (j1 = {}, omega = {}): far-detuned RWA ratios [{}, {}, {}] not all below {DEFAULT_RWA_THRESHOLD}",
                params.j1(),
                params.omega(),
                rwa.static_exchange,
                rwa.sum_sideband,
                rwa.difference_sideband
            ));
        }
    }
}
