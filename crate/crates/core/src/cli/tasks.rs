//! Task runners. Each returns rendered output; nothing here touches the
//! filesystem.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{EvolveJob, FigureId, NoiseJob, SolveJob, TraceJob, TraceSeries};
use super::csv::{Cell, Table};
use super::{Artifact, CliError};
use crate::analytic::{Frame, GateFamily};
use crate::gatesolve::{
    enumerate_resonant, solve_nonresonant, solve_resonant, GateSolutionRes, DEFAULT_ROOT_TOL,
};
use crate::model::PulseParams;
use crate::noise::{
    noise_sweep, Evolution, NoiseRecipe, NoiseTable, SweepSettings, DEFAULT_QUAD_ORDER,
};
use crate::propagate::{
    default_steps, propagate, propagate_checked, to_rotating_frame_at, PropagatorConfig, Scheme,
    DEFAULT_CONVERGENCE_TOL,
};
use crate::scan::{fidelity_trace, peak_near, trace_steps};

/// Final propagator entries: one row per `(row, col)` in basis order
/// ↑↑, ↑↓, ↓↑, ↓↓.
pub fn run_evolve(job: &EvolveJob, check_convergence: bool) -> Result<Table, CliError> {
    let steps = job
        .steps
        .unwrap_or_else(|| default_steps(&job.params, job.t_end));
    let config = PropagatorConfig::new(job.t_end, steps, job.scheme)?;
    let u = if check_convergence {
        propagate_checked(&job.params, &config, DEFAULT_CONVERGENCE_TOL)?
    } else {
        propagate(&job.params, &config)
    };
    let u = match job.frame {
        Frame::Lab => u,
        Frame::Rotating => to_rotating_frame_at(&u, &job.params, job.t_end),
    };
    let mut table = Table::new(["row", "col", "re", "im"]);
    for r in 0..4 {
        for c in 0..4 {
            let z = u.entry(r, c);
            table.push(vec![r.into(), c.into(), z.re.into(), z.im.into()]);
        }
    }
    Ok(table)
}

/// `time_us` followed by one fidelity column per series.
pub fn run_fidelity_trace(job: &TraceJob, check_convergence: bool) -> Result<Table, CliError> {
    let columns: Vec<Vec<f64>> = job
        .series
        .par_iter()
        .map(|s| trace_column(s, job, check_convergence))
        .collect::<Result<_, _>>()?;
    let mut table =
        Table::new(std::iter::once("time_us").chain(job.series.iter().map(|s| s.label.as_str())));
    let intervals = (job.points - 1) as f64;
    for k in 0..job.points {
        let t = if k + 1 == job.points {
            job.t_end
        } else {
            job.t_end * k as f64 / intervals
        };
        let mut row = vec![Cell::Float(t)];
        row.extend(columns.iter().map(|col| Cell::Float(col[k])));
        table.push(row);
    }
    Ok(table)
}

fn trace_column(
    series: &TraceSeries,
    job: &TraceJob,
    check_convergence: bool,
) -> Result<Vec<f64>, CliError> {
    if check_convergence {
        // the endpoint accumulates the largest error on the grid
        let steps = trace_steps(&series.params, job.t_end, job.points, job.steps);
        let config = PropagatorConfig::new(job.t_end, steps, job.scheme)?;
        propagate_checked(&series.params, &config, DEFAULT_CONVERGENCE_TOL)?;
    }
    let trace = fidelity_trace(
        &series.params,
        series.family,
        job.t_end,
        job.points,
        job.scheme,
        job.steps,
    )?;
    Ok(trace.into_iter().map(|(_, f)| f).collect())
}

struct GateRow {
    family: GateFamily,
    n: u32,
    m: Option<u32>,
    tau: f64,
    j1: f64,
    residual: f64,
}

fn gate_table(mut rows: Vec<GateRow>) -> Table {
    rows.sort_by(|a, b| {
        a.tau
            .total_cmp(&b.tau)
            .then(a.family.name().cmp(b.family.name()))
            .then((a.n, a.m).cmp(&(b.n, b.m)))
    });
    let mut table = Table::new(["family", "n", "m", "tau_us", "j1", "residual"]);
    for r in rows {
        table.push(vec![
            r.family.name().into(),
            r.n.into(),
            r.m.map_or(Cell::Empty, Cell::from),
            r.tau.into(),
            r.j1.into(),
            r.residual.into(),
        ]);
    }
    table
}

fn resonant_row(s: &GateSolutionRes) -> GateRow {
    GateRow {
        family: s.family,
        n: s.n,
        m: Some(s.m),
        tau: s.tau,
        j1: s.j1,
        residual: s.residual,
    }
}

/// Gate recipes sorted by gate time.
pub fn run_solve_gates(job: &SolveJob) -> Result<Table, CliError> {
    let p = &job.params;
    let mut rows: Vec<GateRow> =
        enumerate_resonant(p.j0(), p.omega(), job.filter, job.max_n, job.max_m)
            .iter()
            .map(resonant_row)
            .collect();
    for &n in &job.nonresonant_n {
        let s = solve_nonresonant(p.j0(), p.j1(), p.omega(), n, DEFAULT_ROOT_TOL)?;
        if job.filter.admits(s.family) {
            rows.push(GateRow {
                family: s.family,
                n,
                m: None,
                tau: s.tau,
                j1: p.j1(),
                residual: s.residual,
            });
        }
    }
    Ok(gate_table(rows))
}

/// `sigma_over_J0` followed by one `F_N` column per recipe.
pub fn run_noise_sweep(job: &NoiseJob, check_convergence: bool) -> Result<Table, CliError> {
    let settings = SweepSettings {
        quad_order: job.quad_order,
        evolution: job.evolution,
        check_convergence,
    };
    Ok(noise_table(&noise_sweep(
        &job.recipes,
        &job.ratios,
        &settings,
    )?))
}

fn noise_table(result: &NoiseTable) -> Table {
    let mut table = Table::new(
        std::iter::once("sigma_over_J0").chain(result.labels.iter().map(String::as_str)),
    );
    for (ratio, row) in result.ratios.iter().zip(&result.values) {
        let mut cells = vec![Cell::Float(*ratio)];
        cells.extend(row.iter().map(|v| Cell::Float(*v)));
        table.push(cells);
    }
    table
}

/// Options shared by the figure reproductions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproduceOptions {
    pub check_convergence: bool,
    /// Minimum propagation steps for traces.
    pub steps: Option<usize>,
    pub quad_order: usize,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            check_convergence: false,
            steps: None,
            quad_order: DEFAULT_QUAD_ORDER,
        }
    }
}

const FIG_B: f64 = 1000.0;
const FIG_DELTA_B: f64 = -100.0;
const FIG_J0: f64 = 20.0;
const FIG_OMEGA_RES: f64 = 200.0;
const FIG_TRACE_POINTS: usize = 2000;

fn fig_params(j1: f64, omega: f64) -> PulseParams {
    PulseParams::new(FIG_B, FIG_DELTA_B, FIG_J0, j1, omega).expect("figure parameters are valid")
}

#[derive(Serialize)]
struct ManifestParams {
    b: f64,
    delta_b: f64,
    j0: f64,
    j1: f64,
    omega: f64,
}

impl From<&PulseParams> for ManifestParams {
    fn from(p: &PulseParams) -> Self {
        Self {
            b: p.b(),
            delta_b: p.delta_b(),
            j0: p.j0(),
            j1: p.j1(),
            omega: p.omega(),
        }
    }
}

/// Parameters shared by all series of a figure.
#[derive(Serialize)]
struct CommonParams {
    b: f64,
    delta_b: f64,
    j0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    j1: Option<f64>,
    omega: Vec<f64>,
}

fn common(j1: Option<f64>, omega: &[f64]) -> CommonParams {
    CommonParams {
        b: FIG_B,
        delta_b: FIG_DELTA_B,
        j0: FIG_J0,
        j1,
        omega: omega.to_vec(),
    }
}

#[derive(Serialize)]
struct ManifestSeries {
    label: String,
    family: GateFamily,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_us: Option<f64>,
    frame: Frame,
    params: ManifestParams,
}

#[derive(Serialize)]
struct ManifestTrace {
    t_end_us: f64,
    points: usize,
    scheme: Scheme,
}

#[derive(Serialize)]
struct Manifest {
    figure: String,
    description: String,
    units: String,
    files: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    params: CommonParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<ManifestTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<ManifestNoise>,
    series: Vec<ManifestSeries>,
}

#[derive(Serialize)]
struct ManifestNoise {
    ratios: Vec<f64>,
    quad_order: usize,
    evolution: Evolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossover_cz_nres_plus_vs_cz_const: Option<f64>,
}

const UNITS: &str = "frequencies in rad/us, times in us";

fn artifact(figure: FigureId, stem: &str, contents: String) -> Artifact {
    Artifact {
        file_name: format!("{figure}_{stem}"),
        contents,
    }
}

fn manifest_artifact(figure: FigureId, manifest: &Manifest) -> Artifact {
    let text = toml::to_string(manifest).expect("manifest serialises");
    artifact(figure, "manifest.toml", text)
}

/// Data files and a manifest for one figure.
pub fn reproduce(figure: FigureId, options: &ReproduceOptions) -> Result<Vec<Artifact>, CliError> {
    match figure {
        FigureId::Fig2 => reproduce_fig2(options),
        FigureId::Fig3 => reproduce_fig3(options),
        FigureId::Fig4 => reproduce_fig4(options),
    }
}

/// The four shortest resonant recipes shown in the resonant-drive figure.
pub fn fig2_recipes() -> Result<Vec<GateSolutionRes>, CliError> {
    [(7, 2), (5, 2), (2, 1), (4, 1)]
        .into_iter()
        .map(|(n, m)| {
            solve_resonant(FIG_J0, FIG_OMEGA_RES, n, m, DEFAULT_ROOT_TOL).map_err(CliError::from)
        })
        .collect()
}

fn reproduce_fig2(options: &ReproduceOptions) -> Result<Vec<Artifact>, CliError> {
    let figure = FigureId::Fig2;
    let recipes = fig2_recipes()?;
    let series: Vec<TraceSeries> = recipes
        .iter()
        .map(|s| TraceSeries {
            label: s.family.name().to_string(),
            family: s.family,
            params: fig_params(s.j1, FIG_OMEGA_RES),
        })
        .collect();
    let job = TraceJob {
        t_end: 1.2,
        points: FIG_TRACE_POINTS,
        scheme: Scheme::default(),
        steps: options.steps,
        series,
    };
    let trace = run_fidelity_trace(&job, options.check_convergence)?;

    let peaks: Vec<_> = recipes
        .par_iter()
        .zip(&job.series)
        .map(|(s, series)| peak_near(&series.params, s.family, s.tau, 0.02, job.scheme))
        .collect::<Result<_, _>>()?;
    let mut peak_table = Table::new([
        "family",
        "n",
        "m",
        "j1",
        "tau_us",
        "peak_time_us",
        "peak_fidelity",
    ]);
    for (s, p) in recipes.iter().zip(&peaks) {
        peak_table.push(vec![
            s.family.name().into(),
            s.n.into(),
            s.m.into(),
            s.j1.into(),
            s.tau.into(),
            p.time.into(),
            p.fidelity.into(),
        ]);
    }

    let files = vec![
        artifact(figure, "fidelity_trace.csv", trace.render()),
        artifact(
            figure,
            "gate_recipes.csv",
            gate_table(recipes.iter().map(resonant_row).collect()).render(),
        ),
        artifact(figure, "peaks.csv", peak_table.render()),
    ];
    let manifest = Manifest {
        figure: figure.to_string(),
        description: "fidelity F(U(t), X(t)) of the lab-frame evolution against time-dependent CZ/iSWAP targets \
                      under a resonant drive"
            .into(),
        units: UNITS.into(),
        files: files.iter().map(|f| f.file_name.clone()).collect(),
        notes: vec![],
        params: common(None, &[FIG_OMEGA_RES]),
        trace: Some(ManifestTrace { t_end_us: job.t_end, points: job.points, scheme: job.scheme }),
        noise: None,
        series: recipes
            .iter()
            .zip(&job.series)
            .map(|(s, series)| ManifestSeries {
                label: series.label.clone(),
                family: s.family,
                n: Some(s.n),
                m: Some(s.m),
                tau_us: Some(s.tau),
                frame: s.family.frame(),
                params: (&series.params).into(),
            })
            .collect(),
    };
    let mut out = files;
    out.push(manifest_artifact(figure, &manifest));
    Ok(out)
}

/// Drive frequencies of the far-detuned figure.
pub const FIG3_OMEGAS: [f64; 2] = [270.0, 400.0];

fn reproduce_fig3(options: &ReproduceOptions) -> Result<Vec<Artifact>, CliError> {
    let figure = FigureId::Fig3;
    let mut series = Vec::new();
    for omega in FIG3_OMEGAS {
        for family in [GateFamily::CzNresPlus, GateFamily::CzNresMinus] {
            series.push(TraceSeries {
                label: format!("{family}_w{omega}"),
                family,
                params: fig_params(FIG_J0, omega),
            });
        }
    }
    for family in [GateFamily::CzNresPlus, GateFamily::CzNresMinus] {
        let label = format!("{}_const", family.name().replace("_nres", ""));
        series.push(TraceSeries {
            label,
            family,
            params: fig_params(0.0, FIG3_OMEGAS[0]),
        });
    }
    let job = TraceJob {
        t_end: 1.0,
        points: FIG_TRACE_POINTS,
        scheme: Scheme::default(),
        steps: options.steps,
        series,
    };
    let trace = run_fidelity_trace(&job, options.check_convergence)?;

    // first three gate times; each order belongs to one sign
    let mut times = Table::new(["label", "family", "n", "omega", "j1", "tau_us"]);
    for s in &job.series {
        for n in 0..3u32 {
            let p = &s.params;
            let sol = solve_nonresonant(p.j0(), p.j1(), p.omega(), n, DEFAULT_ROOT_TOL)?;
            if sol.family == s.family {
                times.push(vec![
                    s.label.as_str().into(),
                    sol.family.name().into(),
                    n.into(),
                    p.omega().into(),
                    p.j1().into(),
                    sol.tau.into(),
                ]);
            }
        }
    }

    let files = vec![
        artifact(figure, "fidelity_trace.csv", trace.render()),
        artifact(figure, "gate_times.csv", times.render()),
    ];
    let manifest = Manifest {
        figure: figure.to_string(),
        description: "fidelity F(U~(t), CZ+-^nres) of the rotating-frame evolution under a far-detuned drive at \
                      omega in {270, 400}, with the constant-exchange (j1 = 0) reference"
            .into(),
        units: UNITS.into(),
        files: files.iter().map(|f| f.file_name.clone()).collect(),
        notes: vec![],
        params: common(Some(FIG_J0), &FIG3_OMEGAS),
        trace: Some(ManifestTrace { t_end_us: job.t_end, points: job.points, scheme: job.scheme }),
        noise: None,
        series: job
            .series
            .iter()
            .map(|s| ManifestSeries {
                label: s.label.clone(),
                family: s.family,
                n: None,
                m: None,
                tau_us: None,
                frame: s.family.frame(),
                params: (&s.params).into(),
            })
            .collect(),
    };
    let mut out = files;
    out.push(manifest_artifact(figure, &manifest));
    Ok(out)
}

/// Drive frequency of the far-detuned recipe in the noise figure.
pub const FIG4_NRES_OMEGA: f64 = 270.0;

/// A recipe with the `(n, m)` it was solved from, if any.
pub type IndexedRecipe = (NoiseRecipe, Option<(u32, Option<u32>)>);

/// The four noise-sweep recipes: CZ−^res, iSWAP+, CZ+^nres and the
/// constant-exchange CZ.
pub fn fig4_recipes() -> Result<Vec<IndexedRecipe>, CliError> {
    let cz_res = solve_resonant(FIG_J0, FIG_OMEGA_RES, 5, 2, DEFAULT_ROOT_TOL)?;
    let iswap = solve_resonant(FIG_J0, FIG_OMEGA_RES, 2, 1, DEFAULT_ROOT_TOL)?;
    let nres = solve_nonresonant(FIG_J0, FIG_J0, FIG4_NRES_OMEGA, 0, DEFAULT_ROOT_TOL)?;
    let konst = solve_nonresonant(FIG_J0, 0.0, FIG4_NRES_OMEGA, 0, DEFAULT_ROOT_TOL)?;
    let recipe = |label: &str, family, tau, params| NoiseRecipe {
        label: label.into(),
        family,
        tau,
        params,
    };
    Ok(vec![
        (
            recipe(
                "cz_res_minus",
                cz_res.family,
                cz_res.tau,
                fig_params(cz_res.j1, FIG_OMEGA_RES),
            ),
            Some((5, Some(2))),
        ),
        (
            recipe(
                "iswap_plus",
                iswap.family,
                iswap.tau,
                fig_params(iswap.j1, FIG_OMEGA_RES),
            ),
            Some((2, Some(1))),
        ),
        (
            recipe(
                "cz_nres_plus",
                nres.family,
                nres.tau,
                fig_params(FIG_J0, FIG4_NRES_OMEGA),
            ),
            Some((0, None)),
        ),
        (
            recipe(
                "cz_const",
                konst.family,
                konst.tau,
                fig_params(0.0, FIG4_NRES_OMEGA),
            ),
            Some((0, None)),
        ),
    ])
}

/// σ/J₀ grid of the noise figure: 0 to 0.2 in steps of 0.005.
pub fn fig4_ratios() -> Vec<f64> {
    (0..=40).map(|k| k as f64 / 200.0).collect()
}

fn reproduce_fig4(options: &ReproduceOptions) -> Result<Vec<Artifact>, CliError> {
    let figure = FigureId::Fig4;
    let recipes = fig4_recipes()?;
    let job = NoiseJob {
        ratios: fig4_ratios(),
        quad_order: options.quad_order,
        evolution: Evolution::Numeric,
        recipes: recipes.iter().map(|(r, _)| r.clone()).collect(),
    };
    let settings = SweepSettings {
        quad_order: job.quad_order,
        evolution: job.evolution,
        check_convergence: options.check_convergence,
    };
    let result = noise_sweep(&job.recipes, &job.ratios, &settings)?;
    let crossover = result.crossover("cz_nres_plus", "cz_const");
    let table = noise_table(&result);

    let files = vec![artifact(figure, "noise_sweep.csv", table.render())];
    let manifest = Manifest {
        figure: figure.to_string(),
        description: "noise-averaged fidelity F_N at each recipe's gate time against sigma/J0 for quasistatic \
                      Gaussian noise on J0"
            .into(),
        units: UNITS.into(),
        files: files.iter().map(|f| f.file_name.clone()).collect(),
        notes: vec![format!(
            "cz_nres_plus and cz_const use omega = {FIG4_NRES_OMEGA} (the far-detuned drive); at omega = 200 = 2|delta_b| \
             the far-detuned closed forms do not apply"
        )],
        params: common(None, &[FIG_OMEGA_RES, FIG4_NRES_OMEGA]),
        trace: None,
        noise: Some(ManifestNoise {
            ratios: job.ratios.clone(),
            quad_order: job.quad_order,
            evolution: job.evolution,
            crossover_cz_nres_plus_vs_cz_const: crossover,
        }),
        series: recipes
            .iter()
            .map(|(r, nm)| ManifestSeries {
                label: r.label.clone(),
                family: r.family,
                n: nm.map(|(n, _)| n),
                m: nm.and_then(|(_, m)| m),
                tau_us: Some(r.tau),
                frame: r.family.frame(),
                params: (&r.params).into(),
            })
            .collect(),
    };
    let mut out = files;
    out.push(manifest_artifact(figure, &manifest));
    Ok(out)
}
