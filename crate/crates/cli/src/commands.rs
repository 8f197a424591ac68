//! The four verbs.

use std::collections::BTreeMap;

use gapdecay_core::asymptotics::d_alpha;
use gapdecay_core::dynamics::trajectory_with;
use gapdecay_core::oracles::{
    fit_tail_exponent, least_squares_loglog, volterra_solve, LaplaceInverter, TimeGrid,
};
use gapdecay_core::reservoir::{derive_params, validate_spectral_density, SummabilityReport};
use gapdecay_core::{
    Error, Evaluator, GSample, Method, Propagator, ReservoirConfig, RoutingConfig, TrajectoryPoint,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{
    ensure_dir, trajectory_csv, trajectory_file, write_atomic, Manifest, SCHEMA_VERSION,
};
use crate::spec::{method_tag, RunSpec};

/// Relative gate for pairs that involve the asymptotic form.
pub const ASYMPTOTIC_GATE: f64 = 0.1;
/// Gate on `|fitted − predicted|` tail exponents in a sweep.
pub const SWEEP_EXPONENT_GATE: f64 = 0.02;
const SWEEP_FIT_POINTS: usize = 16;

fn numerical(tag: &str, e: Error) -> CliError {
    match e {
        Error::AtTime { .. } => CliError::Numerical(e.to_string()),
        Error::InvalidConfig { .. } | Error::Parse(_) | Error::InvalidGrid(_) => CliError::from(e),
        other => CliError::Numerical(format!("{tag}: {other}")),
    }
}

pub fn propagator(cfg: &ReservoirConfig) -> Result<Propagator, CliError> {
    Propagator::new(cfg, RoutingConfig::default()).map_err(|e| numerical("setup", e))
}

/// Trajectory of one method on the configured grid; Volterra uses its own
/// uniform grid, thinned to about `points` rows.
pub fn evaluate(
    spec: &RunSpec,
    prop: &Propagator,
    method: Evaluator,
) -> Result<Vec<TrajectoryPoint>, CliError> {
    let tau = prop.params().tau;
    let tag = method_tag(method);
    match method {
        Evaluator::Fixed(Method::Volterra) => {
            let (grid, stride) = spec.volterra.build(&spec.grid, tau)?;
            let last = grid.len() - 1;
            let tr = trajectory_with(&spec.initial, &grid, method, prop)
                .map_err(|e| numerical(tag, e))?;
            Ok(tr
                .into_iter()
                .enumerate()
                .filter(|(k, _)| k % stride == 0 || *k == last)
                .map(|(_, p)| p)
                .collect())
        }
        _ => {
            let grid = spec.grid.build(tau)?;
            trajectory_with(&spec.initial, &grid, method, prop).map_err(|e| numerical(tag, e))
        }
    }
}

/// Largest `|ΔG|` between two trajectories over their common times.
#[derive(Debug, Clone, Serialize)]
pub struct PairSummary {
    pub methods: [&'static str; 2],
    pub common_points: usize,
    pub max_abs_deviation: f64,
}

fn common_deviation(a: &[TrajectoryPoint], b: &[TrajectoryPoint]) -> (usize, f64) {
    let index: BTreeMap<u64, Complex64> = b.iter().map(|p| (p.t.to_bits(), p.g.value)).collect();
    let mut n = 0;
    let mut worst = 0.0f64;
    for p in a {
        if let Some(v) = index.get(&p.t.to_bits()) {
            n += 1;
            worst = worst.max((p.g.value - v).norm());
        }
    }
    (n, worst)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub files: Vec<String>,
    pub comparisons: Vec<PairSummary>,
}

/// Evaluates every method, then writes one CSV per method and the manifest.
/// Nothing is written if any method fails.
pub fn run(spec: &RunSpec) -> Result<RunOutcome, CliError> {
    let prop = propagator(&spec.reservoir)?;
    let mut results = Vec::new();
    for &m in &spec.methods {
        results.push((m, evaluate(spec, &prop, m)?));
    }
    ensure_dir(&spec.out)?;
    let mut files = Vec::new();
    for (m, tr) in &results {
        let path = trajectory_file(&spec.out, method_tag(*m));
        write_atomic(&path, &trajectory_csv(&spec.initial, tr)?)?;
        files.push(path.file_name().unwrap().to_string_lossy().into_owned());
    }
    let manifest = Manifest::new(spec, &prop, files.clone());
    write_atomic(&spec.out.join("manifest.json"), &manifest.to_bytes()?)?;
    files.push("manifest.json".into());
    let mut comparisons = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let (n, dev) = common_deviation(&results[i].1, &results[j].1);
            comparisons.push(PairSummary {
                methods: [method_tag(results[i].0), method_tag(results[j].0)],
                common_points: n,
                max_abs_deviation: dev,
            });
        }
    }
    Ok(RunOutcome { files, comparisons })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    /// `|G_a − G_b| ≤ tol`.
    Absolute,
    /// `|G_asymptotic − G_other| ≤ 0.1 |G_other|`.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointDeviation {
    pub t: f64,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub methods: [&'static str; 2],
    pub gate: Gate,
    pub tolerance: f64,
    pub status: Status,
    /// Asymptotic pair evaluated below `τ`, where failure is the expected outcome.
    pub negative_control: bool,
    pub points_compared: usize,
    pub points_unavailable: usize,
    pub max_deviation: f64,
    pub worst_t: Option<f64>,
    pub deviations: Vec<PointDeviation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodFailure {
    pub method: &'static str,
    pub t: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub config: ReservoirConfig,
    pub tau: f64,
    pub pairs: Vec<PairReport>,
    /// First failure of each method, if any; failed points are skipped, not fatal.
    pub failures: Vec<MethodFailure>,
}

type Column = Vec<Option<GSample>>;

fn evaluate_column(
    prop: &Propagator,
    method: Evaluator,
    times: &[f64],
    volterra: Option<&TimeGrid>,
) -> (Column, Option<MethodFailure>) {
    let tag = method_tag(method);
    if let (Evaluator::Fixed(Method::Volterra), Some(grid)) = (method, volterra) {
        return match volterra_solve(&prop.params().config(), grid) {
            Ok(all) => {
                let by_t: BTreeMap<u64, GSample> =
                    all.into_iter().map(|s| (s.t.to_bits(), s)).collect();
                (
                    times
                        .iter()
                        .map(|t| by_t.get(&t.to_bits()).copied())
                        .collect(),
                    None,
                )
            }
            Err(e) => (
                vec![None; times.len()],
                Some(MethodFailure {
                    method: tag,
                    t: None,
                    reason: e.to_string(),
                }),
            ),
        };
    }
    let out: Vec<std::result::Result<GSample, Error>> = times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                let m = match method {
                    Evaluator::Auto => Method::Series,
                    Evaluator::Fixed(m) => m,
                };
                return Ok(GSample::new(0.0, Complex64::new(1.0, 0.0), 0.0, m));
            }
            match method {
                Evaluator::Auto => prop.auto(t),
                Evaluator::Fixed(m) => prop.amplitude(t, m),
            }
        })
        .collect();
    let failure = out.iter().zip(times).find_map(|(r, &t)| {
        r.as_ref().err().map(|e| MethodFailure {
            method: tag,
            t: Some(t),
            reason: e.to_string(),
        })
    });
    (out.into_iter().map(|r| r.ok()).collect(), failure)
}

fn is_asymptotic(m: Evaluator) -> bool {
    m == Evaluator::Fixed(Method::Asymptotic)
}

/// Pairwise agreement of all selected methods on a shared set of times.
pub fn compare(spec: &RunSpec) -> Result<CompareReport, CliError> {
    if spec.methods.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two methods".into(),
        ));
    }
    let prop = propagator(&spec.reservoir)?;
    let tau = prop.params().tau;
    let uses_volterra = spec.methods.contains(&Evaluator::Fixed(Method::Volterra));
    let (times, volterra_grid): (Vec<f64>, Option<TimeGrid>) = if uses_volterra {
        let (grid, stride) = spec.volterra.build(&spec.grid, tau)?;
        let last = grid.len() - 1;
        let times = grid
            .points()
            .iter()
            .enumerate()
            .filter(|(k, _)| k % stride == 0 || *k == last)
            .map(|(_, &t)| t)
            .collect();
        (times, Some(grid))
    } else {
        (spec.grid.build(tau)?.points().to_vec(), None)
    };
    let mut columns = Vec::new();
    let mut failures = Vec::new();
    for &m in &spec.methods {
        let (col, fail) = evaluate_column(&prop, m, &times, volterra_grid.as_ref());
        columns.push(col);
        failures.extend(fail);
    }
    let mut pairs = Vec::new();
    for i in 0..spec.methods.len() {
        for j in i + 1..spec.methods.len() {
            let (mi, mj) = (spec.methods[i], spec.methods[j]);
            let (gate, tolerance) = if is_asymptotic(mi) || is_asymptotic(mj) {
                (Gate::Relative, ASYMPTOTIC_GATE)
            } else {
                (Gate::Absolute, spec.tol)
            };
            let mut deviations = Vec::new();
            let mut unavailable = 0;
            for (k, &t) in times.iter().enumerate() {
                let (Some(a), Some(b)) = (columns[i][k], columns[j][k]) else {
                    unavailable += 1;
                    continue;
                };
                let diff = (a.value - b.value).norm();
                let deviation = match gate {
                    Gate::Absolute => diff,
                    Gate::Relative => {
                        let reference = if is_asymptotic(mi) { b.value } else { a.value };
                        diff / reference.norm()
                    }
                };
                deviations.push(PointDeviation {
                    t,
                    deviation,
                    pass: deviation <= tolerance,
                });
            }
            let worst = deviations
                .iter()
                .max_by(|x, y| x.deviation.total_cmp(&y.deviation))
                .map(|d| (d.t, d.deviation));
            let pass = !deviations.is_empty() && deviations.iter().all(|d| d.pass);
            pairs.push(PairReport {
                methods: [method_tag(mi), method_tag(mj)],
                gate,
                tolerance,
                status: if pass { Status::Pass } else { Status::Fail },
                negative_control: gate == Gate::Relative && deviations.iter().any(|d| d.t < tau),
                points_compared: deviations.len(),
                points_unavailable: unavailable,
                max_deviation: worst.map_or(0.0, |w| w.1),
                worst_t: worst.map(|w| w.0),
                deviations,
            });
        }
    }
    let report = CompareReport {
        schema_version: SCHEMA_VERSION,
        config: spec.reservoir,
        tau,
        pairs,
        failures,
    };
    ensure_dir(&spec.out)?;
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    write_atomic(&spec.out.join("compare.json"), &bytes)?;
    Ok(report)
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub tau: Option<f64>,
    pub predicted_exponent: f64,
    pub fitted_exponent: Option<f64>,
    pub deviation: Option<f64>,
    pub fit_residual: Option<f64>,
    pub amplitude_fit: Option<f64>,
    pub continuum_exponent: Option<f64>,
    pub continuum_deviation: Option<f64>,
    pub continuum_amplitude: Option<f64>,
    pub abs_d_alpha: Option<f64>,
    pub status: &'static str,
    pub error: String,
}

fn sweep_entry(base: &ReservoirConfig, alpha: f64, amplitude: f64) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        amplitude,
        tau: None,
        predicted_exponent: -1.0 - alpha,
        fitted_exponent: None,
        deviation: None,
        fit_residual: None,
        amplitude_fit: None,
        continuum_exponent: None,
        continuum_deviation: None,
        continuum_amplitude: None,
        abs_d_alpha: None,
        status: "error",
        error: String::new(),
    };
    let fill = |row: &mut SweepRow| -> gapdecay_core::Result<()> {
        let cfg = ReservoirConfig::new(amplitude, base.width, alpha, base.omega0)?;
        let params = derive_params(&cfg)?;
        row.tau = Some(params.tau);
        row.abs_d_alpha = Some(d_alpha(&params).norm());
        let inv = LaplaceInverter::new(&params)?;
        let grid = TimeGrid::log(100.0 * params.tau, 1000.0 * params.tau, SWEEP_FIT_POINTS)?;
        let mut full = Vec::new();
        let mut cont = Vec::new();
        for &t in grid.points() {
            let parts = inv.decompose(t).map_err(|e| e.at(t, "laplace"))?;
            full.push((t, parts.total().norm()));
            cont.push((t, parts.continuum.norm()));
        }
        let fit = least_squares_loglog(&full)?;
        row.fitted_exponent = Some(fit.exponent);
        row.deviation = Some(fit.exponent - row.predicted_exponent);
        row.fit_residual = Some(fit.residual);
        row.amplitude_fit = Some(fit.amplitude);
        let cfit = least_squares_loglog(&cont)?;
        row.continuum_exponent = Some(cfit.exponent);
        row.continuum_deviation = Some(cfit.exponent - row.predicted_exponent);
        row.continuum_amplitude = Some(cfit.amplitude);
        row.status = match fit_tail_exponent(&full) {
            Ok(f) if (f.exponent - row.predicted_exponent).abs() <= SWEEP_EXPONENT_GATE => "pass",
            Ok(_) => "fail",
            Err(e) => {
                row.error = e.to_string();
                "fail"
            }
        };
        Ok(())
    };
    if let Err(e) = fill(&mut row) {
        row.status = "error";
        row.error = e.to_string();
    }
    row
}

/// Tail exponents over `alpha_list × A_list`; per-entry failures are recorded in the row.
pub fn sweep(spec: &RunSpec) -> Result<Vec<SweepRow>, CliError> {
    let combos: Vec<(f64, f64)> = spec
        .alpha_list
        .iter()
        .flat_map(|&al| spec.amplitude_list.iter().map(move |&aa| (al, aa)))
        .collect();
    let rows: Vec<SweepRow> = combos
        .par_iter()
        .map(|&(al, aa)| sweep_entry(&spec.reservoir, al, aa))
        .collect();
    ensure_dir(&spec.out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(format!("csv: {e}")))?;
    write_atomic(&spec.out.join("sweep.csv"), &bytes)?;
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub manifest: Manifest,
    pub spectral_density: SummabilityReport,
}

/// Checks the run configuration and the reservoir without evaluating trajectories or writing files.
pub fn validate(spec: &RunSpec) -> Result<ValidationReport, CliError> {
    let prop = propagator(&spec.reservoir)?;
    spec.grid.build(prop.params().tau)?;
    if spec.methods.contains(&Evaluator::Fixed(Method::Volterra)) {
        spec.volterra.build(&spec.grid, prop.params().tau)?;
    }
    let spectral_density =
        validate_spectral_density(&spec.reservoir).map_err(|e| numerical("spectral density", e))?;
    Ok(ValidationReport {
        manifest: Manifest::new(spec, &prop, Vec::new()),
        spectral_density,
    })
}
