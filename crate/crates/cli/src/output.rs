//! Artifact formats: trajectory CSV, the JSON manifest, atomic writes.

use std::fs;
use std::path::{Path, PathBuf};

use gapdecay_core::asymptotics::{bound_state, d_alpha, tail_exponent_prediction, BoundState};
use gapdecay_core::{
    DensityMatrix, Propagator, RationalOrder, ReservoirConfig, ReservoirParams, RootSet,
    TrajectoryPoint,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::CliError;
use crate::spec::{method_tag, RunSpec, Scale};

/// Bumped whenever a manifest field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

/// Fixed column order of trajectory files.
pub const TRAJECTORY_COLUMNS: [&str; 7] = [
    "t",
    "rho11",
    "re_rho10",
    "im_rho10",
    "abs_rho10",
    "method",
    "err_bound",
];

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Config(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })
}

#[derive(Debug, Serialize)]
struct TrajectoryRow {
    t: f64,
    rho11: f64,
    re_rho10: f64,
    im_rho10: f64,
    abs_rho10: f64,
    method: &'static str,
    err_bound: f64,
}

/// Error bound on the state entries implied by the bound `e` on `G`:
/// `ρ₁₁ = ρ₁₁(0)|G|²` moves by at most `ρ₁₁(0)(2|G|e + e²)`, `ρ₁₀` by `|ρ₁₀(0)| e`.
pub fn state_error_bound(rho0: &DensityMatrix, p: &TrajectoryPoint) -> f64 {
    let e = p.g.error_bound;
    let g = p.g.value.norm();
    (rho0.rho11 * (2.0 * g * e + e * e)).max(rho0.rho10.norm() * e)
}

pub fn trajectory_csv(
    rho0: &DensityMatrix,
    points: &[TrajectoryPoint],
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(TrajectoryRow {
            t: p.t,
            rho11: p.state.rho11,
            re_rho10: p.state.rho10.re,
            im_rho10: p.state.rho10.im,
            abs_rho10: p.state.rho10.norm(),
            method: p.method().as_str(),
            err_bound: state_error_bound(rho0, p),
        })?;
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv: {e}")))
}

#[derive(Debug, Serialize)]
pub struct TailPowers {
    pub population: f64,
    pub coherence: f64,
}

#[derive(Debug, Serialize)]
pub struct RationalInfo {
    pub order: RationalOrder,
    pub root_set: RootSet,
}

#[derive(Debug, Serialize)]
pub struct ResolvedGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub scale: Scale,
}

/// Everything derived from a run configuration, with no timing or host data, so equal
/// configurations give byte-identical files.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub config: ReservoirConfig,
    pub derived: ReservoirParams,
    pub d_alpha: Complex64,
    pub tail_powers: TailPowers,
    pub bound_state: Option<BoundState>,
    pub series_limit: f64,
    pub rational: Option<RationalInfo>,
    pub grid: ResolvedGrid,
    pub methods: Vec<&'static str>,
    pub initial_state: DensityMatrix,
    pub tolerance: f64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(spec: &RunSpec, prop: &Propagator, outputs: Vec<String>) -> Self {
        let params = *prop.params();
        let (population, coherence) = tail_exponent_prediction(&spec.reservoir);
        Self {
            schema_version: SCHEMA_VERSION,
            config: spec.reservoir,
            derived: params,
            d_alpha: d_alpha(&params),
            tail_powers: TailPowers {
                population,
                coherence,
            },
            bound_state: bound_state(&spec.reservoir).ok(),
            series_limit: prop.series_limit(),
            rational: prop
                .rational_order()
                .zip(prop.root_set())
                .map(|(order, rs)| RationalInfo {
                    order,
                    root_set: rs.clone(),
                }),
            grid: ResolvedGrid {
                t_min: spec.grid.t_min,
                t_max: spec.grid.resolve_t_max(params.tau),
                points: spec.grid.points,
                scale: spec.grid.scale,
            },
            methods: spec.methods.iter().map(|&m| method_tag(m)).collect(),
            initial_state: spec.initial,
            tolerance: spec.tol,
            outputs,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }
}

pub fn trajectory_file(dir: &Path, tag: &str) -> PathBuf {
    dir.join(format!("trajectory_{tag}.csv"))
}
