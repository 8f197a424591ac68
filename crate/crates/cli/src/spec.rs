//! Run configurations: flat `key = value` text or a JSON object.
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `A`, `a`, `alpha`, `omega0` | reservoir | required |
//! | `methods` | list or comma-separated string of `auto`, `series`, `star`, `rational`, `asymptotic`, `volterra`, `laplace` | `["auto"]` |
//! | `t_min`, `t_max`, `points`, `scale` | output grid, `scale` is `log` or `linear` | `0.01`, `1000 tau`, `200`, `log` |
//! | `tol` | comparison gate for non-asymptotic pairs | `1e-6` |
//! | `rho11_0`, `re_rho10_0`, `im_rho10_0` | initial state | `1`, `0`, `0` |
//! | `volterra_step`, `volterra_t_max` | uniform step and horizon of the Volterra solver | `1/1024`, `min(t_max, 10)` |
//! | `alpha_list`, `A_list` | sweep axes | `[alpha]`, `[A]` |
//! | `out` | output directory | `out` |

use std::path::PathBuf;

use gapdecay_core::oracles::TimeGrid;
use gapdecay_core::{DensityMatrix, Evaluator, Method, ReservoirConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_POINTS: usize = 200;
pub const DEFAULT_T_MIN: f64 = 0.01;
pub const DEFAULT_VOLTERRA_STEP: f64 = 1.0 / 1024.0;
pub const DEFAULT_VOLTERRA_HORIZON: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MethodList {
    List(Vec<String>),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(rename = "A")]
    amplitude: f64,
    a: f64,
    alpha: f64,
    omega0: f64,
    methods: Option<MethodList>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    points: Option<usize>,
    scale: Option<Scale>,
    tol: Option<f64>,
    rho11_0: Option<f64>,
    re_rho10_0: Option<f64>,
    im_rho10_0: Option<f64>,
    volterra_step: Option<f64>,
    volterra_t_max: Option<f64>,
    alpha_list: Option<Vec<f64>>,
    #[serde(rename = "A_list")]
    amplitude_list: Option<Vec<f64>>,
    out: Option<PathBuf>,
}

/// Output grid request; `t_max = None` means `1000 τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: Option<f64>,
    pub points: usize,
    pub scale: Scale,
}

impl GridSpec {
    pub fn resolve_t_max(&self, tau: f64) -> f64 {
        self.t_max.unwrap_or(1000.0 * tau)
    }

    pub fn build(&self, tau: f64) -> Result<TimeGrid, CliError> {
        let t_max = self.resolve_t_max(tau);
        let grid = match self.scale {
            Scale::Log => TimeGrid::log(self.t_min, t_max, self.points),
            Scale::Linear => {
                if self.points < 2 || !(t_max > self.t_min) {
                    return Err(CliError::Config(format!(
                        "linear grid needs points >= 2 and t_max > t_min, got {} points on [{}, {t_max}]",
                        self.points, self.t_min
                    )));
                }
                let n = self.points - 1;
                TimeGrid::from_points(
                    (0..=n)
                        .map(|k| self.t_min + (t_max - self.t_min) * k as f64 / n as f64)
                        .collect(),
                )
            }
        };
        grid.map_err(CliError::from)
    }
}

/// Uniform grid for the Volterra solver and the stride used when writing it out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolterraSpec {
    pub step: f64,
    pub t_max: Option<f64>,
}

impl VolterraSpec {
    /// The solver grid and the output stride so that roughly `points` rows are written.
    pub fn build(&self, grid: &GridSpec, tau: f64) -> Result<(TimeGrid, usize), CliError> {
        let horizon = self
            .t_max
            .unwrap_or_else(|| grid.resolve_t_max(tau).min(DEFAULT_VOLTERRA_HORIZON));
        let n = (horizon / self.step).ceil() as usize;
        if n == 0 {
            return Err(CliError::Config(format!(
                "volterra_t_max = {horizon} is shorter than one step {}",
                self.step
            )));
        }
        let solver = TimeGrid::uniform(self.step, n)?;
        let stride = n.div_ceil(grid.points.max(1)).max(1);
        Ok((solver, stride))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub reservoir: ReservoirConfig,
    pub methods: Vec<Evaluator>,
    pub grid: GridSpec,
    pub tol: f64,
    pub initial: DensityMatrix,
    pub volterra: VolterraSpec,
    pub alpha_list: Vec<f64>,
    pub amplitude_list: Vec<f64>,
    pub out: PathBuf,
}

/// File-name tag of an evaluator.
pub fn method_tag(e: Evaluator) -> &'static str {
    match e {
        Evaluator::Auto => "auto",
        Evaluator::Fixed(m) => m.as_str(),
    }
}

fn parse_method(name: &str) -> Result<Evaluator, CliError> {
    let name = name.trim();
    if name == "auto" {
        return Ok(Evaluator::Auto);
    }
    Method::parse(name).map(Evaluator::Fixed).ok_or_else(|| {
        CliError::Config(format!(
            "unknown method '{name}' (expected auto, series, star, rational, asymptotic, volterra or laplace)"
        ))
    })
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{field} must be finite and > 0, got {v}"
        )))
    }
}

impl RunSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawSpec = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)
                .map_err(|e| CliError::Config(format!("could not parse configuration: {e}")))?
        } else {
            toml::from_str(text)
                .map_err(|e| CliError::Config(format!("could not parse configuration: {e}")))?
        };
        Self::from_raw(raw)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn from_raw(raw: RawSpec) -> Result<Self, CliError> {
        let reservoir = ReservoirConfig::new(raw.amplitude, raw.a, raw.alpha, raw.omega0)?;
        let names: Vec<String> = match raw.methods {
            None => vec!["auto".into()],
            Some(MethodList::List(v)) => v,
            Some(MethodList::Text(s)) => s.split(',').map(str::to_owned).collect(),
        };
        let mut methods = Vec::new();
        for n in names.iter().filter(|n| !n.trim().is_empty()) {
            let m = parse_method(n)?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        if methods.is_empty() {
            return Err(CliError::Config(
                "at least one method must be selected".into(),
            ));
        }
        let grid = GridSpec {
            t_min: raw.t_min.unwrap_or(DEFAULT_T_MIN),
            t_max: raw.t_max,
            points: raw.points.unwrap_or(DEFAULT_POINTS),
            scale: raw.scale.unwrap_or(Scale::Log),
        };
        if !(grid.t_min >= 0.0 && grid.t_min.is_finite()) {
            return Err(CliError::Config(format!(
                "t_min must be finite and >= 0, got {}",
                grid.t_min
            )));
        }
        if let Some(t) = grid.t_max {
            positive("t_max", t)?;
        }
        let initial = DensityMatrix::new(
            raw.rho11_0.unwrap_or(1.0),
            Complex64::new(raw.re_rho10_0.unwrap_or(0.0), raw.im_rho10_0.unwrap_or(0.0)),
        )?;
        let volterra = VolterraSpec {
            step: positive(
                "volterra_step",
                raw.volterra_step.unwrap_or(DEFAULT_VOLTERRA_STEP),
            )?,
            t_max: raw
                .volterra_t_max
                .map(|t| positive("volterra_t_max", t))
                .transpose()?,
        };
        let alpha_list = raw.alpha_list.unwrap_or_else(|| vec![reservoir.alpha]);
        let amplitude_list = raw
            .amplitude_list
            .unwrap_or_else(|| vec![reservoir.amplitude]);
        if alpha_list.is_empty() || amplitude_list.is_empty() {
            return Err(CliError::Config(
                "alpha_list and A_list must be nonempty".into(),
            ));
        }
        Ok(Self {
            reservoir,
            methods,
            grid,
            tol: positive("tol", raw.tol.unwrap_or(DEFAULT_TOL))?,
            initial,
            volterra,
            alpha_list,
            amplitude_list,
            out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}
