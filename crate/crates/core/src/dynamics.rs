//! Reduced qubit state driven by `G(t)`, and trajectories with per-point
//! method routing.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::g_asymptotic;
use crate::error::{Error, Result};
use crate::oracles::{volterra_solve, LaplaceInverter, Spacing, TimeGrid};
use crate::rational::{build_q_polynomial, find_roots, RationalEvaluator, RationalOrder, RootSet};
use crate::reservoir::{derive_params, ReservoirConfig, ReservoirParams};
use crate::sample::{GSample, Method};
use crate::series::{converged_domain, g_series, g_star_series, STAR_Z1_LIMIT};

/// Slack for the positivity check on constructed states.
const POSITIVITY_SLACK: f64 = 1e-12;

/// Qubit state stored as `(ρ₁₁, ρ₁₀)`; `ρ₀₀ = 1 − ρ₁₁` and `ρ₀₁ = ρ₁₀*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub rho11: f64,
    pub rho10: Complex64,
}

impl DensityMatrix {
    pub fn new(rho11: f64, rho10: Complex64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho11) {
            return Err(Error::InvalidConfig {
                field: "rho11",
                reason: format!("must lie in [0, 1], got {rho11}"),
            });
        }
        let state = Self { rho11, rho10 };
        if state.positivity_margin() < -POSITIVITY_SLACK {
            return Err(Error::InvalidConfig {
                field: "rho10",
                reason: format!(
                    "|rho10|^2 = {} exceeds rho11(1 - rho11) = {}",
                    rho10.norm_sqr(),
                    rho11 * (1.0 - rho11)
                ),
            });
        }
        Ok(state)
    }

    pub fn excited() -> Self {
        Self {
            rho11: 1.0,
            rho10: Complex64::new(0.0, 0.0),
        }
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn maximally_coherent() -> Self {
        Self {
            rho11: 0.5,
            rho10: Complex64::new(0.5, 0.0),
        }
    }

    pub fn rho00(&self) -> f64 {
        1.0 - self.rho11
    }

    pub fn rho01(&self) -> Complex64 {
        self.rho10.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho00()
    }

    /// `ρ₁₁ ρ₀₀ − |ρ₁₀|²`, nonnegative for a physical state.
    pub fn positivity_margin(&self) -> f64 {
        self.rho11 * self.rho00() - self.rho10.norm_sqr()
    }
}

/// `ρ₁₁(t) = ρ₁₁(0)|G|²`, `ρ₁₀(t) = ρ₁₀(0) e^{−iω₀t} G`.
pub fn evolve(rho0: &DensityMatrix, t: f64, g: &GSample, omega0: f64) -> DensityMatrix {
    DensityMatrix {
        rho11: rho0.rho11 * g.value.norm_sqr(),
        rho10: rho0.rho10 * Complex64::from_polar(1.0, -omega0 * t) * g.value,
    }
}

/// Thresholds for automatic method selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoutingConfig {
    /// Requested series tolerance; also the tolerance of the domain probe.
    pub series_tol: f64,
    /// Fraction of the converged series domain used for routing.
    pub domain_margin: f64,
    /// Largest denominator for which `α` is treated as rational.
    pub rational_max_q: u32,
    /// Scaled residual gate a root set must meet to be used.
    pub root_residual_gate: f64,
    /// Shells of the asymptotic expansion when that method is requested.
    pub asymptotic_shells: usize,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        Self {
            series_tol: 1e-10,
            domain_margin: 0.9,
            rational_max_q: 16,
            root_residual_gate: 1e-10,
            asymptotic_shells: 4,
        }
    }
}

/// How a trajectory picks its evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    /// Series inside its converged domain, then the rational path when
    /// available, otherwise Laplace inversion.
    Auto,
    Fixed(Method),
}

/// `G(t)` evaluators for one reservoir, built once.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: ReservoirParams,
    routing: RoutingConfig,
    laplace: LaplaceInverter,
    rational: Option<(RationalOrder, RootSet, RationalEvaluator)>,
    series_limit: f64,
}

impl Propagator {
    pub fn new(cfg: &ReservoirConfig, routing: RoutingConfig) -> Result<Self> {
        let params = derive_params(cfg)?;
        let laplace = LaplaceInverter::new(&params)?;
        let rational = match RationalOrder::from_alpha(cfg.alpha, routing.rational_max_q) {
            Some(ord) => Self::rational_path(&params, ord, routing.root_residual_gate),
            None => None,
        };
        let series_limit = routing.domain_margin * converged_domain(&params, routing.series_tol)?;
        Ok(Self {
            params,
            routing,
            laplace,
            rational,
            series_limit,
        })
    }

    fn rational_path(
        params: &ReservoirParams,
        ord: RationalOrder,
        gate: f64,
    ) -> Option<(RationalOrder, RootSet, RationalEvaluator)> {
        let rs = find_roots(&build_q_polynomial(ord, params).ok()?).ok()?;
        if !rs.is_healthy(gate) {
            return None;
        }
        let ev = RationalEvaluator::new(params, ord).ok()?;
        Some((ord, rs, ev))
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }

    /// Largest `t` routed to the series.
    pub fn series_limit(&self) -> f64 {
        self.series_limit
    }

    pub fn rational_order(&self) -> Option<RationalOrder> {
        self.rational.as_ref().map(|r| r.0)
    }

    pub fn root_set(&self) -> Option<&RootSet> {
        self.rational.as_ref().map(|r| &r.1)
    }

    /// The method [`Evaluator::Auto`] uses at `t`.
    pub fn route(&self, t: f64) -> Method {
        if t <= self.series_limit {
            Method::Series
        } else if self.rational.is_some() {
            Method::Rational
        } else {
            Method::Laplace
        }
    }

    /// `G(t)` by a specific method. Volterra needs a whole grid; see
    /// [`trajectory`].
    pub fn amplitude(&self, t: f64, method: Method) -> Result<GSample> {
        let tol = self.routing.series_tol;
        let out = match method {
            Method::Series => g_series(t, &self.params, tol),
            Method::StarSeries => g_star_series(t, &self.params, tol),
            Method::Laplace => self.laplace.invert(t),
            Method::Asymptotic => Ok(g_asymptotic(
                t,
                &self.params,
                self.routing.asymptotic_shells,
            )),
            Method::Rational => match &self.rational {
                Some((_, _, ev)) => ev.evaluate(t),
                None => Err(Error::Inapplicable(format!(
                    "alpha = {} has no healthy rational path",
                    self.params.alpha
                ))),
            },
            Method::Volterra => Err(Error::Inapplicable(
                "volterra evaluates whole uniform grids, not single times".into(),
            )),
        };
        out.map_err(|e| e.at(t, method.as_str()))
    }

    /// `G(t)` by the automatically routed method.
    pub fn auto(&self, t: f64) -> Result<GSample> {
        self.amplitude(t, self.route(t))
    }

    /// Whether the threshold power series applies (`z₁ = 0`).
    pub fn star_applicable(&self) -> bool {
        self.params.scaled().z1.abs() <= STAR_Z1_LIMIT
    }
}

/// One trajectory point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: DensityMatrix,
    pub g: GSample,
}

impl TrajectoryPoint {
    pub fn method(&self) -> Method {
        self.g.method
    }
}

/// Evolves `rho0` over `grid`, evaluating `G` with `propagator`.
pub fn trajectory_with(
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    evaluator: Evaluator,
    propagator: &Propagator,
) -> Result<Vec<TrajectoryPoint>> {
    let omega0 = propagator.params.omega0;
    let samples: Vec<GSample> = match evaluator {
        Evaluator::Fixed(Method::Volterra) => {
            if !matches!(grid.spacing(), Spacing::Uniform { .. }) && grid.len() > 1 {
                return Err(Error::InvalidGrid(
                    "volterra trajectories need a uniform grid starting at 0".into(),
                ));
            }
            volterra_solve(&propagator.params.config(), grid)?
        }
        _ => grid
            .points()
            .par_iter()
            .map(|&t| {
                if t == 0.0 {
                    let method = match evaluator {
                        Evaluator::Auto => Method::Series,
                        Evaluator::Fixed(m) => m,
                    };
                    return Ok(GSample::new(0.0, Complex64::new(1.0, 0.0), 0.0, method));
                }
                match evaluator {
                    Evaluator::Auto => propagator.auto(t),
                    Evaluator::Fixed(m) => propagator.amplitude(t, m),
                }
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(samples
        .into_iter()
        .map(|g| TrajectoryPoint {
            t: g.t,
            state: evolve(rho0, g.t, &g, omega0),
            g,
        })
        .collect())
}

/// [`trajectory_with`] using a fresh [`Propagator`] with default routing.
pub fn trajectory(
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    evaluator: Evaluator,
    cfg: &ReservoirConfig,
) -> Result<Vec<TrajectoryPoint>> {
    let prop = Propagator::new(cfg, RoutingConfig::default())?;
    trajectory_with(rho0, grid, evaluator, &prop)
}
