//! Band-edge spectral density `J(ω) = 2A (ω−ω₀)^α Θ(ω−ω₀) / (a² + (ω−ω₀)²)`
//! and the complex constants derived from it.
//!
//! Frequencies are handled relative to the edge, `x = ω − ω₀`; the profile
//! in that variable is written `Λ(x)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, Tolerance};

/// Default absolute target for reservoir quadratures.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Physical parameters of the reservoir and the qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    /// Coupling amplitude `A`.
    #[serde(rename = "A")]
    pub amplitude: f64,
    /// Width `a` of the spectral profile.
    #[serde(rename = "a")]
    pub width: f64,
    /// Band-edge exponent, strictly inside `(0, 1)`.
    pub alpha: f64,
    /// Qubit transition frequency.
    pub omega0: f64,
}

impl ReservoirConfig {
    pub fn new(amplitude: f64, width: f64, alpha: f64, omega0: f64) -> Result<Self> {
        let cfg = Self {
            amplitude,
            width,
            alpha,
            omega0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks `A > 0`, `a > 0`, `0 < α < 1`, `ω₀ > 0`.
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        };
        positive("A", self.amplitude)?;
        positive("a", self.width)?;
        positive("omega0", self.omega0)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig {
                field: "alpha",
                reason: format!("must lie strictly inside (0, 1), got {}", self.alpha),
            });
        }
        Ok(())
    }

    /// Parses either a JSON object or flat `key = value` lines
    /// (`#` comments allowed). Keys: `A`, `a`, `alpha`, `omega0`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let cfg: ReservoirConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `Λ(x)` for real `x = ω − ω₀`; zero for `x ≤ 0`.
    pub fn profile(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        2.0 * self.amplitude * x.powf(self.alpha) / (self.width * self.width + x * x)
    }

    /// Analytic continuation of `Λ` off the real axis (principal branch of `x^α`).
    pub fn profile_complex(&self, x: Complex64) -> Complex64 {
        if x == Complex64::new(0.0, 0.0) {
            return x;
        }
        2.0 * self.amplitude * x.powf(self.alpha) / (self.width * self.width + x * x)
    }
}

/// Constants derived from a [`ReservoirConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub amplitude: f64,
    pub width: f64,
    pub alpha: f64,
    pub omega0: f64,
    pub z0: Complex64,
    pub z_alpha: Complex64,
    pub z1: f64,
    pub a_star: f64,
    pub tau: f64,
    pub omega_alpha: f64,
    pub m_alpha: f64,
}

/// The constants in units where `a = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledConstants {
    pub z0: Complex64,
    pub z_alpha: Complex64,
    pub z1: f64,
    pub alpha: f64,
}

impl ReservoirParams {
    pub fn config(&self) -> ReservoirConfig {
        ReservoirConfig {
            amplitude: self.amplitude,
            width: self.width,
            alpha: self.alpha,
            omega0: self.omega0,
        }
    }

    /// `z₁/a²`, `z_α/a^(3−α)`, `z₀/a³`: the constants for dimensionless time `a t`.
    pub fn scaled(&self) -> ScaledConstants {
        let a = self.width;
        ScaledConstants {
            z0: self.z0 / a.powi(3),
            z_alpha: self.z_alpha / a.powf(3.0 - self.alpha),
            z1: self.z1 / (a * a),
            alpha: self.alpha,
        }
    }
}

/// Threshold amplitude at which `z₁` vanishes.
pub fn a_star(width: f64, alpha: f64) -> f64 {
    width.powf(3.0 - alpha) * (FRAC_PI_2 * alpha).cos() / PI
}

/// `max{1, |3/z₀|^(1/3), |3z_α/z₀|^(1/α), 3|z₁/z₀|}`.
pub fn timescale(z0: Complex64, z_alpha: Complex64, z1: f64, alpha: f64) -> f64 {
    let z0n = z0.norm();
    [
        1.0,
        (3.0 / z0n).cbrt(),
        (3.0 * z_alpha.norm() / z0n).powf(1.0 / alpha),
        3.0 * z1.abs() / z0n,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

/// Computes every derived constant of the reservoir.
pub fn derive_params(cfg: &ReservoirConfig) -> Result<ReservoirParams> {
    cfg.validate()?;
    let ReservoirConfig {
        amplitude: big_a,
        width: a,
        alpha,
        omega0,
    } = *cfg;
    let half = FRAC_PI_2 * alpha;
    let i = Complex64::new(0.0, 1.0);

    let z0 = i * (PI * big_a * a.powf(alpha) / half.sin());
    let z1 = PI * big_a * a.powf(alpha - 1.0) / half.cos() - a * a;
    let z_alpha = -2.0 * i * PI * big_a * Complex64::from_polar(1.0, -half) / (PI * alpha).sin();

    let peak = a * (alpha / (2.0 - alpha)).sqrt();
    let m_alpha = big_a
        * alpha.powf(alpha / 2.0)
        * a.powf(alpha - 2.0)
        * (2.0 - alpha).powf(1.0 - alpha / 2.0);

    Ok(ReservoirParams {
        amplitude: big_a,
        width: a,
        alpha,
        omega0,
        z0,
        z_alpha,
        z1,
        a_star: a_star(a, alpha),
        tau: timescale(z0, z_alpha, z1, alpha),
        omega_alpha: omega0 + peak,
        m_alpha,
    })
}

/// `J(ω)`; exactly zero at and below the edge.
pub fn spectral_density(omega: f64, cfg: &ReservoirConfig) -> f64 {
    cfg.profile(omega - cfg.omega0)
}

/// `∫₀^∞ x^α/(a² + x²) dx = (π/2) a^(α−1) sec(πα/2)`.
pub fn total_weight_closed_form(cfg: &ReservoirConfig) -> f64 {
    2.0 * cfg.amplitude * FRAC_PI_2 * cfg.width.powf(cfg.alpha - 1.0)
        / (FRAC_PI_2 * cfg.alpha).cos()
}

/// `∫₀^∞ Λ(x) dx` by quadrature: `[0, X]` directly and the tail through
/// `x = X s^(−1/(1−α))`, which maps it to a smooth integral over `(0, 1]`.
fn total_weight_quadrature(cfg: &ReservoirConfig, tol: f64) -> Result<Estimate> {
    let x_split = cfg.width;
    let head = quad::tanh_sinh(
        |x| Complex64::new(cfg.profile(x), 0.0),
        0.0,
        x_split,
        Tolerance::abs(tol / 2.0),
        12,
    )?;
    let p = 1.0 / (1.0 - cfg.alpha);
    let a2 = cfg.width * cfg.width;
    let tail = quad::tanh_sinh(
        |s| {
            let v = 2.0 * cfg.amplitude * p * x_split.powf(1.0 + cfg.alpha)
                / (a2 * s.powf(2.0 * p) + x_split * x_split);
            Complex64::new(v, 0.0)
        },
        0.0,
        1.0,
        Tolerance::abs(tol / 2.0),
        12,
    )?;
    Ok(Estimate {
        value: head.value + tail.value,
        error: head.error + tail.error,
        level: head.level.max(tail.level),
    })
}

/// Angle below the real axis of the integration ray used for `τ > 0`.
const RAY_ANGLE: f64 = FRAC_PI_4;

/// Reservoir correlation `f(τ) = ∫ J(ω) e^(−i(ω−ω₀)τ) dω` with absolute target `tol`.
///
/// For `τ > 0` the contour is turned onto the ray `x = r e^(−iπ/4)`, where the
/// oscillation becomes exponential decay; the only singularities of `Λ` off
/// the positive axis are `±ia` and the cut of `x^α` along the negative axis,
/// none of which the rotation crosses.
pub fn correlation_function(tau: f64, cfg: &ReservoirConfig, tol: f64) -> Result<Estimate> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidConfig {
            field: "tau",
            reason: format!("must be finite and >= 0, got {tau}"),
        });
    }
    if tau == 0.0 {
        return total_weight_quadrature(cfg, tol);
    }
    let dir = Complex64::from_polar(1.0, -RAY_ANGLE);
    let scale = cfg.width / (1.0 + tau * cfg.width);
    let est = quad::exp_sinh(
        |r| {
            let x = dir * r;
            cfg.profile_complex(x) * (Complex64::new(0.0, -tau) * x).exp() * dir
        },
        scale,
        Tolerance::abs(tol),
        12,
    )?;
    Ok(est)
}

/// Outcome of [`validate_spectral_density`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub nonnegative: bool,
    pub min_sampled: f64,
    pub integral: f64,
    pub integral_error: f64,
    pub closed_form: f64,
}

/// Confirms `J ≥ 0` on a dense grid and that `∫ J dω` is finite.
pub fn validate_spectral_density(cfg: &ReservoirConfig) -> Result<SummabilityReport> {
    cfg.validate()?;
    let mut min_sampled = f64::INFINITY;
    for k in 0..=4000 {
        // log grid in x over twelve decades, plus the edge itself
        let x = if k == 0 {
            0.0
        } else {
            cfg.width * 10f64.powf(-6.0 + 12.0 * (k as f64) / 4000.0)
        };
        min_sampled = min_sampled.min(spectral_density(cfg.omega0 + x, cfg));
    }
    let est = total_weight_quadrature(cfg, DEFAULT_QUAD_TOL)?;
    if !est.value.re.is_finite() {
        return Err(Error::InvalidConfig {
            field: "spectral density",
            reason: "integral of J is not finite".into(),
        });
    }
    Ok(SummabilityReport {
        nonnegative: min_sampled >= 0.0,
        min_sampled,
        integral: est.value.re,
        integral_error: est.error,
        closed_form: total_weight_closed_form(cfg),
    })
}
