//! The convergent double series of Prabhakar functions for `G(t)`:
//!
//! ```text
//! G(t) = Σ_n Σ_{k≤n} (−1)^n C(n,k) z_α^k z₀^(n−k) t^(3n−αk)
//!        [E^{n+1}_{2,3n−αk+1}(−z₁t²) − a²t² E^{n+1}_{2,3n−αk+3}(−z₁t²)]
//! ```
//!
//! evaluated in dimensionless time `s = a t`. Shells of fixed `n` are summed
//! in order; summation stops once three consecutive shells fall below
//! `tol/10`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracles::LaplaceInverter;
use crate::reservoir::{ReservoirParams, ScaledConstants};
use crate::sample::{GSample, Method};
use crate::specfun::{ln_gamma, mittag_leffler_scaled, MlParams};

/// Largest `|z₁ t²|` handed to the Mittag-Leffler series.
pub const ML_ARGUMENT_LIMIT: f64 = 50.0;
/// Largest `|z₁|/a²` accepted by [`g_star_series`].
pub const STAR_Z1_LIMIT: f64 = 1e-12;
const MAX_SHELLS: usize = 4000;

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Per-term evaluation of the bracket, returning `(value, error)` of
/// `Γ(β)[E_{2,β}(w) − s² E_{2,β+2}(w)]` with `γ = n+1`.
type Bracket<'a> = dyn Fn(usize, f64, f64) -> Result<(Complex64, f64)> + 'a;

struct ShellSum {
    value: Complex64,
    error: f64,
}

fn sum_shells(k: &ScaledConstants, s: f64, tol: f64, bracket: &Bracket<'_>) -> Result<ShellSum> {
    let ln_s = s.ln();
    let (ln_za, arg_za) = (k.z_alpha.norm().ln(), k.z_alpha.arg());
    let (ln_z0, arg_z0) = (k.z0.norm().ln(), k.z0.arg());

    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0f64;
    let mut err = 0.0f64;
    let mut quiet = 0usize;
    let mut prev_shell = f64::INFINITY;
    for n in 0..MAX_SHELLS {
        let mut shell = Complex64::new(0.0, 0.0);
        let mut shell_abs = 0.0f64;
        for kk in 0..=n {
            let beta = 3.0 * n as f64 - k.alpha * kk as f64 + 1.0;
            let ln_p = ln_binomial(n, kk)
                + kk as f64 * ln_za
                + (n - kk) as f64 * ln_z0
                + (beta - 1.0) * ln_s
                - ln_gamma(beta);
            let p_mag = ln_p.exp();
            if p_mag == 0.0 {
                continue;
            }
            let phase =
                std::f64::consts::PI * n as f64 + kk as f64 * arg_za + (n - kk) as f64 * arg_z0;
            let ml_tol = (1e-3 * tol / p_mag).min(1.0);
            let (b, b_err) = bracket(n, beta, ml_tol)?;
            let term = Complex64::from_polar(p_mag, phase) * b;
            // relative error of the log-space prefactor
            let pref_err = 4.0 * f64::EPSILON * (ln_p.abs() + 1.0);
            err += p_mag * b_err + term.norm() * pref_err;
            shell += term;
            shell_abs += term.norm();
        }
        sum += shell;
        abs_sum += shell_abs;
        let mag = shell.norm().max(shell_abs * f64::EPSILON);
        if n > 0 && mag < tol / 10.0 && mag <= prev_shell {
            quiet += 1;
        } else {
            quiet = 0;
        }
        prev_shell = mag;
        if quiet >= 3 {
            let roundoff = 8.0 * f64::EPSILON * abs_sum;
            // geometric majorant for the unsummed shells
            let truncation = 2.0 * mag;
            let error = err + roundoff + truncation;
            return Ok(ShellSum { value: sum, error });
        }
    }
    Err(Error::SeriesDiverged {
        t: s,
        terms: MAX_SHELLS,
    })
}

fn finish(t: f64, tol: f64, sum: ShellSum, method: Method) -> Result<GSample> {
    if sum.error > tol {
        return Err(Error::LossOfSignificance {
            t,
            bound: sum.error,
            tol,
        });
    }
    Ok(GSample::new(t, sum.value, sum.error, method))
}

/// `G(t)` from the double series, with `error_bound ≤ tol` on success.
pub fn g_series(t: f64, params: &ReservoirParams, tol: f64) -> Result<GSample> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig {
            field: "t",
            reason: format!("must be finite and >= 0, got {t}"),
        });
    }
    if t == 0.0 {
        return Ok(GSample::new(
            0.0,
            Complex64::new(1.0, 0.0),
            0.0,
            Method::Series,
        ));
    }
    let k = params.scaled();
    let s = params.width * t;
    let w = -k.z1 * s * s;
    if w.abs() > ML_ARGUMENT_LIMIT {
        return Err(Error::OutOfDomain {
            t,
            argument: w.abs(),
            limit: ML_ARGUMENT_LIMIT,
        });
    }
    let wc = Complex64::new(w, 0.0);
    let bracket = |n: usize, beta: f64, ml_tol: f64| -> Result<(Complex64, f64)> {
        let gamma = n as f64 + 1.0;
        let e1 = mittag_leffler_scaled(&MlParams::new(2.0, beta, gamma)?, wc, ml_tol)?;
        let c2 = s * s / (beta * (beta + 1.0));
        let e2 = mittag_leffler_scaled(
            &MlParams::new(2.0, beta + 2.0, gamma)?,
            wc,
            ml_tol / c2.max(1e-300),
        )?;
        Ok((e1.value - c2 * e2.value, e1.error + c2 * e2.error))
    };
    let sum = sum_shells(&k, s, tol, &bracket)?;
    finish(t, tol, sum, Method::Series)
}

/// `G(t)` at the threshold amplitude, where `z₁ = 0` and every
/// Mittag-Leffler factor collapses to `1/Γ`.
pub fn g_star_series(t: f64, params: &ReservoirParams, tol: f64) -> Result<GSample> {
    let k = params.scaled();
    if k.z1.abs() > STAR_Z1_LIMIT {
        return Err(Error::InvalidConfig {
            field: "A",
            reason: format!(
                "power series needs z1 = 0 (A = A*), got z1/a^2 = {:e}",
                k.z1
            ),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig {
            field: "t",
            reason: format!("must be finite and >= 0, got {t}"),
        });
    }
    if t == 0.0 {
        return Ok(GSample::new(
            0.0,
            Complex64::new(1.0, 0.0),
            0.0,
            Method::StarSeries,
        ));
    }
    let s = params.width * t;
    let bracket = |_n: usize, beta: f64, _tol: f64| -> Result<(Complex64, f64)> {
        Ok((
            Complex64::new(1.0 - s * s / (beta * (beta + 1.0)), 0.0),
            0.0,
        ))
    };
    let sum = sum_shells(&k, s, tol, &bracket)?;
    finish(t, tol, sum, Method::StarSeries)
}

/// Largest probe time up to which [`g_series`] meets `tol` and agrees with
/// the Laplace oracle to `10·tol` at every probe.
///
/// Probes are `t_j = 0.01·1.1^j / a` while `|z₁ t²|` stays inside the
/// Mittag-Leffler limit and `t ≤ 100/a`. Returns 0 when the first probe fails.
pub fn converged_domain(params: &ReservoirParams, tol: f64) -> Result<f64> {
    let oracle = LaplaceInverter::new(params)?;
    let mut t_max = 0.0;
    let mut t = 0.01 / params.width;
    while t <= 100.0 / params.width {
        let ok = match g_series(t, params, tol) {
            Ok(g) => {
                let o = oracle.invert(t)?;
                (g.value - o.value).norm() <= 10.0 * tol + o.error_bound
            }
            Err(_) => false,
        };
        if !ok {
            break;
        }
        t_max = t;
        t *= 1.1;
    }
    Ok(t_max)
}
