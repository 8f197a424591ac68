//! Long-time behaviour of `G(t)`.
//!
//! Expanding `G̃(u) = (u² − a²)/(z₀ + w)` with `w = u³ + z₁u + z_α u^α` in
//! powers of `w/z₀` and inverting term by term (`u^γ ↦ t^(−γ−1)/Γ(−γ)`) gives
//! the triple sum
//!
//! ```text
//! Σ_{n≥1} Σ_{k≤n} Σ_{j≤k} (−1)^n n!/(j!(k−j)!(n−k)!) z₀^(−n−1) z_α^(n−k) z₁^(k−j)
//!     [t^(−3−β)/Γ(−β−2) − a² t^(−1−β)/Γ(−β)],   β = α(n−k) + k + 2j,
//! ```
//!
//! whose leading term is `−D t^(−1−α)`. The expansion describes the
//! branch-cut contribution only; the transfer function also has a pole on the
//! positive imaginary axis (see [`bound_state`]), which contributes a
//! non-decaying `Z e^{i y t}`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::quad::{self, Tolerance};
use crate::reservoir::{ReservoirConfig, ReservoirParams};
use crate::sample::{GSample, Method};
use crate::specfun::{ln_gamma, reciprocal_gamma_real};

/// A set of power-law terms `Σ c_i t^(p_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticExpansion {
    /// `−D`.
    pub leading_coeff: Complex64,
    /// `−(1+α)`.
    pub leading_power: f64,
    /// `(coefficient, power)` pairs with powers strictly below the leading one,
    /// in descending order of power.
    pub correction_terms: Vec<(Complex64, f64)>,
}

impl AsymptoticExpansion {
    pub fn eval(&self, t: f64) -> Complex64 {
        let mut v = self.leading_coeff * t.powf(self.leading_power);
        for &(c, p) in &self.correction_terms {
            v += c * t.powf(p);
        }
        v
    }
}

/// `D = −a² z_α / (z₀² Γ(−α))`.
pub fn d_alpha(params: &ReservoirParams) -> Complex64 {
    let a2 = params.width * params.width;
    -a2 * params.z_alpha * reciprocal_gamma_real(-params.alpha) / (params.z0 * params.z0)
}

/// Closed form of [`d_alpha`]:
/// `iα a^(2(1−α)) e^(−iπα/2) tan(πα/2) / (πA Γ(1−α))`.
pub fn d_alpha_closed_form(cfg: &ReservoirConfig) -> Complex64 {
    let al = cfg.alpha;
    let mag = al * cfg.width.powf(2.0 * (1.0 - al)) * (FRAC_PI_2 * al).tan() / (PI * cfg.amplitude)
        * (-ln_gamma(1.0 - al)).exp();
    Complex64::new(0.0, 1.0) * Complex64::from_polar(mag, -FRAC_PI_2 * al)
}

/// The crossover time `τ` stored in the derived parameters.
pub fn timescale_tau(params: &ReservoirParams) -> f64 {
    params.tau
}

/// `(population power, coherence power) = (−2−2α, −1−α)`.
pub fn tail_exponent_prediction(cfg: &ReservoirConfig) -> (f64, f64) {
    (-2.0 - 2.0 * cfg.alpha, -1.0 - cfg.alpha)
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Every nonzero term of the triple sum with `n ≤ n_max`, merged by power.
fn collect_terms(params: &ReservoirParams, n_max: usize) -> Vec<(f64, Complex64)> {
    let al = params.alpha;
    let a2 = params.width * params.width;
    let z0 = params.z0;
    let za = params.z_alpha;
    let z1 = Complex64::new(params.z1, 0.0);
    let mut out: Vec<(f64, Complex64)> = Vec::new();
    let mut push = |p: f64, c: Complex64| {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        match out.iter_mut().find(|(q, _)| (q - p).abs() < 1e-12) {
            Some(e) => e.1 += c,
            None => out.push((p, c)),
        }
    };
    for n in 1..=n_max {
        let zn = z0.powi(-(n as i32) - 1);
        for k in 0..=n {
            for j in 0..=k {
                let beta = al * (n - k) as f64 + k as f64 + 2.0 * j as f64;
                let ln_m =
                    ln_factorial(n) - ln_factorial(j) - ln_factorial(k - j) - ln_factorial(n - k);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let mut coef = sign * ln_m.exp() * zn * za.powi((n - k) as i32);
                if k > j {
                    coef *= z1.powi((k - j) as i32);
                }
                let r1 = reciprocal_gamma_real(-beta - 2.0);
                let r2 = reciprocal_gamma_real(-beta);
                push(-3.0 - beta, coef * r1);
                push(-1.0 - beta, -a2 * coef * r2);
            }
        }
    }
    out.sort_by(|x, y| y.0.total_cmp(&x.0));
    out
}

/// Leading term plus the first `n_shells` correction powers.
pub fn expansion(params: &ReservoirParams, n_shells: usize) -> AsymptoticExpansion {
    let al = params.alpha;
    let leading_power = -1.0 - al;
    let d = d_alpha(params);
    let mut n_max = 2;
    loop {
        let terms = collect_terms(params, n_max);
        // power t^(−P) can only receive terms with n ≤ (P − 1)/α
        let complete = |p: f64| (-p - 1.0) / al <= n_max as f64 + 1e-9;
        let corrections: Vec<(Complex64, f64)> = terms
            .iter()
            .filter(|(p, c)| *p < leading_power - 1e-12 && c.norm() > 0.0)
            .map(|&(p, c)| (c, p))
            .collect();
        let enough = corrections.len() >= n_shells
            && corrections.iter().take(n_shells).all(|&(_, p)| complete(p));
        if enough || n_max > 400 {
            return AsymptoticExpansion {
                leading_coeff: -d,
                leading_power,
                correction_terms: corrections.into_iter().take(n_shells).collect(),
            };
        }
        n_max += 2;
    }
}

/// `−D t^(−1−α)` plus `n_shells` correction shells. The error bound is the
/// size of the first omitted shell, a heuristic: the expansion is asymptotic.
pub fn g_asymptotic(t: f64, params: &ReservoirParams, n_shells: usize) -> GSample {
    let exp = expansion(params, n_shells + 1);
    let value = exp.leading_coeff * t.powf(exp.leading_power)
        + exp
            .correction_terms
            .iter()
            .take(n_shells)
            .map(|&(c, p)| c * t.powf(p))
            .sum::<Complex64>();
    let next = exp
        .correction_terms
        .get(n_shells)
        .map(|&(c, p)| c.norm() * t.powf(p))
        .unwrap_or(0.0);
    GSample::new(t, value, next, Method::Asymptotic)
}

/// The pole of `G̃` on the positive imaginary axis, `u = i y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundState {
    /// `y`, solving `y = ∫ Λ(x)/(x + y) dx`.
    pub frequency: f64,
    /// Residue `Z = 1/(1 + ∫ Λ(x)/(x + y)² dx)`; `G(t) → Z e^{iyt}` plus decaying terms.
    pub residue: f64,
}

fn profile_moment(cfg: &ReservoirConfig, y: f64, power: i32) -> Result<f64> {
    let est = quad::exp_sinh(
        |x| Complex64::new(cfg.profile(x) / (x + y).powi(power), 0.0),
        cfg.width.max(y),
        Tolerance::new(1e-15, 1e-13),
        12,
    )?;
    Ok(est.value.re)
}

/// Solves the bound-state condition directly from the spectral density.
///
/// `h(y) = y − ∫Λ/(x+y)` is increasing with `h(0⁺) < 0`, so Newton from a
/// bracketing start converges monotonically.
pub fn bound_state(cfg: &ReservoirConfig) -> Result<BoundState> {
    cfg.validate()?;
    let mut lo = 0.0f64;
    // h(y) ≥ y − ∫Λ/x, and ∫Λ/x = πA a^(α−2) / sin(πα/2)
    let s0 = PI * cfg.amplitude * cfg.width.powf(cfg.alpha - 2.0) / (FRAC_PI_2 * cfg.alpha).sin();
    let mut hi = s0.max(cfg.width);
    let mut y = 0.5 * hi;
    for _ in 0..200 {
        let s1 = profile_moment(cfg, y, 1)?;
        let h = y - s1;
        if h < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let dh = 1.0 + profile_moment(cfg, y, 2)?;
        let mut next = y - h / dh;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - y).abs() <= 1e-15 * y.max(1e-300);
        y = next;
        if done || hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let s2 = profile_moment(cfg, y, 2)?;
    Ok(BoundState {
        frequency: y,
        residue: 1.0 / (1.0 + s2),
    })
}
