//! Inversion of the transfer function
//!
//! ```text
//! G̃(u) = (u² − a²) / (u³ + z₁u + z_α u^α + z₀)
//! ```
//!
//! on the principal sheet of `u^α` (cut along the negative real axis).
//! The Bromwich line is folded onto the two edges of the cut, so
//!
//! ```text
//! G(t) = Σ_p Res_p e^{u_p t} + (1/2πi) ∫₀^∞ [G̃(r e^{−iπ}) − G̃(r e^{iπ})] e^{−r t} dr
//! ```
//!
//! where the sum runs over the poles of `G̃` in the cut plane. The poles are
//! located by Newton iteration and their number is checked against an
//! argument-principle count before any inversion is attempted.
//!
//! Everything is computed in units where `a = 1` (`v = u/a`, `s = a t`).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::reservoir::{ReservoirParams, ScaledConstants};
use crate::sample::{GSample, Method};

/// Default target on the branch-cut integral.
pub const DEFAULT_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-15,
    rel: 1e-11,
};

/// Angular gap between the keyhole used for pole counting and the cut.
const KEYHOLE_GAP: f64 = 1e-3;
/// Radius of the small circle around the branch point.
const KEYHOLE_EPS: f64 = 1e-6;
/// Neighbourhood of a removable point in which a Taylor quotient is used.
const REMOVABLE_RADIUS: f64 = 1e-4;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The denominator `D(v) = v³ + z₁v + z_α v^α + z₀` in scaled units.
/// Every method takes `v^α` explicitly so the cut edges can be addressed.
#[derive(Debug, Clone, Copy)]
struct Denominator {
    k: ScaledConstants,
}

impl Denominator {
    fn eval(&self, v: Complex64, va: Complex64) -> Complex64 {
        v * v * v + self.k.z1 * v + self.k.z_alpha * va + self.k.z0
    }

    fn d1(&self, v: Complex64, va: Complex64) -> Complex64 {
        3.0 * v * v + self.k.z1 + self.k.alpha * self.k.z_alpha * va / v
    }

    fn d2(&self, v: Complex64, va: Complex64) -> Complex64 {
        let al = self.k.alpha;
        6.0 * v + al * (al - 1.0) * self.k.z_alpha * va / (v * v)
    }

    fn d3(&self, v: Complex64, va: Complex64) -> Complex64 {
        let al = self.k.alpha;
        c(6.0, 0.0) + al * (al - 1.0) * (al - 2.0) * self.k.z_alpha * va / (v * v * v)
    }

    /// Sum of the moduli of the four terms, used to scale residual tests.
    fn magnitude(&self, v: Complex64) -> f64 {
        let r = v.norm();
        r.powi(3)
            + self.k.z1.abs() * r
            + self.k.z_alpha.norm() * r.powf(self.k.alpha)
            + self.k.z0.norm()
    }

    fn principal(&self, v: Complex64) -> Complex64 {
        self.eval(v, v.powf(self.k.alpha))
    }

    /// Radius beyond which `|v³|` dominates the other three terms.
    fn root_radius(&self) -> f64 {
        let s = self.k.z1.abs() + self.k.z_alpha.norm() + self.k.z0.norm();
        1.01 * s.sqrt().max(1.0)
    }
}

/// A pole of the transfer function on the principal sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleTerm {
    /// Location in physical units, `u_p = a v_p`.
    pub location: Complex64,
    /// Residue of `G̃` at `u_p` (the same in scaled and physical units).
    pub residue: Complex64,
}

/// Pole and branch-cut contributions to `G(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceParts {
    pub t: f64,
    pub pole_part: Complex64,
    pub continuum: Complex64,
    pub continuum_error: f64,
    pub pole_error: f64,
}

impl LaplaceParts {
    pub fn total(&self) -> Complex64 {
        self.pole_part + self.continuum
    }

    pub fn error(&self) -> f64 {
        self.continuum_error + self.pole_error
    }
}

/// Cached pole data for one reservoir, reusable across many times.
#[derive(Debug, Clone)]
pub struct LaplaceInverter {
    width: f64,
    den: Denominator,
    poles: Vec<(Complex64, Complex64)>,
    removable_upper: bool,
    removable_lower: bool,
    tol: Tolerance,
}

/// `G̃(u)` in physical units on the principal sheet.
pub fn transfer(params: &ReservoirParams, u: Complex64) -> Complex64 {
    let a2 = params.width * params.width;
    (u * u - a2) / (u * u * u + params.z1 * u + params.z_alpha * u.powf(params.alpha) + params.z0)
}

fn newton(den: &Denominator, mut v: Complex64) -> Option<Complex64> {
    for _ in 0..200 {
        let va = v.powf(den.k.alpha);
        let d = den.eval(v, va);
        let dp = den.d1(v, va);
        if dp.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let step = d / dp;
        let next = v - step;
        if !next.is_finite() || next.norm() < 1e-12 {
            return None;
        }
        // do not let an iterate jump across the cut
        if (next.arg() - v.arg()).abs() > PI {
            return None;
        }
        v = next;
        if step.norm() <= 4.0 * f64::EPSILON * v.norm() {
            break;
        }
    }
    let res = den.principal(v).norm();
    (res <= 1e-11 * den.magnitude(v)).then_some(v)
}

/// Accumulated change of `arg f` along `path(t)` for `t ∈ [t0, t1]`.
fn phase_change<F: Fn(f64) -> Complex64>(path: &F, t0: f64, t1: f64) -> f64 {
    fn rec<F: Fn(f64) -> Complex64>(
        path: &F,
        t0: f64,
        t1: f64,
        f0: Complex64,
        f1: Complex64,
        depth: u32,
    ) -> f64 {
        let d = (f1 / f0).arg();
        if depth >= 48 {
            return d;
        }
        let tm = 0.5 * (t0 + t1);
        let fm = path(tm);
        let d0 = (fm / f0).arg();
        let d1 = (f1 / fm).arg();
        if d.abs() < 0.2 && (d0 + d1 - d).abs() < 1e-9 {
            return d;
        }
        rec(path, t0, tm, f0, fm, depth + 1) + rec(path, tm, t1, fm, f1, depth + 1)
    }
    let n = 512;
    let mut total = 0.0;
    let mut prev_t = t0;
    let mut prev_f = path(t0);
    for i in 1..=n {
        let t = t0 + (t1 - t0) * i as f64 / n as f64;
        let f = path(t);
        total += rec(path, prev_t, t, prev_f, f, 0);
        prev_t = t;
        prev_f = f;
    }
    total
}

impl LaplaceInverter {
    pub fn new(params: &ReservoirParams) -> Result<Self> {
        Self::with_tolerance(params, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(params: &ReservoirParams, tol: Tolerance) -> Result<Self> {
        let den = Denominator { k: params.scaled() };
        let mut roots = Self::locate_zeros(&den)?;
        // v = 1 and the upper edge point v = −1 + i0 are common zeros of
        // numerator and denominator
        roots.retain(|v| (v - 1.0).norm() > 1e-6 && (v + 1.0).norm() > 1e-6);
        let mut poles = Vec::with_capacity(roots.len());
        for v in roots {
            if v.arg().abs() > PI - KEYHOLE_GAP {
                return Err(Error::LaplaceInversion {
                    t: f64::NAN,
                    reason: format!("pole {v} lies within the guard distance of the branch cut"),
                });
            }
            let va = v.powf(den.k.alpha);
            poles.push((v, (v * v - 1.0) / den.d1(v, va)));
        }
        let edge = |sign: f64| {
            let va = Complex64::from_polar(1.0, sign * PI * den.k.alpha);
            den.eval(c(-1.0, 0.0), va).norm() < 1e-10 * den.magnitude(c(-1.0, 0.0))
        };
        Ok(Self {
            width: params.width,
            den,
            poles,
            removable_upper: edge(1.0),
            removable_lower: edge(-1.0),
            tol,
        })
    }

    /// Zeros of `D` in the cut plane; verified against the winding number of
    /// `D` around a keyhole enclosing everything but a thin wedge at the cut.
    fn locate_zeros(den: &Denominator) -> Result<Vec<Complex64>> {
        let big_r = den.root_radius();
        let mut roots: Vec<Complex64> = Vec::new();
        let n_rad = 24;
        let n_ang = 36;
        for i in 0..n_rad {
            let r = big_r * 10f64.powf(-4.0 * (1.0 - i as f64 / (n_rad - 1) as f64));
            for j in 0..n_ang {
                let th = -PI + (j as f64 + 0.5) * 2.0 * PI / n_ang as f64;
                if let Some(v) = newton(den, Complex64::from_polar(r, th)) {
                    if v.norm() < 1.5 * big_r
                        && !roots
                            .iter()
                            .any(|w| (w - v).norm() < 1e-7 * v.norm().max(1.0))
                    {
                        roots.push(v);
                    }
                }
            }
        }
        roots.sort_by(|x, y| x.arg().total_cmp(&y.arg()));

        let edge = PI - KEYHOLE_GAP;
        let f = |v: Complex64| den.principal(v);
        let mut winding = 0.0;
        winding += phase_change(&|th: f64| f(Complex64::from_polar(big_r, th)), -edge, edge);
        let (l_eps, l_r) = (KEYHOLE_EPS.ln(), big_r.ln());
        winding += phase_change(
            &|x: f64| f(Complex64::from_polar(x.exp(), edge)),
            l_r,
            l_eps,
        );
        winding += phase_change(
            &|th: f64| f(Complex64::from_polar(KEYHOLE_EPS, th)),
            edge,
            -edge,
        );
        winding += phase_change(
            &|x: f64| f(Complex64::from_polar(x.exp(), -edge)),
            l_eps,
            l_r,
        );
        let count = (winding / (2.0 * PI)).round();
        if (winding / (2.0 * PI) - count).abs() > 1e-3 || count < 0.0 {
            return Err(Error::RootFinding(format!(
                "argument-principle count is not an integer: {}",
                winding / (2.0 * PI)
            )));
        }
        let count = count as usize;
        let inside = roots
            .iter()
            .filter(|v| v.arg().abs() < edge && v.norm() > KEYHOLE_EPS && v.norm() < big_r)
            .count();
        if inside != count {
            return Err(Error::RootFinding(format!(
                "found {inside} zeros of the denominator but the argument principle counts {count}"
            )));
        }
        Ok(roots)
    }

    pub fn poles(&self) -> Vec<PoleTerm> {
        self.poles
            .iter()
            .map(|&(v, res)| PoleTerm {
                location: v * self.width,
                residue: res,
            })
            .collect()
    }

    /// `g(v)` on one edge of the cut, `v = −r`, `v^α = r^α e^{±iπα}`.
    fn edge_value(&self, r: f64, sign: f64) -> Complex64 {
        let al = self.den.k.alpha;
        let v = c(-r, 0.0);
        let removable = if sign > 0.0 {
            self.removable_upper
        } else {
            self.removable_lower
        };
        if removable && (r - 1.0).abs() < REMOVABLE_RADIUS {
            // (v² − 1)/D(v) with both vanishing at v₀ = −1: divide out h = v − v₀
            let v0 = c(-1.0, 0.0);
            let va0 = Complex64::from_polar(1.0, sign * PI * al);
            let h = v - v0;
            let num = 2.0 * v0 + h;
            let den = self.den.d1(v0, va0)
                + self.den.d2(v0, va0) * h / 2.0
                + self.den.d3(v0, va0) * h * h / 6.0;
            return num / den;
        }
        let va = Complex64::from_polar(r.powf(al), sign * PI * al);
        (v * v - 1.0) / self.den.eval(v, va)
    }

    fn pole_sum(&self, s: f64) -> (Complex64, f64) {
        let mut sum = c(0.0, 0.0);
        let mut err = 0.0;
        for &(v, res) in &self.poles {
            let term = res * (v * s).exp();
            sum += term;
            err += 16.0 * f64::EPSILON * term.norm() * (1.0 + v.norm() * s);
        }
        (sum, err)
    }

    /// Pole and continuum parts of `G(t)` separately.
    pub fn decompose(&self, t: f64) -> Result<LaplaceParts> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::LaplaceInversion {
                t,
                reason: "time must be finite and >= 0".into(),
            });
        }
        let s = self.width * t;
        let (pole_part, pole_error) = self.pole_sum(s);
        let scale = if s > 1.0 { 1.0 / s } else { 1.0 };
        let est = quad::exp_sinh(
            |r| {
                let jump = self.edge_value(r, -1.0) - self.edge_value(r, 1.0);
                jump * (-r * s).exp() / c(0.0, 2.0 * PI)
            },
            scale,
            self.tol,
            11,
        )
        .map_err(|e| Error::LaplaceInversion {
            t,
            reason: e.to_string(),
        })?;
        Ok(LaplaceParts {
            t,
            pole_part,
            continuum: est.value,
            continuum_error: est.error,
            pole_error,
        })
    }

    pub fn invert(&self, t: f64) -> Result<GSample> {
        let parts = self.decompose(t)?;
        Ok(GSample::new(
            t,
            parts.total(),
            parts.error(),
            Method::Laplace,
        ))
    }
}

/// One-shot inversion at time `t`.
pub fn laplace_invert(params: &ReservoirParams, t: f64) -> Result<GSample> {
    LaplaceInverter::new(params)?.invert(t)
}
