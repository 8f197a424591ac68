//! The rational-exponent path, `α = p/q`.
//!
//! With `u = z^q` on the principal sheet, the transfer function becomes the
//! rational function `(z^(2q) − a²)/Q(z)` with
//! `Q(z) = z^(3q) + z₁ z^q + z_α z^p + z₀`. Its partial-fraction expansion
//!
//! ```text
//! Σ_l Σ_k b_{l,k} (m_l−k)! / (z − ζ_l)^(m_l−k+1)
//! ```
//!
//! turns the inverse Laplace transform into a cut integral whose integrand
//! is the `η`-integral of
//!
//! ```text
//! Φ(η, ξ) = (1/π) Σ b_{l,k} η^(m_l−k) sin(η ξ^(1/q) sin(π/q)) e^{η(ζ_l − cos(π/q) ξ^(1/q))}
//! ```
//!
//! That `η`-integral only converges when every `ζ_l` has negative real part,
//! which never holds here: the pole of the transfer function on the positive
//! imaginary axis maps to a root inside the principal sector
//! `|arg ζ| < π/q`. [`RationalEvaluator`] therefore uses the closed form of the
//! `η`-integral (valid by analytic continuation), integrates over `ξ`
//! numerically and adds the residues of the principal-sector roots.

pub mod poly;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::reservoir::{ReservoirConfig, ReservoirParams};
use crate::sample::{GSample, Method};

/// Roots closer than this, relative to the largest root modulus, are one root.
pub const CLUSTER_RADIUS: f64 = 1e-7;
/// Wider radius inside which a group of roots is merged when its centroid
/// passes the multiplicity test.
pub const CLUSTER_PROBE_RADIUS: f64 = 1e-3;
/// Scaled residual gate for roots and, at multiple roots, their derivatives.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Relative root separation below which residue derivatives are untrusted.
pub const CONDITIONING_LIMIT: f64 = 1e-6;
/// Angular guard around the sector boundary `|arg ζ| = π/q`.
const SECTOR_GUARD: f64 = 1e-9;

pub const DEFAULT_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-14,
    rel: 1e-11,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// `α = p/q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalOrder {
    pub p: u32,
    pub q: u32,
}

impl RationalOrder {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::InvalidConfig {
                field: "alpha",
                reason: format!("need 0 < p < q, got p = {p}, q = {q}"),
            });
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidConfig {
                field: "alpha",
                reason: format!("p = {p} and q = {q} are not coprime"),
            });
        }
        Ok(Self { p, q })
    }

    /// The fraction with denominator at most `max_q` equal to `alpha` within
    /// `1e−12`, if any.
    pub fn from_alpha(alpha: f64, max_q: u32) -> Option<Self> {
        (2..=max_q).find_map(|q| {
            let p = (alpha * q as f64).round();
            if p >= 1.0 && (p / q as f64 - alpha).abs() <= 1e-12 {
                Self::new(p as u32, q).ok()
            } else {
                None
            }
        })
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Degree `3q` of `Q`.
    pub fn degree(&self) -> usize {
        3 * self.q as usize
    }
}

/// Ascending coefficients of `Q(z) = z^(3q) + z₁ z^q + z_α z^p + z₀`.
pub fn build_q_polynomial(ord: RationalOrder, params: &ReservoirParams) -> Result<Vec<Complex64>> {
    if (params.alpha - ord.alpha()).abs() > 1e-12 {
        return Err(Error::InvalidConfig {
            field: "alpha",
            reason: format!(
                "alpha = {} does not equal {}/{}",
                params.alpha, ord.p, ord.q
            ),
        });
    }
    let mut coeffs = vec![c(0.0, 0.0); ord.degree() + 1];
    coeffs[ord.degree()] = c(1.0, 0.0);
    coeffs[ord.q as usize] += params.z1;
    coeffs[ord.p as usize] += params.z_alpha;
    coeffs[0] += params.z0;
    Ok(coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub zeta: Complex64,
    pub multiplicity: usize,
    /// Largest scaled residual `|Q^{(j)}(ζ)| / Σ|c_i| i!/(i−j)! |ζ|^(i−j)`
    /// over `j < multiplicity`.
    pub residual: f64,
}

/// The roots of a polynomial with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub degree: usize,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.roots.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// Degree accounting holds and every residual is within `gate`.
    pub fn is_healthy(&self, gate: f64) -> bool {
        self.total_multiplicity() == self.degree && self.max_residual() <= gate
    }

    /// `∏ (−ζ_l)^(m_l)`, the constant term of the monic polynomial.
    pub fn vieta_constant(&self) -> Complex64 {
        self.roots
            .iter()
            .map(|r| (-r.zeta).powi(r.multiplicity as i32))
            .product()
    }

    /// `Σ m_l ζ_l`, minus the `z^(n−1)` coefficient of the monic polynomial.
    pub fn vieta_sum(&self) -> Complex64 {
        self.roots
            .iter()
            .map(|r| r.zeta * r.multiplicity as f64)
            .sum()
    }
}

fn scaled_residual(p: &[Complex64], z: Complex64, m: usize) -> f64 {
    let d = poly::eval_derivs(p, z, m.saturating_sub(1));
    (0..m)
        .map(|j| {
            let s = poly::derivative_scale(p, z, j);
            if s == 0.0 {
                0.0
            } else {
                d[j].norm() / s
            }
        })
        .fold(0.0, f64::max)
}

/// Newton on `p^{(m−1)}` from the cluster centroid; keeps the best iterate.
fn polish(p: &[Complex64], start: Complex64, m: usize) -> (Complex64, f64) {
    let mut z = start;
    let mut best = (z, scaled_residual(p, z, m));
    for _ in 0..50 {
        let d = poly::eval_derivs(p, z, m);
        if d[m] == c(0.0, 0.0) {
            break;
        }
        let step = d[m - 1] / d[m];
        if !step.is_finite() {
            break;
        }
        z -= step;
        let r = scaled_residual(p, z, m);
        if r < best.1 {
            best = (z, r);
        }
        if step.norm() <= 4.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    best
}

struct Cluster {
    members: Vec<Complex64>,
}

impl Cluster {
    fn centroid(&self) -> Complex64 {
        self.members.iter().sum::<Complex64>() / self.members.len() as f64
    }
}

/// All roots of a monic polynomial, clustered into multiple roots and
/// polished. Fails if any residual stays above [`RESIDUAL_TOLERANCE`].
pub fn find_roots(coeffs: &[Complex64]) -> Result<RootSet> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 || coeffs[degree] != c(1.0, 0.0) {
        return Err(Error::RootFinding(
            "polynomial must be monic with degree >= 1".into(),
        ));
    }
    let raw = poly::aberth(coeffs)?;
    let big_r = raw
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    // stage one: merge roots within the clustering radius
    let mut clusters: Vec<Cluster> = Vec::new();
    for z in raw {
        match clusters.iter_mut().find(|cl| {
            cl.members
                .iter()
                .any(|w| (w - z).norm() <= CLUSTER_RADIUS * big_r)
        }) {
            Some(cl) => cl.members.push(z),
            None => clusters.push(Cluster { members: vec![z] }),
        }
    }
    // stage two: multiple roots scatter by ~ε^(1/m); merge nearby groups
    // whose centroid satisfies the derivative residuals of the combined order
    loop {
        let mut merged = false;
        'outer: for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let (ci, cj) = (clusters[i].centroid(), clusters[j].centroid());
                if (ci - cj).norm() > CLUSTER_PROBE_RADIUS * big_r {
                    continue;
                }
                let m = clusters[i].members.len() + clusters[j].members.len();
                let mut all = clusters[i].members.clone();
                all.extend_from_slice(&clusters[j].members);
                let trial = Cluster { members: all };
                let (_, res) = polish(coeffs, trial.centroid(), m);
                if res <= RESIDUAL_TOLERANCE {
                    clusters[i] = trial;
                    clusters.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }

    let mut roots = Vec::with_capacity(clusters.len());
    for cl in &clusters {
        let m = cl.members.len();
        let (zeta, residual) = polish(coeffs, cl.centroid(), m);
        if residual > RESIDUAL_TOLERANCE {
            return Err(Error::RootFinding(format!(
                "root {zeta} (multiplicity {m}) has scaled residual {residual:e} > {RESIDUAL_TOLERANCE:e}"
            )));
        }
        roots.push(Root {
            zeta,
            multiplicity: m,
            residual,
        });
    }
    roots.sort_by(|x, y| {
        x.zeta
            .arg()
            .partial_cmp(&y.zeta.arg())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                x.zeta
                    .norm()
                    .partial_cmp(&y.zeta.norm())
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    Ok(RootSet { roots, degree })
}

/// Ascending coefficients of `z^(2q) − a²`.
fn numerator(ord: RationalOrder, width: f64) -> Vec<Complex64> {
    let mut n = vec![c(0.0, 0.0); 2 * ord.q as usize + 1];
    n[0] = c(-width * width, 0.0);
    n[2 * ord.q as usize] = c(1.0, 0.0);
    n
}

/// `b_{l,k}` for `k = 1..m_l`, indexed `[l][k−1]`.
///
/// Simple roots use `(ζ^(2q) − a²)/Q'(ζ)` with `Q` rebuilt from the root set;
/// multiple roots use Taylor coefficients of the numerator over the cofactor
/// `∏_{j≠l}(z − ζ_j)^(m_j)`.
pub fn residue_coefficients(
    rs: &RootSet,
    ord: RationalOrder,
    cfg: &ReservoirConfig,
) -> Result<Vec<Vec<Complex64>>> {
    let num = numerator(ord, cfg.width);
    let big_r = rs.roots.iter().map(|r| r.zeta.norm()).fold(0.0, f64::max);
    let mut table = Vec::with_capacity(rs.roots.len());
    for (l, root) in rs.roots.iter().enumerate() {
        let others: Vec<(Complex64, usize)> = rs
            .roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != l)
            .map(|(_, r)| (r.zeta, r.multiplicity))
            .collect();
        let m = root.multiplicity;
        if m > 1 {
            let sep = others
                .iter()
                .map(|(z, _)| (z - root.zeta).norm())
                .fold(f64::INFINITY, f64::min);
            if sep < CONDITIONING_LIMIT * big_r {
                return Err(Error::IllConditioned {
                    index: l,
                    reason: format!("nearest other root at distance {sep:e}"),
                });
            }
        }
        let cof = poly::taylor_shift(&poly::from_roots(&others), root.zeta);
        if cof[0].norm() == 0.0 {
            return Err(Error::IllConditioned {
                index: l,
                reason: "cofactor vanishes at the root".into(),
            });
        }
        let top = poly::taylor_shift(&num, root.zeta);
        let taylor = poly::series_div(&top, &cof, m);
        let row: Vec<Complex64> = (1..=m).map(|k| taylor[k - 1] / factorial(m - k)).collect();
        table.push(row);
    }
    Ok(table)
}

/// `Σ_l Σ_k b_{l,k} (m_l−k)!/(z − ζ_l)^(m_l−k+1)`.
pub fn partial_fraction_eval(rs: &RootSet, table: &[Vec<Complex64>], z: Complex64) -> Complex64 {
    let mut sum = c(0.0, 0.0);
    for (root, row) in rs.roots.iter().zip(table) {
        let m = root.multiplicity;
        let d = z - root.zeta;
        for (k, &b) in (1..=m).zip(row) {
            let n = m - k;
            sum += b * factorial(n) / d.powi(n as i32 + 1);
        }
    }
    sum
}

/// `Φ(η, ξ)` summed over the given roots.
pub fn phi(
    rs: &RootSet,
    table: &[Vec<Complex64>],
    ord: RationalOrder,
    eta: f64,
    xi: f64,
) -> Complex64 {
    let q = ord.q as f64;
    let r = xi.powf(1.0 / q);
    let (sq, cq) = (PI / q).sin_cos();
    let wave = (eta * r * sq).sin();
    let mut sum = c(0.0, 0.0);
    for (root, row) in rs.roots.iter().zip(table) {
        let m = root.multiplicity;
        let env = (eta * (root.zeta - cq * r)).exp();
        for (k, &b) in (1..=m).zip(row) {
            sum += b * eta.powi((m - k) as i32) * env;
        }
    }
    sum * wave / PI
}

/// `∫₀^∞ Φ(η, ξ) dη` in closed form:
/// `(1/2πi) Σ b (m−k)! [(w₋ − ζ)^(−n−1) − (w₊ − ζ)^(−n−1)]`,
/// `w± = ξ^(1/q) e^(±iπ/q)`.
pub fn phi_eta_integral(
    rs: &RootSet,
    table: &[Vec<Complex64>],
    ord: RationalOrder,
    xi: f64,
) -> Complex64 {
    let q = ord.q as f64;
    let r = xi.powf(1.0 / q);
    let w_minus = Complex64::from_polar(r, -PI / q);
    let w_plus = Complex64::from_polar(r, PI / q);
    let mut sum = c(0.0, 0.0);
    for (root, row) in rs.roots.iter().zip(table) {
        let m = root.multiplicity;
        let (dm, dp) = (w_minus - root.zeta, w_plus - root.zeta);
        for (k, &b) in (1..=m).zip(row) {
            let n = (m - k) as i32;
            sum += b * factorial(m - k) * (dm.powi(-n - 1) - dp.powi(-n - 1));
        }
    }
    sum / c(0.0, 2.0 * PI)
}

/// Whether the literal double-integral representation converges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Applicability {
    pub literal_converges: bool,
    /// Roots with `Re ζ ≥ 0` (other than removable ones), for which the
    /// `η`-integrand grows at small `ξ`.
    pub offending_roots: Vec<Complex64>,
}

/// `ζ^q = ±a` with the numerator vanishing too: the edge points `u = ±a`,
/// where the transfer function is finite.
fn is_removable(zeta: Complex64, ord: RationalOrder, width: f64) -> bool {
    (zeta.powi(2 * ord.q as i32) - width * width).norm() <= 1e-7 * width * width
}

pub fn applicability(rs: &RootSet, ord: RationalOrder, cfg: &ReservoirConfig) -> Applicability {
    let offending_roots: Vec<Complex64> = rs
        .roots
        .iter()
        .filter(|r| !is_removable(r.zeta, ord, cfg.width) && r.zeta.re >= 0.0)
        .map(|r| r.zeta)
        .collect();
    Applicability {
        literal_converges: offending_roots.is_empty(),
        offending_roots,
    }
}

/// Principal-sector pole and cut contributions at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalParts {
    pub t: f64,
    pub pole_part: Complex64,
    pub continuum: Complex64,
    pub continuum_error: f64,
    pub pole_error: f64,
}

impl RationalParts {
    pub fn total(&self) -> Complex64 {
        self.pole_part + self.continuum
    }

    pub fn error(&self) -> f64 {
        self.continuum_error + self.pole_error
    }
}

#[derive(Debug, Clone)]
struct Term {
    zeta: Complex64,
    multiplicity: usize,
    b: Vec<Complex64>,
    /// In the principal sector: `ζ^q` is a pole of the transfer function.
    in_sector: bool,
}

/// Evaluates `G(t)` from a root set and residue table.
#[derive(Debug, Clone)]
pub struct RationalEvaluator {
    ord: RationalOrder,
    width: f64,
    terms: Vec<Term>,
    tol: Tolerance,
}

impl RationalEvaluator {
    /// Builds `Q`, its roots and residues for `params` (which must have
    /// `α = p/q`).
    pub fn new(params: &ReservoirParams, ord: RationalOrder) -> Result<Self> {
        let coeffs = build_q_polynomial(ord, params)?;
        let rs = find_roots(&coeffs)?;
        let cfg = params.config();
        let table = residue_coefficients(&rs, ord, &cfg)?;
        Self::from_parts(ord, &rs, &table, &cfg)
    }

    pub fn from_parts(
        ord: RationalOrder,
        rs: &RootSet,
        table: &[Vec<Complex64>],
        cfg: &ReservoirConfig,
    ) -> Result<Self> {
        let edge = PI / ord.q as f64;
        let mut terms = Vec::new();
        for (root, row) in rs.roots.iter().zip(table) {
            if is_removable(root.zeta, ord, cfg.width) {
                continue;
            }
            let arg = root.zeta.arg().abs();
            if (arg - edge).abs() <= SECTOR_GUARD {
                return Err(Error::Inapplicable(format!(
                    "root {} lies on the image of the branch cut",
                    root.zeta
                )));
            }
            terms.push(Term {
                zeta: root.zeta,
                multiplicity: root.multiplicity,
                b: row.clone(),
                in_sector: arg < edge,
            });
        }
        Ok(Self {
            ord,
            width: cfg.width,
            terms,
            tol: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    /// Poles `u = ζ^q` of the transfer function on the principal sheet.
    pub fn poles(&self) -> Vec<Complex64> {
        self.terms
            .iter()
            .filter(|t| t.in_sector)
            .map(|t| t.zeta.powi(self.ord.q as i32))
            .collect()
    }

    fn cut_integrand(&self, xi: f64) -> Complex64 {
        let q = self.ord.q as f64;
        let r = xi.powf(1.0 / q);
        let w_minus = Complex64::from_polar(r, -PI / q);
        let w_plus = Complex64::from_polar(r, PI / q);
        let mut sum = c(0.0, 0.0);
        for term in &self.terms {
            let m = term.multiplicity;
            let (dm, dp) = (w_minus - term.zeta, w_plus - term.zeta);
            for (k, &b) in (1..=m).zip(&term.b) {
                let n = (m - k) as i32;
                sum += b * factorial(m - k) * (dm.powi(-n - 1) - dp.powi(-n - 1));
            }
        }
        sum / c(0.0, 2.0 * PI)
    }

    fn pole_contribution(&self, term: &Term, t: f64) -> (Complex64, f64) {
        let q = self.ord.q as i32;
        let u = term.zeta.powi(q);
        if term.multiplicity == 1 {
            let v = term.b[0] * q as f64 * term.zeta.powi(q - 1) * (u * t).exp();
            return (v, 16.0 * f64::EPSILON * v.norm() * (1.0 + u.norm() * t));
        }
        // (1/2πi)∮ G̃(v) e^{vt} dv on a small circle around u, using only this
        // root's principal parts (the rest is analytic inside)
        let to_cut = if u.re >= 0.0 { u.norm() } else { u.im.abs() };
        let to_poles = self
            .terms
            .iter()
            .filter(|o| o.in_sector && o.zeta != term.zeta)
            .map(|o| (o.zeta.powi(q) - u).norm())
            .fold(f64::INFINITY, f64::min);
        let mut radius = 0.5 * to_cut.min(to_poles);
        if t > 0.0 {
            radius = radius.min(1.0 / t);
        }
        let n = 256;
        let m = term.multiplicity;
        let mut sum = c(0.0, 0.0);
        let mut mag = 0.0f64;
        for j in 0..n {
            let dv = Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64);
            let v = u + dv;
            let w = v.powf(1.0 / q as f64);
            let d = w - term.zeta;
            let mut g = c(0.0, 0.0);
            for (k, &b) in (1..=m).zip(&term.b) {
                let nn = (m - k) as i32;
                g += b * factorial(m - k) / d.powi(nn + 1);
            }
            let f = g * (v * t).exp() * dv;
            mag = mag.max(f.norm());
            sum += f;
        }
        let v = sum / n as f64;
        (v, 1e3 * f64::EPSILON * mag)
    }

    pub fn decompose(&self, t: f64) -> Result<RationalParts> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "t",
                reason: format!("rational path needs finite t > 0, got {t}"),
            });
        }
        let mut pole_part = c(0.0, 0.0);
        let mut pole_error = 0.0;
        for term in self.terms.iter().filter(|x| x.in_sector) {
            let (v, e) = self.pole_contribution(term, t);
            pole_part += v;
            pole_error += e;
        }
        let scale = (1.0 / t).min(self.width);
        let est = quad::exp_sinh(
            |xi| self.cut_integrand(xi) * (-xi * t).exp(),
            scale,
            self.tol,
            11,
        )?;
        Ok(RationalParts {
            t,
            pole_part,
            continuum: est.value,
            continuum_error: est.error,
            pole_error,
        })
    }

    pub fn evaluate(&self, t: f64) -> Result<GSample> {
        let parts = self.decompose(t)?;
        Ok(GSample::new(
            t,
            parts.total(),
            parts.error(),
            Method::Rational,
        ))
    }
}

/// `G(t)` on the rational path from a precomputed root set and residue table.
pub fn g_rational(
    t: f64,
    ord: RationalOrder,
    rs: &RootSet,
    table: &[Vec<Complex64>],
    cfg: &ReservoirConfig,
) -> Result<GSample> {
    RationalEvaluator::from_parts(ord, rs, table, cfg)?.evaluate(t)
}
