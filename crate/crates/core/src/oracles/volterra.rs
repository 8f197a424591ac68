//! Direct solution of `Ġ = −(f ∗ G)`, `G(0) = 1`.
//!
//! `G` is interpolated by hat functions on a uniform grid, so the memory term
//! at `t_n` becomes `Σ_j W_{n−j} G_j` with weights `∫ f(τ)·hat(τ) dτ`
//! computed once per step size (product integration). The derivative is
//! advanced with the trapezoidal rule. Both pieces are second order; the
//! solver runs at `h` and `h/2` and uses the difference as a Richardson
//! error estimate.
//!
//! The reservoir kernel `f(τ) = ∫ Λ(x) e^{−ixτ} dx` has `f(τ) − f(0) ~ τ^(1−α)`,
//! so interpolating `f` itself would lose order. Instead the hat moments are
//! taken inside the spectral integral, where they are elementary functions of
//! `c = −ixh`.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;
use crate::reservoir::ReservoirConfig;
use crate::sample::{GSample, Method};

use super::grid::{Spacing, TimeGrid};

/// Default Richardson tolerance for [`volterra_solve`].
pub const DEFAULT_TOLERANCE: f64 = 1e-5;
const MIN_LEVEL: u32 = 6;
const MAX_LEVEL: u32 = 10;
/// Per-weight quadrature tolerance relative to `h·(1 + Σ|Λ|)`.
const WEIGHT_REL_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `∫₀¹ (1−s) e^{cs} ds`.
pub fn psi0(z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        let mut term = c(0.5, 0.0);
        let mut sum = term;
        for k in 1..30 {
            term *= z / (k as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// `∫₀¹ s e^{cs} ds`.
pub fn psi1(z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        // Σ c^k (k+1)/(k+2)!
        let mut fact = c(0.5, 0.0);
        let mut sum = fact;
        for k in 1..30 {
            fact *= z / (k as f64 + 2.0);
            sum += fact * (k as f64 + 1.0);
        }
        sum
    } else {
        (z.exp() * (z - 1.0) + 1.0) / (z * z)
    }
}

/// Hat-function moments of a kernel for one step size.
///
/// `interior[m] = ∫ f(τ) hat(τ − m h) dτ` for `m ≥ 1` (a full hat), and
/// `interior[0]` the half hat `∫₀^h f(τ)(1 − τ/h) dτ`;
/// `end[n] = ∫_{(n−1)h}^{nh} f(τ)(τ − (n−1)h)/h dτ`, the weight of `G(0)`.
#[derive(Debug, Clone)]
pub struct HatWeights {
    pub h: f64,
    pub interior: Vec<Complex64>,
    pub end: Vec<Complex64>,
    /// Largest estimated absolute quadrature error of any weight.
    pub error: f64,
}

/// A memory kernel for the convolution equation.
pub trait ConvolutionKernel: Sync {
    /// Weights for step `h` and steps `1..=n`.
    fn hat_weights(&self, h: f64, n: usize) -> Result<HatWeights>;
}

/// Weights for `f(τ) = Σ_i s_i e^{λ_i τ}` given as pairs `(s_i, λ_i)`.
fn exponential_weights(terms: &[(Complex64, Complex64)], h: f64, n: usize) -> HatWeights {
    let mut interior = vec![c(0.0, 0.0); n + 1];
    let mut end = vec![c(0.0, 0.0); n + 1];
    for &(s, lambda) in terms {
        let z = lambda * h;
        let (p0, p1) = (psi0(z), psi1(z));
        let step = z.exp();
        interior[0] += s * h * p0;
        // e^{z(m−1)}
        let mut prev = c(1.0, 0.0);
        for m in 1..=n {
            let cur = prev * step;
            end[m] += s * h * prev * p1;
            interior[m] += s * h * (prev * p1 + cur * p0);
            prev = cur;
        }
    }
    HatWeights {
        h,
        interior,
        end,
        error: 0.0,
    }
}

/// `f(τ) = (W²/2) e^{−γτ}`: the Lorentzian (damped Jaynes-Cummings) kernel,
/// with transfer function `(u+γ)/(u² + γu + W²/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianKernel {
    pub coupling: f64,
    pub gamma: f64,
}

impl LorentzianKernel {
    pub fn new(coupling: f64, gamma: f64) -> Self {
        Self { coupling, gamma }
    }

    /// `G(t) = [(s₊+γ)e^{s₊t} − (s₋+γ)e^{s₋t}]/(s₊ − s₋)` with
    /// `s± = (−γ ± √(γ² − 2W²))/2`.
    pub fn closed_form(&self, t: f64) -> Complex64 {
        let g = self.gamma;
        let disc = c(g * g - 2.0 * self.coupling * self.coupling, 0.0).sqrt();
        let sp = (-g + disc) / 2.0;
        let sm = (-g - disc) / 2.0;
        ((sp + g) * (sp * t).exp() - (sm + g) * (sm * t).exp()) / (sp - sm)
    }
}

impl ConvolutionKernel for LorentzianKernel {
    fn hat_weights(&self, h: f64, n: usize) -> Result<HatWeights> {
        let s = c(0.5 * self.coupling * self.coupling, 0.0);
        Ok(exponential_weights(&[(s, c(-self.gamma, 0.0))], h, n))
    }
}

/// The reservoir kernel, integrated over `x` on the ray `x = r e^{−iπ/4}`
/// where every `e^{−ixτ}` decays.
#[derive(Debug, Clone)]
pub struct ReservoirKernel {
    cfg: ReservoirConfig,
    scale: f64,
}

struct NodeData {
    x: Complex64,
    /// quadrature weight × Jacobian × Λ(x) × direction
    wl: Complex64,
    coarse: bool,
}

impl ReservoirKernel {
    pub fn new(cfg: &ReservoirConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: *cfg,
            scale: cfg.width,
        })
    }

    fn nodes(&self, level: u32) -> Vec<NodeData> {
        let dir = Complex64::from_polar(1.0, -FRAC_PI_4);
        quad::exp_sinh_nodes(self.scale, level)
            .into_iter()
            .map(|nd| {
                let x = dir * nd.x;
                NodeData {
                    x,
                    wl: self.cfg.profile_complex(x) * dir * nd.weight,
                    coarse: nd.coarse,
                }
            })
            .collect()
    }

    fn weights_at_level(&self, h: f64, n: usize, level: u32) -> (HatWeights, f64) {
        let nodes = self.nodes(level);
        let k = nodes.len();
        let mut p0 = Vec::with_capacity(k);
        let mut p1 = Vec::with_capacity(k);
        let mut step = Vec::with_capacity(k);
        let mut prev = vec![c(1.0, 0.0); k];
        for nd in &nodes {
            let z = c(0.0, -h) * nd.x;
            p0.push(nd.wl * psi0(z) * h);
            p1.push(nd.wl * psi1(z) * h);
            step.push(z.exp());
        }
        let mut interior = vec![c(0.0, 0.0); n + 1];
        let mut end = vec![c(0.0, 0.0); n + 1];
        let mut err = 0.0f64;
        let (fine0, coarse0) = nodes
            .iter()
            .zip(&p0)
            .fold((c(0.0, 0.0), c(0.0, 0.0)), |(f, cs), (nd, v)| {
                (f + v, if nd.coarse { cs + 2.0 * v } else { cs })
            });
        interior[0] = fine0;
        err = err.max((fine0 - coarse0).norm());
        for m in 1..=n {
            let (mut e_f, mut e_c) = (c(0.0, 0.0), c(0.0, 0.0));
            let (mut a_f, mut a_c) = (c(0.0, 0.0), c(0.0, 0.0));
            for i in 0..k {
                let cur = prev[i] * step[i];
                let b = prev[i] * p1[i];
                let a = cur * p0[i];
                e_f += b;
                a_f += a;
                if nodes[i].coarse {
                    e_c += 2.0 * b;
                    a_c += 2.0 * a;
                }
                prev[i] = cur;
            }
            end[m] = e_f;
            interior[m] = e_f + a_f;
            err = err
                .max((e_f - e_c).norm())
                .max((e_f + a_f - e_c - a_c).norm());
        }
        (
            HatWeights {
                h,
                interior,
                end,
                error: err,
            },
            err,
        )
    }
}

impl ConvolutionKernel for ReservoirKernel {
    fn hat_weights(&self, h: f64, n: usize) -> Result<HatWeights> {
        let mass: f64 = crate::reservoir::total_weight_closed_form(&self.cfg);
        let target = WEIGHT_REL_TOL * h * (1.0 + mass);
        let mut last = f64::INFINITY;
        for level in MIN_LEVEL..=MAX_LEVEL {
            let (w, err) = self.weights_at_level(h, n, level);
            if err <= target {
                return Ok(w);
            }
            last = err;
        }
        Err(Error::QuadratureNotConverged {
            context: "volterra hat weights",
            estimate: last,
            target,
        })
    }
}

/// Marches the convolution equation with fixed weights.
fn march(w: &HatWeights, n: usize) -> Vec<Complex64> {
    let h = w.h;
    let mut g = Vec::with_capacity(n + 1);
    g.push(c(1.0, 0.0));
    let mut deriv = c(0.0, 0.0);
    let denom = 1.0 + 0.5 * h * w.interior[0];
    for step in 1..=n {
        let mut conv = w.end[step] * g[0];
        for j in 1..step {
            conv += w.interior[step - j] * g[j];
        }
        let next = (g[step - 1] + 0.5 * h * deriv - 0.5 * h * conv) / denom;
        deriv = -(w.interior[0] * next + conv);
        g.push(next);
    }
    g
}

/// Product-integration solver with a Richardson step check.
#[derive(Debug, Clone)]
pub struct VolterraSolver<K> {
    kernel: K,
    tol: f64,
}

impl<K: ConvolutionKernel> VolterraSolver<K> {
    pub fn new(kernel: K) -> Self {
        Self {
            kernel,
            tol: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Plain solution `G(kh)`, `k = 0..=n`, without the Richardson step.
    pub fn march(&self, h: f64, n: usize) -> Result<Vec<Complex64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be > 0, got {h}")));
        }
        let w = self.kernel.hat_weights(h, n)?;
        Ok(march(&w, n))
    }

    /// `G` on a uniform grid starting at 0. The step is the grid spacing; the
    /// returned values are Richardson-extrapolated from `h` and `h/2`, with
    /// the estimated error of the `h/2` solution as the bound.
    pub fn solve(&self, grid: &TimeGrid) -> Result<Vec<GSample>> {
        let pts = grid.points();
        let h = match grid.spacing() {
            Spacing::Uniform { step } if pts[0] == 0.0 => step,
            _ if pts.len() == 1 && pts[0] == 0.0 => {
                return Ok(vec![GSample::new(0.0, c(1.0, 0.0), 0.0, Method::Volterra)]);
            }
            _ => {
                return Err(Error::InvalidGrid(
                    "volterra_solve needs a uniform grid starting at t = 0".into(),
                ))
            }
        };
        let n = pts.len() - 1;
        let coarse = self.march(h, n)?;
        let fine = self.march(0.5 * h, 2 * n)?;
        let mut out = Vec::with_capacity(n + 1);
        let mut worst = 0.0f64;
        for (k, &t) in pts.iter().enumerate() {
            let gf = fine[2 * k];
            let diff = gf - coarse[k];
            let est = diff.norm() / 3.0;
            worst = worst.max(est);
            let value = if k == 0 { c(1.0, 0.0) } else { gf + diff / 3.0 };
            out.push(GSample::new(t, value, est, Method::Volterra));
        }
        if worst > self.tol {
            return Err(Error::StepRejected {
                estimate: worst,
                tol: self.tol,
            });
        }
        Ok(out)
    }
}

/// `G` for the reservoir on a uniform grid starting at 0.
pub fn volterra_solve(cfg: &ReservoirConfig, grid: &TimeGrid) -> Result<Vec<GSample>> {
    VolterraSolver::new(ReservoirKernel::new(cfg)?).solve(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_series_and_closed_forms_agree_at_the_switch() {
        for &z in &[c(0.999, 0.0), c(0.0, -0.999), c(-0.7, -0.7)] {
            let z2 = z * (1.0 + 2e-3);
            let d0 = (psi0(z) - (z2.exp() - 1.0 - z2) / (z2 * z2)).norm();
            let d1 = (psi1(z) - (z2.exp() * (z2 - 1.0) + 1.0) / (z2 * z2)).norm();
            assert!(d0 < 2e-3 && d1 < 2e-3);
        }
        assert!((psi0(c(0.0, 0.0)) - 0.5).norm() < 1e-16);
        assert!((psi1(c(0.0, 0.0)) - 0.5).norm() < 1e-16);
        let z = c(0.3, -0.4);
        assert!((psi0(z) - (z.exp() - 1.0 - z) / (z * z)).norm() < 1e-15);
        assert!((psi1(z) - (z.exp() * (z - 1.0) + 1.0) / (z * z)).norm() < 1e-15);
    }

    #[test]
    fn reservoir_weights_match_correlation_function() {
        // for small h, interior[m]/h ≈ f(mh)
        let cfg = ReservoirConfig::new(1.0, 1.0, 0.5, 1.0).unwrap();
        let k = ReservoirKernel::new(&cfg).unwrap();
        let h = 1e-3;
        let w = k.hat_weights(h, 2000).unwrap();
        for &m in &[500usize, 2000] {
            let f = crate::reservoir::correlation_function(m as f64 * h, &cfg, 1e-12)
                .unwrap()
                .value;
            assert!(
                (w.interior[m] / h - f).norm() < 1e-5,
                "{m}: {} vs {f}",
                w.interior[m] / h
            );
        }
    }

    #[test]
    fn exponential_weights_are_exact_moments() {
        let lam = c(-0.8, 0.3);
        let w = exponential_weights(&[(c(1.0, 0.0), lam)], 0.1, 5);
        let moment = |a: f64, b: f64, g: &dyn Fn(f64) -> f64| {
            quad::tanh_sinh(
                |t| (lam * t).exp() * g(t),
                a,
                b,
                quad::Tolerance::abs(1e-15),
                10,
            )
            .unwrap()
            .value
        };
        let h0 = moment(0.0, 0.1, &|t| 1.0 - t / 0.1);
        assert!((w.interior[0] - h0).norm() < 1e-15);
        let h3 =
            moment(0.2, 0.3, &|t| (t - 0.2) / 0.1) + moment(0.3, 0.4, &|t| 1.0 - (t - 0.3) / 0.1);
        assert!((w.interior[3] - h3).norm() < 1e-15);
        let e4 = moment(0.3, 0.4, &|t| (t - 0.3) / 0.1);
        assert!((w.end[4] - e4).norm() < 1e-15);
    }
}
