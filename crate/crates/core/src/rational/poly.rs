//! Dense complex polynomials, coefficients in ascending order.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Coeffs = Vec<Complex64>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `p(z)` and its first `nd` derivatives, by repeated synthetic division.
pub fn eval_derivs(p: &[Complex64], z: Complex64, nd: usize) -> Vec<Complex64> {
    let mut out = vec![zero(); nd + 1];
    if p.is_empty() {
        return out;
    }
    for &c in p.iter().rev() {
        for j in (1..=nd).rev() {
            out[j] = out[j] * z + out[j - 1];
        }
        out[0] = out[0] * z + c;
    }
    // out[j] now holds p^{(j)}(z)/j!
    let mut fact = 1.0;
    for (j, v) in out.iter_mut().enumerate().skip(1) {
        fact *= j as f64;
        *v *= fact;
    }
    out
}

pub fn eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(zero(), |acc, &c| acc * z + c)
}

/// `Σ |c_i| i!/(i−j)! |z|^(i−j)`: the natural scale of `p^{(j)}(z)`.
pub fn derivative_scale(p: &[Complex64], z: Complex64, j: usize) -> f64 {
    let r = z.norm();
    p.iter()
        .enumerate()
        .skip(j)
        .map(|(i, c)| {
            let falling: f64 = ((i - j + 1)..=i).map(|x| x as f64).product();
            c.norm() * falling * r.powi((i - j) as i32)
        })
        .sum()
}

pub fn derivative(p: &[Complex64]) -> Coeffs {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Coeffs {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Monic polynomial `∏ (z − r)^m`.
pub fn from_roots(roots: &[(Complex64, usize)]) -> Coeffs {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for &(r, m) in roots {
        for _ in 0..m {
            p = mul(&p, &[-r, Complex64::new(1.0, 0.0)]);
        }
    }
    p
}

/// Coefficients of `h ↦ p(z0 + h)`.
pub fn taylor_shift(p: &[Complex64], z0: Complex64) -> Coeffs {
    let n = p.len();
    let mut c = p.to_vec();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let add = c[j + 1] * z0;
            c[j] += add;
        }
    }
    c
}

/// First `n` Taylor coefficients of `a(h)/b(h)` from those of `a` and `b`.
pub fn series_div(a: &[Complex64], b: &[Complex64], n: usize) -> Coeffs {
    let mut q = vec![zero(); n];
    for i in 0..n {
        let mut s = a.get(i).copied().unwrap_or_else(zero);
        for j in 1..=i {
            if let Some(&bj) = b.get(j) {
                s -= bj * q[i - j];
            }
        }
        q[i] = s / b[0];
    }
    q
}

/// All roots of `p` (degree ≥ 1) by Aberth–Ehrlich simultaneous iteration.
pub fn aberth(p: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = p.len().saturating_sub(1);
    if n == 0 || p[n] == zero() {
        return Err(Error::RootFinding(
            "polynomial must have degree >= 1 with nonzero leading coefficient".into(),
        ));
    }
    let lead = p[n];
    let monic: Coeffs = p.iter().map(|&c| c / lead).collect();
    let dp = derivative(&monic);
    // Fujiwara bound on root moduli
    let bound = (0..n)
        .map(|i| {
            let k = n - i;
            let v = monic[i].norm();
            if i == 0 {
                (v / 2.0).powf(1.0 / k as f64)
            } else {
                v.powf(1.0 / k as f64)
            }
        })
        .fold(0.0f64, f64::max)
        * 2.0;
    let r0 = 0.5 * bound.max(1e-300);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r0, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..2000 {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let pv = eval(&monic, z[i]);
            if pv == zero() {
                done[i] = true;
                continue;
            }
            let ratio = pv / eval(&dp, z[i]);
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * s);
            if !w.is_finite() {
                continue;
            }
            z[i] -= w;
            if w.norm() <= 2.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            return Ok(z);
        }
    }
    // Aberth converges only linearly onto multiple roots; accept the iterate
    // and leave the accuracy decision to clustering and polishing.
    Ok(z)
}
