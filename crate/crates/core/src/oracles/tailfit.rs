//! Power-law fits `|y| ≈ amplitude · t^exponent` in log–log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest max-abs log residual accepted by [`fit_tail_exponent`].
pub const MAX_LOG_RESIDUAL: f64 = 0.05;
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub fit_window: (f64, f64),
    /// Max absolute deviation of `ln y` from the fitted line.
    pub residual: f64,
}

/// Least-squares line through `(ln t, ln y)` without the residual gate.
pub fn least_squares_loglog(samples: &[(f64, f64)]) -> Result<TailFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InvalidConfig {
            field: "samples",
            reason: format!("need at least {MIN_SAMPLES} samples, got {}", samples.len()),
        });
    }
    if let Some(&(t, y)) = samples
        .iter()
        .find(|&&(t, y)| !(t > 0.0 && y > 0.0 && t.is_finite() && y.is_finite()))
    {
        return Err(Error::InvalidConfig {
            field: "samples",
            reason: format!("times and magnitudes must be finite and > 0, got ({t}, {y})"),
        });
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidGrid(
            "sample times must be strictly increasing".into(),
        ));
    }
    let n = samples.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().map(|&(t, y)| (t.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(TailFit {
        exponent: slope,
        amplitude: intercept.exp(),
        fit_window: (samples[0].0, samples[samples.len() - 1].0),
        residual,
    })
}

/// Fits a power law and rejects windows that are not in the power-law regime.
pub fn fit_tail_exponent(samples: &[(f64, f64)]) -> Result<TailFit> {
    let fit = least_squares_loglog(samples)?;
    if fit.residual > MAX_LOG_RESIDUAL {
        return Err(Error::TailFitRejected {
            residual: fit.residual,
            limit: MAX_LOG_RESIDUAL,
        });
    }
    Ok(fit)
}
