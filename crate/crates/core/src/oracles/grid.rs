use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the points of a [`TimeGrid`] are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform { step: f64 },
    Log,
    Explicit,
}

/// Strictly increasing, nonnegative sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl TimeGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        Self::checked(points, Spacing::Explicit)
    }

    /// `0, h, 2h, ..., n h`.
    pub fn uniform(step: f64, n: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be > 0, got {step}")));
        }
        let points = (0..=n).map(|k| k as f64 * step).collect();
        Self::checked(points, Spacing::Uniform { step })
    }

    /// `n` points geometrically spaced from `t_min` to `t_max` inclusive.
    pub fn log(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "log grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(
                "log grid needs at least 2 points".into(),
            ));
        }
        let (l0, l1) = (t_min.ln(), t_max.ln());
        let mut points: Vec<f64> = (0..n)
            .map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp())
            .collect();
        points[0] = t_min;
        points[n - 1] = t_max;
        Self::checked(points, Spacing::Log)
    }

    fn checked(points: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if !(points[0] >= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "first point {} is negative",
                points[0]
            )));
        }
        if let Some(w) = points
            .windows(2)
            .find(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { points, spacing })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
