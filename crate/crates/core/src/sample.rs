//! One evaluation of the survival amplitude `G(t)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// The evaluation path that produced a [`GSample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    StarSeries,
    Rational,
    Asymptotic,
    Volterra,
    Laplace,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Series,
        Method::StarSeries,
        Method::Rational,
        Method::Asymptotic,
        Method::Volterra,
        Method::Laplace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::StarSeries => "star_series",
            Method::Rational => "rational",
            Method::Asymptotic => "asymptotic",
            Method::Volterra => "volterra",
            Method::Laplace => "laplace",
        }
    }

    /// Accepts the tag names plus `star` as a short form of `star_series`.
    pub fn parse(s: &str) -> Option<Method> {
        match s.trim() {
            "star" => Some(Method::StarSeries),
            other => Method::ALL.into_iter().find(|m| m.as_str() == other),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `G(t)` with an absolute error bound and the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GSample {
    pub t: f64,
    pub value: Complex64,
    pub error_bound: f64,
    pub method: Method,
}

impl GSample {
    pub fn new(t: f64, value: Complex64, error_bound: f64, method: Method) -> Self {
        debug_assert!(error_bound >= 0.0);
        Self {
            t,
            value,
            error_bound,
            method,
        }
    }
}
