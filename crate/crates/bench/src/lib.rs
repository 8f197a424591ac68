//! Shared fixtures for the criterion benches.

use gapdecay_core::reservoir::derive_params;
use gapdecay_core::{ReservoirConfig, ReservoirParams};

/// `(A, a, α)` configurations exercised by every bench.
pub const FIXTURES: [(f64, f64, f64); 3] = [(1.0, 1.0, 0.5), (1.0, 1.0, 0.25), (2.0, 0.5, 0.75)];

pub fn config(aa: f64, a: f64, alpha: f64) -> ReservoirConfig {
    ReservoirConfig::new(aa, a, alpha, 1.0).expect("fixture is valid")
}

pub fn params(aa: f64, a: f64, alpha: f64) -> ReservoirParams {
    derive_params(&config(aa, a, alpha)).expect("fixture is valid")
}

pub fn label(aa: f64, a: f64, alpha: f64) -> String {
    format!("A{aa}_a{a}_alpha{alpha}")
}
