//! Survival amplitude and reduced dynamics of a qubit coupled to a bosonic
//! reservoir whose spectral density vanishes below the qubit frequency and
//! rises as a power `(ω−ω₀)^α` above it.
//!
//! Several independent evaluation paths are provided for `G(t)`: the
//! Mittag-Leffler double series ([`series`]), the rational-`α` root
//! representation ([`rational`]), the long-time expansion ([`asymptotics`]),
//! and two reference oracles ([`oracles`]): numerical Laplace inversion and
//! direct Volterra integration.

pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod oracles;
pub mod quad;
pub mod rational;
pub mod reservoir;
pub mod sample;
pub mod series;
pub mod specfun;

pub use dynamics::{DensityMatrix, Evaluator, Propagator, RoutingConfig, TrajectoryPoint};
pub use error::{Error, Result};
pub use oracles::{TailFit, TimeGrid};
pub use rational::{RationalOrder, RootSet};
pub use reservoir::{ReservoirConfig, ReservoirParams};
pub use sample::{GSample, Method};
