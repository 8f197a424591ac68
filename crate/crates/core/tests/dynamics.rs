use gapdecay_core::asymptotics::{bound_state, d_alpha};
use gapdecay_core::dynamics::{evolve, trajectory, trajectory_with};
use gapdecay_core::oracles::LaplaceInverter;
use gapdecay_core::reservoir::derive_params;
use gapdecay_core::{
    DensityMatrix, Error, Evaluator, GSample, Method, Propagator, ReservoirConfig, RoutingConfig,
    TimeGrid,
};
use num_complex::Complex64;

fn cfg(aa: f64, a: f64, al: f64, w0: f64) -> ReservoirConfig {
    ReservoirConfig::new(aa, a, al, w0).unwrap()
}

#[test]
fn single_point_grid_returns_initial_state() {
    let rho0 = DensityMatrix::new(0.7, Complex64::new(0.1, 0.3)).unwrap();
    let grid = TimeGrid::from_points(vec![0.0]).unwrap();
    let out = trajectory(&rho0, &grid, Evaluator::Auto, &cfg(1.0, 1.0, 0.5, 1.0)).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].state, rho0);
    assert_eq!(out[0].g.value, Complex64::new(1.0, 0.0));
}

#[test]
fn routing_follows_domains() {
    let prop = Propagator::new(&cfg(1.0, 1.0, 0.5, 1.0), RoutingConfig::default()).unwrap();
    assert!(prop.series_limit() > 1.0);
    assert_eq!(prop.route(0.5), Method::Series);
    assert_eq!(prop.route(100.0), Method::Rational);
    assert_eq!(prop.rational_order().map(|o| (o.p, o.q)), Some((1, 2)));

    let irrational =
        Propagator::new(&cfg(1.0, 1.0, 0.5f64.sqrt(), 1.0), RoutingConfig::default()).unwrap();
    assert!(irrational.rational_order().is_none());
    assert_eq!(irrational.route(100.0), Method::Laplace);

    let no_series = RoutingConfig {
        domain_margin: 0.0,
        ..RoutingConfig::default()
    };
    let p2 = Propagator::new(&cfg(1.0, 1.0, 0.5, 1.0), no_series).unwrap();
    assert_eq!(p2.route(0.5), Method::Rational);
}

#[test]
fn auto_trajectory_matches_laplace_and_keeps_invariants() {
    let c = cfg(1.0, 1.0, 0.5, 1.0);
    let p = derive_params(&c).unwrap();
    let prop = Propagator::new(&c, RoutingConfig::default()).unwrap();
    let grid = TimeGrid::log(0.01, 1000.0 * p.tau, 60).unwrap();
    let rho0 = DensityMatrix::maximally_coherent();
    let auto = trajectory_with(&rho0, &grid, Evaluator::Auto, &prop).unwrap();
    let lap = trajectory_with(&rho0, &grid, Evaluator::Fixed(Method::Laplace), &prop).unwrap();
    let mut methods = std::collections::BTreeSet::new();
    for (x, y) in auto.iter().zip(&lap) {
        methods.insert(x.method());
        assert!((x.g.value - y.g.value).norm() < 1e-6, "t={}", x.t);
        assert_eq!(x.state.trace(), 1.0);
        assert!(x.state.positivity_margin() >= -1e-12);
        assert!(x.g.value.norm() <= 1.0 + x.g.error_bound + 1e-9);
    }
    assert!(methods.contains(&Method::Series) && methods.contains(&Method::Rational));
}

#[test]
fn coherence_modulus_is_independent_of_qubit_frequency() {
    let grid = TimeGrid::log(0.1, 50.0, 25).unwrap();
    let rho0 = DensityMatrix::maximally_coherent();
    let a = trajectory(
        &rho0,
        &grid,
        Evaluator::Fixed(Method::Laplace),
        &cfg(1.0, 1.0, 0.5, 1.0),
    )
    .unwrap();
    let b = trajectory(
        &rho0,
        &grid,
        Evaluator::Fixed(Method::Laplace),
        &cfg(1.0, 1.0, 0.5, 37.0),
    )
    .unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.g.value, y.g.value);
        assert!((x.state.rho10.norm() - y.state.rho10.norm()).abs() <= 2.0 * f64::EPSILON);
        assert_ne!(x.state.rho10, y.state.rho10);
    }
}

#[test]
fn failures_carry_time_and_method() {
    let grid = TimeGrid::from_points(vec![0.5, 1000.0]).unwrap();
    let err = trajectory(
        &DensityMatrix::excited(),
        &grid,
        Evaluator::Fixed(Method::Series),
        &cfg(1.0, 1.0, 0.5, 1.0),
    )
    .unwrap_err();
    match err {
        Error::AtTime { t, method, .. } => {
            assert_eq!(t, 1000.0);
            assert_eq!(method, "series");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn volterra_trajectory_on_uniform_grid() {
    let grid = TimeGrid::uniform(1.0 / 128.0, 256).unwrap();
    let c = cfg(1.0, 1.0, 0.5, 1.0);
    let out = trajectory(
        &DensityMatrix::excited(),
        &grid,
        Evaluator::Fixed(Method::Volterra),
        &c,
    )
    .unwrap();
    let inv = LaplaceInverter::new(&derive_params(&c).unwrap()).unwrap();
    let last = out.last().unwrap();
    assert_eq!(last.method(), Method::Volterra);
    assert!((last.g.value - inv.invert(2.0).unwrap().value).norm() < 1e-6);
}

#[test]
fn coherence_tail_against_asymptotic_amplitude() {
    // the continuum part of G carries the power law; the bound-state pole
    // adds a persistent term of modulus Z
    let c = cfg(1.0, 1.0, 0.5, 1.0);
    let p = derive_params(&c).unwrap();
    let inv = LaplaceInverter::new(&p).unwrap();
    let rho0 = DensityMatrix::maximally_coherent();
    let t = 10.0 * p.tau;
    let parts = inv.decompose(t).unwrap();
    let cont = GSample::new(t, parts.continuum, parts.continuum_error, Method::Laplace);
    let predicted = 0.5 * d_alpha(&p).norm() * t.powf(-1.5);
    let got = evolve(&rho0, t, &cont, p.omega0).rho10.norm();
    assert!((got / predicted - 1.0).abs() < 0.1, "{got} vs {predicted}");

    let z = bound_state(&c).unwrap().residue;
    let full = evolve(&rho0, t, &inv.invert(t).unwrap(), p.omega0)
        .rho10
        .norm();
    assert!((full - 0.5 * z).abs() < 0.5 * parts.continuum.norm() + 1e-9);
}

#[test]
fn continuum_population_decreases_in_tail_window() {
    let c = cfg(1.0, 1.0, 0.5, 1.0);
    let p = derive_params(&c).unwrap();
    let inv = LaplaceInverter::new(&p).unwrap();
    let grid = TimeGrid::log(100.0 * p.tau, 1000.0 * p.tau, 30).unwrap();
    let pops: Vec<f64> = grid
        .points()
        .iter()
        .map(|&t| inv.decompose(t).unwrap().continuum.norm_sqr())
        .collect();
    assert!(pops.windows(2).all(|w| w[1] < w[0]));
}
