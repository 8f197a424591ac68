use gapdecay_core::asymptotics::{d_alpha, d_alpha_closed_form};
use gapdecay_core::dynamics::evolve;
use gapdecay_core::oracles::LaplaceInverter;
use gapdecay_core::rational::{build_q_polynomial, find_roots, RationalOrder};
use gapdecay_core::reservoir::derive_params;
use gapdecay_core::series::{g_series, ML_ARGUMENT_LIMIT};
use gapdecay_core::{DensityMatrix, GSample, Method, ReservoirConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn config() -> impl Strategy<Value = ReservoirConfig> {
    (0.2f64..3.0, 0.5f64..2.0, 0.15f64..0.85)
        .prop_map(|(aa, a, al)| ReservoirConfig::new(aa, a, al, 1.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_is_contractive_and_matches_laplace(cfg in config(), frac in 0.02f64..0.6) {
        let p = derive_params(&cfg).unwrap();
        let z1 = p.scaled().z1.abs().max(1e-3);
        // stay well inside the Mittag-Leffler routing limit
        let t = frac * (ML_ARGUMENT_LIMIT / z1).sqrt().min(4.0) / cfg.width;
        if let Ok(g) = g_series(t, &p, 1e-9) {
            prop_assert!(g.value.norm() <= 1.0 + g.error_bound + 1e-12);
            let o = LaplaceInverter::new(&p).unwrap().invert(t).unwrap();
            prop_assert!((g.value - o.value).norm() <= g.error_bound + o.error_bound + 1e-9,
                "t={} series={} laplace={}", t, g.value, o.value);
        }
    }

    #[test]
    fn laplace_is_contractive(cfg in config(), t in 0.01f64..200.0) {
        let p = derive_params(&cfg).unwrap();
        let g = LaplaceInverter::new(&p).unwrap().invert(t).unwrap();
        prop_assert!(g.value.norm() <= 1.0 + g.error_bound + 1e-9);
    }

    #[test]
    fn asymptotic_coefficient_closed_form(cfg in config()) {
        let p = derive_params(&cfg).unwrap();
        let d = d_alpha(&p);
        prop_assert!((d - d_alpha_closed_form(&cfg)).norm() <= 1e-12 * d.norm());
    }

    #[test]
    fn root_sets_account_for_degree(aa in 0.2f64..3.0, a in 0.5f64..2.0, ord in prop::sample::select(vec![(1u32, 2u32), (1, 3), (2, 3), (3, 4), (2, 5)])) {
        let ord = RationalOrder::new(ord.0, ord.1).unwrap();
        let p = derive_params(&ReservoirConfig::new(aa, a, ord.alpha(), 1.0).unwrap()).unwrap();
        let rs = find_roots(&build_q_polynomial(ord, &p).unwrap()).unwrap();
        prop_assert_eq!(rs.total_multiplicity(), ord.degree());
        prop_assert!((rs.vieta_constant() - p.z0).norm() <= 1e-10 * p.z0.norm());
    }

    #[test]
    fn evolution_preserves_positivity(
        rho11 in 0.0f64..=1.0,
        phase in 0.0f64..6.3,
        frac in 0.0f64..=1.0,
        g_mod in 0.0f64..=1.0,
        g_arg in -3.2f64..3.2,
        t in 0.0f64..100.0,
        w0 in 0.0f64..50.0,
    ) {
        let r = frac * (rho11 * (1.0 - rho11)).sqrt();
        let rho0 = DensityMatrix::new(rho11, Complex64::from_polar(r, phase)).unwrap();
        let g = GSample::new(t, Complex64::from_polar(g_mod, g_arg), 0.0, Method::Laplace);
        let out = evolve(&rho0, t, &g, w0);
        prop_assert_eq!(out.trace(), 1.0);
        prop_assert!(out.positivity_margin() >= -1e-15);
        prop_assert!(out.rho11 <= rho0.rho11);
    }
}
