use gapdecay_core::asymptotics::{d_alpha, expansion};
use gapdecay_core::oracles::LaplaceInverter;
use gapdecay_core::rational::{
    applicability, build_q_polynomial, find_roots, g_rational, partial_fraction_eval, poly,
    residue_coefficients, RationalEvaluator, RationalOrder, RootSet, RESIDUAL_TOLERANCE,
};
use gapdecay_core::reservoir::{a_star, derive_params, ReservoirConfig, ReservoirParams};
use gapdecay_core::series::g_series;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(aa: f64, a: f64, al: f64) -> ReservoirParams {
    derive_params(&ReservoirConfig::new(aa, a, al, 1.0).unwrap()).unwrap()
}

fn half() -> RationalOrder {
    RationalOrder::new(1, 2).unwrap()
}

fn nonzero(coeffs: &[Complex64]) -> Vec<usize> {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() != 0.0)
        .map(|(i, _)| i)
        .collect()
}

#[test]
fn q_polynomial_for_one_half() {
    let p = params(1.0, 1.0, 0.5);
    let q = build_q_polynomial(half(), &p).unwrap();
    assert_eq!(q.len(), 7);
    assert_eq!(nonzero(&q), vec![0, 1, 2, 6]);
    assert_eq!(q[6], c(1.0, 0.0));
    assert_eq!(q[2], c(p.z1, 0.0));
    assert_eq!(q[1], p.z_alpha);
    assert_eq!(q[0], p.z0);
}

#[test]
fn q_polynomial_at_threshold_is_quartic_in_z_cubed() {
    let p = params(a_star(1.0, 0.75), 1.0, 0.75);
    let ord = RationalOrder::new(3, 4).unwrap();
    let mut q = build_q_polynomial(ord, &p).unwrap();
    assert!(q[4].norm() < 1e-15);
    q[4] = c(0.0, 0.0);
    assert_eq!(nonzero(&q), vec![0, 3, 12]);
}

#[test]
fn monic_for_every_order() {
    for &(pp, qq) in &[(1, 2), (1, 3), (2, 3), (3, 4), (5, 16)] {
        let ord = RationalOrder::new(pp, qq).unwrap();
        let q = build_q_polynomial(ord, &params(0.8, 1.1, ord.alpha())).unwrap();
        assert_eq!(q.last().copied(), Some(c(1.0, 0.0)));
        assert_eq!(q.len(), 3 * qq as usize + 1);
    }
}

#[test]
fn sixth_roots_of_unity() {
    let mut p = vec![c(0.0, 0.0); 7];
    p[0] = c(-1.0, 0.0);
    p[6] = c(1.0, 0.0);
    let rs = find_roots(&p).unwrap();
    assert_eq!(rs.roots.len(), 6);
    for k in 0..6 {
        let w = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 3.0);
        let hit = rs
            .roots
            .iter()
            .find(|r| (r.zeta - w).norm() < 1e-13)
            .unwrap();
        assert_eq!(hit.multiplicity, 1);
    }
}

#[test]
fn triple_roots_are_clustered() {
    let p = poly::from_roots(&[(c(1.0, 0.0), 3), (c(-2.0, 0.0), 3)]);
    let rs = find_roots(&p).unwrap();
    assert_eq!(rs.roots.len(), 2);
    for (z, m) in [(c(1.0, 0.0), 3), (c(-2.0, 0.0), 3)] {
        let r = rs
            .roots
            .iter()
            .find(|r| (r.zeta - z).norm() < 1e-10)
            .unwrap();
        assert_eq!(r.multiplicity, m);
    }
    assert!(rs.is_healthy(RESIDUAL_TOLERANCE));
}

#[test]
fn vieta_for_unit_config() {
    let p = params(1.0, 1.0, 0.5);
    let rs = find_roots(&build_q_polynomial(half(), &p).unwrap()).unwrap();
    assert_eq!(rs.total_multiplicity(), 6);
    assert!((rs.vieta_constant() - p.z0).norm() < 1e-12 * p.z0.norm());
    assert!(rs.vieta_sum().norm() < 1e-12);
    assert!(rs.max_residual() <= RESIDUAL_TOLERANCE);
}

#[test]
fn degree_accounting() {
    for &(pp, qq) in &[(1, 2), (1, 3), (2, 3), (3, 4)] {
        let ord = RationalOrder::new(pp, qq).unwrap();
        for &(aa, a) in &[(1.0, 1.0), (0.3, 2.0), (2.5, 0.7)] {
            let p = params(aa, a, ord.alpha());
            let rs = find_roots(&build_q_polynomial(ord, &p).unwrap()).unwrap();
            assert_eq!(
                rs.total_multiplicity(),
                3 * qq as usize,
                "{pp}/{qq} A={aa} a={a}"
            );
            assert!(rs.is_healthy(RESIDUAL_TOLERANCE));
        }
    }
}

#[test]
fn simple_residues_match_derivative_formula() {
    let p = params(1.0, 1.0, 0.5);
    let q = build_q_polynomial(half(), &p).unwrap();
    let rs = find_roots(&q).unwrap();
    let table = residue_coefficients(&rs, half(), &p.config()).unwrap();
    let dq = poly::derivative(&q);
    for (root, row) in rs.roots.iter().zip(&table) {
        assert_eq!(root.multiplicity, 1);
        let expect = (root.zeta.powi(4) - 1.0) / poly::eval(&dq, root.zeta);
        assert!((row[0] - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }
}

#[test]
fn partial_fractions_reconstruct_the_rational_function() {
    for &(aa, a, pp, qq) in &[(1.0, 1.0, 1, 2), (0.4, 1.7, 2, 3), (2.0, 0.5, 3, 4)] {
        let ord = RationalOrder::new(pp, qq).unwrap();
        let p = params(aa, a, ord.alpha());
        let q = build_q_polynomial(ord, &p).unwrap();
        let rs = find_roots(&q).unwrap();
        let table = residue_coefficients(&rs, ord, &p.config()).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 3.0
        };
        for _ in 0..20 {
            let z = c(next(), next());
            let direct = (z.powi(2 * qq as i32) - a * a) / poly::eval(&q, z);
            let pf = partial_fraction_eval(&rs, &table, z);
            assert!(
                (pf - direct).norm() <= 1e-8 * (1.0 + direct.norm()),
                "{z}: {pf} vs {direct}"
            );
        }
    }
}

#[test]
fn forced_double_root_second_coefficient() {
    // Q = (z − r)²(z − s₁)(z − s₂)(z − s₃)(z − s₄), numerator z⁴ − a²
    let r = c(-0.4, 0.9);
    let s = [c(1.1, 0.2), c(-1.3, -0.5), c(0.2, -1.4), c(0.7, 1.6)];
    let mut spec: Vec<(Complex64, usize)> = vec![(r, 2)];
    spec.extend(s.iter().map(|&z| (z, 1)));
    let q = poly::from_roots(&spec);
    let rs = find_roots(&q).unwrap();
    assert_eq!(rs.total_multiplicity(), 6);
    let (l, double) = rs
        .roots
        .iter()
        .enumerate()
        .find(|(_, x)| x.multiplicity == 2)
        .unwrap();
    assert!((double.zeta - r).norm() < 1e-10);

    let a = 0.8;
    let cfg = ReservoirConfig::new(1.0, a, 0.5, 1.0).unwrap();
    let table = residue_coefficients(&rs, half(), &cfg).unwrap();
    // f = N/C with C = ∏(z − s_i): b_{l,1} = f(r), b_{l,2} = f'(r)
    let n = r.powi(4) - a * a;
    let dn = 4.0 * r.powi(3);
    let cc: Complex64 = s.iter().map(|&z| r - z).product();
    let dc: Complex64 = s.iter().map(|&z| cc / (r - z)).sum();
    let f = n / cc;
    let df = (dn * cc - n * dc) / (cc * cc);
    assert!(
        (table[l][0] - f).norm() < 1e-9 * f.norm(),
        "{} vs {f}",
        table[l][0]
    );
    assert!(
        (table[l][1] - df).norm() < 1e-9 * df.norm(),
        "{} vs {df}",
        table[l][1]
    );
}

#[test]
fn literal_representation_is_flagged() {
    let p = params(1.0, 1.0, 0.5);
    let rs = find_roots(&build_q_polynomial(half(), &p).unwrap()).unwrap();
    let ap = applicability(&rs, half(), &p.config());
    assert!(!ap.literal_converges);
    // the bound state maps to a root with arg π/4
    assert!(ap
        .offending_roots
        .iter()
        .any(|z| (z.arg() - std::f64::consts::FRAC_PI_4).abs() < 1e-8));
}

#[test]
fn matches_laplace_oracle() {
    let p = params(1.0, 1.0, 0.5);
    let ev = RationalEvaluator::new(&p, half()).unwrap();
    let lap = LaplaceInverter::new(&p).unwrap();
    for &t in &[0.5, 1.0, 5.0, 20.0, 50.0] {
        let g = ev.evaluate(t).unwrap();
        let o = lap.invert(t).unwrap();
        assert!(
            (g.value - o.value).norm() <= 1e-6,
            "t={t}: {} vs {}",
            g.value,
            o.value
        );
        assert!(g.error_bound < 1e-8);
    }
    let poles = ev.poles();
    let lp = lap.poles();
    assert_eq!(poles.len(), lp.len());
    for u in poles {
        assert!(lp.iter().any(|x| (x.location - u).norm() < 1e-9));
    }
}

#[test]
fn other_orders_match_laplace() {
    for &(aa, a, pp, qq) in &[(0.4, 1.7, 2, 3), (2.0, 0.5, 3, 4), (1.0, 1.0, 1, 3)] {
        let ord = RationalOrder::new(pp, qq).unwrap();
        let p = params(aa, a, ord.alpha());
        let ev = RationalEvaluator::new(&p, ord).unwrap();
        let lap = LaplaceInverter::new(&p).unwrap();
        for &t in &[0.3, 3.0, 30.0] {
            let g = ev.evaluate(t).unwrap();
            let o = lap.invert(t).unwrap();
            assert!(
                (g.value - o.value).norm() <= 1e-6,
                "{pp}/{qq} t={t}: {} vs {}",
                g.value,
                o.value
            );
        }
    }
}

#[test]
fn matches_series_inside_its_domain() {
    let p = params(1.0, 1.0, 0.5);
    let rs: RootSet = find_roots(&build_q_polynomial(half(), &p).unwrap()).unwrap();
    let table = residue_coefficients(&rs, half(), &p.config()).unwrap();
    let g = g_rational(0.5, half(), &rs, &table, &p.config()).unwrap();
    let s = g_series(0.5, &p, 1e-10).unwrap();
    assert!((g.value - s.value).norm() <= g.error_bound + s.error_bound + 1e-12);
}

#[test]
fn continuum_follows_leading_power_law() {
    let p = params(1.0, 1.0, 0.5);
    let ev = RationalEvaluator::new(&p, half()).unwrap();
    let t = 100.0 * p.tau;
    let parts = ev.decompose(t).unwrap();
    let lead = -d_alpha(&p) * t.powf(-1.5);
    assert!(((parts.continuum - lead) / lead).norm() < 0.05);
    let exp = expansion(&p, 4).eval(t);
    assert!(((parts.continuum - exp) / exp).norm() < ((parts.continuum - lead) / lead).norm());
}
