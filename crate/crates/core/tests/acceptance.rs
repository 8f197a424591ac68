//! Acceptance suite: one PASS/FAIL line per criterion, plus diagnostic lines
//! that apply the same checks to the branch-cut (continuum) part of `G`.
//! Exits with status 1 if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use gapdecay_core::asymptotics::{d_alpha, g_asymptotic};
use gapdecay_core::dynamics::trajectory_with;
use gapdecay_core::oracles::{fit_tail_exponent, volterra_solve, LaplaceInverter, TimeGrid};
use gapdecay_core::rational::{
    build_q_polynomial, find_roots, partial_fraction_eval, poly, residue_coefficients,
    RationalEvaluator, RationalOrder,
};
use gapdecay_core::reservoir::{derive_params, ReservoirConfig, ReservoirParams};
use gapdecay_core::series::{converged_domain, g_series};
use gapdecay_core::specfun::{mittag_leffler, reciprocal_gamma, MlParams};
use gapdecay_core::{DensityMatrix, Evaluator, Propagator, Result, RoutingConfig};
use num_complex::Complex64;

const FIXTURES: [(f64, f64, f64); 4] = [
    (1.0, 1.0, 0.5),
    (1.0, 1.0, 0.25),
    (0.2251, 1.0, 0.5),
    (2.0, 0.5, 0.75),
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn params(aa: f64, a: f64, al: f64) -> ReservoirParams {
    derive_params(&ReservoirConfig::new(aa, a, al, 1.0).unwrap()).unwrap()
}

fn report(id: &str, title: &str, outcome: Result<Outcome>) -> bool {
    match outcome {
        Ok(o) => {
            println!(
                "criterion {id} [{}] {title}: {}",
                if o.pass { "PASS" } else { "FAIL" },
                o.detail
            );
            o.pass
        }
        Err(e) => {
            println!("criterion {id} [FAIL] {title}: evaluation error: {e}");
            false
        }
    }
}

fn diagnostic(title: &str, pass: bool, detail: String) {
    println!(
        "  diagnostic [{}] {title}: {detail}",
        if pass { "pass" } else { "fail" }
    );
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn oracle_agreement() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &(aa, a, al) in &FIXTURES {
        let p = params(aa, a, al);
        let dom = converged_domain(&p, 1e-8)?;
        let inv = LaplaceInverter::new(&p)?;
        let grid = TimeGrid::log(0.01 / a, dom, 20)?;
        let mut dev = 0.0f64;
        for &t in grid.points() {
            let s = g_series(t, &p, 1e-8)?;
            let o = inv.invert(t)?;
            dev = dev.max((s.value - o.value).norm());
        }
        worst = worst.max(dev);
        parts.push(format!("({aa},{a},{al}) domain {dom:.3} dev {dev:.1e}"));
    }
    let el = secs(start.elapsed());
    Ok(Outcome {
        pass: worst <= 1e-6 && el < 60.0,
        detail: format!(
            "max |series - laplace| = {worst:.2e} (gate 1e-6), runtime {el:.1} s (gate 60 s); {}",
            parts.join("; ")
        ),
    })
}

fn volterra_consistency() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_est = 0.0f64;
    let h = 1.0 / 1024.0;
    for &(aa, a, al) in &FIXTURES {
        let cfg = ReservoirConfig::new(aa, a, al, 1.0)?;
        let inv = LaplaceInverter::new(&derive_params(&cfg)?)?;
        let out = volterra_solve(&cfg, &TimeGrid::uniform(h, 5 * 1024)?)?;
        for s in out.iter().filter(|s| s.t >= 0.1).step_by(16) {
            let o = inv.invert(s.t)?;
            worst = worst.max((s.value - o.value).norm());
            worst_est = worst_est.max(s.error_bound);
        }
    }
    let el = secs(start.elapsed());
    Ok(Outcome {
        pass: worst <= 1e-5 && el < 120.0,
        detail: format!(
            "max |volterra - laplace| on [0.1, 5] = {worst:.2e} (gate 1e-5), max Richardson estimate {worst_est:.1e}, h = 1/1024, runtime {el:.1} s (gate 120 s)"
        ),
    })
}

fn slope_window(p: &ReservoirParams) -> Result<TimeGrid> {
    TimeGrid::log(100.0 * p.tau, 1000.0 * p.tau, 16)
}

fn power_law_tail() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for &al in &[0.2, 0.4, 0.5, 0.6, 0.8] {
        let p = params(1.0, 1.0, al);
        let inv = LaplaceInverter::new(&p)?;
        let grid = slope_window(&p)?;
        let mut amp = Vec::new();
        let mut cont = Vec::new();
        for &t in grid.points() {
            let parts = inv.decompose(t)?;
            amp.push((t, parts.total().norm()));
            cont.push((t, parts.continuum.norm()));
        }
        let pop: Vec<(f64, f64)> = amp.iter().map(|&(t, g)| (t, g * g)).collect();
        let target = -(1.0 + al);
        let fit_g = fit_tail_exponent(&amp);
        let fit_p = fit_tail_exponent(&pop);
        let ok_g = matches!(&fit_g, Ok(f) if (f.exponent - target).abs() <= 0.02);
        let ok_p = matches!(&fit_p, Ok(f) if (f.exponent - 2.0 * target).abs() <= 0.04);
        pass &= ok_g && ok_p;
        let show = |r: &Result<gapdecay_core::TailFit>| match r {
            Ok(f) => format!("{:.4}", f.exponent),
            Err(e) => format!("rejected ({e})"),
        };
        parts.push(format!(
            "alpha {al}: |G| slope {} (want {target:.2}), rho11 slope {} (want {:.2})",
            show(&fit_g),
            show(&fit_p),
            2.0 * target
        ));
        let cont_pop: Vec<(f64, f64)> = cont.iter().map(|&(t, g)| (t, g * g)).collect();
        let (cg, cp) = (fit_tail_exponent(&cont), fit_tail_exponent(&cont_pop));
        let ok = matches!(&cg, Ok(f) if (f.exponent - target).abs() <= 0.02)
            && matches!(&cp, Ok(f) if (f.exponent - 2.0 * target).abs() <= 0.04);
        diagnostic(
            &format!("continuum slopes, alpha {al}"),
            ok,
            format!("|G_cut| slope {}, |G_cut|^2 slope {}", show(&cg), show(&cp)),
        );
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn asymptotic_coefficient() -> Result<Outcome> {
    let p = params(1.0, 1.0, 0.5);
    let d = d_alpha(&p);
    let literal = 2.0 * Complex64::from_polar(1.0, PI / 4.0) / PI.powf(1.5);
    let d_ok = (d - literal).norm() <= 1e-12 * literal.norm();
    let inv = LaplaceInverter::new(&p)?;
    let mut devs = Vec::new();
    let mut cdevs = Vec::new();
    for &k in &[100.0, 200.0, 500.0, 1000.0] {
        let t = k * p.tau;
        let parts = inv.decompose(t)?;
        let scale = t.powf(1.5) / d;
        devs.push((k, (parts.total() * scale + 1.0).norm()));
        cdevs.push((k, (parts.continuum * scale + 1.0).norm()));
    }
    let monotone = |v: &[(f64, f64)]| v.windows(2).all(|w| w[1].1 <= w[0].1);
    let fmt = |v: &[(f64, f64)]| {
        v.iter()
            .map(|(k, x)| format!("{k}tau: {x:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let pass = devs[0].1 <= 0.05 && monotone(&devs) && d_ok;
    diagnostic(
        "continuum coefficient",
        cdevs[0].1 <= 0.05 && monotone(&cdevs),
        format!("|G_cut t^1.5/D + 1| = {}", fmt(&cdevs)),
    );
    Ok(Outcome {
        pass,
        detail: format!(
            "|G t^1.5/D + 1| = {} (gate 0.05 at 100tau, nonincreasing); D = {d:.6} vs listed 2e^(i pi/4)/pi^1.5 = {literal:.6} ({})",
            fmt(&devs),
            if d_ok { "match" } else { "mismatch" }
        ),
    })
}

fn rational_path() -> Result<Outcome> {
    let p = params(1.0, 1.0, 0.5);
    let ord = RationalOrder::new(1, 2)?;
    let q = build_q_polynomial(ord, &p)?;
    let rs = find_roots(&q)?;
    let table = residue_coefficients(&rs, ord, &p.config())?;
    let mut pf = 0.0f64;
    for k in 0..20 {
        let th = 2.0 * PI * k as f64 / 20.0 + 0.1;
        let z = Complex64::from_polar(0.5 + 0.15 * k as f64, th);
        let direct = (z.powi(4) - 1.0) / poly::eval(&q, z);
        pf =
            pf.max((partial_fraction_eval(&rs, &table, z) - direct).norm() / (1.0 + direct.norm()));
    }
    let ev = RationalEvaluator::new(&p, ord)?;
    let inv = LaplaceInverter::new(&p)?;
    let mut dev = 0.0f64;
    for &t in TimeGrid::log(0.5, 50.0, 30)?.points() {
        dev = dev.max((ev.evaluate(t)?.value - inv.invert(t)?.value).norm());
    }
    let pass =
        rs.total_multiplicity() == 6 && rs.max_residual() <= 1e-10 && pf <= 1e-8 && dev <= 1e-6;
    Ok(Outcome {
        pass,
        detail: format!(
            "sum m = {}, max scaled residual {:.1e}, partial-fraction residual {pf:.1e}, max |rational - laplace| on [0.5, 50] = {dev:.1e}",
            rs.total_multiplicity(),
            rs.max_residual()
        ),
    })
}

fn special_functions() -> Result<Outcome> {
    let tol = 1e-15;
    let mut worst_ml = 0.0f64;
    for &(x, y) in &[
        (0.5, 0.0),
        (-3.0, 1.0),
        (2.0, -2.5),
        (0.0, 4.0),
        (-7.5, 0.0),
        (4.0, 0.3),
    ] {
        let z = Complex64::new(x, y);
        let e = mittag_leffler(&MlParams::new(1.0, 1.0, 1.0)?, z, tol)?.value;
        worst_ml = worst_ml.max((e - z.exp()).norm() / z.exp().norm().max(1.0));
        let c = mittag_leffler(&MlParams::new(2.0, 1.0, 1.0)?, -z * z, tol)?.value;
        worst_ml = worst_ml.max((c - z.cos()).norm() / z.cos().norm().max(1.0));
    }
    for &(al, be) in &[(0.5, 1.0), (2.0, 3.5), (0.25, 0.75), (1.5, 7.0)] {
        let v = mittag_leffler(&MlParams::new(al, be, 1.0)?, Complex64::new(0.0, 0.0), tol)?.value;
        let rg = reciprocal_gamma(Complex64::new(be, 0.0));
        worst_ml = worst_ml.max((v - rg).norm());
    }
    let mut worst_refl = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let z = Complex64::new(-4.55 + i as f64, -2.0 + 0.4 * j as f64 + 0.05);
            let lhs = reciprocal_gamma(z) * reciprocal_gamma(1.0 - z);
            let rhs = (PI * z).sin() / PI;
            worst_refl = worst_refl.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
    }
    Ok(Outcome {
        pass: worst_ml <= 1e-12 && worst_refl <= 1e-12,
        detail: format!("Mittag-Leffler reductions max error {worst_ml:.1e}, reflection identity max error {worst_refl:.1e} on 100 points (gate 1e-12)"),
    })
}

fn physics_invariants() -> Result<Outcome> {
    let mut trace = 0.0f64;
    let mut positivity = f64::INFINITY;
    let mut modulus = 0.0f64;
    let mut origin_exact = true;
    let mut phase = 0.0f64;
    let mut collapse = Vec::new();
    let mut collapse_ok = true;
    for &(aa, a, al) in &FIXTURES {
        let cfg = ReservoirConfig::new(aa, a, al, 1.0)?;
        let cfg2 = ReservoirConfig::new(aa, a, al, 9.3)?;
        let prop = Propagator::new(&cfg, RoutingConfig::default())?;
        let prop2 = Propagator::new(&cfg2, RoutingConfig::default())?;
        let tau = prop.params().tau;
        let mut pts = vec![0.0];
        pts.extend_from_slice(TimeGrid::log(0.01, 1000.0 * tau, 200)?.points());
        let grid = TimeGrid::from_points(pts)?;
        for rho0 in [
            DensityMatrix::excited(),
            DensityMatrix::maximally_coherent(),
        ] {
            let tr = trajectory_with(&rho0, &grid, Evaluator::Auto, &prop)?;
            let tr2 = trajectory_with(&rho0, &grid, Evaluator::Auto, &prop2)?;
            origin_exact &= tr[0].g.value == Complex64::new(1.0, 0.0) && tr[0].state == rho0;
            for (x, y) in tr.iter().zip(&tr2) {
                trace = trace.max((x.state.trace() - 1.0).abs());
                positivity = positivity.min(x.state.positivity_margin());
                modulus = modulus.max(x.g.value.norm());
                phase = phase.max((x.state.rho10.norm() - y.state.rho10.norm()).abs());
            }
        }
        if al == 0.5 {
            let inv = LaplaceInverter::new(prop.params())?;
            let early = inv.invert(10.0 * tau)?.value.norm_sqr();
            let late = inv.invert(1000.0 * tau)?.value.norm_sqr();
            collapse_ok &= late < early / 100.0;
            collapse.push(format!(
                "({aa},{a},{al}) rho11(10tau) = {early:.4}, rho11(1000tau) = {late:.4}"
            ));
            let ce = inv.decompose(10.0 * tau)?.continuum.norm_sqr();
            let cl = inv.decompose(1000.0 * tau)?.continuum.norm_sqr();
            diagnostic(
                &format!("continuum collapse ({aa},{a},{al})"),
                cl < ce / 100.0,
                format!("|G_cut|^2 at 10tau = {ce:.3e}, at 1000tau = {cl:.3e}"),
            );
        }
    }
    let pass = trace <= f64::EPSILON
        && positivity >= -1e-12
        && modulus <= 1.0 + 1e-9
        && origin_exact
        && phase <= 4.0 * f64::EPSILON
        && collapse_ok;
    Ok(Outcome {
        pass,
        detail: format!(
            "max |trace - 1| {trace:.1e}, min positivity margin {positivity:.2e}, max |G| {modulus:.12}, G(0) exact: {origin_exact}, max |rho10| change with omega0 {phase:.1e}, ground-state collapse: {} [{}]",
            if collapse_ok { "yes" } else { "no" },
            collapse.join("; ")
        ),
    })
}

fn negative_control() -> Result<Outcome> {
    let p = params(1.0, 1.0, 0.5);
    let inv = LaplaceInverter::new(&p)?;
    let t = 0.1 * p.tau;
    let asym = g_asymptotic(t, &p, 4).value;
    let parts = inv.decompose(t)?;
    let full = parts.total();
    let rel = (asym - full).norm() / full.norm();
    let rel_cut = (asym - parts.continuum).norm() / parts.continuum.norm();
    diagnostic(
        "asymptotic vs continuum at 0.1tau",
        rel_cut > 0.1,
        format!("relative deviation {rel_cut:.3}"),
    );
    Ok(Outcome {
        pass: rel > 0.1,
        detail: format!("asymptotic vs laplace at t = 0.1tau = {t:.2}: relative deviation {rel:.3}, 10% gate {}", if rel > 0.1 { "fails as expected" } else { "unexpectedly met" }),
    })
}

fn main() {
    let mut all = true;
    all &= report("1", "oracle agreement", oracle_agreement());
    all &= report("2", "volterra consistency", volterra_consistency());
    all &= report("3", "power-law tail", power_law_tail());
    all &= report("4", "asymptotic coefficient", asymptotic_coefficient());
    all &= report("5", "rational path", rational_path());
    all &= report("6", "special functions", special_functions());
    all &= report("7", "physics invariants", physics_invariants());
    all &= report("8", "negative control", negative_control());
    println!(
        "acceptance: {}",
        if all {
            "all criteria pass"
        } else {
            "some criteria fail"
        }
    );
    if !all {
        std::process::exit(1);
    }
}
