//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line and
//! asserts the same condition. Run with `--nocapture` to see the lines.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use szlab_core::asym_coeffs::{binomial_identity_check, ga, gd, w1_domains};
use szlab_core::ensembles;
use szlab_core::experiments::{
    bound_sweep, cross_growth_sweep, hs_vs_spectral_suite, jump_sweep, random_triple, sweep_from_spectra,
    sweep_spectra, BoundConfig, BoundTheorem, CrossConfig, GeometryConfig, HsSuiteConfig, JumpConfig,
};
use szlab_core::func_classes::{abs_pow, eta_fn, monomial, registry};
use szlab_core::hs_calculus::Method;
use szlab_core::schatten::{
    bound_ratio_thm24, lemma22_slack, q_triangle_check, resolvent_identity_defect, BoundSetup,
};
use szlab_core::wiener_hopf::{symbol_registry, CrossVariant, DomainSpec, IndicatorRule, WHModel};
use szlab_core::C64;

fn report(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_01_hs_matches_spectral() {
    let t0 = Instant::now();
    let rep = hs_vs_spectral_suite(&HsSuiteConfig::default()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let smooth = rep
        .cases
        .iter()
        .filter(|c| c.function != "abs_pow:0.5")
        .map(|c| c.deviation)
        .fold(0.0, f64::max);
    let rough = rep
        .cases
        .iter()
        .filter(|c| c.function == "abs_pow:0.5")
        .map(|c| c.deviation)
        .fold(0.0, f64::max);
    let count = rep.cases.len();
    let pass = count == 120 && smooth <= 1e-6 && rough <= 1e-3 && secs < 300.0;
    report(
        1,
        pass,
        format!("{count} cases, smooth max {smooth:.2e} (<= 1e-6), |t|^1/2 max {rough:.2e} (<= 1e-3), {secs:.1}s"),
    );
}

#[test]
fn criterion_02_resolvent_and_lemma22() {
    let mut worst_identity = 0.0f64;
    let mut worst_slack = f64::INFINITY;
    let mut violations = 0;
    for k in 0..500u64 {
        let m = 4 + (k % 4) as usize * 4;
        let (a, b, j) = random_triple(m, ensembles::instance_seed(2, k));
        let mut rng = ensembles::rng(ensembles::instance_seed(20, k));
        let y: f64 = rng.random_range(0.05..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let z = C64::new(rng.random_range(-2.0..2.0), y);
        let sigma: f64 = rng.random_range(0.05..1.0);
        let p = [0.5, 1.0, 2.0][(k % 3) as usize];
        let scale = 1.0 / (y.abs() * y.abs());
        let d = resolvent_identity_defect(&a, &b, &j, z).unwrap() / scale;
        let s = lemma22_slack(&a, &b, &j, z, sigma, p).unwrap();
        worst_identity = worst_identity.max(d);
        worst_slack = worst_slack.min(s);
        if d > 1e-10 || s < -1e-10 {
            violations += 1;
        }
    }
    report(
        2,
        violations == 0,
        format!("500 instances, {violations} violations, identity defect {worst_identity:.2e}, min slack {worst_slack:.3}"),
    );
}

#[test]
fn criterion_03_bks() {
    let cfg = BoundConfig {
        theorem: BoundTheorem::Bks,
        trials: 250,
        seed: 3,
        dims: vec![4, 8, 16, 32],
        ..BoundConfig::default()
    };
    let rep = bound_sweep(&cfg).unwrap();
    let pairs = cfg.trials * cfg.dims.len();
    let min = rep.rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    report(
        3,
        pairs == 1000 && rep.summary.violations == 0,
        format!("{pairs} pairs, {} checks, {} violations, min slack {min:.3e}", rep.rows.len(), rep.summary.violations),
    );
}

#[test]
fn criterion_04_thm24_scaling_and_dimension() {
    let f = abs_pow(0.5, 3);
    let setup = BoundSetup::new(&f, 0.4, 1.0).unwrap();
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let (a, b, j) = random_triple(8, ensembles::instance_seed(4, k));
        let r = [0.5, 2.0, 3.7][(k % 3) as usize];
        let fr = f.rescaled(r).unwrap();
        let sr = BoundSetup::new(&fr, 0.4, 1.0).unwrap();
        let base = bound_ratio_thm24(&setup, &a, &b, &j, &Method::Spectral).unwrap().ratio;
        let scaled = bound_ratio_thm24(&sr, &a.scale(1.0 / r), &b.scale(1.0 / r), &j, &Method::Spectral)
            .unwrap()
            .ratio;
        worst = worst.max((base - scaled).abs() / base.abs().max(1e-300));
    }
    let rep = bound_sweep(&BoundConfig::default()).unwrap();
    let growth = rep.summary.dimension_scaling;
    report(
        4,
        worst <= 1e-9 && growth <= 1.5,
        format!("scaling defect {worst:.2e} (<= 1e-9), growth 8->16->24 {growth:.3} (<= 1.5)"),
    );
}

#[test]
fn criterion_05_q_triangle() {
    let mut violations = 0;
    let mut min = f64::INFINITY;
    for (qi, q) in [0.3, 0.5, 1.0].into_iter().enumerate() {
        for k in 0..1000u64 {
            let mut rng = ensembles::rng(ensembles::instance_seed(50 + qi as u64, k));
            let m = rng.random_range(2..=12);
            let n = rng.random_range(2..=12);
            let t1 = ensembles::general(m, n, &mut rng);
            let t2 = ensembles::general(m, n, &mut rng).scale(rng.random_range(0.01..3.0));
            let s = q_triangle_check(&t1, &t2, q).unwrap();
            let scale = t1.norm_fro().powf(q) + t2.norm_fro().powf(q);
            min = min.min(s / scale);
            if s < -1e-10 * scale {
                violations += 1;
            }
        }
    }
    report(5, violations == 0, format!("3000 pairs, {violations} violations, min relative slack {min:.3e}"));
}

#[test]
fn criterion_06_coefficient_values() {
    let s_values = [0.3, 1.0, 2.5];
    let mut worst = [0.0f64; 5];
    for &s in &s_values {
        let sc = C64::new(s, 0.0);
        worst[0] = worst[0].max(ga(&monomial(1), sc).unwrap().value.norm());
        let g2 = ga(&monomial(2), sc).unwrap().value;
        worst[1] = worst[1].max((g2 - C64::new(-s * s / (4.0 * PI * PI), 0.0)).norm());
        for g in [monomial(2), monomial(3), eta_fn(1.0)] {
            worst[2] = worst[2].max(gd(&g, sc, sc).unwrap().value.norm());
            let a = ga(&g, sc).unwrap().value;
            worst[3] = worst[3].max((gd(&g, sc, C64::new(0.0, 0.0)).unwrap().value - a).norm());
        }
    }
    let eta = (ga(&eta_fn(1.0), C64::new(1.0, 0.0)).unwrap().value.re - 1.0 / 12.0).abs();
    let mut binom = 0.0f64;
    for p in 1..=4 {
        for (z, s) in [(0.3, 1.0), (-0.7, 0.5), (1.2, -2.0)] {
            binom = binom.max(binomial_identity_check(p, C64::new(z, 0.1), C64::new(s, 0.0)).unwrap());
        }
    }
    worst[4] = binom;
    let pass = worst[0] == 0.0 && worst[1] <= 1e-10 && eta <= 1e-8 && worst[2] <= 1e-12 && worst[3] <= 1e-10 && binom <= 1e-8;
    report(
        6,
        pass,
        format!(
            "g1 {:.1e}, g2 {:.1e}, eta1 {eta:.1e}, diagonal {:.1e}, reduction {:.1e}, binomial {binom:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    );
}

#[test]
fn criterion_07_w1_unit_circles() {
    let disk = DomainSpec::unit_disk();
    let w = w1_domains(|_, _| C64::new(1.0 / 12.0, 0.0), &disk, &disk, 2048).unwrap();
    let err = (w.value.re - 1.0 / 3.0).abs();
    report(7, err <= 1e-6, format!("W1 = {:.12}, |W1 - 1/3| = {err:.2e} (<= 1e-6)", w.value.re));
}

fn disk_defect(n: usize, side: f64) -> f64 {
    let model = WHModel::new(DomainSpec::unit_disk(), DomainSpec::unit_disk(), 8.0, n, side)
        .unwrap()
        .with_omega_rule(IndicatorRule::CellAveraged { sub: 16 });
    let p = model.projection_omega().unwrap();
    let d = p.matmul(&p).unwrap().sub(&p).unwrap();
    let abs_trace: f64 = d.eigvalsh().unwrap().iter().map(|v| v.abs()).sum();
    abs_trace / p.trace().re
}

#[test]
fn criterion_08_projection_quality() {
    let model = WHModel::new(DomainSpec::unit_disk(), DomainSpec::square(1.0), 4.0, 24, 4.0).unwrap();
    let p = model.projection_omega().unwrap();
    let cube = p.matmul(&p).unwrap().sub(&p).unwrap().norm_op().unwrap();
    let coarse = disk_defect(16, 4.0);
    let fine = disk_defect(32, 8.0);
    let ratio = coarse / fine;
    report(
        8,
        cube <= 1e-10 && (ratio - 2.0).abs() <= 0.3,
        format!("cube |P^2-P| {cube:.2e} (<= 1e-10), disk defect {coarse:.4} -> {fine:.4}, ratio {ratio:.3} (2 +- 0.3)"),
    );
}

#[test]
fn criterion_09_cross_growth() {
    let t0 = Instant::now();
    let runs = [
        (CrossVariant::Lemma47, "one"),
        (CrossVariant::Prop53a, "bump_xi:2"),
        (CrossVariant::Prop53b, "bump_x_xi:1.5:2"),
    ];
    let mut bands = Vec::new();
    for (variant, symbol) in runs {
        let t = cross_growth_sweep(&CrossConfig {
            variant,
            symbol: symbol.into(),
            ..CrossConfig::default()
        })
        .unwrap();
        bands.push(t.band);
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = bands.iter().all(|&b| b <= 2.0) && secs < 900.0;
    report(
        9,
        pass,
        format!("bands lemma47 {:.3}, prop53a {:.3}, prop53b {:.3} (<= 2), {secs:.1}s", bands[0], bands[1], bands[2]),
    );
}

#[test]
fn criterion_10_szego_trend() {
    let t0 = Instant::now();
    let geo = GeometryConfig::default();
    let alphas = [4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0];
    let one = symbol_registry("one").unwrap();
    let spectra = sweep_spectra(&geo, &alphas, &one, None).unwrap();
    let eta = sweep_from_spectra(&spectra, &eta_fn(1.0), 1.0 / 3.0, 2).unwrap();
    let g0 = sweep_from_spectra(&spectra, &registry("poly:0", 3).unwrap(), 0.0, 2).unwrap();
    let g1 = sweep_from_spectra(&spectra, &registry("poly:1", 3).unwrap(), 0.0, 2).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let gap = (eta.fitted_c1 - 1.0 / 3.0).abs() / (1.0 / 3.0);
    let ok0 = g0.fitted_c1.abs() <= 3.0 * g0.fit_residual;
    let ok1 = g1.fitted_c1.abs() <= 3.0 * g1.fit_residual;
    report(
        10,
        gap <= 0.3 && ok0 && ok1 && secs < 1800.0,
        format!(
            "eta1 c1 {:.5} vs 1/3 (gap {:.1}%), g0 c1 {:.1e} / res {:.1e}, g1 c1 {:.1e} / res {:.1e}, {secs:.1}s",
            eta.fitted_c1,
            100.0 * gap,
            g0.fitted_c1,
            g0.fit_residual,
            g1.fitted_c1,
            g1.fit_residual
        ),
    );
}

#[test]
fn criterion_11_jump() {
    let same = jump_sweep(&JumpConfig {
        g: "eta:1".into(),
        symbol1: "one".into(),
        ..JumpConfig::default()
    })
    .unwrap();
    let half = jump_sweep(&JumpConfig::default()).unwrap();
    let ok_same = same.fitted_c1.abs() <= 3.0 * same.fit_residual;
    let ok_half = half.relative_gap <= 0.3;
    report(
        11,
        ok_same && ok_half,
        format!(
            "a1 = a: c1 {:.1e} / res {:.1e}; a1 = 1/2, g2: c1 {:.5} vs {:.5} (gap {:.1}%)",
            same.fitted_c1,
            same.fit_residual,
            half.fitted_c1,
            half.predicted_w1,
            100.0 * half.relative_gap
        ),
    );
}

