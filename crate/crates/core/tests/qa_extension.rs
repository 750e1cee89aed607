use szlab_core::ensembles;
use szlab_core::func_classes::{abs_pow, bump_gauss, seminorm_n};
use szlab_core::hs_calculus::{hs_apply, QuadratureSpec};
use szlab_core::qa_extension::{
    build_extension, dbar_finite_difference, empirical_omega_constant, holder_check_plane, omega_profile,
    verify_l1_weight,
};

#[test]
fn rescaled_extension_is_covariant() {
    let f = abs_pow(0.5, 2);
    let ext = build_extension(&f).unwrap();
    for r in [0.5, 2.0] {
        let er = build_extension(&f.rescaled(r).unwrap()).unwrap();
        for &(x, y) in &[(0.1, 0.05), (-0.3, 0.1), (0.02, -0.015), (0.4, 0.0)] {
            let lhs = er.eval_ftilde(x, y);
            let rhs = ext.eval_ftilde(r * x, r * y) * r.powf(-0.5);
            assert!((lhs - rhs).norm() <= 1e-12, "r={r} ({x},{y}): {lhs} vs {rhs}");
        }
    }
}

#[test]
fn omega_majorant_constant_is_finite() {
    let f = abs_pow(0.5, 2);
    let ext = build_extension(&f).unwrap();
    let s = seminorm_n(&f).unwrap().value;
    let profile = omega_profile(&ext, s, 40, 12);
    let c = empirical_omega_constant(&profile);
    assert!(c.is_finite() && c > 0.0, "{c}");
    for p in profile.iter().filter(|p| p.y.abs() >= p.x.abs()) {
        assert_eq!(p.omega_abs, 0.0);
    }
}

#[test]
fn omega_is_dbar_of_extension() {
    let ext = build_extension(&abs_pow(0.5, 3)).unwrap();
    for &(x, y) in &[(0.3, 0.1), (-0.5, 0.2), (0.12, -0.05)] {
        let fd = dbar_finite_difference(&ext, x, y, 1e-5);
        let om = ext.eval_omega(x, y);
        assert!((fd - om).norm() <= 1e-6 * (1.0 + om.norm()), "({x},{y}): {fd} vs {om}");
    }
}

#[test]
fn l1_weight_is_self_convergent() {
    let rep = verify_l1_weight(&build_extension(&abs_pow(0.5, 2)).unwrap()).unwrap();
    assert!(rep.value.is_finite() && rep.relative_change < 0.01, "{rep:?}");
}

#[test]
fn plane_holder_constant_is_finite() {
    let rep = holder_check_plane(&build_extension(&abs_pow(0.5, 2)).unwrap(), 7);
    assert_eq!(rep.kappa, 0.5);
    assert!(rep.constant.is_finite() && rep.origin_constant.is_finite(), "{rep:?}");
}

#[test]
fn extension_orders_give_the_same_operator() {
    let a = ensembles::gue(12, &mut ensembles::rng(11)).scale(0.5);
    let spec = QuadratureSpec::with_tolerance(1e-8);
    let r2 = hs_apply(&build_extension(&bump_gauss(2)).unwrap(), &a, &spec).unwrap();
    let r3 = hs_apply(&build_extension(&bump_gauss(3)).unwrap(), &a, &spec).unwrap();
    let d = r2.operator.sub(&r3.operator).unwrap().norm_op().unwrap();
    assert!(d <= 1e-6, "{d}");
}
