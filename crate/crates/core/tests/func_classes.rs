use approx::assert_abs_diff_eq;

use szlab_core::func_classes::{
    abs_pow, eta, holder_modulus, registry, seminorm_n, seminorm_with_grid, split_at_singularity, zero_fn,
    SeminormGrid,
};

#[test]
fn entropy_is_symmetric_and_non_negative() {
    for beta in [0.5, 1.0, 2.0, 3.0] {
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let v = eta(beta, t);
            assert!(v >= 0.0, "eta({beta}, {t}) = {v}");
            assert_abs_diff_eq!(v, eta(beta, 1.0 - t), epsilon = 1e-14);
        }
    }
    assert_abs_diff_eq!(eta(1.0, 0.5), std::f64::consts::LN_2, epsilon = 1e-15);
    assert_abs_diff_eq!(eta(2.0, 0.5), std::f64::consts::LN_2, epsilon = 1e-15);
    assert_eq!(eta(3.0, 0.0), 0.0);
}

#[test]
fn root_seminorm_is_finite_and_at_least_one() {
    let s = seminorm_n(&abs_pow(0.5, 2)).unwrap().value;
    assert!(s.is_finite() && s >= 1.0, "{s}");
    assert_eq!(seminorm_n(&zero_fn().with_condition(0.0, 1.0, 2, 1.0)).unwrap().value, 0.0);
}

#[test]
fn registered_functions_satisfy_their_bound_on_a_subgrid() {
    for label in ["abs_pow:0.5", "abs_pow:1.5", "bump", "bump_cos:3", "bump_exp", "bump_gauss", "bump_poly:2"] {
        let f = registry(label, 3).unwrap();
        let cond = f.require_condition().unwrap();
        let s = seminorm_n(&f).unwrap().value;
        for d in 0..8 {
            for j in 0..64 {
                let u = 10f64.powf(-(d as f64) - j as f64 / 64.0);
                for side in [-1.0, 1.0] {
                    let x = cond.x0 + side * cond.radius * u;
                    let dx = (x - cond.x0).abs();
                    for k in 0..=cond.n {
                        let lhs = f.eval_derivative(k, x).norm();
                        let rhs = s * dx.powf(cond.gamma - k as f64);
                        assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-300, "{label} k={k} x={x}: {lhs} > {rhs}");
                    }
                }
            }
        }
    }
}

#[test]
fn split_reassembles_entropy() {
    let g = registry("eta:1", 2).unwrap();
    let (g1, g2) = split_at_singularity(&g, 0.0, 0.25).unwrap();
    assert_eq!(g2.eval(0.0).norm(), 0.0);
    for i in 0..=400 {
        let t = i as f64 / 400.0;
        assert_abs_diff_eq!((g1.eval(t) + g2.eval(t) - g.eval(t)).norm(), 0.0, epsilon = 1e-14);
        if t >= 0.25 {
            assert_abs_diff_eq!((g2.eval(t) - g.eval(t)).norm(), 0.0, epsilon = 1e-14);
        }
    }
}

#[test]
fn split_piece_seminorm_stays_bounded_over_radii() {
    let g = abs_pow(0.5, 2);
    let base = seminorm_n(&g).unwrap().value;
    let grid = SeminormGrid {
        per_decade: 128,
        decades: 8,
        uniform: 512,
    };
    let ratios: Vec<f64> = (1..=6)
        .map(|k| {
            let (g1, _) = split_at_singularity(&g, 0.0, 2f64.powi(-k)).unwrap();
            seminorm_with_grid(&g1, grid).unwrap().value / base
        })
        .collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min < 1.5, "{ratios:?}");
}

#[test]
fn rescaling_preserves_seminorm_and_holder_constant() {
    let f = abs_pow(0.5, 2);
    let s = seminorm_n(&f).unwrap().value;
    let h = holder_modulus(&f).unwrap();
    assert_eq!(h.kappa, 0.5);
    for r in [0.25, 3.0] {
        let g = f.rescaled(r).unwrap();
        assert_abs_diff_eq!(seminorm_n(&g).unwrap().value, s, epsilon = 1e-9 * s);
        assert_abs_diff_eq!(holder_modulus(&g).unwrap().constant, h.constant, epsilon = 1e-9 * h.constant);
    }
    let smooth = registry("abs_pow:2", 3).unwrap();
    assert_eq!(holder_modulus(&smooth).unwrap().kappa, 1.0);
}

#[test]
fn unknown_labels_are_rejected() {
    assert!(registry("nope", 2).is_err());
    assert!(registry("abs_pow:x", 2).is_err());
    assert!(registry("eta:-1", 2).is_err());
}
