use approx::assert_abs_diff_eq;
use ndarray::Array2;

use szlab_core::ensembles;
use szlab_core::func_classes::{eta_fn, lorentz, registry, zero_fn};
use szlab_core::hs_calculus::Method;
use szlab_core::schatten::{
    bks_check, fractional_power_abs, kappa, lipschitz_ratio, projection_bound_thm28, q_triangle_check,
    schatten_from_values, schatten_norm, singular_values, unbounded_support_bound, BoundSetup,
};
use szlab_core::{DenseOperator, C64};

#[test]
fn singular_values_of_simple_matrices() {
    let d = DenseOperator::diag_real(&[3.0, -4.0]);
    assert_eq!(singular_values(&d).unwrap().values, vec![4.0, 3.0]);
    let u = [C64::new(1.0, 1.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.0)];
    let v = [C64::new(2.0, 0.0), C64::new(0.5, -0.5)];
    let t = DenseOperator::new(Array2::from_shape_fn((3, 2), |(i, j)| u[i] * v[j].conj()));
    let s = singular_values(&t).unwrap().values;
    let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert_abs_diff_eq!(s[0], nu * nv, epsilon = 1e-12);
    assert!(s[1] <= 1e-12);
    let r = ensembles::general(7, 5, &mut ensembles::rng(1));
    let sum: f64 = singular_values(&r).unwrap().values.iter().map(|x| x * x).sum();
    assert_abs_diff_eq!(sum, r.norm_fro().powi(2), epsilon = 1e-10 * sum);
}

#[test]
fn norms_of_diagonal() {
    let d = DenseOperator::diag_real(&[3.0, 4.0]);
    assert_abs_diff_eq!(schatten_norm(&d, 1.0).unwrap().value, 7.0, epsilon = 1e-12);
    assert_abs_diff_eq!(schatten_norm(&d, 2.0).unwrap().value, 5.0, epsilon = 1e-12);
    let r = schatten_norm(&d, 0.5).unwrap();
    assert_eq!(r.q_exponent, 0.5);
    assert_eq!(r.kappa, kappa(0.5));
    assert_eq!(kappa(0.5), 2.0);
}

#[test]
fn rank_one_norm_is_operator_norm() {
    let v = ensembles::general(6, 1, &mut ensembles::rng(2));
    let t = v.matmul(&v.adjoint()).unwrap();
    let op = t.norm_op().unwrap();
    for p in [0.3, 0.5, 1.0, 2.0, 7.0] {
        assert_abs_diff_eq!(schatten_norm(&t, p).unwrap().value, op, epsilon = 1e-12 * op);
    }
}

#[test]
fn fractional_power_identities() {
    let t = DenseOperator::diag_real(&[4.0]);
    assert_abs_diff_eq!(fractional_power_abs(&t, 0.5).unwrap().entries()[[0, 0]].re, 2.0, epsilon = 1e-14);
    let r = ensembles::general(6, 6, &mut ensembles::rng(3));
    let abs = fractional_power_abs(&r, 1.0).unwrap();
    assert!(abs.matmul(&abs).unwrap().sub(&r.adjoint().matmul(&r).unwrap()).unwrap().norm_max() <= 1e-10);
    for (p, sigma) in [(1.0, 0.5), (2.0, 0.3), (0.5, 0.8)] {
        let lhs = schatten_norm(&fractional_power_abs(&r, sigma).unwrap(), p).unwrap().value;
        let rhs = schatten_norm(&r, p * sigma).unwrap().value.powf(sigma);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * rhs);
    }
}

#[test]
fn interpolation_identity() {
    let r = ensembles::general(5, 5, &mut ensembles::rng(4));
    let s = singular_values(&r).unwrap().values;
    for (p, gamma) in [(1.0, 0.5), (2.0, 0.25), (1.5, 0.75)] {
        let powered: Vec<f64> = s.iter().map(|x| x.powf(1.0 / gamma)).collect();
        let lhs = schatten_from_values(&powered, p).unwrap().value;
        let rhs = schatten_norm(&r, p / gamma).unwrap().value.powf(1.0 / gamma);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * rhs);
    }
}

#[test]
fn monotone_in_singular_values() {
    let s = [3.0, 1.0, 0.5, 0.1];
    let m = 1.7;
    let t: Vec<f64> = s.iter().map(|x| x * m * 0.9).collect();
    for p in [0.4, 1.0, 2.5] {
        assert!(schatten_from_values(&t, p).unwrap().value <= m * schatten_from_values(&s, p).unwrap().value);
    }
}

#[test]
fn q_triangle_edge_cases() {
    let t = ensembles::general(4, 4, &mut ensembles::rng(5));
    let z = DenseOperator::zeros(4, 4);
    for q in [0.3, 0.5, 1.0] {
        assert_abs_diff_eq!(q_triangle_check(&t, &z, q).unwrap(), 0.0, epsilon = 1e-12);
        assert!(q_triangle_check(&t, &t, q).unwrap() >= -1e-12);
    }
    assert!(q_triangle_check(&t, &t, 1.5).is_err());
}

#[test]
fn power_inequality_edge_cases() {
    let a = ensembles::wishart(5, 3, &mut ensembles::rng(6));
    assert_abs_diff_eq!(bks_check(&a, &a, 0.5, 1.0).unwrap(), 0.0, epsilon = 1e-10);
    let e = DenseOperator::diag_real(&[1.0, 0.0]);
    let z = DenseOperator::zeros(2, 2);
    assert_abs_diff_eq!(bks_check(&e, &z, 0.5, 1.0).unwrap(), 0.0, epsilon = 1e-12);
    let neg = DenseOperator::diag_real(&[1.0, -1.0]);
    assert!(bks_check(&neg, &z, 0.5, 1.0).is_err());
}

#[test]
fn commuting_projection_has_zero_numerator() {
    let setup = BoundSetup::new(&eta_fn(1.0).with_condition(0.0, 0.9, 3, 1.0), 0.4, 1.0);
    let setup = match setup {
        Ok(s) => s,
        Err(_) => BoundSetup::new(&registry("abs_pow:0.5", 3).unwrap(), 0.4, 1.0).unwrap(),
    };
    let a = DenseOperator::diag_real(&[0.1, 0.4, 0.7, 0.2]);
    let p = DenseOperator::diag_real(&[1.0, 1.0, 0.0, 0.0]);
    let r = projection_bound_thm28(&setup, &a, &p, &Method::Spectral).unwrap();
    assert!(r.numerator <= 1e-14);
    let id = DenseOperator::identity(4);
    let r = projection_bound_thm28(&setup, &a, &id, &Method::Spectral).unwrap();
    assert!(r.numerator <= 1e-14);
}

#[test]
fn random_projection_ratio_is_finite() {
    let f = registry("abs_pow:0.5", 3).unwrap();
    let setup = BoundSetup::new(&f, 0.4, 1.0).unwrap();
    let mut rng = ensembles::rng(7);
    let a = ensembles::gue(10, &mut rng).scale(0.4);
    let p = ensembles::random_projection(10, 4, &mut rng).unwrap();
    let r = projection_bound_thm28(&setup, &a, &p, &Method::Spectral).unwrap();
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
}

#[test]
fn unbounded_support_cases() {
    let mut rng = ensembles::rng(8);
    let a = ensembles::gue(8, &mut rng).scale(2.0);
    let b = a.add(&ensembles::gue(8, &mut rng).scale(0.1)).unwrap().hermitian_part();
    let j = ensembles::general(8, 8, &mut rng);
    let zero = unbounded_support_bound(&zero_fn(), 2.0, &a, &b, &j, 0.5, 1.0, &Method::Spectral).unwrap();
    assert_eq!(zero.ratio, 0.0);
    let r = unbounded_support_bound(&lorentz(), 2.0, &a, &b, &j, 0.5, 1.0, &Method::Spectral).unwrap();
    assert!(r.ratio.is_finite());
    assert!(r.partition_defect <= 1e-12, "{}", r.partition_defect);
    assert!(unbounded_support_bound(&lorentz(), 2.0, &a, &b, &j, 0.5, 0.4, &Method::Spectral).is_err());
}

#[test]
fn lipschitz_ratio_bounded() {
    let f = registry("bump", 3).unwrap();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let mut rng = ensembles::rng(100 + k);
        let a = ensembles::gue(8, &mut rng).scale(0.4);
        let b = a.add(&ensembles::gue(8, &mut rng).scale(0.05)).unwrap().hermitian_part();
        worst = worst.max(lipschitz_ratio(&f, &a, &b, 2.0, &Method::Spectral).unwrap());
    }
    let lip = (0..=2000)
        .map(|i| f.eval_derivative(1, -1.0 + i as f64 / 1000.0).norm())
        .fold(0.0, f64::max);
    assert!(worst <= lip * (1.0 + 1e-9), "{worst} vs {lip}");
}

#[test]
fn setup_constraints() {
    let f = registry("abs_pow:0.5", 3).unwrap();
    assert!(BoundSetup::new(&f, 0.6, 1.0).is_err());
    assert!(BoundSetup::new(&registry("abs_pow:0.5", 2).unwrap(), 0.4, 0.5).is_err());
    assert!(BoundSetup::new(&f, 0.4, 1.0).is_ok());
}
