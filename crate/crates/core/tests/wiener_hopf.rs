use approx::assert_abs_diff_eq;

use szlab_core::error::Error;
use szlab_core::func_classes::{eta_fn, monomial};
use szlab_core::wiener_hopf::{
    spectrum, symbol_registry, trace_d, trace_d_box, validate_mesh, CrossVariant, DomainSpec, Symbol2, WHModel,
};
use szlab_core::{DenseOperator, C64};

fn disks(alpha: f64, n: usize) -> WHModel {
    WHModel::new(DomainSpec::unit_disk(), DomainSpec::unit_disk(), alpha, n, 4.0).unwrap()
}

#[test]
fn real_even_symbol_gives_hermitian_operator() {
    let m = disks(2.0, 10);
    let a = Symbol2::xi("even", |xi: &[f64]| C64::new((-xi[0] * xi[0] - 2.0 * xi[1] * xi[1]).exp(), 0.0), None);
    assert!(m.op_alpha(&a).unwrap().hermitian_defect() <= 1e-10);
}

#[test]
fn operator_norm_bounded_in_alpha() {
    let a = Symbol2::xi("g", |xi: &[f64]| C64::new(1.0 / (1.0 + xi[0] * xi[0] + xi[1] * xi[1]), 0.0), None);
    let norms: Vec<f64> = [4.0, 8.0, 12.0]
        .iter()
        .map(|&alpha| {
            let m = WHModel::new(DomainSpec::unit_disk(), DomainSpec::unit_disk(), alpha, 16, 4.0).unwrap();
            m.op_alpha(&a).unwrap().norm_op().unwrap()
        })
        .collect();
    assert!(norms.iter().all(|&n| n <= 1.0 + 1e-12), "{norms:?}");
}

#[test]
fn unit_symbol_compression_spectrum() {
    let m = disks(4.0, 24);
    let s = m.assemble_s(&Symbol2::constant(1.0)).unwrap();
    let eig = s.eigvalsh().unwrap();
    assert!(eig.iter().all(|&v| (-1e-8..=1.0 + 1e-8).contains(&v)), "{:?}", (eig[0], eig[eig.len() - 1]));
    let p = m.projection_omega().unwrap();
    assert!(p.norm_op().unwrap() <= 1.0 + 1e-12);
}

#[test]
fn jump_operator_splits_into_compressions() {
    let m = disks(3.0, 16);
    let one = Symbol2::constant(1.0);
    let c = 0.3;
    let h = m.assemble_h(&one, &Symbol2::constant(c)).unwrap();
    let s = m.assemble_s(&one).unwrap();
    let expected = DenseOperator::identity(s.rows()).scale(c).add(&s.scale(1.0 - c)).unwrap();
    assert!(h.sub(&expected).unwrap().norm_max() <= 1e-13);
    let same = m.assemble_h(&one, &one).unwrap();
    assert!(same.sub(&DenseOperator::identity(s.rows())).unwrap().norm_max() <= 1e-13);
    let v = m.assemble_v(&one, &Symbol2::constant(c)).unwrap();
    assert!(v.hermitian_part().sub(&h).unwrap().norm_max() <= 1e-13);
}

#[test]
fn trivial_traces() {
    let m = disks(8.0, 48);
    let one = symbol_registry("one").unwrap();
    let t0 = trace_d(&m, &one, &monomial(0)).unwrap();
    assert!(t0.value.abs() <= t0.uncertainty, "{t0:?}");
    let t1 = trace_d(&m, &one, &monomial(1)).unwrap();
    assert!(t1.value.abs() <= 1e-9, "{t1:?}");
    let eta8 = trace_d(&m, &one, &eta_fn(1.0)).unwrap().value;
    let eta12 = trace_d(&disks(12.0, 72), &one, &eta_fn(1.0)).unwrap().value;
    assert!(eta8 > 0.0 && eta12 > eta8);
}

#[test]
fn bulk_shortcut_agrees_with_box_eigenproblem() {
    let m = disks(3.0, 18);
    let one = symbol_registry("one").unwrap();
    let g = eta_fn(1.0);
    let fast = trace_d(&m, &one, &g).unwrap().value;
    let slow = trace_d_box(&m, &one, &g).unwrap().value;
    assert_abs_diff_eq!(fast, slow, epsilon = 1e-8 * (1.0 + fast.abs()));
}

#[test]
fn zero_symbol_has_zero_cross_terms() {
    let m = disks(3.0, 16);
    let zero = symbol_registry("zero").unwrap();
    for v in [CrossVariant::Lemma47, CrossVariant::Prop53a, CrossVariant::Prop53b] {
        assert_eq!(m.cross_term(&zero, v).unwrap().norm_max(), 0.0);
    }
}

#[test]
fn first_cross_term_grows_like_perimeter() {
    let one = symbol_registry("one").unwrap();
    let q = |alpha: f64, n: usize| -> f64 {
        let sv = disks(alpha, n).cross_block(&one, CrossVariant::Lemma47).unwrap().singular_values().unwrap();
        sv.iter().map(|s| s.sqrt()).sum()
    };
    let (a, b) = (q(6.0, 36), q(12.0, 72));
    let ratio = b / a;
    let expected = 2.0 * 12f64.ln() / 6f64.ln();
    assert!(ratio / expected > 0.5 && ratio / expected < 2.0, "{ratio} vs {expected}");
}

#[test]
fn nyquist_violation_is_reported() {
    let err = WHModel::new(DomainSpec::unit_disk(), DomainSpec::disk(2.0), 8.0, 16, 4.0).unwrap_err();
    assert!(matches!(err, Error::Nyquist { have: 16, .. }), "{err:?}");
    let m = disks(2.0, 8);
    assert!(spectrum(&m, &Symbol2::bump_xi(50.0), None).is_err());
}

#[test]
fn box_must_cover_lambda() {
    assert!(WHModel::new(DomainSpec::disk(2.5), DomainSpec::unit_disk(), 2.0, 16, 4.0).is_err());
}

#[test]
fn meshes_match_geometry() {
    let disk = DomainSpec::unit_disk();
    let mesh = disk.boundary_mesh(256).unwrap();
    validate_mesh(&disk, &mesh, 1e-10).unwrap();
    let len: f64 = mesh.iter().map(|n| n.weight).sum();
    assert_abs_diff_eq!(len, 2.0 * std::f64::consts::PI, epsilon = 1e-12);
    let sq = DomainSpec::square(0.5);
    let mesh = sq.boundary_mesh(64).unwrap();
    validate_mesh(&sq, &mesh, 1e-12).unwrap();
    assert_abs_diff_eq!(mesh.iter().map(|n| n.weight).sum::<f64>(), 4.0, epsilon = 1e-12);
    let tri = DomainSpec::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
    assert_abs_diff_eq!(tri.volume(), 0.5, epsilon = 1e-15);
    assert!(tri.indicator(&[0.2, 0.2]) && !tri.indicator(&[0.6, 0.6]));
    validate_mesh(&tri, &tri.boundary_mesh(90).unwrap(), 1e-12).unwrap();
    let ball = DomainSpec::ball(3, vec![0.0; 3], 1.0).unwrap();
    let mesh = ball.boundary_mesh(400).unwrap();
    assert_abs_diff_eq!(mesh.iter().map(|n| n.weight).sum::<f64>(), 4.0 * std::f64::consts::PI, epsilon = 1e-6);
}

#[test]
fn domain_round_trips_through_toml() {
    let d = DomainSpec::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
    let text = toml::to_string(&d).unwrap();
    let back: DomainSpec = toml::from_str(&text).unwrap();
    assert_eq!(toml::to_string(&back).unwrap(), text);
    let disk: DomainSpec = toml::from_str("dim = 2\nkind = \"ball\"\ncenter = [0.0, 0.0]\nradius = 1.0\n").unwrap();
    assert_abs_diff_eq!(disk.volume(), std::f64::consts::PI, epsilon = 1e-15);
}
