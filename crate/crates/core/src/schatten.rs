//! Singular values, Schatten quasi-norms, and numerical harnesses for the
//! quasi-commutator inequalities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::func_classes::{seminorm_n, CutoffZeta, SingularFunction};
use crate::hs_calculus::{apply, quasi_commutator, resolvent, Method};
use crate::jet::Jet;
use crate::operator::{unitary_conjugate, DenseOperator, C64};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularValueProfile {
    /// Descending, non-negative.
    pub values: Vec<f64>,
    pub source_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuasiNormReport {
    pub p: f64,
    pub value: f64,
    /// `q = min(p, 1)`; the quasi-norm is a `q`-norm.
    pub q_exponent: f64,
    /// Quasi-triangle constant `2^{1/q - 1}`.
    pub kappa: f64,
}

pub fn kappa(q: f64) -> f64 {
    2f64.powf(1.0 / q - 1.0)
}

pub fn singular_values(t: &DenseOperator) -> Result<SingularValueProfile> {
    let source_dim = t.rows().max(t.cols());
    Ok(SingularValueProfile {
        values: rank_truncated(t.singular_values()?, source_dim),
        source_dim,
    })
}

/// Zeroes values below `dim · ε · s_1`, the rounding floor of a dense SVD;
/// for `p < 1` such values would otherwise dominate `Σ s_k^p`.
pub fn rank_truncated(mut values: Vec<f64>, dim: usize) -> Vec<f64> {
    let top = values.iter().copied().fold(0.0, f64::max);
    let floor = dim as f64 * f64::EPSILON * top;
    for v in values.iter_mut() {
        if *v < floor {
            *v = 0.0;
        }
    }
    values
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || p.is_nan() {
        return Err(Error::InvalidParameter(format!("Schatten exponent must be positive, got {p}")));
    }
    Ok(())
}

/// `(Σ s_k^p)^{1/p}`, or `s_1` for `p = ∞`.
pub fn schatten_from_values(values: &[f64], p: f64) -> Result<QuasiNormReport> {
    check_p(p)?;
    let value = if p.is_infinite() {
        values.iter().copied().fold(0.0, f64::max)
    } else {
        let top = values.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            0.0
        } else {
            // scaled to avoid under/overflow for small p
            let s: f64 = values.iter().map(|v| (v / top).powf(p)).sum();
            top * s.powf(1.0 / p)
        }
    };
    let q = p.min(1.0);
    Ok(QuasiNormReport {
        p,
        value,
        q_exponent: q,
        kappa: kappa(q),
    })
}

pub fn schatten_norm(t: &DenseOperator, p: f64) -> Result<QuasiNormReport> {
    check_p(p)?;
    schatten_from_values(&singular_values(t)?.values, p)
}

fn norm_p(t: &DenseOperator, p: f64) -> Result<f64> {
    Ok(schatten_norm(t, p)?.value)
}

/// `|T|^σ = V diag(s^σ) V*` from `T = U diag(s) V*`.
pub fn fractional_power_abs(t: &DenseOperator, sigma: f64) -> Result<DenseOperator> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1], got {sigma}")));
    }
    let k = t.rows().min(t.cols());
    if t.norm_max() == 0.0 {
        return Ok(DenseOperator::zeros(t.cols(), t.cols()));
    }
    let (_, s, v) = t.svd()?;
    let d: Vec<C64> = s.iter().take(k).map(|x| C64::new(x.max(0.0).powf(sigma), 0.0)).collect();
    let v = v.slice(ndarray::s![.., ..k]).to_owned();
    let mut scaled = v.clone();
    for (j, dj) in d.iter().enumerate() {
        scaled.column_mut(j).mapv_inplace(|z| z * dj);
    }
    let out = scaled.dot(&v.t().mapv(|z| z.conj()));
    Ok(DenseOperator::new(out).hermitian_part())
}

/// Slack `‖T1‖^q + ‖T2‖^q - ‖T1 + T2‖^q` in `S_q`; non-negative up to rounding.
pub fn q_triangle_check(t1: &DenseOperator, t2: &DenseOperator, q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1], got {q}")));
    }
    let a = norm_p(t1, q)?.powf(q);
    let b = norm_p(t2, q)?.powf(q);
    let c = norm_p(&t1.add(t2)?, q)?.powf(q);
    Ok(a + b - c)
}

fn require_psd(a: &DenseOperator, name: &str) -> Result<Vec<f64>> {
    let vals = a.eigvalsh()?;
    let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if vals.iter().any(|&v| v < -1e-10 * scale) {
        return Err(Error::Domain(format!("{name} is not positive semidefinite")));
    }
    Ok(vals)
}

fn psd_power(a: &DenseOperator, gamma: f64) -> Result<DenseOperator> {
    let (vals, vecs) = a.eigh()?;
    let d: Vec<C64> = vals.iter().map(|&v| C64::new(v.max(0.0).powf(gamma), 0.0)).collect();
    Ok(DenseOperator::new(unitary_conjugate(&vecs, &d)).hermitian_part())
}

/// Slack `‖|A - B|^γ‖_p - ‖A^γ - B^γ‖_p` for positive semidefinite `A`, `B`.
pub fn bks_check(a: &DenseOperator, b: &DenseOperator, gamma: f64, p: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    check_p(p)?;
    require_psd(a, "A")?;
    require_psd(b, "B")?;
    let lhs = norm_p(&fractional_power_abs(&a.sub(b)?, gamma)?, p)?;
    let rhs = norm_p(&psd_power(a, gamma)?.sub(&psd_power(b, gamma)?)?, p)?;
    Ok(lhs - rhs)
}

/// `‖R(z;A) J - J R(z;B) + R(z;A) V R(z;B)‖` in operator norm.
pub fn resolvent_identity_defect(
    a: &DenseOperator,
    b: &DenseOperator,
    j: &DenseOperator,
    z: C64,
) -> Result<f64> {
    let ra = resolvent(a, z)?;
    let rb = resolvent(b, z)?;
    let v = a.matmul(j)?.sub(&j.matmul(b)?)?;
    let lhs = ra.matmul(j)?.sub(&j.matmul(&rb)?)?;
    let corr = ra.matmul(&v)?.matmul(&rb)?;
    lhs.add(&corr)?.norm_op()
}

/// Relative slack of `‖R(z;A) V R(z;B)‖_p <= ‖|V|^σ‖_p ‖J‖^{1-σ} 2^{1-σ} / |Im z|^{1+σ}`:
/// `(rhs - lhs) / max(rhs, tiny)`.
pub fn lemma22_slack(
    a: &DenseOperator,
    b: &DenseOperator,
    j: &DenseOperator,
    z: C64,
    sigma: f64,
    p: f64,
) -> Result<f64> {
    let ra = resolvent(a, z)?;
    let rb = resolvent(b, z)?;
    let v = a.matmul(j)?.sub(&j.matmul(b)?)?;
    let lhs = norm_p(&ra.matmul(&v)?.matmul(&rb)?, p)?;
    let vs = norm_p(&fractional_power_abs(&v, sigma)?, p)?;
    let rhs = vs * j.norm_op()?.powf(1.0 - sigma) * 2f64.powf(1.0 - sigma) / z.im.abs().powf(1.0 + sigma);
    Ok((rhs - lhs) / rhs.max(f64::MIN_POSITIVE))
}

// ---------------------------------------------------------------------------
// Quasi-commutator bounds

/// Validated parameters of the quasi-commutator bound for a fixed `f`.
#[derive(Clone, Debug)]
pub struct BoundSetup {
    pub f: SingularFunction,
    pub seminorm: f64,
    pub sigma: f64,
    pub p: f64,
    pub gamma: f64,
    pub radius: f64,
    pub n: usize,
}

impl BoundSetup {
    /// Checks `n >= 2`, `σ ∈ (0, 1]`, `σ < γ` and `(n - σ)^{-1} < min(p, 1)`.
    pub fn new(f: &SingularFunction, sigma: f64, p: f64) -> Result<Self> {
        check_p(p)?;
        let cond = f.require_condition()?;
        if cond.n < 2 {
            return Err(Error::Constraint(format!("need n >= 2, got n = {}", cond.n)));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::Constraint(format!("sigma must lie in (0, 1], got {sigma}")));
        }
        if sigma >= cond.gamma {
            return Err(Error::Constraint(format!(
                "need sigma < gamma, got sigma = {sigma}, gamma = {}",
                cond.gamma
            )));
        }
        let q = p.min(1.0);
        if 1.0 / (cond.n as f64 - sigma) >= q {
            return Err(Error::Constraint(format!(
                "need 1/(n - sigma) < q = {q}; n = {} and sigma = {sigma} are not admissible",
                cond.n
            )));
        }
        let seminorm = seminorm_n(f)?.value;
        Ok(BoundSetup {
            f: f.clone(),
            seminorm,
            sigma,
            p,
            gamma: cond.gamma,
            radius: cond.radius,
            n: cond.n,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundRatio {
    pub ratio: f64,
    pub numerator: f64,
    pub denominator: f64,
}

fn ratio_of(numerator: f64, denominator: f64, scale: f64) -> BoundRatio {
    let ratio = if denominator > 0.0 {
        numerator / denominator
    } else if numerator <= 1e-12 * scale.max(1.0) {
        0.0
    } else {
        f64::INFINITY
    };
    BoundRatio {
        ratio,
        numerator,
        denominator,
    }
}

/// `‖f(A)J - Jf(B)‖_p / (⦀f⦀_n R^{γ-σ} ‖J‖^{1-σ} ‖|V|^σ‖_p)`.
pub fn bound_ratio_thm24(
    setup: &BoundSetup,
    a: &DenseOperator,
    b: &DenseOperator,
    j: &DenseOperator,
    method: &Method,
) -> Result<BoundRatio> {
    let qc = quasi_commutator(&setup.f, a, b, j, method)?;
    let num = norm_p(&qc.value, setup.p)?;
    let vs = norm_p(&fractional_power_abs(&qc.v, setup.sigma)?, setup.p)?;
    let den = setup.seminorm
        * setup.radius.powf(setup.gamma - setup.sigma)
        * j.norm_op()?.powf(1.0 - setup.sigma)
        * vs;
    Ok(ratio_of(num, den, setup.seminorm))
}

pub fn require_projection(p: &DenseOperator) -> Result<()> {
    let p2 = p.matmul(p)?;
    let idem = p2.sub(p)?.norm_max();
    let herm = p.hermitian_defect();
    if idem > 1e-10 || herm > 1e-10 {
        return Err(Error::Domain(format!(
            "P is not an orthogonal projection (|P^2 - P| = {idem:e}, |P - P*| = {herm:e})"
        )));
    }
    Ok(())
}

/// `‖f(PAP)P - Pf(A)‖_p / (⦀f⦀_n R^{γ-σ} ‖|PA(I-P)|^σ‖_p)`.
pub fn projection_bound_thm28(
    setup: &BoundSetup,
    a: &DenseOperator,
    p: &DenseOperator,
    method: &Method,
) -> Result<BoundRatio> {
    require_projection(p)?;
    let pap = p.matmul(a)?.matmul(p)?.hermitian_part();
    let qc = quasi_commutator(&setup.f, &pap, a, p, method)?;
    let num = norm_p(&qc.value, setup.p)?;
    let m = p.rows();
    let comp = DenseOperator::identity(m).sub(p)?;
    let cross = p.matmul(a)?.matmul(&comp)?;
    let vs = norm_p(&fractional_power_abs(&cross, setup.sigma)?, setup.p)?;
    let den = setup.seminorm * setup.radius.powf(setup.gamma - setup.sigma) * vs;
    Ok(ratio_of(num, den, setup.seminorm))
}

/// Partition of unity element `Υ(t) = ζ((1 + |t|)/2)`: equal to 1 at 0, supported
/// in `(-1, 1)`, with `Σ_m Υ(t - m) = 1`.
pub fn upsilon_jet(t: f64) -> Jet {
    if t >= 0.0 {
        CutoffZeta.scaled_jet(t, -1.0, 2.0)
    } else {
        CutoffZeta.scaled_jet(t, 1.0, -2.0)
    }
}

/// Pieces `g_m = Υ(· - m) g` for `m` in `lo..=hi`.
pub fn partition_pieces(g: &SingularFunction, lo: i64, hi: i64) -> Vec<SingularFunction> {
    (lo..=hi)
        .map(|m| {
            let gm = g.clone();
            let shift = m as f64;
            SingularFunction::new(format!("{}[piece {m}]", g.label()), move |t| {
                let u = upsilon_jet(t - shift);
                if u.value().norm() == 0.0 && u.coeff(1).norm() == 0.0 {
                    Jet::zero()
                } else {
                    gm.jet(t) * u
                }
            })
            .with_support(shift - 1.0, shift + 1.0)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct UnboundedReport {
    /// `‖g(A)J - Jg(B)‖_p / (‖J‖^{1-σ} ‖|V|^σ‖_p)`.
    pub ratio: f64,
    /// Same numerator assembled from the pieces through the q-triangle inequality.
    pub piece_bound_ratio: f64,
    pub pieces: usize,
    /// Largest deviation of `Σ g_m` from `g` at the spectra.
    pub partition_defect: f64,
}

/// Quasi-commutator ratio for smooth `g` with `|g^(k)(x)| <= (1+|x|)^{-β}`, `qβ > 1`.
#[allow(clippy::too_many_arguments)]
pub fn unbounded_support_bound(
    g: &SingularFunction,
    beta: f64,
    a: &DenseOperator,
    b: &DenseOperator,
    j: &DenseOperator,
    sigma: f64,
    p: f64,
    method: &Method,
) -> Result<UnboundedReport> {
    check_p(p)?;
    let q = p.min(1.0);
    if q * beta <= 1.0 {
        return Err(Error::Constraint(format!("need q*beta > 1, got q = {q}, beta = {beta}")));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::Constraint(format!("sigma must lie in (0, 1], got {sigma}")));
    }
    let sa = a.eigvalsh()?;
    let sb = b.eigvalsh()?;
    let lo = sa[0].min(sb[0]).floor() as i64 - 1;
    let hi = sa[sa.len() - 1].max(sb[sb.len() - 1]).ceil() as i64 + 1;
    let pieces = partition_pieces(g, lo, hi);
    let spectral = Method::Spectral;
    let qc = quasi_commutator(g, a, b, j, &spectral)?;
    let num = norm_p(&qc.value, p)?;
    let mut piece_sum = 0.0;
    let mut assembled = DenseOperator::zeros(a.rows(), b.rows());
    for gm in &pieces {
        let pc = quasi_commutator(gm, a, b, j, method)?;
        piece_sum += norm_p(&pc.value, p)?.powf(q);
        assembled = assembled.add(&pc.value)?;
    }
    let mut defect = 0.0f64;
    for &x in sa.iter().chain(sb.iter()) {
        let s: C64 = pieces.iter().map(|gm| gm.eval(x)).sum();
        defect = defect.max((s - g.eval(x)).norm());
    }
    defect = defect.max(assembled.sub(&qc.value)?.norm_max());
    let vs = norm_p(&fractional_power_abs(&qc.v, sigma)?, p)?;
    let den = j.norm_op()?.powf(1.0 - sigma) * vs;
    let r = ratio_of(num, den, 1.0);
    Ok(UnboundedReport {
        ratio: r.ratio,
        piece_bound_ratio: ratio_of(piece_sum.powf(1.0 / q), den, 1.0).ratio,
        pieces: pieces.len(),
        partition_defect: defect,
    })
}

/// `‖f(A) - f(B)‖_p / ‖A - B‖_p`.
pub fn lipschitz_ratio(f: &SingularFunction, a: &DenseOperator, b: &DenseOperator, p: f64, method: &Method) -> Result<f64> {
    let (fa, _) = apply(f, a, method)?;
    let (fb, _) = apply(f, b, method)?;
    let num = norm_p(&fa.sub(&fb)?, p)?;
    let den = norm_p(&a.sub(b)?, p)?;
    Ok(ratio_of(num, den, 1.0).ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles;

    #[test]
    fn diag_norms() {
        let d = DenseOperator::diag_real(&[3.0, 4.0]);
        assert!((schatten_norm(&d, 1.0).unwrap().value - 7.0).abs() < 1e-12);
        assert!((schatten_norm(&d, 2.0).unwrap().value - 5.0).abs() < 1e-12);
        assert!(schatten_norm(&d, 0.0).is_err());
        assert_eq!(schatten_norm(&d, 0.5).unwrap().kappa, 2.0);
    }

    #[test]
    fn abs_power_of_diag() {
        let t = DenseOperator::diag_real(&[4.0]);
        let r = fractional_power_abs(&t, 0.5).unwrap();
        assert!((r.entries()[[0, 0]].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bks_simple() {
        let a = DenseOperator::diag_real(&[1.0, 0.0]);
        let b = DenseOperator::zeros(2, 2);
        assert!(bks_check(&a, &b, 0.5, 1.0).unwrap().abs() < 1e-12);
        let neg = DenseOperator::diag_real(&[-1.0, 0.0]);
        assert!(bks_check(&neg, &b, 0.5, 1.0).is_err());
    }

    #[test]
    fn partition_sums_to_one() {
        let one = SingularFunction::new("one", |_| Jet::constant(1.0));
        let pieces = partition_pieces(&one, -4, 4);
        for i in 0..200 {
            let t = -3.0 + 6.0 * i as f64 / 199.0;
            let s: f64 = pieces.iter().map(|p| p.eval_real(t)).sum();
            assert!((s - 1.0).abs() < 1e-12, "{t}: {s}");
        }
    }

    #[test]
    fn constraint_rejects_n2_sigma1() {
        let f = crate::func_classes::abs_pow(2.5, 2);
        assert!(matches!(BoundSetup::new(&f, 1.0, 1.0), Err(Error::Constraint(_))));
    }

    #[test]
    fn projection_identity_gives_zero() {
        let mut r = ensembles::rng(5);
        let a = ensembles::gue(6, &mut r);
        let setup = BoundSetup::new(&crate::func_classes::abs_pow(0.5, 3), 0.4, 1.0).unwrap();
        let rep = projection_bound_thm28(&setup, &a, &DenseOperator::identity(6), &Method::Spectral).unwrap();
        assert!(rep.numerator < 1e-12);
    }
}
