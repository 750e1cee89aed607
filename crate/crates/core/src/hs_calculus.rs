//! `f(A)` for Hermitian `A` through the Helffer-Sjöstrand integral
//! `f(A) = (1/π) ∬ ω(x, y) (A - x - iy)^{-1} dx dy`, and the spectral oracle.
//!
//! The cone `|y| < |x|` is parametrized by `(x, v = y/|x|)`, `dy = |x| dv`.
//! In the `x` direction the integral is split into dyadic shells toward the
//! singular point; shells are added until the `L¹` bound of what remains,
//! `(1/π) ∬ |ω|/|y|`, drops below a quarter of the tolerance.

use ndarray::Array2;
use ndarray_linalg::Inverse;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func_classes::SingularFunction;
use crate::operator::{unitary_conjugate, DenseOperator, C64};
use crate::qa_extension::{build_extension, shell_tail, shell_weights, QAExtension, ShellOptions};
use crate::quadrature::{integrate, pairwise_sum, AdaptiveOptions, QuadValue};

/// How the resolvent is applied inside the integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Diagonalize once; one scalar integral per eigenvalue.
    #[default]
    Eigen,
    /// Factorize `A - z` at every quadrature node.
    Direct,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(Scheme::Eigen),
            "direct" => Ok(Scheme::Direct),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Absolute tolerance on the operator norm of the result.
    pub target_tolerance: f64,
    /// Maximum number of dyadic shells toward the singular point; also scales the
    /// adaptive panel budgets.
    pub max_refinement_depth: usize,
    /// The strip `|y| < y_floor` is left out of the integral.
    pub y_floor: f64,
    pub scheme: Scheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            target_tolerance: 1e-7,
            max_refinement_depth: 60,
            y_floor: 0.0,
            scheme: Scheme::Eigen,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(tol: f64) -> Self {
        QuadratureSpec {
            target_tolerance: tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_tolerance > 0.0) {
            return Err(Error::InvalidParameter("target_tolerance must be positive".into()));
        }
        if !(self.y_floor >= 0.0) {
            return Err(Error::InvalidParameter("y_floor must be non-negative".into()));
        }
        if self.max_refinement_depth == 0 {
            return Err(Error::InvalidParameter("max_refinement_depth must be positive".into()));
        }
        Ok(())
    }

    fn panel_budget(&self) -> usize {
        (16 * self.max_refinement_depth).max(64)
    }
}

/// Output of [`hs_apply`] with its error certificate.
#[derive(Clone, Debug)]
pub struct HsResult {
    pub operator: DenseOperator,
    /// Bound on the operator-norm quadrature error.
    pub error_estimate: f64,
    pub evaluations: usize,
    pub shells: usize,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, Serialize)]
pub struct HsCertificate {
    pub error_estimate: f64,
    pub target_tolerance: f64,
    pub evaluations: usize,
    pub shells: usize,
    pub scheme: Scheme,
}

impl HsResult {
    pub fn certificate(&self, spec: &QuadratureSpec) -> HsCertificate {
        HsCertificate {
            error_estimate: self.error_estimate,
            target_tolerance: spec.target_tolerance,
            evaluations: self.evaluations,
            shells: self.shells,
            scheme: self.scheme,
        }
    }
}

/// `(A - z)^{-1}`.
pub fn resolvent(a: &DenseOperator, z: C64) -> Result<DenseOperator> {
    if z.im == 0.0 {
        return Err(Error::Domain(format!("resolvent needs Im z != 0, got z = {z}")));
    }
    a.require_hermitian()?;
    let mut m = a.entries().clone();
    for i in 0..m.nrows() {
        m[[i, i]] -= z;
    }
    Ok(DenseOperator::new(m.inv()?))
}

/// Shell layout shared by both schemes, in normalized coordinates.
struct ShellPlan {
    /// `(a, b)` intervals of `x`, outermost first.
    intervals: Vec<(f64, f64)>,
    /// Neglected `L¹` mass beyond the last shell (normalized units).
    tail: f64,
    shells: usize,
}

fn plan_shells(ext: &QAExtension, tol: f64, depth: usize) -> Result<ShellPlan> {
    let (w, _) = shell_weights(
        ext,
        ShellOptions {
            shells: depth,
            rel_tol: 1e-3,
        },
    );
    // suffix sums: remaining[k] = mass of shells k.. plus extrapolated tail
    let tail = shell_tail(&w);
    let mut remaining = vec![0.0; w.len() + 1];
    remaining[w.len()] = tail;
    for k in (0..w.len()).rev() {
        remaining[k] = remaining[k + 1] + w[k];
    }
    let cut = (0..=w.len()).find(|&k| remaining[k] < 0.25 * tol);
    let Some(shells) = cut else {
        return Err(Error::Quadrature {
            target: tol,
            achieved: remaining[w.len()],
            evaluations: 0,
        });
    };
    let (lo, hi) = ext.normalized_support();
    let mut intervals = Vec::new();
    for k in 0..shells {
        let outer = 0.5f64.powi(k as i32);
        let inner = 0.5 * outer;
        for (a, b) in [(-outer, -inner), (inner, outer)] {
            let (a, b) = (a.max(lo), b.min(hi));
            if b > a && w[k] > 0.0 {
                intervals.push((a, b));
            }
        }
    }
    Ok(ShellPlan {
        intervals,
        tail: remaining[shells],
        shells,
    })
}

fn breakpoints(a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
    let mut p = vec![a, b];
    for &e in extra {
        if e > a && e < b {
            p.push(e);
        }
    }
    p.sort_by(|x, y| x.partial_cmp(y).unwrap());
    p
}

/// Integrates `(1/π) ∬ ω_h(x, y) K(x + iy) dx dy` over the planned shells for a
/// kernel `K` producing values of type `T`. Returns value, error, evaluations.
fn cone_integral<T, K>(
    ext: &QAExtension,
    plan: &ShellPlan,
    spec: &QuadratureSpec,
    tol: f64,
    kernel: K,
    zero: T,
    extra_breaks: &[f64],
    upper_only: bool,
) -> (T, f64, usize, bool)
where
    T: QuadValue + ComplexScale,
    K: Fn(C64) -> T,
{
    let n_int = plan.intervals.len().max(1) as f64;
    let budget = spec.panel_budget();
    let y_floor = spec.y_floor / ext.radius();
    let mut parts = Vec::with_capacity(plan.intervals.len());
    let mut err = 0.0;
    let mut evals = 0;
    let mut converged = true;
    for &(a, b) in &plan.intervals {
        let shell_tol = 0.5 * tol / n_int;
        let inner_tol = 0.25 * shell_tol / (b - a);
        let mut inner_err = 0.0f64;
        let mut inner_evals = 0;
        let mut inner_ok = true;
        let outer = integrate(
            |x: f64| {
                let slice = ext.slice(x);
                let ax = x.abs();
                let v_min = if y_floor > 0.0 { (y_floor / ax).min(1.0) } else { 0.0 };
                let mut total = zero.zero_like();
                if v_min >= 1.0 {
                    return total;
                }
                let halves: &[f64] = if upper_only { &[1.0] } else { &[1.0, -1.0] };
                for &sgn in halves {
                    let r = integrate(
                        |v: f64| {
                            let y = sgn * v * ax;
                            let w = slice.omega(y);
                            if w == C64::new(0.0, 0.0) {
                                return zero.zero_like();
                            }
                            kernel(C64::new(x, y)).mul_complex(w * ax / std::f64::consts::PI)
                        },
                        &breakpoints(v_min, 1.0, &[0.5]),
                        AdaptiveOptions::new(inner_tol).with_max_panels(budget),
                    );
                    inner_err = inner_err.max(r.error);
                    inner_evals += r.evaluations;
                    inner_ok &= r.converged;
                    total.add_scaled(&r.value, 1.0);
                }
                total
            },
            &breakpoints(a, b, extra_breaks),
            AdaptiveOptions::new(0.5 * shell_tol).with_max_panels(budget),
        );
        converged &= outer.converged && inner_ok;
        err += outer.error + inner_err * (b - a);
        evals += inner_evals;
        parts.push(outer.value);
    }
    let value = pairwise_sum(&parts).unwrap_or_else(|| zero.zero_like());
    (value, err, evals, converged)
}

/// Multiplication by a complex scalar for the supported value types.
pub trait ComplexScale {
    fn mul_complex(self, c: C64) -> Self;
}

impl ComplexScale for C64 {
    fn mul_complex(self, c: C64) -> Self {
        self * c
    }
}

impl ComplexScale for Array2<C64> {
    fn mul_complex(mut self, c: C64) -> Self {
        self.mapv_inplace(|z| z * c);
        self
    }
}

/// Scalar Helffer-Sjöstrand integral for a single eigenvalue (normalized units).
fn hs_scalar(ext: &QAExtension, plan: &ShellPlan, spec: &QuadratureSpec, lambda: f64, tol: f64) -> (C64, f64, usize, bool) {
    let real = ext.is_real();
    let kernel = |z: C64| 1.0 / (C64::new(lambda, 0.0) - z);
    if real {
        // f(λ) = 2 Re of the upper half-plane part
        let (v, e, n, ok) = cone_integral(ext, plan, spec, 0.5 * tol, kernel, C64::new(0.0, 0.0), &[lambda], true);
        (C64::new(2.0 * v.re, 0.0), 2.0 * e, n, ok)
    } else {
        cone_integral(ext, plan, spec, tol, kernel, C64::new(0.0, 0.0), &[lambda], false)
    }
}

/// `f(A)` by the Helffer-Sjöstrand formula with a certified error estimate.
pub fn hs_apply(ext: &QAExtension, a: &DenseOperator, spec: &QuadratureSpec) -> Result<HsResult> {
    spec.validate()?;
    a.require_hermitian()?;
    let (x0, r, g) = (ext.x0(), ext.radius(), ext.gamma());
    let scale = r.powf(g);
    // normalized operator (A - x0)/R and normalized tolerance
    let an = a.shift(x0).scale(1.0 / r);
    let tol = spec.target_tolerance / scale;
    let plan = plan_shells(ext, tol, spec.max_refinement_depth)?;
    let inner_tol = tol - plan.tail;
    let (vals, vecs) = an.eigh()?;
    let (op, err, evals, ok) = match spec.scheme {
        Scheme::Eigen => {
            let results: Vec<(C64, f64, usize, bool)> = vals
                .par_iter()
                .map(|&lam| hs_scalar(ext, &plan, spec, lam, inner_tol))
                .collect();
            let d: Vec<C64> = results.iter().map(|r| r.0).collect();
            let err = results.iter().map(|r| r.1).fold(0.0, f64::max);
            let evals = results.iter().map(|r| r.2).sum();
            let ok = results.iter().all(|r| r.3);
            (DenseOperator::new(unitary_conjugate(&vecs, &d)), err, evals, ok)
        }
        Scheme::Direct => {
            let m = an.rows();
            let entries = an.entries().clone();
            let kernel = |z: C64| -> Array2<C64> {
                let mut s = entries.clone();
                for i in 0..m {
                    s[[i, i]] -= z;
                }
                // R(z; A) = (A - z)^{-1}
                s.inv().unwrap_or_else(|_| Array2::from_elem((m, m), C64::new(f64::NAN, 0.0)))
            };
            let zero = Array2::<C64>::zeros((m, m));
            let real = ext.is_real();
            let (v, e, n, ok) = cone_integral(
                ext,
                &plan,
                spec,
                if real { 0.5 * inner_tol } else { inner_tol },
                kernel,
                zero,
                &vals,
                real,
            );
            let (value, err) = if real {
                // X + X* is twice the real part in the operator sense
                let adj = v.t().mapv(|z| z.conj());
                (&v + &adj, 2.0 * e)
            } else {
                (v, e)
            };
            (DenseOperator::new(value), err, n, ok)
        }
    };
    let error_estimate = (err + plan.tail) * scale;
    if !ok || !error_estimate.is_finite() || error_estimate > spec.target_tolerance {
        return Err(Error::Quadrature {
            target: spec.target_tolerance,
            achieved: error_estimate,
            evaluations: evals,
        });
    }
    let mut operator = op.scale(scale);
    if ext.is_real() {
        operator = operator.hermitian_part();
    }
    Ok(HsResult {
        operator,
        error_estimate,
        evaluations: evals,
        shells: plan.shells,
        scheme: spec.scheme,
    })
}

/// `U f(Λ) U*` from the eigendecomposition.
pub fn spectral_apply(f: &SingularFunction, a: &DenseOperator) -> Result<DenseOperator> {
    let (vals, vecs) = a.eigh()?;
    let d: Vec<C64> = vals.iter().map(|&l| f.eval(l)).collect();
    if d.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(format!("`{}` is not finite on the spectrum", f.label())));
    }
    let out = DenseOperator::new(unitary_conjugate(&vecs, &d));
    Ok(if f.is_real() { out.hermitian_part() } else { out })
}

/// How `f(A)` is evaluated inside quasi-commutators.
#[derive(Clone, Copy, Debug, Default)]
pub enum Method {
    #[default]
    Spectral,
    Hs(QuadratureSpec),
}

#[derive(Clone, Debug)]
pub struct QuasiCommutator {
    /// `f(A) J - J f(B)`.
    pub value: DenseOperator,
    /// `V = A J - J B`.
    pub v: DenseOperator,
    /// Quadrature error bound (zero for the spectral method).
    pub error_estimate: f64,
}

pub fn apply(f: &SingularFunction, a: &DenseOperator, method: &Method) -> Result<(DenseOperator, f64)> {
    match method {
        Method::Spectral => Ok((spectral_apply(f, a)?, 0.0)),
        Method::Hs(spec) => {
            let ext = build_extension(f)?;
            let r = hs_apply(&ext, a, spec)?;
            Ok((r.operator, r.error_estimate))
        }
    }
}

/// `f(A) J - J f(B)` together with `V = A J - J B`.
pub fn quasi_commutator(
    f: &SingularFunction,
    a: &DenseOperator,
    b: &DenseOperator,
    j: &DenseOperator,
    method: &Method,
) -> Result<QuasiCommutator> {
    if a.rows() != j.rows() || j.cols() != b.rows() {
        return Err(Error::Shape {
            expected: format!("J of shape {}x{}", a.rows(), b.rows()),
            got: format!("{}x{}", j.rows(), j.cols()),
        });
    }
    let v = a.matmul(j)?.sub(&j.matmul(b)?)?;
    let (fa, ea) = apply(f, a, method)?;
    let (fb, eb) = apply(f, b, method)?;
    let value = fa.matmul(j)?.sub(&j.matmul(&fb)?)?;
    let jn = j.norm_op()?;
    Ok(QuasiCommutator {
        value,
        v,
        error_estimate: (ea + eb) * jn,
    })
}
