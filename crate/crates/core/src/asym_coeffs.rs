//! Asymptotic coefficients: the volume term `W₀`, the surface term `W₁` and
//! the transforms `𝔄(g; s)`, `𝔇(g; s, s₁)`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::func_classes::{monomial, SingularFunction};
use crate::operator::C64;
use crate::quadrature::{integrate, AdaptiveOptions};
use crate::wiener_hopf::{DomainSpec, MeshNode, Symbol2};

/// Largest boundary mesh used by the surface quadrature.
pub const MAX_MESH: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoeffResult {
    #[serde(serialize_with = "ser_complex")]
    pub value: C64,
    pub quadrature_error_estimate: f64,
    pub node_count: usize,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl CoeffResult {
    pub fn zero() -> Self {
        CoeffResult {
            value: C64::new(0.0, 0.0),
            quadrature_error_estimate: 0.0,
            node_count: 0,
        }
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }
}

// ---------------------------------------------------------------------------
// 𝔄 and 𝔇

/// Evaluates `g` on the segment from `s₁` to `s`; non-entire functions need a real segment.
fn segment_eval(g: &SingularFunction, s: C64, s1: C64) -> Result<impl Fn(f64) -> C64 + '_> {
    let entire = g.is_entire();
    if !entire && (s.im != 0.0 || s1.im != 0.0) {
        return Err(Error::Domain(format!(
            "`{}` is only defined on the real line; complex arguments need an entire function",
            g.label()
        )));
    }
    Ok(move |t: f64| {
        let z = s * t + s1 * (1.0 - t);
        if entire {
            g.eval_complex(z).unwrap()
        } else {
            g.eval(z.re)
        }
    })
}

/// `𝔇(g; s, s₁) = (2π)^{-2} ∫₀¹ [g(st + s₁(1-t)) - t g(s) - (1-t) g(s₁)] / (t(1-t)) dt`.
///
/// Both halves of `[0, 1]` are folded onto `u ∈ [0, 1/√2]` through `t = u²`
/// and `1 - t = u²`, which turns Hölder endpoint behaviour into an
/// integrable power of `u`.
pub fn gd(g: &SingularFunction, s: C64, s1: C64) -> Result<CoeffResult> {
    let gz = segment_eval(g, s, s1)?;
    let (gs, gs1) = (gz(1.0), gz(0.0));
    if !(gs.is_finite() && gs1.is_finite()) {
        return Err(Error::Domain(format!("`{}` is not finite at the segment ends", g.label())));
    }
    let num = |t: f64| gz(t) - gs * t - gs1 * (1.0 - t);
    let integrand = |u: f64| -> C64 {
        let t = u * u;
        let w = 2.0 / (u * (1.0 - t));
        (num(t) + num(1.0 - t)) * w
    };
    let umax = 0.5f64.sqrt();
    let mut breaks = vec![0.0, umax];
    if s.im == 0.0 && s1.im == 0.0 && s != s1 {
        for &p in g.singular_points() {
            let t = (p - s1.re) / (s.re - s1.re);
            if t > 0.0 && t < 1.0 {
                breaks.push(if t <= 0.5 { t.sqrt() } else { (1.0 - t).sqrt() });
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut opts = AdaptiveOptions::new(1e-13).with_max_panels(4000);
    opts.rel_tol = 1e-13;
    let r = integrate(integrand, &breaks, opts);
    if !r.value.is_finite() {
        return Err(Error::Numeric(format!("𝔇 integrand of `{}` is not integrable", g.label())));
    }
    let scale = 1.0 / (TAU * TAU);
    if !r.converged && r.error > 1e-9 {
        return Err(Error::Quadrature {
            target: 1e-9,
            achieved: r.error * scale,
            evaluations: r.evaluations,
        });
    }
    Ok(CoeffResult {
        value: r.value * scale,
        quadrature_error_estimate: r.error * scale,
        node_count: r.evaluations,
    })
}

/// `𝔄(g; s) = 𝔇(g; s, 0)`.
pub fn ga(g: &SingularFunction, s: C64) -> Result<CoeffResult> {
    gd(g, s, C64::new(0.0, 0.0))
}

/// Same integral with `t ↦ 1 - t` applied before folding; agrees with [`gd`]
/// up to quadrature error.
pub fn gd_reflected(g: &SingularFunction, s: C64, s1: C64) -> Result<CoeffResult> {
    let gz = segment_eval(g, s1, s)?;
    let (gs1, gs) = (gz(1.0), gz(0.0));
    let num = |t: f64| gz(t) - gs1 * t - gs * (1.0 - t);
    let integrand = |t: f64| -> C64 { num(t) / (t * (1.0 - t)) };
    let left = |u: f64| integrand(u * u) * (2.0 * u);
    let right = |u: f64| integrand(1.0 - u * u) * (2.0 * u);
    let umax = 0.5f64.sqrt();
    let mut opts = AdaptiveOptions::new(1e-13).with_max_panels(4000);
    opts.rel_tol = 1e-13;
    let a = integrate(left, &[0.0, umax], opts);
    let b = integrate(right, &[0.0, umax], opts);
    let scale = 1.0 / (TAU * TAU);
    Ok(CoeffResult {
        value: (a.value + b.value) * scale,
        quadrature_error_estimate: (a.error + b.error) * scale,
        node_count: a.evaluations + b.evaluations,
    })
}

/// `π^{-2} |s| sup |g'|` over the segment `[0, s]` (real `s`), the Lipschitz bound for `𝔄`.
pub fn ga_lipschitz_bound(g: &SingularFunction, s: f64, samples: usize) -> f64 {
    let n = samples.max(2);
    let sup = (0..=n)
        .map(|i| g.eval_derivative(1, s * i as f64 / n as f64).norm())
        .fold(0.0, f64::max);
    s.abs() * sup / (PI * PI)
}

/// `Σ_{l=1}^p C(p,l) z^{p-l} 𝔄(g_l; s)` against `𝔇(g_p; s + z, z)`.
pub fn binomial_identity_check(p: u32, z: C64, s: C64) -> Result<f64> {
    if p == 0 || p > 8 {
        return Err(Error::InvalidParameter(format!("p must lie in 1..=8, got {p}")));
    }
    let mut lhs = C64::new(0.0, 0.0);
    let mut binom = 1.0;
    for l in 1..=p {
        binom = binom * (p - l + 1) as f64 / l as f64;
        lhs += ga(&monomial(l), s)?.value * binom * z.powu(p - l);
    }
    let rhs = gd(&monomial(p), s + z, z)?.value;
    Ok((lhs - rhs).norm())
}

// ---------------------------------------------------------------------------
// W₀ and W₁

/// `(2π)^{-(d-1)} Σ_x Σ_ξ b(x, ξ) |n_L(x)·n_P(ξ)| w_x w_ξ`.
pub fn w1<F>(b: F, boundary_l: &[MeshNode], boundary_p: &[MeshNode]) -> Result<CoeffResult>
where
    F: Fn(&[f64], &[f64]) -> C64 + Sync,
{
    w1_indexed(|i, j| b(&boundary_l[i].point, &boundary_p[j].point), boundary_l, boundary_p)
}

/// [`w1`] with the symbol given on node index pairs.
pub fn w1_indexed<F>(b: F, boundary_l: &[MeshNode], boundary_p: &[MeshNode]) -> Result<CoeffResult>
where
    F: Fn(usize, usize) -> C64 + Sync,
{
    if boundary_l.is_empty() || boundary_p.is_empty() {
        return Err(Error::InvalidParameter("empty boundary mesh".into()));
    }
    let d = boundary_l[0].point.len();
    for n in boundary_l.iter().chain(boundary_p) {
        let len: f64 = n.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (len - 1.0).abs() > 1e-12 || n.normal.len() != d {
            return Err(Error::Numeric("degenerate mesh normal".into()));
        }
    }
    let rows: Vec<C64> = boundary_l
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let terms: Vec<C64> = boundary_p
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    let dot: f64 = x.normal.iter().zip(&p.normal).map(|(a, c)| a * c).sum();
                    b(i, j) * (dot.abs() * x.weight * p.weight)
                })
                .collect();
            crate::quadrature::pairwise_sum(&terms).unwrap()
        })
        .collect();
    let total = crate::quadrature::pairwise_sum(&rows).unwrap();
    Ok(CoeffResult {
        value: total / TAU.powi(d as i32 - 1),
        quadrature_error_estimate: 0.0,
        node_count: boundary_l.len() * boundary_p.len(),
    })
}

/// `W₁` on meshes of `m` and `m/2` nodes, Richardson-extrapolated for the
/// second-order mesh error; the estimate is the size of the correction.
pub fn w1_domains<F>(b: F, lambda: &DomainSpec, omega: &DomainSpec, m: usize) -> Result<CoeffResult>
where
    F: Fn(&[f64], &[f64]) -> C64 + Sync,
{
    if m > MAX_MESH || m < 8 {
        return Err(Error::InvalidParameter(format!("mesh size must lie in 8..={MAX_MESH}")));
    }
    let fine = w1(&b, &lambda.boundary_mesh(m)?, &omega.boundary_mesh(m)?)?;
    let coarse = w1(&b, &lambda.boundary_mesh(m / 2)?, &omega.boundary_mesh(m / 2)?)?;
    let value = (fine.value * 4.0 - coarse.value) / 3.0;
    Ok(CoeffResult {
        value,
        quadrature_error_estimate: (fine.value - coarse.value).norm() / 3.0,
        node_count: fine.node_count + coarse.node_count,
    })
}

/// `(2π)^{-d} ∫_Ω ∫_Λ b dx dξ` on masked midpoint grids with `k` points per
/// axis; the estimate compares against `k/2`.
pub fn w0(b: &Symbol2, lambda: &DomainSpec, omega: &DomainSpec, k: usize) -> Result<CoeffResult> {
    if b.is_zero() {
        return Ok(CoeffResult::zero());
    }
    let fine = w0_grid(b, lambda, omega, k)?;
    let coarse = w0_grid(b, lambda, omega, (k / 2).max(2))?;
    Ok(CoeffResult {
        value: fine.0,
        quadrature_error_estimate: (fine.0 - coarse.0).norm(),
        node_count: fine.1,
    })
}

fn masked_grid(domain: &DomainSpec, k: usize) -> (Vec<Vec<f64>>, f64) {
    let r = domain.max_coordinate();
    let h = 2.0 * r / k as f64;
    let d = domain.dim;
    let total = k.pow(d as u32);
    let pts = (0..total)
        .filter_map(|mut idx| {
            let mut p = vec![0.0; d];
            for a in (0..d).rev() {
                p[a] = -r + ((idx % k) as f64 + 0.5) * h;
                idx /= k;
            }
            domain.indicator(&p).then_some(p)
        })
        .collect();
    (pts, h.powi(d as i32))
}

fn w0_grid(b: &Symbol2, lambda: &DomainSpec, omega: &DomainSpec, k: usize) -> Result<(C64, usize)> {
    use crate::wiener_hopf::SymbolKind;
    let (xs, vx) = masked_grid(lambda, k);
    let (ps, vp) = masked_grid(omega, k);
    let norm = (vx * vp) / TAU.powi(lambda.dim as i32);
    let sum_over = |pts: &[Vec<f64>], f: &dyn Fn(&[f64]) -> C64| -> C64 {
        let v: Vec<C64> = pts.iter().map(|p| f(p)).collect();
        crate::quadrature::pairwise_sum(&v).unwrap_or_default()
    };
    let value = match &b.kind {
        SymbolKind::Constant(c) => *c * (xs.len() as f64) * (ps.len() as f64),
        SymbolKind::Xi(f) => sum_over(&ps, &|p| f(p)) * xs.len() as f64,
        SymbolKind::Product { x, xi } => sum_over(&xs, &|p| x(p)) * sum_over(&ps, &|p| xi(p)),
        SymbolKind::General(f) => {
            let rows: Vec<C64> = xs
                .par_iter()
                .map(|x| {
                    let v: Vec<C64> = ps.iter().map(|p| f(x, p)).collect();
                    crate::quadrature::pairwise_sum(&v).unwrap_or_default()
                })
                .collect();
            crate::quadrature::pairwise_sum(&rows).unwrap_or_default()
        }
    };
    Ok((value * norm, xs.len() * ps.len()))
}

// ---------------------------------------------------------------------------
// Predictions

/// Memoized `(x, ξ) ↦ T(re a(x, ξ), re a₁(x, ξ))` over mesh nodes.
fn transform_table(
    a: &Symbol2,
    a1: Option<&Symbol2>,
    lmesh: &[MeshNode],
    pmesh: &[MeshNode],
    transform: &dyn Fn(f64, f64) -> Result<CoeffResult>,
) -> Result<(Vec<Vec<C64>>, f64)> {
    let mut cache: HashMap<(u64, u64), CoeffResult> = HashMap::new();
    let mut err: f64 = 0.0;
    let mut table = Vec::with_capacity(lmesh.len());
    for x in lmesh {
        let mut row = Vec::with_capacity(pmesh.len());
        for p in pmesh {
            let s = a.eval(&x.point, &p.point).re;
            let s1 = a1.map(|b| b.eval(&x.point, &p.point).re).unwrap_or(0.0);
            let key = (s.to_bits(), s1.to_bits());
            let r = match cache.get(&key) {
                Some(r) => *r,
                None => {
                    let r = transform(s, s1)?;
                    cache.insert(key, r);
                    r
                }
            };
            err = err.max(r.quadrature_error_estimate);
            row.push(r.value);
        }
        table.push(row);
    }
    Ok((table, err))
}

fn predicted(
    g: &SingularFunction,
    a: &Symbol2,
    a1: Option<&Symbol2>,
    lambda: &DomainSpec,
    omega: &DomainSpec,
    m: usize,
) -> Result<CoeffResult> {
    let mut out = Vec::new();
    for mm in [m, m / 2] {
        let lm = lambda.boundary_mesh(mm)?;
        let pm = omega.boundary_mesh(mm)?;
        let tf = |s: f64, s1: f64| gd(g, C64::new(s, 0.0), C64::new(s1, 0.0));
        let (table, qerr) = transform_table(a, a1, &lm, &pm, &tf)?;
        let r = w1_indexed(|i, j| table[i][j], &lm, &pm)?;
        out.push((r, qerr));
    }
    let (fine, qerr) = out[0];
    let coarse = out[1].0;
    let surface = lambda.surface_area() * omega.surface_area() / TAU.powi(lambda.dim as i32 - 1);
    Ok(CoeffResult {
        value: (fine.value * 4.0 - coarse.value) / 3.0,
        quadrature_error_estimate: (fine.value - coarse.value).norm() / 3.0 + qerr * surface,
        node_count: fine.node_count + coarse.node_count,
    })
}

/// `W₁(𝔄(g; re a); ∂Λ, ∂Ω)` on meshes of `m` and `m/2` nodes.
pub fn predicted_w1(g: &SingularFunction, a: &Symbol2, lambda: &DomainSpec, omega: &DomainSpec, m: usize) -> Result<CoeffResult> {
    predicted(g, a, None, lambda, omega, m)
}

/// `W₁(𝔇(g; re a, re a₁); ∂Λ, ∂Ω)` for the jump problem.
pub fn predicted_w1_jump(
    g: &SingularFunction,
    a: &Symbol2,
    a1: &Symbol2,
    lambda: &DomainSpec,
    omega: &DomainSpec,
    m: usize,
) -> Result<CoeffResult> {
    predicted(g, a, Some(a1), lambda, omega, m)
}

/// Convenience wrapper returning the real value of `𝔄(g; s)` at a real point.
pub fn ga_real(g: &SingularFunction, s: f64) -> Result<f64> {
    Ok(ga(g, Complex64::new(s, 0.0))?.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func_classes::eta_fn;

    #[test]
    fn ga_monomials() {
        let s = C64::new(0.7, -0.2);
        assert_eq!(ga(&monomial(1), s).unwrap().value.norm(), 0.0);
        let g2 = ga(&monomial(2), s).unwrap().value;
        assert!((g2 + s * s / (4.0 * PI * PI)).norm() < 1e-12);
    }

    #[test]
    fn ga_eta_one() {
        let v = ga_real(&eta_fn(1.0), 1.0).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn eta_rejects_complex() {
        assert!(ga(&eta_fn(1.0), C64::new(0.5, 0.1)).is_err());
    }

    #[test]
    fn w1_unit_circles() {
        let d = DomainSpec::unit_disk();
        let r = w1_domains(|_, _| C64::new(1.0 / 12.0, 0.0), &d, &d, 512).unwrap();
        assert!((r.value.re - 1.0 / 3.0).abs() < 1e-6, "{}", r.value.re);
    }
}
