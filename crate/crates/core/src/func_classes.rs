//! Scalar functions with power-type singularities, their weighted seminorms,
//! the smooth cutoff used throughout, and the entropy family.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};

pub type JetFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Smooth cutoff: 1 on `[-1/2, 1/2]`, 0 outside `(-1, 1)`, built from the
/// `exp(-1/u)` smooth step.
#[derive(Clone, Copy, Debug, Default)]
pub struct CutoffZeta;

fn smooth_step_part(u: Jet) -> Jet {
    // exp(-1/u) is below e^{-1000} here, as are all its derivatives.
    if u.value().re <= 1e-3 {
        Jet::zero()
    } else {
        (-(u.recip())).exp()
    }
}

impl CutoffZeta {
    /// Taylor jet of ζ at `t` with respect to its own argument.
    pub fn jet(&self, t: f64) -> Jet {
        let a = t.abs();
        if a <= 0.5 {
            return Jet::constant(1.0);
        }
        if a >= 1.0 {
            return Jet::zero();
        }
        // u = 2 - 2|t| runs from 1 (|t| = 1/2) down to 0 (|t| = 1).
        let sign = t.signum();
        let u = (Jet::variable(t) * (-2.0 * sign)) + 2.0;
        let s0 = smooth_step_part(u);
        let s1 = smooth_step_part(1.0 - u);
        s0 / (s0 + s1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.jet(t).value().re
    }

    /// `(ζ(t), ζ'(t))` in closed form, without building a full jet.
    pub fn value_and_slope(&self, t: f64) -> (f64, f64) {
        let a = t.abs();
        if a <= 0.5 {
            return (1.0, 0.0);
        }
        if a >= 1.0 {
            return (0.0, 0.0);
        }
        let u = 2.0 - 2.0 * a;
        let part = |u: f64| -> (f64, f64) {
            if u <= 1e-3 {
                (0.0, 0.0)
            } else {
                let s = (-1.0 / u).exp();
                (s, s / (u * u))
            }
        };
        let (s0, d0) = part(u);
        let (s1, d1) = part(1.0 - u);
        let den = s0 + s1;
        let step = s0 / den;
        let dstep = (d0 * s1 + s0 * d1) / (den * den);
        (step, -2.0 * t.signum() * dstep)
    }

    pub fn eval_derivative(&self, k: usize, t: f64) -> f64 {
        self.jet(t).derivative(k).re
    }

    /// Jet of `t ↦ ζ((t - center) / width)` at `t`.
    pub fn scaled_jet(&self, t: f64, center: f64, width: f64) -> Jet {
        let base = self.jet((t - center) / width);
        compose_affine(base, 1.0 / width)
    }
}

/// Chain rule for an affine inner map with the given slope.
fn compose_affine(jet: Jet, slope: f64) -> Jet {
    let mut coeffs = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
    let mut p = 1.0;
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c = jet.coeff(k) * p;
        p *= slope;
    }
    Jet::from_coeffs(&coeffs)
}

/// Data of the one-point power-singularity condition: `f` is `C^n` off `x0`,
/// `|f^(k)(x)| <= C |x - x0|^{gamma-k}`, and `f` vanishes outside `[x0-R, x0+R]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointCondition {
    pub x0: f64,
    pub gamma: f64,
    pub n: usize,
    pub radius: f64,
}

/// A scalar function with finitely many singular points.
///
/// Evaluation goes through Taylor jets so that `eval_derivative(k, t)` is exact
/// for library functions. Functions satisfying the one-point condition carry a
/// [`PointCondition`]; functions with several singular points or unbounded
/// support do not, and must first be split (see [`partition_at_singularities`]).
#[derive(Clone)]
pub struct SingularFunction {
    label: String,
    jet: JetFn,
    complex: Option<ComplexFn>,
    singular_points: Vec<f64>,
    condition: Option<PointCondition>,
    support: Option<(f64, f64)>,
    real: bool,
}

impl fmt::Debug for SingularFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingularFunction")
            .field("label", &self.label)
            .field("singular_points", &self.singular_points)
            .field("condition", &self.condition)
            .field("support", &self.support)
            .finish()
    }
}

impl SingularFunction {
    pub fn new(label: impl Into<String>, jet: impl Fn(f64) -> Jet + Send + Sync + 'static) -> Self {
        SingularFunction {
            label: label.into(),
            jet: Arc::new(jet),
            complex: None,
            singular_points: Vec::new(),
            condition: None,
            support: None,
            real: true,
        }
    }

    /// A function given only by values; derivatives are taken by central
    /// differences with step `cbrt(eps) * scale` (scaled per order).
    pub fn from_values(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        max_order: usize,
        scale: f64,
    ) -> Self {
        let f = Arc::new(f);
        SingularFunction::new(label, move |t| finite_difference_jet(&*f, t, max_order, scale))
    }

    pub fn with_condition(mut self, x0: f64, gamma: f64, n: usize, radius: f64) -> Self {
        self.condition = Some(PointCondition {
            x0,
            gamma,
            n,
            radius,
        });
        self.support = Some((x0 - radius, x0 + radius));
        self
    }

    pub fn with_singular_points(mut self, points: Vec<f64>) -> Self {
        self.singular_points = points;
        self
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self
    }

    pub fn with_complex(mut self, g: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.complex = Some(Arc::new(g));
        self
    }

    pub fn complex_valued(mut self) -> Self {
        self.real = false;
        self
    }

    /// Replaces the smoothness order `n` of the attached condition.
    pub fn with_order(mut self, n: usize) -> Self {
        if let Some(c) = self.condition.as_mut() {
            c.n = n;
        }
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn jet(&self, t: f64) -> Jet {
        (self.jet)(t)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.jet(t).value()
    }

    pub fn eval_real(&self, t: f64) -> f64 {
        self.eval(t).re
    }

    pub fn eval_derivative(&self, k: usize, t: f64) -> Complex64 {
        self.jet(t).derivative(k)
    }

    /// Evaluation off the real axis, available for entire functions only.
    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        self.complex.as_ref().map(|g| g(z))
    }

    pub fn is_entire(&self) -> bool {
        self.complex.is_some()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn condition(&self) -> Option<PointCondition> {
        self.condition
    }

    pub fn require_condition(&self) -> Result<PointCondition> {
        self.condition.ok_or_else(|| {
            Error::InvalidParameter(format!(
                "`{}` does not satisfy a one-point condition; split it at its singular points first",
                self.label
            ))
        })
    }

    pub fn gamma(&self) -> Option<f64> {
        self.condition.map(|c| c.gamma)
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.support.is_some()
    }

    /// `t ↦ r^{-γ} f(r t)`; leaves the seminorm unchanged.
    pub fn rescaled(&self, r: f64) -> Result<SingularFunction> {
        let cond = self.require_condition()?;
        if r <= 0.0 {
            return Err(Error::InvalidParameter(format!("rescaling factor {r} must be positive")));
        }
        let inner = self.jet.clone();
        let factor = r.powf(-cond.gamma);
        let g = SingularFunction {
            label: format!("{}@scale{}", self.label, r),
            jet: Arc::new(move |t| compose_affine(inner(r * t), r).scale(factor)),
            complex: None,
            singular_points: self.singular_points.iter().map(|z| z / r).collect(),
            condition: None,
            support: None,
            real: self.real,
        };
        let mut g = g.with_condition(cond.x0 / r, cond.gamma, cond.n, cond.radius / r);
        g.support = self.support.map(|(lo, hi)| (lo / r, hi / r));
        Ok(g)
    }

    /// Translates `x0` to the origin and rescales the support radius to 1.
    pub fn normalized(&self) -> Result<SingularFunction> {
        let cond = self.require_condition()?;
        let inner = self.jet.clone();
        let (x0, r) = (cond.x0, cond.radius);
        let factor = r.powf(-cond.gamma);
        let g = SingularFunction {
            label: format!("{}@normalized", self.label),
            jet: Arc::new(move |t| compose_affine(inner(x0 + r * t), r).scale(factor)),
            complex: None,
            singular_points: self.singular_points.iter().map(|z| (z - x0) / r).collect(),
            condition: None,
            support: None,
            real: self.real,
        };
        let mut g = g.with_condition(0.0, cond.gamma, cond.n, 1.0);
        if let Some((lo, hi)) = self.support {
            g.support = Some((((lo - x0) / r).max(-1.0), ((hi - x0) / r).min(1.0)));
        }
        Ok(g)
    }

    pub fn add(&self, other: &SingularFunction) -> SingularFunction {
        let (a, b) = (self.jet.clone(), other.jet.clone());
        let mut pts = self.singular_points.clone();
        for p in &other.singular_points {
            if !pts.contains(p) {
                pts.push(*p);
            }
        }
        let support = match (self.support, other.support) {
            (Some(s), Some(o)) => Some((s.0.min(o.0), s.1.max(o.1))),
            _ => None,
        };
        SingularFunction {
            label: format!("{}+{}", self.label, other.label),
            jet: Arc::new(move |t| a(t) + b(t)),
            complex: None,
            singular_points: pts,
            condition: None,
            support,
            real: self.real && other.real,
        }
    }

    pub fn sub(&self, other: &SingularFunction) -> SingularFunction {
        self.add(&other.scaled_by(-1.0))
            .with_label(format!("{}-{}", self.label, other.label))
    }

    pub fn scaled_by(&self, c: f64) -> SingularFunction {
        let a = self.jet.clone();
        let complex = self.complex.clone();
        let mut out = self.clone();
        out.jet = Arc::new(move |t| a(t).scale(c));
        out.complex = complex.map(|g| Arc::new(move |z| g(z) * c) as ComplexFn);
        out
    }

    /// Product with `ζ((t - center)/width)`.
    pub fn cut_by_zeta(&self, center: f64, width: f64) -> SingularFunction {
        let a = self.jet.clone();
        let zeta = CutoffZeta;
        let support = match self.support {
            Some((lo, hi)) => Some((lo.max(center - width), hi.min(center + width))),
            None => Some((center - width, center + width)),
        };
        SingularFunction {
            label: format!("{}*zeta", self.label),
            jet: Arc::new(move |t| {
                let z = zeta.scaled_jet(t, center, width);
                if z.value().norm() == 0.0 && z.coeff(1).norm() == 0.0 {
                    Jet::zero()
                } else {
                    a(t) * z
                }
            }),
            complex: None,
            singular_points: self
                .singular_points
                .iter()
                .copied()
                .filter(|p| (p - center).abs() < width)
                .collect(),
            condition: None,
            support,
            real: self.real,
        }
    }
}

/// Central-difference jet for value-only functions.
pub fn finite_difference_jet(f: &dyn Fn(f64) -> f64, t: f64, max_order: usize, scale: f64) -> Jet {
    let eps = f64::EPSILON;
    let mut coeffs = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
    coeffs[0] = f(t).into();
    let mut fact = 1.0;
    for k in 1..=max_order.min(MAX_ORDER) {
        fact *= k as f64;
        let h = eps.powf(1.0 / (k as f64 + 2.0)) * scale;
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * f(t + (k as f64 / 2.0 - j as f64) * h);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        coeffs[k] = (acc / h.powi(k as i32) / fact).into();
    }
    Jet::from_coeffs(&coeffs)
}

// ---------------------------------------------------------------------------
// Library functions

/// `|t - x0|^γ ζ(t - x0)`, singular at `x0`, supported on `[x0-1, x0+1]`.
pub fn abs_pow(gamma: f64, n: usize) -> SingularFunction {
    let zeta = CutoffZeta;
    SingularFunction::new(format!("abs_pow:{gamma}"), move |t| {
        if t == 0.0 || t.abs() >= 1.0 {
            return Jet::zero();
        }
        let x = Jet::variable(t) * t.signum();
        x.powf(gamma) * zeta.jet(t)
    })
    .with_singular_points(vec![0.0])
    .with_condition(0.0, gamma, n, 1.0)
}

/// A smooth function compactly supported in `[lo, hi]`, cast in the one-point
/// form with a fictitious singular point placed outside the support:
/// `x0 = c + 2ρ`, `R = 3ρ`, `γ = 2`, where `c ± ρ` are the support ends.
pub fn smooth_compact(
    label: impl Into<String>,
    lo: f64,
    hi: f64,
    n: usize,
    jet: impl Fn(f64) -> Jet + Send + Sync + 'static,
) -> SingularFunction {
    let c = 0.5 * (lo + hi);
    let rho = 0.5 * (hi - lo);
    SingularFunction::new(label, move |t| {
        if t <= lo || t >= hi {
            Jet::zero()
        } else {
            jet(t)
        }
    })
    .with_condition(c + 2.0 * rho, 2.0, n, 3.0 * rho)
    .with_support(lo, hi)
}

/// ζ itself as a smooth compactly supported function.
pub fn bump(n: usize) -> SingularFunction {
    smooth_compact("bump", -1.0, 1.0, n, |t| CutoffZeta.jet(t))
}

pub fn bump_cos(freq: f64, n: usize) -> SingularFunction {
    smooth_compact(format!("bump_cos:{freq}"), -1.0, 1.0, n, move |t| {
        let (_, c) = (Jet::variable(t) * freq).sin_cos();
        c * CutoffZeta.jet(t)
    })
}

pub fn bump_exp(n: usize) -> SingularFunction {
    smooth_compact("bump_exp", -1.0, 1.0, n, |t| Jet::variable(t).exp() * CutoffZeta.jet(t))
}

pub fn bump_gauss(n: usize) -> SingularFunction {
    smooth_compact("bump_gauss", -1.0, 1.0, n, |t| {
        let x = Jet::variable(t);
        (x * x * -4.0).exp() * CutoffZeta.jet(t)
    })
}

pub fn bump_poly(p: u32, n: usize) -> SingularFunction {
    smooth_compact(format!("bump_poly:{p}"), -1.0, 1.0, n, move |t| {
        Jet::variable(t).powi(p) * CutoffZeta.jet(t)
    })
}

/// `g_p(t) = t^p`, entire.
pub fn monomial(p: u32) -> SingularFunction {
    SingularFunction::new(format!("poly:{p}"), move |t| Jet::variable(t).powi(p))
        .with_complex(move |z| z.powu(p))
}

/// `(1 + t^2)^{-1}`: smooth, unbounded support, derivatives decaying like `(1+|t|)^{-2}`.
pub fn lorentz() -> SingularFunction {
    SingularFunction::new("lorentz", |t| {
        let x = Jet::variable(t);
        (x * x + 1.0).recip()
    })
    .with_complex(|z| 1.0 / (z * z + 1.0))
}

pub fn zero_fn() -> SingularFunction {
    SingularFunction::new("zero", |_| Jet::zero())
        .with_complex(|_| Complex64::new(0.0, 0.0))
        .with_condition(0.0, 1.0, 2, 1.0)
}

/// Hölder exponent attached to η_β at its singular points.
///
/// For β = 1 any exponent below 1 works; 0.9 is used.
pub fn eta_gamma(beta: f64) -> f64 {
    if (beta - 1.0).abs() < 1e-15 {
        0.9
    } else {
        beta.min(1.0)
    }
}

/// Rényi (β ≠ 1) or von Neumann (β = 1) entropy function, zero off `[0, 1]`.
pub fn eta(beta: f64, t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    if (beta - 1.0).abs() < 1e-15 {
        let s = 1.0 - t;
        -t * t.ln() - s * s.ln()
    } else {
        (t.powf(beta) + (1.0 - t).powf(beta)).ln() / (1.0 - beta)
    }
}

fn eta_jet(beta: f64, t: f64) -> Jet {
    if t <= 0.0 || t >= 1.0 {
        return Jet::zero();
    }
    let x = Jet::variable(t);
    let y = 1.0 - x;
    if (beta - 1.0).abs() < 1e-15 {
        -(x * x.ln()) - y * y.ln()
    } else {
        (x.powf(beta) + y.powf(beta)).ln().scale(1.0 / (1.0 - beta))
    }
}

pub fn eta_fn(beta: f64) -> SingularFunction {
    SingularFunction::new(format!("eta:{beta}"), move |t| eta_jet(beta, t))
        .with_singular_points(vec![0.0, 1.0])
        .with_support(0.0, 1.0)
}

/// Looks up a library function by label, e.g. `eta:1`, `abs_pow:0.5`, `poly:3`.
///
/// `n` sets the smoothness order for functions that carry a one-point condition.
pub fn registry(label: &str, n: usize) -> Result<SingularFunction> {
    let (name, arg) = match label.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (label, None),
    };
    let num = |default: Option<f64>| -> Result<f64> {
        match arg {
            Some(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad numeric argument in `{label}`"))),
            None => default.ok_or_else(|| Error::Parse(format!("`{label}` needs an argument"))),
        }
    };
    let f = match name {
        "eta" => {
            let beta = num(Some(1.0))?;
            if beta <= 0.0 {
                return Err(Error::InvalidParameter("eta needs beta > 0".into()));
            }
            eta_fn(beta)
        }
        "abs_pow" => {
            let g = num(None)?;
            if g <= 0.0 {
                return Err(Error::InvalidParameter("abs_pow needs gamma > 0".into()));
            }
            abs_pow(g, n)
        }
        "poly" => {
            let p = num(None)?;
            if p < 0.0 || p.fract() != 0.0 {
                return Err(Error::InvalidParameter("poly needs a non-negative integer".into()));
            }
            monomial(p as u32)
        }
        "bump" | "zeta" => bump(n),
        "bump_cos" => bump_cos(num(Some(3.0))?, n),
        "bump_exp" => bump_exp(n),
        "bump_gauss" => bump_gauss(n),
        "bump_poly" => {
            let p = num(Some(2.0))?;
            bump_poly(p as u32, n)
        }
        "lorentz" => lorentz(),
        "zero" => zero_fn(),
        _ => return Err(Error::UnknownLabel(label.to_string())),
    };
    Ok(f.with_label(label))
}

/// Smooth compactly supported functions from the registry, used by test suites.
pub fn smooth_registry(n: usize) -> Vec<SingularFunction> {
    vec![
        bump(n),
        bump_cos(3.0, n),
        bump_exp(n),
        bump_gauss(n),
        bump_poly(2, n),
    ]
}

// ---------------------------------------------------------------------------
// Seminorm

/// Sampling grid for the weighted supremum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeminormGrid {
    pub per_decade: usize,
    pub decades: usize,
    pub uniform: usize,
}

impl Default for SeminormGrid {
    fn default() -> Self {
        SeminormGrid {
            per_decade: 512,
            decades: 8,
            uniform: 2048,
        }
    }
}

impl SeminormGrid {
    /// Offsets `u` in units of the support radius (points are `x0 ± R u`),
    /// log-spaced toward 0 followed by a uniform grid on `(0, 1]`.
    fn offsets(&self) -> (Vec<f64>, Vec<f64>) {
        let mut log = Vec::with_capacity(self.per_decade * self.decades);
        for d in 0..self.decades {
            for j in 0..self.per_decade {
                let e = -(d as f64) - j as f64 / self.per_decade as f64;
                log.push(10f64.powf(e));
            }
        }
        let uniform = (1..=self.uniform)
            .map(|j| j as f64 / self.uniform as f64)
            .collect();
        (log, uniform)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormReport {
    pub value: f64,
    /// Derivative order attaining the maximum.
    pub argmax_order: usize,
    pub grid: SeminormGrid,
    pub points: usize,
}

/// Sampled `max_k sup_x |f^(k)(x)| |x - x0|^{k-γ}`.
pub fn seminorm_n(f: &SingularFunction) -> Result<SeminormReport> {
    seminorm_with_grid(f, SeminormGrid::default())
}

pub fn seminorm_with_grid(f: &SingularFunction, grid: SeminormGrid) -> Result<SeminormReport> {
    let cond = f.require_condition()?;
    if cond.n == 0 || cond.n > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "smoothness order must be in 1..={MAX_ORDER}, got {}",
            cond.n
        )));
    }
    let (log, uniform) = grid.offsets();
    let weighted = |u: f64, side: f64| -> [f64; MAX_ORDER + 1] {
        let d = u * cond.radius;
        let x = cond.x0 + side * d;
        let jet = f.jet(x);
        let mut out = [0.0; MAX_ORDER + 1];
        for (k, o) in out.iter_mut().enumerate().take(cond.n + 1) {
            *o = jet.derivative(k).norm() * d.powf(k as f64 - cond.gamma);
        }
        out
    };
    let mut best = 0.0f64;
    let mut argmax = 0;
    let mut decade_max = vec![0.0f64; grid.decades];
    let mut points = 0;
    for (idx, &u) in log.iter().chain(uniform.iter()).enumerate() {
        for side in [-1.0, 1.0] {
            let w = weighted(u, side);
            points += 1;
            for (k, &v) in w.iter().enumerate().take(cond.n + 1) {
                if !v.is_finite() {
                    return Err(Error::SeminormDiverges(format!(
                        "non-finite weighted derivative of order {k} at offset {u:e}"
                    )));
                }
                if v > best {
                    best = v;
                    argmax = k;
                }
                if idx < log.len() {
                    let dec = idx / grid.per_decade;
                    decade_max[dec] = decade_max[dec].max(v);
                }
            }
        }
    }
    // sustained growth over the innermost decades means the weighted sup is infinite
    if grid.decades >= 3 {
        let m = &decade_max[grid.decades - 3..];
        if m[2] > 1.02 * m[1] && m[1] > 1.02 * m[0] && m[2] > 0.0 {
            return Err(Error::SeminormDiverges(format!(
                "weighted derivatives grow toward x0 ({:.3e} -> {:.3e} -> {:.3e} per decade)",
                m[0], m[1], m[2]
            )));
        }
    }
    Ok(SeminormReport {
        value: best,
        argmax_order: argmax,
        grid,
        points,
    })
}

// ---------------------------------------------------------------------------
// Splitting and Hölder modulus

/// `g = g1 + g2` with `g1 = g ζ((t - z)/R)` carrying the singularity at `z`.
pub fn split_at_singularity(
    g: &SingularFunction,
    z: f64,
    r: f64,
) -> Result<(SingularFunction, SingularFunction)> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("cutoff radius must be positive, got {r}")));
    }
    if r > 1.0 {
        return Err(Error::InvalidParameter(format!("cutoff radius must be at most 1, got {r}")));
    }
    let gamma = g
        .gamma()
        .or_else(|| singular_gamma_hint(g))
        .unwrap_or(1.0);
    let n = g.condition().map(|c| c.n).unwrap_or(2);
    let g1 = g
        .cut_by_zeta(z, r)
        .with_label(format!("{}[near {z}]", g.label()))
        .with_condition(z, gamma, n, r);
    let mut g2 = g.sub(&g1).with_label(format!("{}[away from {z}]", g.label()));
    g2.singular_points.retain(|p| *p != z);
    g2.support = g.support;
    Ok((g1, g2))
}

fn singular_gamma_hint(g: &SingularFunction) -> Option<f64> {
    let label = g.label();
    label
        .strip_prefix("eta:")
        .and_then(|b| b.parse::<f64>().ok())
        .map(eta_gamma)
}

/// Splits a compactly supported function with several singular points into
/// one-point pieces plus a smooth remainder cast in the one-point form.
pub fn partition_at_singularities(
    f: &SingularFunction,
    gamma: f64,
    n: usize,
) -> Result<Vec<SingularFunction>> {
    let (lo, hi) = f.support().ok_or_else(|| {
        Error::InvalidParameter(format!("`{}` is not compactly supported", f.label()))
    })?;
    let mut pts = f.singular_points().to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut radius: f64 = 1.0;
    for w in pts.windows(2) {
        radius = radius.min(0.5 * (w[1] - w[0]));
    }
    let mut pieces = Vec::new();
    let mut rest = f.clone();
    for &z in &pts {
        let piece = f
            .cut_by_zeta(z, radius)
            .with_label(format!("{}[near {z}]", f.label()))
            .with_condition(z, gamma, n, radius);
        rest = rest.sub(&piece);
        pieces.push(piece);
    }
    // remainder vanishes near every singular point
    let rest_jet = rest.jet.clone();
    let remainder = smooth_compact(format!("{}[smooth part]", f.label()), lo, hi, n, move |t| rest_jet(t));
    pieces.push(remainder);
    Ok(pieces)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HolderReport {
    pub kappa: f64,
    pub constant: f64,
    pub sup_norm: f64,
    /// `⦀f⦀_0 R^γ`, the a priori bound on the sup norm.
    pub sup_bound: f64,
}

/// Empirical Hölder constant with exponent `min(γ, 1)` over pairs of a
/// sample grid laid out relative to `x0` and `R`.
pub fn holder_modulus(f: &SingularFunction) -> Result<HolderReport> {
    let cond = f.require_condition()?;
    let kappa = cond.gamma.min(1.0);
    let mut offsets: Vec<f64> = Vec::new();
    for d in 0..8 {
        for j in 0..24 {
            offsets.push(10f64.powf(-(d as f64) - j as f64 / 24.0));
        }
    }
    for j in 1..=200 {
        offsets.push(j as f64 / 200.0 * 1.25);
    }
    let mut xs: Vec<f64> = offsets
        .iter()
        .flat_map(|u| [-u, *u])
        .map(|u| cond.x0 + cond.radius * u)
        .collect();
    xs.push(cond.x0);
    let vals: Vec<Complex64> = xs.iter().map(|&x| f.eval(x)).collect();
    let mut constant = 0.0f64;
    for i in 0..xs.len() {
        for j in 0..i {
            let dx = (xs[i] - xs[j]).abs();
            if dx == 0.0 {
                continue;
            }
            let q = (vals[i] - vals[j]).norm() / dx.powf(kappa);
            constant = constant.max(q);
        }
    }
    let sup_norm = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let k0 = seminorm_with_grid(
        &f.clone().with_order(1),
        SeminormGrid {
            per_decade: 64,
            decades: 8,
            uniform: 512,
        },
    )
    .map(|r| r.value)
    .unwrap_or(f64::INFINITY);
    Ok(HolderReport {
        kappa,
        constant,
        sup_norm,
        sup_bound: k0 * cond.radius.powf(cond.gamma),
    })
}
