//! Quasi-analytic extensions `f̃` of functions with a power singularity and
//! their `∂̄`-derivatives `ω`, supported in the cone `|y| < |x - x0|`.
//!
//! Formulas are evaluated for the normalized function `h(t) = R^{-γ} f(x0 + R t)`
//! (singular point at 0, support radius 1) and mapped back on use:
//! `f̃(x, y) = R^γ h̃((x - x0)/R, y/R)` and `ω_f(x, y) = R^{γ-1} ω_h(...)`.

use rand::Rng;
use serde::Serialize;

use crate::ensembles;
use crate::error::{Error, Result};
use crate::func_classes::{CutoffZeta, SingularFunction};
use crate::jet::MAX_ORDER;
use crate::operator::C64;
use crate::quadrature::{integrate, pairwise_sum, AdaptiveOptions};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug)]
pub struct QAExtension {
    f: SingularFunction,
    h: SingularFunction,
    x0: f64,
    radius: f64,
    gamma: f64,
    n: usize,
}

/// The Taylor data of `h` at a fixed normalized abscissa, reused for every `y`.
#[derive(Clone, Copy, Debug)]
pub struct ExtensionSlice {
    x: f64,
    n: usize,
    /// `h^(l)(x)/l!` for `l < n`.
    taylor: [C64; MAX_ORDER],
    /// `h^(n)(x)/(n-1)!`.
    top: C64,
}

impl ExtensionSlice {
    fn taylor_sum(&self, y: f64) -> C64 {
        let iy = I * y;
        let mut acc = C64::new(0.0, 0.0);
        for l in (0..self.n).rev() {
            acc = acc * iy + self.taylor[l];
        }
        acc
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn ftilde(&self, y: f64) -> C64 {
        if self.x == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let (z, _) = CutoffZeta.value_and_slope(y / self.x);
        if z == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.taylor_sum(y) * z
    }

    pub fn omega(&self, y: f64) -> C64 {
        if self.x == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let v = y / self.x;
        let (z, dz) = CutoffZeta.value_and_slope(v);
        if z == 0.0 && dz == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let mut out = C64::new(0.0, 0.0);
        if z != 0.0 {
            out += 0.5 * self.top * (I * y).powu(self.n as u32 - 1) * z;
        }
        if dz != 0.0 {
            out += self.taylor_sum(y) * dz * (I - v) / (2.0 * self.x);
        }
        out
    }
}

/// Builds the extension. Requires a one-point condition with `n >= 2` and compact support.
pub fn build_extension(f: &SingularFunction) -> Result<QAExtension> {
    if !f.is_compactly_supported() {
        return Err(Error::InvalidParameter(format!(
            "`{}` is not compactly supported; split it with a partition of unity and extend the pieces",
            f.label()
        )));
    }
    let cond = f.require_condition()?;
    if cond.n < 2 {
        return Err(Error::InvalidParameter(format!(
            "unsupported smoothness order n = {}; the extension needs n >= 2",
            cond.n
        )));
    }
    if cond.n > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "smoothness order n = {} exceeds the supported maximum {MAX_ORDER}",
            cond.n
        )));
    }
    Ok(QAExtension {
        f: f.clone(),
        h: f.normalized()?,
        x0: cond.x0,
        radius: cond.radius,
        gamma: cond.gamma,
        n: cond.n,
    })
}

impl QAExtension {
    pub fn function(&self) -> &SingularFunction {
        &self.f
    }

    pub fn normalized_function(&self) -> &SingularFunction {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_real(&self) -> bool {
        self.f.is_real()
    }

    /// Support of `h` in normalized coordinates.
    pub fn normalized_support(&self) -> (f64, f64) {
        self.h.support().unwrap_or((-1.0, 1.0))
    }

    /// Taylor data at the normalized abscissa `x`.
    pub fn slice(&self, x: f64) -> ExtensionSlice {
        let mut taylor = [C64::new(0.0, 0.0); MAX_ORDER];
        if x == 0.0 {
            return ExtensionSlice {
                x,
                n: self.n,
                taylor,
                top: C64::new(0.0, 0.0),
            };
        }
        let jet = self.h.jet(x);
        for (l, t) in taylor.iter_mut().enumerate().take(self.n) {
            *t = jet.coeff(l);
        }
        ExtensionSlice {
            x,
            n: self.n,
            taylor,
            top: jet.coeff(self.n) * self.n as f64,
        }
    }

    pub fn eval_ftilde_normalized(&self, x: f64, y: f64) -> C64 {
        self.slice(x).ftilde(y)
    }

    pub fn eval_omega_normalized(&self, x: f64, y: f64) -> C64 {
        self.slice(x).omega(y)
    }

    pub fn eval_ftilde(&self, x: f64, y: f64) -> C64 {
        let r = self.radius;
        self.eval_ftilde_normalized((x - self.x0) / r, y / r) * r.powf(self.gamma)
    }

    pub fn eval_omega(&self, x: f64, y: f64) -> C64 {
        let r = self.radius;
        self.eval_omega_normalized((x - self.x0) / r, y / r) * r.powf(self.gamma - 1.0)
    }
}

// ---------------------------------------------------------------------------
// L1 weight

/// Accuracy settings for the shell-by-shell `L¹` weight.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShellOptions {
    /// Number of dyadic shells `2^{-k-1} <= |x| <= 2^{-k}` toward the singular point.
    pub shells: usize,
    /// Relative tolerance of the nested adaptive rules in each shell.
    pub rel_tol: f64,
}

impl Default for ShellOptions {
    fn default() -> Self {
        ShellOptions {
            shells: 60,
            rel_tol: 1e-4,
        }
    }
}

/// Per-shell values of `(1/π) ∬ |ω_h(x, y)| / |y| dx dy` in normalized coordinates
/// and `(x, v = y/|x|)` variables; index 0 is the outermost shell, both sides of
/// the singular point are summed. Returns the weights and the evaluation count.
pub fn shell_weights(ext: &QAExtension, opts: ShellOptions) -> (Vec<f64>, usize) {
    let (lo, hi) = ext.normalized_support();
    let both_halves = !ext.is_real();
    let mut evals = 0;
    let mut out = Vec::with_capacity(opts.shells);
    let rule = |tol: f64| AdaptiveOptions {
        abs_tol: 1e-300,
        rel_tol: tol,
        max_panels: 4000,
    };
    for k in 0..opts.shells {
        let outer = 0.5f64.powi(k as i32);
        let inner = 0.5 * outer;
        let mut parts = Vec::new();
        for (a, b) in [(-outer, -inner), (inner, outer)] {
            let (a, b) = (a.max(lo), b.min(hi));
            if b <= a {
                continue;
            }
            let r = integrate(
                |x: f64| {
                    let slice = ext.slice(x);
                    let ax = x.abs();
                    // |y|^{-1} dy = dv / v
                    let r = integrate(
                        |v: f64| {
                            let mut w = slice.omega(v * ax).norm();
                            if both_halves {
                                w = 0.5 * (w + slice.omega(-v * ax).norm());
                            }
                            if v > 0.0 { w / v } else { 0.0 }
                        },
                        &[0.0, 0.5, 1.0],
                        rule(0.1 * opts.rel_tol),
                    );
                    evals += r.evaluations;
                    2.0 * r.value / std::f64::consts::PI
                },
                &[a, b],
                rule(opts.rel_tol),
            );
            parts.push(r.value);
        }
        out.push(pairwise_sum(&parts).unwrap_or(0.0));
    }
    (out, evals)
}

/// Geometric extrapolation of the shell sequence past its last entry.
pub fn shell_tail(weights: &[f64]) -> f64 {
    let n = weights.len();
    if n < 2 {
        return weights.last().copied().unwrap_or(0.0);
    }
    let (a, b) = (weights[n - 2], weights[n - 1]);
    if b == 0.0 {
        return 0.0;
    }
    let q = (b / a).min(0.99);
    b * q / (1.0 - q)
}

#[derive(Clone, Debug, Serialize)]
pub struct L1WeightReport {
    /// `∬ |y|^{-1} |ω(x, y)| dx dy` in the original coordinates.
    pub value: f64,
    /// The same quantity at a 100 times looser tolerance.
    pub coarse_value: f64,
    pub relative_change: f64,
    pub evaluations: usize,
}

/// `∬ |y|^{-1}|ω|` over the cone, checked for self-convergence between two
/// tolerance levels (relative change must stay below 1%).
pub fn verify_l1_weight(ext: &QAExtension) -> Result<L1WeightReport> {
    verify_l1_weight_with(ext, ShellOptions::default(), 0.01)
}

pub fn verify_l1_weight_with(ext: &QAExtension, opts: ShellOptions, max_change: f64) -> Result<L1WeightReport> {
    let total = |o: ShellOptions| -> (f64, usize) {
        let (w, n) = shell_weights(ext, o);
        ((pairwise_sum(&w).unwrap_or(0.0) + shell_tail(&w)) * std::f64::consts::PI, n)
    };
    let (coarse, n1) = total(ShellOptions {
        rel_tol: 100.0 * opts.rel_tol,
        ..opts
    });
    let (fine, n2) = total(opts);
    let scale = ext.radius.powf(ext.gamma);
    let change = if fine == 0.0 { (fine - coarse).abs() } else { ((fine - coarse) / fine).abs() };
    if !fine.is_finite() || change > max_change {
        return Err(Error::Quadrature {
            target: max_change,
            achieved: change,
            evaluations: n1 + n2,
        });
    }
    Ok(L1WeightReport {
        value: fine * scale,
        coarse_value: coarse * scale,
        relative_change: change,
        evaluations: n1 + n2,
    })
}

// ---------------------------------------------------------------------------
// Pointwise diagnostics

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OmegaSample {
    pub x: f64,
    pub y: f64,
    pub omega_abs: f64,
    /// `⦀f⦀_n |x - x0|^{γ-n} |y|^{n-1} U_1 χ_R`.
    pub majorant: f64,
}

/// Samples `|ω|` against its majorant on a grid that is log-spaced toward `x0`
/// and covers `|y| <= 1.2 |x - x0|` (so the cone edge is crossed).
pub fn omega_profile(ext: &QAExtension, seminorm: f64, nx: usize, nv: usize) -> Vec<OmegaSample> {
    let mut out = Vec::with_capacity(2 * nx * nv);
    let (r, x0, g, n) = (ext.radius, ext.x0, ext.gamma, ext.n as i32);
    for i in 0..nx {
        let u = 10f64.powf(-6.0 * i as f64 / (nx.max(2) - 1) as f64);
        for side in [-1.0, 1.0] {
            let xn = side * u;
            let slice = ext.slice(xn);
            for j in 1..=nv {
                let vn = 1.2 * j as f64 / nv as f64;
                let yn = vn * u;
                let w = slice.omega(yn).norm() * r.powf(g - 1.0);
                let (x, y) = (x0 + r * xn, r * yn);
                let dx = (x - x0).abs();
                let inside = y.abs() < dx && dx <= r;
                let majorant = if inside {
                    seminorm * dx.powf(g - n as f64) * y.abs().powi(n - 1)
                } else {
                    0.0
                };
                out.push(OmegaSample {
                    x,
                    y,
                    omega_abs: w,
                    majorant,
                });
            }
        }
    }
    out
}

/// `max |ω| / majorant` over a profile; infinite if `ω` is nonzero where the majorant vanishes.
pub fn empirical_omega_constant(profile: &[OmegaSample]) -> f64 {
    profile.iter().fold(0.0f64, |c, s| {
        if s.majorant > 0.0 {
            c.max(s.omega_abs / s.majorant)
        } else if s.omega_abs > 0.0 {
            f64::INFINITY
        } else {
            c
        }
    })
}

/// Central-difference `∂̄ f̃ = (∂_x + i ∂_y) f̃ / 2` in original coordinates.
pub fn dbar_finite_difference(ext: &QAExtension, x: f64, y: f64, h: f64) -> C64 {
    let dx = (ext.eval_ftilde(x + h, y) - ext.eval_ftilde(x - h, y)) / (2.0 * h);
    let dy = (ext.eval_ftilde(x, y + h) - ext.eval_ftilde(x, y - h)) / (2.0 * h);
    0.5 * (dx + I * dy)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlaneHolderReport {
    pub kappa: f64,
    pub constant: f64,
    /// `sup |f̃(x, y)| / |x - x0|^γ`.
    pub origin_constant: f64,
    pub pairs: usize,
}

/// Empirical Hölder constant of `f̃` with exponent `min(γ, 1)` over random pairs
/// of points drawn at all scales around `(x0, 0)`.
pub fn holder_check_plane(ext: &QAExtension, seed: u64) -> PlaneHolderReport {
    let kappa = ext.gamma.min(1.0);
    let mut rng = ensembles::rng(seed);
    let r = ext.radius;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for _ in 0..1200 {
        let rad = r * 10f64.powf(-6.0 * rng.random::<f64>());
        let th = std::f64::consts::TAU * rng.random::<f64>();
        pts.push((ext.x0 + rad * th.cos(), rad * th.sin()));
    }
    for _ in 0..600 {
        let x = ext.x0 + r * rng.random_range(-1.25..1.25);
        let y = r * rng.random_range(-1.25..1.25);
        pts.push((x, y));
    }
    let vals: Vec<C64> = pts.iter().map(|&(x, y)| ext.eval_ftilde(x, y)).collect();
    let mut constant = 0.0f64;
    let mut origin_constant = 0.0f64;
    let mut pairs = 0;
    for i in 0..pts.len() {
        let dx0 = (pts[i].0 - ext.x0).abs();
        if dx0 > 0.0 {
            origin_constant = origin_constant.max(vals[i].norm() / dx0.powf(ext.gamma));
        }
        for j in 0..i {
            let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
            if d == 0.0 {
                continue;
            }
            constant = constant.max((vals[i] - vals[j]).norm() / d.powf(kappa));
            pairs += 1;
        }
    }
    PlaneHolderReport {
        kappa,
        constant,
        origin_constant,
        pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func_classes::{abs_pow, bump, zero_fn};

    #[test]
    fn restricts_to_f_on_axis() {
        let f = abs_pow(0.5, 2);
        let ext = build_extension(&f).unwrap();
        for i in 0..50 {
            let x = -1.2 + 2.4 * i as f64 / 49.0;
            assert!((ext.eval_ftilde(x, 0.0) - f.eval(x)).norm() < 1e-15);
        }
    }

    #[test]
    fn omega_vanishes_outside_cone() {
        let ext = build_extension(&abs_pow(0.5, 2)).unwrap();
        for &(x, y) in &[(0.3, 0.3), (0.3, -0.31), (-0.1, 0.5), (0.0, 0.2)] {
            assert_eq!(ext.eval_omega(x, y), C64::new(0.0, 0.0));
            assert_eq!(ext.eval_ftilde(x, y), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn omega_matches_dbar() {
        let ext = build_extension(&abs_pow(0.5, 3)).unwrap();
        for &(x, y) in &[(0.4, 0.3), (-0.6, 0.35), (0.2, -0.15), (0.7, 0.1)] {
            let fd = dbar_finite_difference(&ext, x, y, 1e-5);
            let w = ext.eval_omega(x, y);
            assert!((fd - w).norm() < 1e-7, "{x} {y}: {fd} vs {w}");
        }
    }

    #[test]
    fn rejects_low_order_and_unbounded() {
        assert!(build_extension(&abs_pow(0.5, 1)).is_err());
        assert!(build_extension(&crate::func_classes::lorentz()).is_err());
    }

    #[test]
    fn l1_weight_of_zero() {
        let ext = build_extension(&zero_fn()).unwrap();
        assert_eq!(verify_l1_weight(&ext).unwrap().value, 0.0);
    }

    #[test]
    fn l1_weight_converges() {
        let r = verify_l1_weight(&build_extension(&abs_pow(0.5, 2)).unwrap()).unwrap();
        assert!(r.value.is_finite() && r.value > 0.0);
        assert!(r.relative_change < 0.01);
        let r = verify_l1_weight(&build_extension(&bump(3)).unwrap()).unwrap();
        assert!(r.value.is_finite() && r.value > 0.0);
    }
}
