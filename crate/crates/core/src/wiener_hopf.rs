//! Discretized Wiener-Hopf operators on a periodic grid.
//!
//! Space is a periodic box of side `L` with `N` cell-centred points per axis,
//! `x = (i + 1/2) h - L/2`. Frequencies are `k = 2π m / L` for the signed FFT
//! indices `m`, and `ξ = k/α`. A symbol `a(ξ)` acts as the circulant matrix
//! `(1/N^d) Σ_k a(k/α) e^{i k (x_i - x_j)}`, which is the kernel prefactor
//! `(α/2π)^d` of the continuum operator times the cell volume `h^d`, so that
//! `op_α(1) = I` and `op_α(χ_Ω)` is an orthogonal projection.
//!
//! Only the blocks that are actually needed are formed: rows and columns of
//! `χ_Λ`-restricted operators are indexed by the grid points inside `Λ`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use ndarray::Array2;
use ndarray_linalg::{EigValsh, JobSvd, SVDDC, UPLO};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func_classes::{CutoffZeta, SingularFunction};
use crate::operator::{DenseOperator, GridMeta, C64};
use crate::quadrature::gauss_legendre;

/// Largest full-box matrix (`N^d` rows) formed by the general dense paths.
pub const DENSE_LIMIT: usize = 4096;

// ---------------------------------------------------------------------------
// Domains

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    Lipschitz,
    PwC1,
    PwC3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainKind {
    Ball { center: Vec<f64>, radius: f64 },
    Cube { center: Vec<f64>, half_side: f64 },
    /// Counter-clockwise or clockwise vertex list (d = 2).
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: DomainKind,
}

/// Surface quadrature node with its exterior unit normal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshNode {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl DomainSpec {
    pub fn ball(dim: usize, center: Vec<f64>, radius: f64) -> Result<Self> {
        let d = DomainSpec {
            dim,
            kind: DomainKind::Ball { center, radius },
        };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_disk() -> Self {
        DomainSpec {
            dim: 2,
            kind: DomainKind::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
        }
    }

    pub fn disk(radius: f64) -> Self {
        DomainSpec {
            dim: 2,
            kind: DomainKind::Ball {
                center: vec![0.0, 0.0],
                radius,
            },
        }
    }

    pub fn square(half_side: f64) -> Self {
        DomainSpec {
            dim: 2,
            kind: DomainKind::Cube {
                center: vec![0.0, 0.0],
                half_side,
            },
        }
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let mut v = vertices;
        let area2: f64 = (0..v.len())
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        if area2 < 0.0 {
            v.reverse();
        }
        let d = DomainSpec {
            dim: 2,
            kind: DomainKind::Polygon { vertices: v },
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter("domains need dimension d >= 2".into()));
        }
        match &self.kind {
            DomainKind::Ball { center, radius } | DomainKind::Cube { center, half_side: radius } => {
                if center.len() != self.dim {
                    return Err(Error::Shape {
                        expected: format!("center of length {}", self.dim),
                        got: format!("{}", center.len()),
                    });
                }
                if !(*radius > 0.0) {
                    return Err(Error::InvalidParameter("domain size must be positive".into()));
                }
            }
            DomainKind::Polygon { vertices } => {
                if self.dim != 2 || vertices.len() < 3 {
                    return Err(Error::InvalidParameter("polygons need d = 2 and at least 3 vertices".into()));
                }
            }
        }
        Ok(())
    }

    pub fn smoothness(&self) -> Smoothness {
        match self.kind {
            DomainKind::Ball { .. } => Smoothness::PwC3,
            DomainKind::Cube { .. } | DomainKind::Polygon { .. } => Smoothness::PwC1,
        }
    }

    pub fn indicator(&self, x: &[f64]) -> bool {
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() < radius * radius
            }
            DomainKind::Cube { center, half_side } => {
                x.iter().zip(center).all(|(a, c)| (a - c).abs() < *half_side)
            }
            DomainKind::Polygon { vertices } => {
                let (px, py) = (x[0], x[1]);
                let mut inside = false;
                let n = vertices.len();
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + n - 1) % n]);
                    if (a[1] > py) != (b[1] > py) {
                        let xc = a[0] + (py - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                        if px < xc {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// `max |x|` over the closure of the domain.
    pub fn bounding_radius(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => norm(center) + radius,
            DomainKind::Cube { center, half_side } => {
                center.iter().map(|c| (c.abs() + half_side).powi(2)).sum::<f64>().sqrt()
            }
            DomainKind::Polygon { vertices } => vertices.iter().map(|v| norm(v)).fold(0.0, f64::max),
        }
    }

    /// Largest coordinate magnitude `max_a |x_a|` over the domain.
    pub fn max_coordinate(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => center.iter().map(|c| c.abs()).fold(0.0, f64::max) + radius,
            DomainKind::Cube { center, half_side } => {
                center.iter().map(|c| c.abs()).fold(0.0, f64::max) + half_side
            }
            DomainKind::Polygon { vertices } => vertices
                .iter()
                .map(|v| v[0].abs().max(v[1].abs()))
                .fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => 2.0 * radius,
            DomainKind::Cube { half_side, .. } => 2.0 * half_side * (self.dim as f64).sqrt(),
            DomainKind::Polygon { vertices } => {
                let mut d = 0.0f64;
                for a in vertices {
                    for b in vertices {
                        d = d.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
                    }
                }
                d
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => {
                let d = self.dim as f64;
                PI.powf(d / 2.0) / gamma_fn(d / 2.0 + 1.0) * radius.powf(d)
            }
            DomainKind::Cube { half_side, .. } => (2.0 * half_side).powi(self.dim as i32),
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a[0] * b[1] - b[0] * a[1]
                    })
                    .sum::<f64>()
                    .abs()
            }
        }
    }

    pub fn surface_area(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => {
                let d = self.dim as f64;
                2.0 * PI.powf(d / 2.0) / gamma_fn(d / 2.0) * radius.powf(d - 1.0)
            }
            DomainKind::Cube { half_side, .. } => {
                2.0 * self.dim as f64 * (2.0 * half_side).powi(self.dim as i32 - 1)
            }
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
                    })
                    .sum()
            }
        }
    }

    fn polygon_vertices(&self) -> Option<Vec<[f64; 2]>> {
        match &self.kind {
            DomainKind::Polygon { vertices } => Some(vertices.clone()),
            DomainKind::Cube { center, half_side } if self.dim == 2 => {
                let (c, s) = ([center[0], center[1]], *half_side);
                Some(vec![
                    [c[0] - s, c[1] - s],
                    [c[0] + s, c[1] - s],
                    [c[0] + s, c[1] + s],
                    [c[0] - s, c[1] + s],
                ])
            }
            _ => None,
        }
    }

    /// Boundary quadrature with about `m` nodes: equispaced angles on circles,
    /// midpoint segments on polygon edges, product rules on spheres and cube faces.
    pub fn boundary_mesh(&self, m: usize) -> Result<Vec<MeshNode>> {
        if m == 0 {
            return Err(Error::InvalidParameter("mesh needs at least one node".into()));
        }
        if let Some(vertices) = self.polygon_vertices() {
            let perim = self.surface_area();
            let n = vertices.len();
            let mut out = Vec::with_capacity(m + n);
            for i in 0..n {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let k = ((m as f64 * len / perim).round() as usize).max(1);
                let normal = vec![(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                for j in 0..k {
                    let t = (j as f64 + 0.5) / k as f64;
                    out.push(MeshNode {
                        point: vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
                        normal: normal.clone(),
                        weight: len / k as f64,
                    });
                }
            }
            return Ok(out);
        }
        match (&self.kind, self.dim) {
            (DomainKind::Ball { center, radius }, 2) => Ok((0..m)
                .map(|j| {
                    let th = TAU * (j as f64 + 0.5) / m as f64;
                    let n = vec![th.cos(), th.sin()];
                    MeshNode {
                        point: vec![center[0] + radius * n[0], center[1] + radius * n[1]],
                        normal: n,
                        weight: TAU * radius / m as f64,
                    }
                })
                .collect()),
            (DomainKind::Ball { center, radius }, 3) => {
                let nt = ((m as f64 / 2.0).sqrt().round() as usize).max(2);
                let np = 2 * nt;
                let (gx, gw) = gauss_legendre(nt);
                let mut out = Vec::with_capacity(nt * np);
                for (c, w) in gx.iter().zip(&gw) {
                    let s = (1.0 - c * c).sqrt();
                    for j in 0..np {
                        let ph = TAU * (j as f64 + 0.5) / np as f64;
                        let n = vec![s * ph.cos(), s * ph.sin(), *c];
                        out.push(MeshNode {
                            point: (0..3).map(|a| center[a] + radius * n[a]).collect(),
                            normal: n,
                            weight: radius * radius * w * TAU / np as f64,
                        });
                    }
                }
                Ok(out)
            }
            (DomainKind::Cube { center, half_side }, 3) => {
                let k = ((m as f64 / 6.0).sqrt().round() as usize).max(1);
                let s = *half_side;
                let w = (2.0 * s / k as f64).powi(2);
                let mut out = Vec::with_capacity(6 * k * k);
                for axis in 0..3 {
                    for sign in [-1.0, 1.0] {
                        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                        for i in 0..k {
                            for j in 0..k {
                                let mut p = center.clone();
                                p[axis] += sign * s;
                                p[u] += -s + (i as f64 + 0.5) * 2.0 * s / k as f64;
                                p[v] += -s + (j as f64 + 0.5) * 2.0 * s / k as f64;
                                let mut n = vec![0.0; 3];
                                n[axis] = sign;
                                out.push(MeshNode {
                                    point: p,
                                    normal: n,
                                    weight: w,
                                });
                            }
                        }
                    }
                }
                Ok(out)
            }
            _ => Err(Error::InvalidParameter(format!(
                "no boundary mesh for this domain in dimension {}",
                self.dim
            ))),
        }
    }
}

/// Checks unit normals, outward orientation and total weight against the surface area.
pub fn validate_mesh(domain: &DomainSpec, mesh: &[MeshNode], area_tol: f64) -> Result<()> {
    let eps = 1e-6 * domain.diameter();
    for node in mesh {
        if (norm(&node.normal) - 1.0).abs() > 1e-12 {
            return Err(Error::Numeric("mesh normal is not a unit vector".into()));
        }
        let out: Vec<f64> = node.point.iter().zip(&node.normal).map(|(p, n)| p + eps * n).collect();
        let inn: Vec<f64> = node.point.iter().zip(&node.normal).map(|(p, n)| p - eps * n).collect();
        if domain.indicator(&out) || !domain.indicator(&inn) {
            return Err(Error::Numeric("mesh normal does not point outward".into()));
        }
    }
    let total: f64 = mesh.iter().map(|n| n.weight).sum();
    let area = domain.surface_area();
    if ((total - area) / area).abs() > area_tol {
        return Err(Error::Numeric(format!("mesh weight {total} differs from surface area {area}")));
    }
    Ok(())
}

fn gamma_fn(x: f64) -> f64 {
    // half-integer and integer arguments only
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as usize).fold(1.0, |acc, k| acc * k as f64)
    } else {
        let mut g = PI.sqrt();
        let mut t = 0.5;
        while t < x - 1e-12 {
            g *= t;
            t += 1.0;
        }
        g
    }
}

// ---------------------------------------------------------------------------
// Symbols

pub type PointFn = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(&[f64], &[f64]) -> C64 + Send + Sync>;

#[derive(Clone)]
pub enum SymbolKind {
    Constant(C64),
    /// `a(ξ)`.
    Xi(PointFn),
    /// `ψ(x) φ(ξ)`.
    Product { x: PointFn, xi: PointFn },
    General(PairFn),
}

/// A symbol `a(x, ξ)`.
#[derive(Clone)]
pub struct Symbol2 {
    pub label: String,
    pub kind: SymbolKind,
    /// Declared radius outside which `a` vanishes in `ξ`.
    pub xi_support_radius: Option<f64>,
}

impl std::fmt::Debug for Symbol2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol2")
            .field("label", &self.label)
            .field("xi_support_radius", &self.xi_support_radius)
            .finish()
    }
}

impl Symbol2 {
    pub fn constant(c: impl Into<C64>) -> Self {
        let c = c.into();
        Symbol2 {
            label: format!("const:{}", c.re),
            kind: SymbolKind::Constant(c),
            xi_support_radius: None,
        }
    }

    pub fn xi(label: impl Into<String>, f: impl Fn(&[f64]) -> C64 + Send + Sync + 'static, support: Option<f64>) -> Self {
        Symbol2 {
            label: label.into(),
            kind: SymbolKind::Xi(Arc::new(f)),
            xi_support_radius: support,
        }
    }

    pub fn product(
        label: impl Into<String>,
        x: impl Fn(&[f64]) -> C64 + Send + Sync + 'static,
        xi: impl Fn(&[f64]) -> C64 + Send + Sync + 'static,
        support: Option<f64>,
    ) -> Self {
        Symbol2 {
            label: label.into(),
            kind: SymbolKind::Product {
                x: Arc::new(x),
                xi: Arc::new(xi),
            },
            xi_support_radius: support,
        }
    }

    pub fn general(label: impl Into<String>, f: impl Fn(&[f64], &[f64]) -> C64 + Send + Sync + 'static, support: Option<f64>) -> Self {
        Symbol2 {
            label: label.into(),
            kind: SymbolKind::General(Arc::new(f)),
            xi_support_radius: support,
        }
    }

    /// `ζ(|ξ|/r)`.
    pub fn bump_xi(r: f64) -> Self {
        Symbol2::xi(
            format!("bump_xi:{r}"),
            move |xi| C64::new(CutoffZeta.eval(norm(xi) / r), 0.0),
            Some(r),
        )
    }

    /// `ζ(|x|/rx) ζ(|ξ|/rxi)`.
    pub fn bump_x_xi(rx: f64, rxi: f64) -> Self {
        Symbol2::product(
            format!("bump_x_xi:{rx}:{rxi}"),
            move |x| C64::new(CutoffZeta.eval(norm(x) / rx), 0.0),
            move |xi| C64::new(CutoffZeta.eval(norm(xi) / rxi), 0.0),
            Some(rxi),
        )
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> C64 {
        match &self.kind {
            SymbolKind::Constant(c) => *c,
            SymbolKind::Xi(f) => f(xi),
            SymbolKind::Product { x: px, xi: pxi } => px(x) * pxi(xi),
            SymbolKind::General(f) => f(x, xi),
        }
    }

    /// `a(ξ)` for symbols that do not depend on `x`.
    pub fn eval_xi(&self, xi: &[f64]) -> Option<C64> {
        match &self.kind {
            SymbolKind::Constant(c) => Some(*c),
            SymbolKind::Xi(f) => Some(f(xi)),
            _ => None,
        }
    }

    pub fn is_x_independent(&self) -> bool {
        matches!(self.kind, SymbolKind::Constant(_) | SymbolKind::Xi(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, SymbolKind::Constant(c) if c == C64::new(0.0, 0.0))
    }

    /// `(x, ξ) ↦ g(re a(x, ξ))` as a new symbol.
    pub fn compose_real(&self, g: &SingularFunction) -> Symbol2 {
        let label = format!("{}({})", g.label(), self.label);
        match &self.kind {
            SymbolKind::Constant(c) => {
                return Symbol2 {
                    label,
                    ..Symbol2::constant(g.eval(c.re))
                }
            }
            SymbolKind::Xi(f) => {
                let (f, g) = (f.clone(), g.clone());
                return Symbol2::xi(label, move |xi| g.eval(f(xi).re), self.xi_support_radius);
            }
            _ => {}
        }
        let a = self.clone();
        let g = g.clone();
        Symbol2::general(
            format!("{}({})", g.label(), self.label),
            move |x, xi| g.eval(a.eval(x, xi).re),
            self.xi_support_radius,
        )
    }
}

/// Symbols by label: `const:c`, `one`, `zero`, `bump_xi:r`, `bump_x_xi:rx:rxi`.
pub fn symbol_registry(label: &str) -> Result<Symbol2> {
    let parts: Vec<&str> = label.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .ok_or_else(|| Error::Parse(format!("`{label}` is missing an argument")))?
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad numeric argument in `{label}`")))
    };
    let s = match parts[0] {
        "one" => Symbol2::constant(1.0),
        "zero" => Symbol2::constant(0.0),
        "half" => Symbol2::constant(0.5),
        "const" => Symbol2::constant(num(1)?),
        "bump_xi" => Symbol2::bump_xi(num(1)?),
        "bump_x_xi" => Symbol2::bump_x_xi(num(1)?, num(2)?),
        _ => return Err(Error::UnknownLabel(label.to_string())),
    };
    Ok(Symbol2 {
        label: label.to_string(),
        ..s
    })
}

// ---------------------------------------------------------------------------
// Grid and FFT

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub n: usize,
    pub box_side: f64,
}

impl Grid {
    pub fn h(&self) -> f64 {
        self.box_side / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row-major multi-index, last axis fastest.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let h = self.h();
        self.multi_index(idx)
            .iter()
            .map(|&i| (i as f64 + 0.5) * h - 0.5 * self.box_side)
            .collect()
    }

    /// Signed FFT frequency index along one axis.
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.n.div_ceil(2) {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn signed_index(&self, idx: usize) -> Vec<i64> {
        self.multi_index(idx).iter().map(|&i| self.signed(i)).collect()
    }

    /// `ξ = 2π m / (α L)`.
    pub fn xi(&self, idx: usize, alpha: f64) -> Vec<f64> {
        let s = TAU / (alpha * self.box_side);
        self.signed_index(idx).iter().map(|&m| m as f64 * s).collect()
    }

    /// Largest resolved `|ξ_a|` per axis, `π / (α h)`.
    pub fn xi_max(&self, alpha: f64) -> f64 {
        PI / (alpha * self.h())
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            dim: self.dim,
            points_per_axis: self.n,
            spacing: self.h(),
            box_side: self.box_side,
        }
    }
}

/// In-place multidimensional FFT (unnormalized), row-major layout.
pub fn fft_nd(data: &mut [C64], n: usize, dim: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[start + off + j * stride];
                }
                fft.process(&mut line);
                for (j, l) in line.iter().enumerate() {
                    data[start + off + j * stride] = *l;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Model

/// How `χ_Ω` is sampled on the frequency grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IndicatorRule {
    /// Point values at the grid frequencies: `P` is an exact projection.
    #[default]
    Sampled,
    /// Fraction of `sub^d` sub-samples of each frequency cell inside `Ω`.
    CellAveraged { sub: usize },
}

#[derive(Clone, Debug)]
pub struct WHModel {
    pub lambda: DomainSpec,
    pub omega: DomainSpec,
    pub alpha: f64,
    pub grid: Grid,
    pub omega_rule: IndicatorRule,
}

/// Points per axis of the reference discretization: `6α` rounded to even, capped at 96.
pub fn reference_points(alpha: f64) -> usize {
    let n = (6.0 * alpha / 2.0).round() as usize * 2;
    n.clamp(8, 96)
}

impl WHModel {
    pub fn new(lambda: DomainSpec, omega: DomainSpec, alpha: f64, n: usize, box_side: f64) -> Result<Self> {
        lambda.validate()?;
        omega.validate()?;
        if lambda.dim != omega.dim {
            return Err(Error::Shape {
                expected: format!("Ω of dimension {}", lambda.dim),
                got: format!("{}", omega.dim),
            });
        }
        if !(alpha >= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter("need at least 2 points per axis".into()));
        }
        let grid = Grid {
            dim: lambda.dim,
            n,
            box_side,
        };
        if lambda.max_coordinate() >= 0.5 * box_side {
            return Err(Error::InvalidParameter(format!(
                "box of side {box_side} does not cover Λ"
            )));
        }
        let model = WHModel {
            lambda,
            omega,
            alpha,
            grid,
            omega_rule: IndicatorRule::Sampled,
        };
        model.check_nyquist(model.omega.max_coordinate())?;
        Ok(model)
    }

    /// Unit disks, box side `2 diam(Λ) = 4`, `N = min(6α, 96)`.
    pub fn reference(alpha: f64) -> Result<Self> {
        WHModel::new(DomainSpec::unit_disk(), DomainSpec::unit_disk(), alpha, reference_points(alpha), 4.0)
    }

    pub fn with_omega_rule(mut self, rule: IndicatorRule) -> Self {
        self.omega_rule = rule;
        self
    }

    /// Frequencies up to `xi_radius` (per axis) must be resolved: `α ξ h < π`.
    pub fn check_nyquist(&self, xi_radius: f64) -> Result<()> {
        let xm = self.grid.xi_max(self.alpha);
        if xi_radius >= xm {
            let required = (self.alpha * xi_radius * self.grid.box_side / PI).floor() as usize + 1;
            return Err(Error::Nyquist {
                required_n: required,
                have: self.grid.n,
            });
        }
        Ok(())
    }

    fn check_symbol(&self, a: &Symbol2) -> Result<()> {
        if let Some(r) = a.xi_support_radius {
            self.check_nyquist(r)?;
        }
        Ok(())
    }

    pub fn lambda_indices(&self) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&i| self.lambda.indicator(&self.grid.point(i)))
            .collect()
    }

    pub fn complement_indices(&self) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&i| !self.lambda.indicator(&self.grid.point(i)))
            .collect()
    }

    /// `χ_Ω(ξ_k)` under the model's indicator rule.
    pub fn omega_weights(&self) -> Vec<f64> {
        let g = &self.grid;
        match self.omega_rule {
            IndicatorRule::Sampled => (0..g.len())
                .map(|k| if self.omega.indicator(&g.xi(k, self.alpha)) { 1.0 } else { 0.0 })
                .collect(),
            IndicatorRule::CellAveraged { sub } => {
                let sub = sub.max(1);
                let dxi = TAU / (self.alpha * g.box_side);
                let total = sub.pow(g.dim as u32);
                (0..g.len())
                    .map(|k| {
                        let c = g.xi(k, self.alpha);
                        let mut hits = 0;
                        for s in 0..total {
                            let mut p = c.clone();
                            let mut rem = s;
                            for pa in p.iter_mut() {
                                let j = rem % sub;
                                rem /= sub;
                                *pa += ((j as f64 + 0.5) / sub as f64 - 0.5) * dxi;
                            }
                            if self.omega.indicator(&p) {
                                hits += 1;
                            }
                        }
                        hits as f64 / total as f64
                    })
                    .collect()
            }
        }
    }

    /// Symbol values `a(ξ_k)` on the frequency grid (x-independent symbols).
    pub fn symbol_values(&self, a: &Symbol2) -> Result<Vec<C64>> {
        self.check_symbol(a)?;
        if !a.is_x_independent() {
            return Err(Error::InvalidParameter(format!("symbol `{}` depends on x", a.label)));
        }
        Ok((0..self.grid.len())
            .map(|k| a.eval_xi(&self.grid.xi(k, self.alpha)).unwrap())
            .collect())
    }

    /// Multiplier `f(a) w + f(a1) (1 - w)` with `w = χ_Ω`; `f = re` when `real` is set.
    pub fn multiplier(&self, a: &Symbol2, a1: Option<&Symbol2>, real: bool) -> Result<Vec<C64>> {
        let w = self.omega_weights();
        let av = self.symbol_values(a)?;
        let a1v = match a1 {
            Some(s) => Some(self.symbol_values(s)?),
            None => None,
        };
        let f = |z: C64| if real { C64::new(z.re, 0.0) } else { z };
        Ok((0..w.len())
            .map(|k| {
                let mut m = f(av[k]) * w[k];
                if let Some(v) = &a1v {
                    m += f(v[k]) * (1.0 - w[k]);
                }
                m
            })
            .collect())
    }

    /// Convolution kernel `c[Δ] = N^{-d} Σ_k m_k e^{2πi m·Δ/N}` of a multiplier.
    pub fn kernel(&self, multiplier: &[C64]) -> Vec<C64> {
        let mut c = multiplier.to_vec();
        fft_nd(&mut c, self.grid.n, self.grid.dim, true);
        let s = 1.0 / self.grid.len() as f64;
        for z in c.iter_mut() {
            *z *= s;
        }
        c
    }

    fn diff_index(&self, i: &[usize], j: &[usize]) -> usize {
        let n = self.grid.n;
        i.iter()
            .zip(j)
            .fold(0, |acc, (a, b)| acc * n + (a + n - b) % n)
    }

    /// Block `c[x_i - x_j]` for `i ∈ rows`, `j ∈ cols`.
    pub fn circulant_block(&self, kernel: &[C64], rows: &[usize], cols: &[usize]) -> BlockMatrix {
        let ri: Vec<Vec<usize>> = rows.iter().map(|&i| self.grid.multi_index(i)).collect();
        let ci: Vec<Vec<usize>> = cols.iter().map(|&j| self.grid.multi_index(j)).collect();
        let scale = kernel.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let real = kernel.iter().all(|z| z.im.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE));
        if real {
            let mut m = Array2::<f64>::zeros((rows.len(), cols.len()));
            m.axis_iter_mut(ndarray::Axis(0))
                .into_par_iter()
                .zip(ri.par_iter())
                .for_each(|(mut row, a)| {
                    for (x, b) in row.iter_mut().zip(&ci) {
                        *x = kernel[self.diff_index(a, b)].re;
                    }
                });
            BlockMatrix::Real(m)
        } else {
            let mut m = Array2::<C64>::zeros((rows.len(), cols.len()));
            m.axis_iter_mut(ndarray::Axis(0))
                .into_par_iter()
                .zip(ri.par_iter())
                .for_each(|(mut row, a)| {
                    for (x, b) in row.iter_mut().zip(&ci) {
                        *x = kernel[self.diff_index(a, b)];
                    }
                });
            BlockMatrix::Complex(m)
        }
    }

    fn all_indices(&self) -> Vec<usize> {
        (0..self.grid.len()).collect()
    }

    fn require_dense(&self) -> Result<()> {
        if self.grid.len() > DENSE_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "full-box matrices are limited to {DENSE_LIMIT} rows; grid has {}",
                self.grid.len()
            )));
        }
        Ok(())
    }

    fn wrap(&self, m: Array2<C64>) -> DenseOperator {
        DenseOperator::new(m).with_grid(self.grid.meta())
    }

    /// `op_α(a)` on the whole box (left quantization for x-dependent symbols).
    pub fn op_alpha(&self, a: &Symbol2) -> Result<DenseOperator> {
        self.check_symbol(a)?;
        if a.is_x_independent() {
            let m = self.symbol_values(a)?;
            let all = self.all_indices();
            return Ok(self.wrap(self.circulant_block(&self.kernel(&m), &all, &all).into_complex()));
        }
        self.require_dense()?;
        let g = &self.grid;
        let nn = g.len();
        let xis: Vec<Vec<f64>> = (0..nn).map(|k| g.xi(k, self.alpha)).collect();
        let idx: Vec<Vec<usize>> = (0..nn).map(|i| g.multi_index(i)).collect();
        let rows: Vec<Vec<C64>> = (0..nn)
            .into_par_iter()
            .map(|i| {
                let x = g.point(i);
                let vals: Vec<C64> = xis.iter().map(|xi| a.eval(&x, xi)).collect();
                let c = self.kernel(&vals);
                (0..nn).map(|j| c[self.diff_index(&idx[i], &idx[j])]).collect()
            })
            .collect();
        let mut m = Array2::zeros((nn, nn));
        for (i, r) in rows.into_iter().enumerate() {
            for (j, v) in r.into_iter().enumerate() {
                m[[i, j]] = v;
            }
        }
        Ok(self.wrap(m))
    }

    /// `P_{Ω,α} = op_α(χ_Ω)` on the whole box.
    pub fn projection_omega(&self) -> Result<DenseOperator> {
        let w: Vec<C64> = self.omega_weights().into_iter().map(|x| C64::new(x, 0.0)).collect();
        let all = self.all_indices();
        let m = self.circulant_block(&self.kernel(&w), &all, &all).into_complex();
        Ok(DenseOperator::new(m).hermitian_part().with_grid(self.grid.meta()))
    }

    /// `P_Ω op(a) P_Ω` (or with `P_{Ω₁} = I - P_Ω` for the complementary part) on the box.
    fn sandwich_dense(&self, a: &Symbol2, complement: bool, real: bool) -> Result<DenseOperator> {
        self.require_dense()?;
        let mut p = self.projection_omega()?;
        if complement {
            p = DenseOperator::identity(p.rows()).sub(&p)?;
        }
        let mut op = self.op_alpha(a)?;
        if real {
            op = op.hermitian_part();
        }
        p.matmul(&op)?.matmul(&p)
    }

    /// Λ-block of `P re op(a) P [+ P₁ re op(a1) P₁]` (`real = false` drops the `re`).
    pub fn lambda_block(&self, a: &Symbol2, a1: Option<&Symbol2>, real: bool) -> Result<BlockMatrix> {
        let lam = self.lambda_indices();
        let x_indep = a.is_x_independent() && a1.map(|s| s.is_x_independent()).unwrap_or(true);
        if x_indep {
            let m = self.multiplier(a, a1, real)?;
            return Ok(self.circulant_block(&self.kernel(&m), &lam, &lam));
        }
        let mut full = self.sandwich_dense(a, false, real)?;
        if let Some(s) = a1 {
            full = full.add(&self.sandwich_dense(s, true, real)?)?;
        }
        Ok(BlockMatrix::Complex(full.rows_cols(&lam, &lam).into_entries()))
    }

    /// `S_α(a; Λ, Ω)` restricted to the grid points of `Λ`.
    pub fn assemble_s(&self, a: &Symbol2) -> Result<DenseOperator> {
        let b = self.lambda_block(a, None, true)?;
        Ok(DenseOperator::new(b.into_complex()).hermitian_part())
    }

    /// Non-symmetric variant `χ_Λ P op(a) P χ_Λ`.
    pub fn assemble_t(&self, a: &Symbol2) -> Result<DenseOperator> {
        Ok(DenseOperator::new(self.lambda_block(a, None, false)?.into_complex()))
    }

    /// `V_α = T_α(a; Λ, Ω) + T_α(a₁; Λ, Ω₁)`.
    pub fn assemble_v(&self, a: &Symbol2, a1: &Symbol2) -> Result<DenseOperator> {
        Ok(DenseOperator::new(self.lambda_block(a, Some(a1), false)?.into_complex()))
    }

    /// `H_α = S_α(a; Λ, Ω) + S_α(a₁; Λ, Ω₁)`.
    pub fn assemble_h(&self, a: &Symbol2, a1: &Symbol2) -> Result<DenseOperator> {
        let b = self.lambda_block(a, Some(a1), true)?;
        Ok(DenseOperator::new(b.into_complex()).hermitian_part())
    }
}

/// Real or complex dense block; real blocks use the cheaper real factorizations.
#[derive(Clone, Debug)]
pub enum BlockMatrix {
    Real(Array2<f64>),
    Complex(Array2<C64>),
}

impl BlockMatrix {
    pub fn into_complex(self) -> Array2<C64> {
        match self {
            BlockMatrix::Real(m) => m.mapv(|x| C64::new(x, 0.0)),
            BlockMatrix::Complex(m) => m,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            BlockMatrix::Real(m) => m.dim(),
            BlockMatrix::Complex(m) => m.dim(),
        }
    }

    /// Eigenvalues of the Hermitian part.
    pub fn eigvalsh(&self) -> Result<Vec<f64>> {
        if self.shape().0 == 0 {
            return Ok(Vec::new());
        }
        Ok(match self {
            BlockMatrix::Real(m) => {
                let s = (m + &m.t()) * 0.5;
                s.eigvalsh(UPLO::Lower)?.to_vec()
            }
            BlockMatrix::Complex(m) => {
                let s = (m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
                s.eigvalsh(UPLO::Lower)?.to_vec()
            }
        })
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let (r, c) = self.shape();
        if r == 0 || c == 0 {
            return Ok(Vec::new());
        }
        let mut v = match self {
            BlockMatrix::Real(m) => m.svddc(JobSvd::None)?.1.to_vec(),
            BlockMatrix::Complex(m) => m.svddc(JobSvd::None)?.1.to_vec(),
        };
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Traces

/// Spectrum of a Λ-block together with the bulk multiplier used for the
/// `Λ = ℝ^d` reference term.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumData {
    pub alpha: f64,
    pub eigenvalues: Vec<f64>,
    pub multiplier: Vec<f64>,
    pub lambda_points: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceD {
    pub value: f64,
    /// `tr χ_Λ g(S_α(a; Λ, Ω)) χ_Λ`.
    pub first: f64,
    /// `tr χ_Λ g(S_α(a; ℝ^d, Ω)) χ_Λ`.
    pub second: f64,
    /// Floating-point uncertainty of `value`.
    pub uncertainty: f64,
}

/// Eigenvalues of `S_α` (or `H_α` when `a1` is given) on `Λ`, x-independent symbols.
pub fn spectrum(model: &WHModel, a: &Symbol2, a1: Option<&Symbol2>) -> Result<SpectrumData> {
    let m = model.multiplier(a, a1, true)?;
    let lam = model.lambda_indices();
    let block = model.circulant_block(&model.kernel(&m), &lam, &lam);
    Ok(SpectrumData {
        alpha: model.alpha,
        eigenvalues: block.eigvalsh()?,
        multiplier: m.iter().map(|z| z.re).collect(),
        lambda_points: lam.len(),
    })
}

impl SpectrumData {
    /// `tr g(S_Λ) - |Λ| mean_k g(m_k)`: the bulk operator is a convolution whose
    /// diagonal is the mean of `g` over the multiplier.
    pub fn trace_d(&self, g: &SingularFunction) -> Result<TraceD> {
        let gv: Vec<f64> = self.eigenvalues.iter().map(|&l| g.eval_real(l)).collect();
        let gm: Vec<f64> = self.multiplier.iter().map(|&m| g.eval_real(m)).collect();
        if gv.iter().chain(gm.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("`{}` is not finite on the spectrum", g.label())));
        }
        let first = kahan(&gv);
        let mean = kahan(&gm) / gm.len() as f64;
        let second = self.lambda_points as f64 * mean;
        let abs_sum: f64 = gv.iter().map(|v| v.abs()).sum::<f64>() + self.lambda_points as f64 * gm.iter().map(|v| v.abs()).sum::<f64>() / gm.len() as f64;
        // eigenvalue errors of size ε‖S‖ propagate through g with its local slope
        let uncertainty = 64.0 * f64::EPSILON * (abs_sum + self.eigenvalues.len() as f64);
        Ok(TraceD {
            value: first - second,
            first,
            second,
            uncertainty,
        })
    }
}

fn kahan(v: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &x in v {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// `D_α` trace for x-independent symbols via the exact bulk term.
pub fn trace_d(model: &WHModel, a: &Symbol2, g: &SingularFunction) -> Result<TraceD> {
    spectrum(model, a, None)?.trace_d(g)
}

/// Jump variant with `H_α(a, a₁)`.
pub fn trace_d_jump(model: &WHModel, a: &Symbol2, a1: &Symbol2, g: &SingularFunction) -> Result<TraceD> {
    spectrum(model, a, Some(a1))?.trace_d(g)
}

/// `tr (V_α)^p - |Λ| mean_k m_k^p` for the non-symmetric `V_α`, by repeated multiplication.
pub fn trace_d_power(model: &WHModel, a: &Symbol2, a1: &Symbol2, p: u32) -> Result<(C64, f64)> {
    if p == 0 || p > 8 {
        return Err(Error::InvalidParameter(format!("power must lie in 1..=8, got {p}")));
    }
    let m = model.multiplier(a, Some(a1), false)?;
    let lam = model.lambda_indices();
    let v = model.circulant_block(&model.kernel(&m), &lam, &lam).into_complex();
    let mut acc = v.clone();
    for _ in 1..p {
        acc = acc.dot(&v);
    }
    let first: C64 = acc.diag().sum();
    let mean: C64 = m.iter().map(|z| z.powu(p)).sum::<C64>() / m.len() as f64;
    let value = first - mean * lam.len() as f64;
    let unc = 64.0 * f64::EPSILON * (acc.diag().iter().map(|z| z.norm()).sum::<f64>() + lam.len() as f64);
    Ok((value, unc))
}

/// Both terms by eigendecomposition on the full box (general symbols, small grids).
pub fn trace_d_box(model: &WHModel, a: &Symbol2, g: &SingularFunction) -> Result<TraceD> {
    model.require_dense()?;
    let lam = model.lambda_indices();
    let s_box = model.sandwich_dense(a, false, true)?.hermitian_part();
    let (vals, vecs) = s_box.eigh()?;
    let gv: Vec<f64> = vals.iter().map(|&l| g.eval_real(l)).collect();
    let mut second = 0.0;
    for &i in &lam {
        let row = vecs.row(i);
        second += row.iter().zip(&gv).map(|(u, gl)| u.norm_sqr() * gl).sum::<f64>();
    }
    let s_lam = DenseOperator::new(s_box.rows_cols(&lam, &lam).into_entries()).hermitian_part();
    let first: f64 = s_lam.eigvalsh()?.iter().map(|&l| g.eval_real(l)).sum();
    let uncertainty = 64.0 * f64::EPSILON * (first.abs() + second.abs() + lam.len() as f64);
    Ok(TraceD {
        value: first - second,
        first,
        second,
        uncertainty,
    })
}

// ---------------------------------------------------------------------------
// Cross terms

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossVariant {
    /// `χ_Λ P op(a) P (I - χ_Λ)`.
    Lemma47,
    /// `χ_Λ op(a) (I - χ_Λ)`.
    Prop53a,
    /// `P op(a) (I - P)`.
    Prop53b,
}

impl std::str::FromStr for CrossVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma47" => Ok(CrossVariant::Lemma47),
            "prop53a" => Ok(CrossVariant::Prop53a),
            "prop53b" => Ok(CrossVariant::Prop53b),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

impl WHModel {
    /// The cross term as a block: rows and columns restricted to where it can
    /// be nonzero (spatial indices for the first two variants, frequency
    /// indices for `Prop53b`). Singular values are unaffected by the restriction.
    pub fn cross_block(&self, a: &Symbol2, variant: CrossVariant) -> Result<BlockMatrix> {
        self.check_symbol(a)?;
        match variant {
            CrossVariant::Lemma47 | CrossVariant::Prop53a => {
                let lam = self.lambda_indices();
                let comp = self.complement_indices();
                if a.is_x_independent() {
                    let m = if variant == CrossVariant::Lemma47 {
                        self.multiplier(a, None, false)?
                    } else {
                        self.symbol_values(a)?
                    };
                    return Ok(self.circulant_block(&self.kernel(&m), &lam, &comp));
                }
                let full = if variant == CrossVariant::Lemma47 {
                    self.sandwich_dense(a, false, false)?
                } else {
                    self.op_alpha(a)?
                };
                Ok(BlockMatrix::Complex(full.rows_cols(&lam, &comp).into_entries()))
            }
            CrossVariant::Prop53b => self.prop53b_block(a),
        }
    }

    pub fn cross_term(&self, a: &Symbol2, variant: CrossVariant) -> Result<DenseOperator> {
        Ok(DenseOperator::new(self.cross_block(a, variant)?.into_complex()))
    }

    /// `P op(a) (I - P)` in the discrete Fourier basis, where `P` is diagonal.
    fn prop53b_block(&self, a: &Symbol2) -> Result<BlockMatrix> {
        let g = &self.grid;
        let w = self.omega_weights();
        let nn = g.len();
        let (psi, phi): (Vec<C64>, Vec<C64>) = match &a.kind {
            SymbolKind::Constant(_) | SymbolKind::Xi(_) => {
                // op(a) commutes with P
                let rows: Vec<usize> = (0..nn).filter(|&k| w[k] > 0.0).collect();
                let cols: Vec<usize> = (0..nn).filter(|&k| w[k] < 1.0).collect();
                let vals = self.symbol_values(a)?;
                let mut m = Array2::<C64>::zeros((rows.len(), cols.len()));
                for (r, &k) in rows.iter().enumerate() {
                    for (c, &k2) in cols.iter().enumerate() {
                        if k == k2 {
                            m[[r, c]] = vals[k] * w[k] * (1.0 - w[k]);
                        }
                    }
                }
                return Ok(BlockMatrix::Complex(m));
            }
            SymbolKind::Product { x, xi } => (
                (0..nn).map(|i| x(&g.point(i))).collect(),
                (0..nn).map(|k| xi(&g.xi(k, self.alpha))).collect(),
            ),
            SymbolKind::General(_) => {
                self.require_dense()?;
                // U op(a) U* with the unitary DFT, then restrict
                let op = self.op_alpha(a)?.into_entries();
                let mut fwd = op.clone();
                // columns: op U*  (U* = inverse DFT scaled by N^{d/2})
                let scale = 1.0 / (nn as f64).sqrt();
                for mut row in fwd.rows_mut() {
                    let mut v = row.to_vec();
                    fft_nd(&mut v, g.n, g.dim, true);
                    for (dst, s) in row.iter_mut().zip(v) {
                        *dst = s * scale;
                    }
                }
                for mut col in fwd.columns_mut() {
                    let mut v = col.to_vec();
                    fft_nd(&mut v, g.n, g.dim, false);
                    for (dst, s) in col.iter_mut().zip(v) {
                        *dst = s * scale;
                    }
                }
                let rows: Vec<usize> = (0..nn).filter(|&k| w[k] > 0.0).collect();
                let cols: Vec<usize> = (0..nn).filter(|&k| w[k] < 1.0).collect();
                let mut m = Array2::<C64>::zeros((rows.len(), cols.len()));
                for (r, &k) in rows.iter().enumerate() {
                    for (c, &k2) in cols.iter().enumerate() {
                        m[[r, c]] = w[k] * fwd[[k, k2]] * (1.0 - w[k2]);
                    }
                }
                return Ok(BlockMatrix::Complex(m));
            }
        };
        // Ψ(m) = N^{-d} Σ_i ψ(x_i) e^{-i k_m x_i} for integer index vectors m
        let mut hat = psi.clone();
        fft_nd(&mut hat, g.n, g.dim, false);
        let c = 0.5 - 0.5 * g.n as f64;
        let n = g.n as i64;
        let psi_hat = |mv: &[i64]| -> C64 {
            let mut idx = 0usize;
            let mut ph = 0.0;
            for &m in mv {
                idx = idx * g.n + m.rem_euclid(n) as usize;
                ph += m as f64 * c;
            }
            hat[idx] * C64::from_polar(1.0 / nn as f64, -TAU * ph / g.n as f64)
        };
        let rows: Vec<usize> = (0..nn).filter(|&k| w[k] > 0.0).collect();
        let cols: Vec<usize> = (0..nn).filter(|&k| w[k] < 1.0 && phi[k] != C64::new(0.0, 0.0)).collect();
        let rs: Vec<Vec<i64>> = rows.iter().map(|&k| g.signed_index(k)).collect();
        let cs: Vec<Vec<i64>> = cols.iter().map(|&k| g.signed_index(k)).collect();
        let mut m = Array2::<C64>::zeros((rows.len(), cols.len()));
        m.axis_iter_mut(ndarray::Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(r, mut row)| {
                let k = rows[r];
                for (c, dst) in row.iter_mut().enumerate() {
                    let k2 = cols[c];
                    let diff: Vec<i64> = rs[r].iter().zip(&cs[c]).map(|(a, b)| a - b).collect();
                    *dst = w[k] * psi_hat(&diff) * phi[k2] * (1.0 - w[k2]);
                }
            });
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m.iter().all(|z| z.im.abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE)) {
            return Ok(BlockMatrix::Real(m.mapv(|z| z.re)));
        }
        Ok(BlockMatrix::Complex(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> WHModel {
        WHModel::new(DomainSpec::unit_disk(), DomainSpec::unit_disk(), 4.0, 16, 4.0).unwrap()
    }

    #[test]
    fn constant_symbol_is_multiple_of_identity() {
        let m = small();
        let op = m.op_alpha(&Symbol2::constant(2.5)).unwrap();
        let id = DenseOperator::identity(op.rows()).scale(2.5);
        assert!(op.sub(&id).unwrap().norm_max() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent() {
        let m = small();
        let p = m.projection_omega().unwrap();
        assert!(p.matmul(&p).unwrap().sub(&p).unwrap().norm_max() < 1e-12);
    }

    #[test]
    fn nyquist_error_names_n() {
        let e = WHModel::new(DomainSpec::unit_disk(), DomainSpec::disk(3.0), 8.0, 16, 4.0).unwrap_err();
        assert!(matches!(e, Error::Nyquist { required_n: 31, have: 16 }), "{e}");
    }

    #[test]
    fn exact_bulk_matches_box_path() {
        let m = small();
        let g = crate::func_classes::monomial(2);
        let a = Symbol2::constant(1.0);
        let fast = trace_d(&m, &a, &g).unwrap();
        let slow = trace_d_box(&m, &a, &g).unwrap();
        assert!((fast.value - slow.value).abs() < 1e-9, "{} vs {}", fast.value, slow.value);
    }

    #[test]
    fn polygon_mesh_outward() {
        let d = DomainSpec::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        let mesh = d.boundary_mesh(300).unwrap();
        validate_mesh(&d, &mesh, 1e-12).unwrap();
        let c = DomainSpec::unit_disk();
        validate_mesh(&c, &c.boundary_mesh(512).unwrap(), 1e-12).unwrap();
    }
}
