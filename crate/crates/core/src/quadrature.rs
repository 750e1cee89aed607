//! One-dimensional adaptive Gauss-Kronrod integration and Gauss-Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: a real vector space with a norm.
pub trait QuadValue: Clone + Send {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, other: &Self, s: f64);
    fn dist(&self, other: &Self) -> f64;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, s: f64) {
        *self += s * other;
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, other: &Self, s: f64) {
        *self += other * s;
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

/// Frobenius norm is used for matrix-valued integrands.
impl QuadValue for Array2<Complex64> {
    fn zero_like(&self) -> Self {
        Array2::zeros(self.raw_dim())
    }
    fn add_scaled(&mut self, other: &Self, s: f64) {
        self.zip_mut_with(other, |a, b| *a += b * s);
    }
    fn dist(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
    fn norm(&self) -> f64 {
        self.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Number of integrand evaluations per Kronrod panel.
pub const KRONROD_POINTS: usize = 15;

/// Applies the 15-point Kronrod rule on `[a, b]`, returning the Kronrod value and
/// `|K15 - G7|` as the error estimate.
pub fn kronrod15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc.zero_like();
    let mut gauss = fc.zero_like();
    kron.add_scaled(&fc, WGK[7]);
    gauss.add_scaled(&fc, WG[3]);
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron.add_scaled(&f1, WGK[j]);
        kron.add_scaled(&f2, WGK[j]);
        if j % 2 == 1 {
            gauss.add_scaled(&f1, WG[j / 2]);
            gauss.add_scaled(&f2, WG[j / 2]);
        }
    }
    let mut k = kron.zero_like();
    k.add_scaled(&kron, half);
    let mut g = gauss.zero_like();
    g.add_scaled(&gauss, half);
    let err = k.dist(&g);
    (k, err)
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl AdaptiveOptions {
    pub fn new(abs_tol: f64) -> Self {
        AdaptiveOptions {
            abs_tol,
            rel_tol: 0.0,
            max_panels: 2000,
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub panels: usize,
    pub converged: bool,
}

impl<T> QuadResult<T> {
    /// Turns a non-converged result into [`Error::Quadrature`].
    pub fn require(self, target: f64) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Quadrature {
                target,
                achieved: self.error,
                evaluations: self.evaluations,
            })
        }
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

/// Pairwise summation in a fixed order.
pub(crate) fn pairwise_sum<T: QuadValue>(items: &[T]) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (l, r) = items.split_at(n / 2);
            let mut left = pairwise_sum(l)?;
            let right = pairwise_sum(r)?;
            left.add_scaled(&right, 1.0);
            Some(left)
        }
    }
}

/// Globally adaptive integration over the sorted breakpoints `points`
/// (at least two). The panel with the largest error estimate is bisected
/// until the summed estimate meets the tolerance or the panel budget runs out.
pub fn integrate<T, F>(mut f: F, points: &[f64], opts: AdaptiveOptions) -> QuadResult<T>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Panel<T>> = Vec::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error) = kronrod15(&mut f, w[0], w[1]);
        evaluations += KRONROD_POINTS;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let mut converged = false;
    loop {
        let total_err: f64 = heap.iter().map(|p| p.error).sum::<f64>()
            + finished.iter().map(|p| p.error).sum::<f64>();
        let total_norm: f64 = if opts.rel_tol > 0.0 {
            let vals: Vec<T> = heap
                .iter()
                .chain(finished.iter())
                .map(|p| p.value.clone())
                .collect();
            pairwise_sum(&vals).map(|v| v.norm()).unwrap_or(0.0)
        } else {
            0.0
        };
        if total_err <= opts.abs_tol.max(opts.rel_tol * total_norm) {
            converged = true;
            break;
        }
        if heap.len() + finished.len() >= opts.max_panels {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-15 * worst.a.abs().max(1e-300)
        {
            finished.push(worst);
            continue;
        }
        let (v1, e1) = kronrod15(&mut f, worst.a, mid);
        let (v2, e2) = kronrod15(&mut f, mid, worst.b);
        evaluations += 2 * KRONROD_POINTS;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    let mut panels: Vec<Panel<T>> = heap.into_vec();
    panels.extend(finished);
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    let error = panels.iter().map(|p| p.error).sum();
    let vals: Vec<T> = panels.iter().map(|p| p.value.clone()).collect();
    let value = pairwise_sum(&vals).expect("at least one panel");
    QuadResult {
        value,
        error,
        evaluations,
        panels: panels.len(),
        converged,
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, &[0.0, 2.0], AdaptiveOptions::new(1e-14));
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫_0^1 -ln x dx = 1
        let r = integrate(|x: f64| -x.ln(), &[0.0, 1.0], AdaptiveOptions::new(1e-12));
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(
            |x: f64| (1.0 / x).sin(),
            &[1e-9, 1.0],
            AdaptiveOptions::new(1e-15).with_max_panels(10),
        );
        assert!(!r.converged);
        assert!(r.require(1e-15).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((s - exact).abs() < 1e-13, "n={n}");
        }
    }
}
