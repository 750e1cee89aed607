//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] stores the normalized Taylor coefficients `f^(k)(t)/k!` of a
//! function at a point, for `k = 0..=MAX_ORDER`. Library functions are
//! written once against this type, so every derivative they report is the
//! exact derivative of the closed form, up to rounding.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order carried by a jet.
pub const MAX_ORDER: usize = 8;
const LEN: usize = MAX_ORDER + 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [Complex64; LEN],
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

impl Jet {
    pub fn constant(value: impl Into<Complex64>) -> Self {
        let mut c = [Complex64::new(0.0, 0.0); LEN];
        c[0] = value.into();
        Jet { c }
    }

    pub fn zero() -> Self {
        Jet::constant(0.0)
    }

    /// The identity function expanded at `t`.
    pub fn variable(t: f64) -> Self {
        let mut j = Jet::constant(t);
        j.c[1] = Complex64::new(1.0, 0.0);
        j
    }

    pub fn from_coeffs(coeffs: &[Complex64]) -> Self {
        let mut j = Jet::zero();
        for (dst, src) in j.c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        j
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.c[k]
    }

    /// `f^(k)(t)`; zero beyond [`MAX_ORDER`].
    pub fn derivative(&self, k: usize) -> Complex64 {
        if k > MAX_ORDER {
            return Complex64::new(0.0, 0.0);
        }
        self.c[k] * factorial(k)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(mut self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        for z in self.c.iter_mut() {
            *z *= s;
        }
        self
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn exp(&self) -> Self {
        let mut b = Jet::zero();
        b.c[0] = self.c[0].exp();
        for k in 1..LEN {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * b.c[k - j] * j as f64;
            }
            b.c[k] = acc / k as f64;
        }
        b
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut b = Jet::zero();
        b.c[0] = a0.ln();
        for k in 1..LEN {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..k {
                acc += b.c[j] * self.c[k - j] * j as f64;
            }
            b.c[k] = (self.c[k] - acc / k as f64) / a0;
        }
        b
    }

    /// `self^p` for a jet whose value is nonzero.
    pub fn powf(&self, p: f64) -> Self {
        let a0 = self.c[0];
        let mut b = Jet::zero();
        b.c[0] = a0.powf(p);
        for k in 1..LEN {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * b.c[k - j] * (p * j as f64 - (k - j) as f64);
            }
            b.c[k] = acc / (a0 * k as f64);
        }
        b
    }

    pub fn powi(&self, p: u32) -> Self {
        let mut out = Jet::constant(1.0);
        for _ in 0..p {
            out = out * *self;
        }
        out
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = Jet::zero();
        let mut c = Jet::zero();
        s.c[0] = self.c[0].sin();
        c.c[0] = self.c[0].cos();
        for k in 1..LEN {
            let mut ds = Complex64::new(0.0, 0.0);
            let mut dc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                let w = self.c[j] * j as f64;
                ds += w * c.c[k - j];
                dc -= w * s.c[k - j];
            }
            s.c[k] = ds / k as f64;
            c.c[k] = dc / k as f64;
        }
        (s, c)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = Jet::zero();
        for k in 0..LEN {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..=k {
                acc += self.c[j] * rhs.c[k - j];
            }
            out.c[k] = acc;
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let b0 = rhs.c[0];
        let mut q = Jet::zero();
        for k in 0..LEN {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= rhs.c[j] * q.c[k - j];
            }
            q.c[k] = acc / b0;
        }
        q
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn exp_derivatives_are_exp() {
        let j = Jet::variable(0.3).exp();
        for k in 0..=MAX_ORDER {
            assert!(close(j.derivative(k), 0.3f64.exp(), 1e-12));
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let x = Jet::variable(0.7);
        let back = x.exp().ln();
        for k in 0..=MAX_ORDER {
            assert!((back.coeff(k) - x.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn powf_matches_closed_form() {
        // d^k/dt^k t^{1/2} = (1/2)(−1/2)…(1/2−k+1) t^{1/2−k}
        let t = 0.4;
        let j = Jet::variable(t).powf(0.5);
        let mut falling = 1.0;
        for k in 0..=MAX_ORDER {
            let expect = falling * t.powf(0.5 - k as f64);
            assert!(close(j.derivative(k), expect, 1e-10), "k={k}");
            falling *= 0.5 - k as f64;
        }
    }

    #[test]
    fn division_and_trig() {
        let x = Jet::variable(0.2);
        let (s, c) = x.sin_cos();
        let tan = s / c;
        // tan' = 1 + tan^2
        let t0 = 0.2f64.tan();
        assert!(close(tan.derivative(1), 1.0 + t0 * t0, 1e-12));
        // tan'' = 2 tan (1 + tan^2)
        assert!(close(tan.derivative(2), 2.0 * t0 * (1.0 + t0 * t0), 1e-12));
    }
}
