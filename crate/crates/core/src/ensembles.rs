//! Seeded random matrix families for sweeps and property checks.

use ndarray::Array2;
use ndarray_linalg::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::operator::{unitary_conjugate, DenseOperator, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic per-instance seed derived from a suite seed.
pub fn instance_seed(suite: u64, index: u64) -> u64 {
    suite
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03))
        ^ 0x5851_F42D_4C95_7F2D
}

pub fn gaussian_complex(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<C64> {
    Array2::from_shape_fn((rows, cols), |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// GUE-type Hermitian matrix normalized so that its spectrum is roughly `[-2, 2]`.
pub fn gue(m: usize, rng: &mut impl Rng) -> DenseOperator {
    let g = gaussian_complex(m, m, rng);
    let h = (&g + &g.t().mapv(|z| z.conj())).mapv(|z| z * (0.5 / (m as f64).sqrt()));
    DenseOperator::hermitian(h).expect("symmetrized matrix is Hermitian")
}

/// Haar-distributed unitary (QR of a complex Gaussian with phase fix).
pub fn haar_unitary(m: usize, rng: &mut impl Rng) -> Result<Array2<C64>> {
    let g = gaussian_complex(m, m, rng);
    let (q, r) = g.qr()?;
    let mut q = q;
    for j in 0..m {
        let d = r[[j, j]];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..m {
            q[[i, j]] *= phase;
        }
    }
    Ok(q)
}

/// Hermitian matrix with the prescribed eigenvalues in a random eigenbasis.
pub fn hermitian_with_spectrum(eigs: &[f64], rng: &mut impl Rng) -> Result<DenseOperator> {
    let u = haar_unitary(eigs.len(), rng)?;
    let d: Vec<C64> = eigs.iter().map(|&x| C64::new(x, 0.0)).collect();
    DenseOperator::hermitian(unitary_conjugate(&u, &d))
}

/// Hermitian matrix with eigenvalues drawn uniformly from `[lo, hi]`.
pub fn hermitian_uniform_spectrum(m: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Result<DenseOperator> {
    let eigs: Vec<f64> = (0..m).map(|_| rng.random_range(lo..=hi)).collect();
    hermitian_with_spectrum(&eigs, rng)
}

/// Wishart-type positive semidefinite matrix `G G* / k`, rank at most `k`.
pub fn wishart(m: usize, k: usize, rng: &mut impl Rng) -> DenseOperator {
    let g = gaussian_complex(m, k, rng);
    let w = g.dot(&g.t().mapv(|z| z.conj())).mapv(|z| z / k.max(1) as f64);
    DenseOperator::hermitian(w.clone())
        .unwrap_or_else(|_| DenseOperator::new(w).hermitian_part())
}

/// Orthogonal projection onto a Haar-random subspace of dimension `rank`.
pub fn random_projection(m: usize, rank: usize, rng: &mut impl Rng) -> Result<DenseOperator> {
    let u = haar_unitary(m, rng)?;
    let d: Vec<C64> = (0..m)
        .map(|i| if i < rank { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
        .collect();
    Ok(DenseOperator::new(unitary_conjugate(&u, &d)).hermitian_part())
}

/// Rectangular complex Gaussian matrix scaled by `1/sqrt(cols)`.
pub fn general(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseOperator {
    let g = gaussian_complex(rows, cols, rng);
    DenseOperator::new(g.mapv(|z| z / (cols as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_is_projection() {
        let mut r = rng(3);
        let p = random_projection(12, 5, &mut r).unwrap();
        let p2 = p.matmul(&p).unwrap();
        assert!(p2.sub(&p).unwrap().norm_max() < 1e-12);
        assert!((p.trace().re - 5.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_reproducible() {
        let a = gue(6, &mut rng(11));
        let b = gue(6, &mut rng(11));
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn prescribed_spectrum() {
        let eigs = [-0.7, 0.1, 0.4, 0.75];
        let h = hermitian_with_spectrum(&eigs, &mut rng(2)).unwrap();
        let got = h.eigvalsh().unwrap();
        for (a, b) in got.iter().zip(eigs.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
