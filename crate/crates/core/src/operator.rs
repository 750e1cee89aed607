//! Dense complex matrices with a Hermitian flag, plus the spectral
//! primitives every other module leans on.

use ndarray::{s, Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, EigValsh, Inverse, SVDDC, JobSvd, UPLO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const HERMITIAN_TOL: f64 = 1e-12;

/// Discretization metadata attached to operators assembled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub dim: usize,
    pub points_per_axis: usize,
    pub spacing: f64,
    pub box_side: f64,
}

#[derive(Clone, Debug)]
pub struct DenseOperator {
    entries: Array2<C64>,
    hermitian: bool,
    grid: Option<GridMeta>,
}

fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl DenseOperator {
    pub fn new(entries: Array2<C64>) -> Self {
        DenseOperator {
            entries,
            hermitian: false,
            grid: None,
        }
    }

    /// Wraps a matrix that must be Hermitian to within `1e-12` (relative to its largest entry).
    pub fn hermitian(entries: Array2<C64>) -> Result<Self> {
        let op = DenseOperator::new(entries);
        let defect = op.hermitian_defect();
        let scale = max_abs(&op.entries).max(1.0);
        if !op.is_square() || defect > HERMITIAN_TOL * scale {
            return Err(Error::Domain(format!(
                "matrix is not Hermitian (max |A - A*| = {defect:e})"
            )));
        }
        let mut op = op.hermitian_part();
        op.hermitian = true;
        Ok(op)
    }

    pub fn from_real(entries: Array2<f64>) -> Self {
        DenseOperator::new(entries.mapv(|x| C64::new(x, 0.0)))
    }

    pub fn identity(m: usize) -> Self {
        DenseOperator {
            entries: Array2::eye(m),
            hermitian: true,
            grid: None,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseOperator {
            entries: Array2::zeros((rows, cols)),
            hermitian: rows == cols,
            grid: None,
        }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let m = values.len();
        let mut e = Array2::zeros((m, m));
        for (i, v) in values.iter().enumerate() {
            e[[i, i]] = C64::new(*v, 0.0);
        }
        DenseOperator {
            entries: e,
            hermitian: true,
            grid: None,
        }
    }

    pub fn diag(values: &[C64]) -> Self {
        let m = values.len();
        let mut e = Array2::zeros((m, m));
        for (i, v) in values.iter().enumerate() {
            e[[i, i]] = *v;
        }
        DenseOperator::new(e)
    }

    pub fn with_grid(mut self, grid: GridMeta) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn grid(&self) -> Option<&GridMeta> {
        self.grid.as_ref()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let t = self.entries.t();
        self.entries
            .iter()
            .zip(t.iter())
            .map(|(a, b)| (a - b.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn require_hermitian(&self) -> Result<()> {
        if self.hermitian {
            return Ok(());
        }
        let scale = max_abs(&self.entries).max(1.0);
        if self.hermitian_defect() <= HERMITIAN_TOL * scale {
            Ok(())
        } else {
            Err(Error::Domain("operator must be Hermitian".into()))
        }
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator {
            entries: self.entries.t().mapv(|z| z.conj()),
            hermitian: self.hermitian,
            grid: self.grid.clone(),
        }
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let t = self.entries.t().mapv(|z| z.conj());
        let mut e = &self.entries + &t;
        e.mapv_inplace(|z| z * 0.5);
        DenseOperator {
            entries: e,
            hermitian: true,
            grid: self.grid.clone(),
        }
    }

    pub fn matmul(&self, other: &DenseOperator) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Shape {
                expected: format!("{} rows", self.cols()),
                got: format!("{} rows", other.rows()),
            });
        }
        Ok(DenseOperator::new(self.entries.dot(&other.entries)))
    }

    fn same_shape(&self, other: &DenseOperator) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                expected: format!("{:?}", self.shape()),
                got: format!("{:?}", other.shape()),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(DenseOperator {
            entries: &self.entries + &other.entries,
            hermitian: self.hermitian && other.hermitian,
            grid: self.grid.clone(),
        })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(DenseOperator {
            entries: &self.entries - &other.entries,
            hermitian: self.hermitian && other.hermitian,
            grid: self.grid.clone(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        DenseOperator {
            entries: self.entries.mapv(|z| z * c),
            hermitian: self.hermitian,
            grid: self.grid.clone(),
        }
    }

    pub fn scale_complex(&self, c: C64) -> Self {
        DenseOperator::new(self.entries.mapv(|z| z * c))
    }

    /// `A - c I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut e = self.entries.clone();
        for i in 0..e.nrows().min(e.ncols()) {
            e[[i, i]] -= C64::new(c, 0.0);
        }
        DenseOperator {
            entries: e,
            hermitian: self.hermitian,
            grid: self.grid.clone(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn norm_max(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator (spectral) norm.
    pub fn norm_op(&self) -> Result<f64> {
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if self.rows() == 0 || self.cols() == 0 {
            return Ok(Vec::new());
        }
        if self.entries.iter().all(|z| z.norm() == 0.0) {
            return Ok(vec![0.0; self.rows().min(self.cols())]);
        }
        let (_, s, _) = self.entries.svddc(JobSvd::None)?;
        let mut v = s.to_vec();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(v)
    }

    /// Full SVD: `A = U diag(s) V*`, with `s` descending.
    pub fn svd(&self) -> Result<(Array2<C64>, Vec<f64>, Array2<C64>)> {
        let (u, s, vt) = self.entries.svddc(JobSvd::Some)?;
        let u = u.ok_or_else(|| Error::Numeric("SVD returned no U".into()))?;
        let vt = vt.ok_or_else(|| Error::Numeric("SVD returned no V".into()))?;
        let v = vt.t().mapv(|z| z.conj());
        Ok((u, s.to_vec(), v))
    }

    /// Eigenvalues (ascending) and eigenvectors of a Hermitian operator.
    pub fn eigh(&self) -> Result<(Vec<f64>, Array2<C64>)> {
        self.require_hermitian()?;
        // LAPACK sees a row-major complex matrix as its transpose, which conjugates the eigenvectors
        let mut f = Array2::<C64>::zeros(self.entries.raw_dim().f());
        f.assign(&self.entries);
        let (vals, vecs) = f.eigh(UPLO::Lower)?;
        Ok((vals.to_vec(), vecs))
    }

    pub fn eigvalsh(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        Ok(self.entries.eigvalsh(UPLO::Lower)?.to_vec())
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(DenseOperator::new(self.entries.inv()?))
    }

    pub fn rows_cols(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Array2::zeros((rows.len(), cols.len()));
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[[a, b]] = self.entries[[i, j]];
            }
        }
        DenseOperator::new(out)
    }

    pub fn column(&self, j: usize) -> Array1<C64> {
        self.entries.column(j).to_owned()
    }

    pub fn top_left(&self, k: usize) -> Self {
        DenseOperator::new(self.entries.slice(s![..k, ..k]).to_owned())
    }
}

/// `U diag(d) U*`.
pub fn unitary_conjugate(u: &Array2<C64>, d: &[C64]) -> Array2<C64> {
    let mut scaled = u.clone();
    for (mut col, dj) in scaled.axis_iter_mut(Axis(1)).zip(d) {
        col.mapv_inplace(|z| z * dj);
    }
    scaled.dot(&u.t().mapv(|z| z.conj()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let mut a = Array2::<C64>::zeros((2, 2));
        a[[0, 1]] = C64::new(1.0, 0.0);
        assert!(DenseOperator::hermitian(a).is_err());
    }

    #[test]
    fn singular_values_of_diag() {
        let d = DenseOperator::diag_real(&[3.0, -4.0]);
        let s = d.singular_values().unwrap();
        assert!((s[0] - 4.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs() {
        let d = DenseOperator::diag_real(&[1.0, 2.0, -0.5]);
        let (vals, vecs) = d.eigh().unwrap();
        let back = unitary_conjugate(&vecs, &vals.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>());
        let diff = &back - d.entries();
        assert!(diff.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn eigh_reconstructs_complex() {
        let a = crate::ensembles::gue(6, &mut crate::ensembles::rng(3));
        let (vals, vecs) = a.eigh().unwrap();
        let back = unitary_conjugate(&vecs, &vals.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>());
        let diff = &back - a.entries();
        assert!(diff.iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn shape_errors() {
        let a = DenseOperator::zeros(2, 3);
        let b = DenseOperator::zeros(2, 3);
        assert!(a.matmul(&b).is_err());
        assert!(a.add(&DenseOperator::zeros(3, 3)).is_err());
    }
}
