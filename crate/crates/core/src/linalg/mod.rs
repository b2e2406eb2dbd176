//! Dense complex matrices sized for few-qubit work.
//!
//! Everything here assumes dimensions small enough (d <= 32 or so) that
//! cache-oblivious triple loops and full-matrix eigendecompositions are the
//! right tool. Matrices are row-major `Vec<Complex64>`.

mod eig;
mod embed;
mod haar;

pub use eig::{eig_hermitian, eig_hermitian_with, exp_i_hermitian, is_psd, trace_norm, Eigen, EigConfig};
pub use embed::{hermitian_to_real_vector, real_vector_to_hermitian};
pub use haar::sample_haar_unitary;

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Hermiticity slack accepted by the checked [`HermitianOperator`] constructor.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default eigenvalue floor for positive-semidefinite tests.
pub const PSD_TOL: f64 = 1e-10;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from nested rows, checking shape and finiteness.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension(format!(
                    "ragged rows: expected {c} columns, found {}",
                    row.len()
                )));
            }
            for z in row {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Validation("non-finite matrix entry".into()));
                }
                data.push(*z);
            }
        }
        Ok(ComplexMatrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Unit matrix with a single 1 at (i, j); handy in tests.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        assert!(j < self.cols, "column index out of range");
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ||U U^dag - I||_F, zero for unitaries.
    pub fn unitarity_defect(&self) -> f64 {
        assert!(self.is_square());
        self.mul(&self.adjoint())
            .sub(&Self::identity(self.rows))
            .frobenius_norm()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// <a|b> with the conjugate on the first argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len(), "inner product length mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// |a><b| as a matrix.
pub fn outer(a: &[Complex64], b: &[Complex64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(a.len(), b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            m[(i, j)] = a[i] * b[j].conj();
        }
    }
    m
}

/// Computational basis ket |k> in dimension d.
pub fn basis_ket(d: usize, k: usize) -> Vec<Complex64> {
    assert!(k < d, "basis index out of range");
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Rank-one projector onto column `j` of a unitary.
pub fn column_projector(u: &ComplexMatrix, j: usize) -> ComplexMatrix {
    let col = u.column(j);
    outer(&col, &col)
}

/// Square matrix constrained to equal its adjoint.
///
/// Construction symmetrizes, so arithmetic noise on the order of machine
/// epsilon never leaks out; the checked constructor rejects inputs that are
/// not Hermitian to begin with.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
}

impl HermitianOperator {
    /// Symmetrizes (A + A^dag)/2 without complaint.
    pub fn symmetrize(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension("Hermitian operator must be square".into()));
        }
        let sym = mat.add(&mat.adjoint()).scale_re(0.5);
        Ok(HermitianOperator { mat: sym })
    }

    /// Symmetrizes but errors when the anti-Hermitian part is non-trivial.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension("Hermitian operator must be square".into()));
        }
        let defect = mat.sub(&mat.adjoint()).frobenius_norm();
        let scale = mat.frobenius_norm().max(1.0);
        if defect > HERMITICITY_TOL * scale * 2.0 {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian: anti-Hermitian part {defect:.3e}"
            )));
        }
        Self::symmetrize(mat)
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator { mat: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator { mat: ComplexMatrix::identity(dim) }
    }

    /// |v><v| scaled to the vector's actual norm.
    pub fn projector(v: &[Complex64]) -> Self {
        HermitianOperator { mat: outer(v, v) }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn add(&self, other: &Self) -> Self {
        HermitianOperator { mat: self.mat.add(&other.mat) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        HermitianOperator { mat: self.mat.sub(&other.mat) }
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator { mat: self.mat.scale_re(s) }
    }

    /// tr(AB), real for Hermitian arguments.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "Hilbert-Schmidt inner dim mismatch");
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                // tr(AB) = sum_ij A_ij B_ji; B_ji = conj(B_ij)
                let prod = self.mat[(i, j)] * other.mat[(i, j)].conj();
                acc += prod.re;
            }
        }
        acc
    }

    /// Expectation <v|A|v>.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        inner(v, &self.mat.mul_vec(v)).re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.frobenius_norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn test_identity_and_mul() {
        let i3 = ComplexMatrix::identity(3);
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, -1.0), c(0.0, 0.5)],
            vec![c(0.0, 0.0), c(3.0, 0.0), c(1.0, 1.0)],
            vec![c(4.0, 2.0), c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert_eq!(i3.mul(&m), m);
        assert_eq!(m.mul(&i3), m);
    }

    #[test]
    fn test_adjoint_conjugates() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(2.0, -1.0)],
            vec![c(0.0, 3.0), c(4.0, 0.0)],
        ])
        .unwrap();
        let a = m.adjoint();
        assert_eq!(a[(0, 1)], c(0.0, -3.0));
        assert_eq!(a[(1, 0)], c(2.0, 1.0));
    }

    #[test]
    fn test_from_rows_rejects_ragged_and_nonfinite() {
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
        assert!(ComplexMatrix::from_rows(&[vec![c(f64::NAN, 0.0)]]).is_err());
    }

    #[test]
    fn test_hermitian_constructor_symmetrizes() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let h = HermitianOperator::new(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], c(0.0, 1.0));
        assert_eq!(h.matrix()[(1, 0)], c(0.0, -1.0));
    }

    #[test]
    fn test_hermitian_checked_rejects_skew() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(-1.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn test_hs_inner_matches_trace_of_product() {
        let a = HermitianOperator::new(
            ComplexMatrix::from_rows(&[
                vec![c(1.0, 0.0), c(0.5, 0.25)],
                vec![c(0.5, -0.25), c(-2.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let b = HermitianOperator::new(
            ComplexMatrix::from_rows(&[
                vec![c(0.0, 0.0), c(0.0, 1.5)],
                vec![c(0.0, -1.5), c(3.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let direct = a.matrix().mul(b.matrix()).trace().re;
        assert!((a.hs_inner(&b) - direct).abs() < 1e-14);
    }

    #[test]
    fn test_outer_and_expectation() {
        let plus = vec![c(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2];
        let proj = HermitianOperator::projector(&plus);
        assert!((proj.trace() - 1.0).abs() < 1e-14);
        assert!((proj.expectation(&basis_ket(2, 0)) - 0.5).abs() < 1e-14);
    }
}
