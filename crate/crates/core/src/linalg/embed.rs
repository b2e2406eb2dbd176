//! Isometry between Hermitian matrices and real coefficient vectors.
//!
//! A d-dimensional Hermitian matrix becomes a length d^2 real vector: the d
//! diagonal entries first, then sqrt(2) * (Re, Im) of each strict
//! upper-triangle entry in row-major order. The sqrt(2) makes the map an
//! isometry, tr(AB) = <vec A, vec B>, which is what lets linear programs
//! treat matrix equalities as plain real rows.

use super::{ComplexMatrix, HermitianOperator};
use crate::error::{Error, Result};
use num_complex::Complex64;

const SQRT2: f64 = std::f64::consts::SQRT_2;

pub fn hermitian_to_real_vector(op: &HermitianOperator) -> Vec<f64> {
    let d = op.dim();
    let m = op.matrix();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        v.push(m[(i, i)].re);
    }
    for p in 0..d {
        for q in (p + 1)..d {
            v.push(SQRT2 * m[(p, q)].re);
            v.push(SQRT2 * m[(p, q)].im);
        }
    }
    v
}

pub fn real_vector_to_hermitian(dim: usize, v: &[f64]) -> Result<HermitianOperator> {
    if v.len() != dim * dim {
        return Err(Error::Dimension(format!(
            "coefficient vector has length {}, expected {}",
            v.len(),
            dim * dim
        )));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(v[i], 0.0);
    }
    let mut idx = dim;
    for p in 0..dim {
        for q in (p + 1)..dim {
            let re = v[idx] / SQRT2;
            let im = v[idx + 1] / SQRT2;
            idx += 2;
            m[(p, q)] = Complex64::new(re, im);
            m[(q, p)] = Complex64::new(re, -im);
        }
    }
    HermitianOperator::symmetrize(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn herm(rows: &[Vec<Complex64>]) -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn test_identity_embeds_to_diag_ones() {
        let v = hermitian_to_real_vector(&HermitianOperator::identity(2));
        assert_eq!(v, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn test_pauli_x_embedding() {
        let x = herm(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        let v = hermitian_to_real_vector(&x);
        assert!((v[0]).abs() < 1e-15 && (v[1]).abs() < 1e-15);
        assert!((v[2] - SQRT2).abs() < 1e-15);
        assert!((v[3]).abs() < 1e-15);
    }

    #[test]
    fn test_round_trip_3x3() {
        let a = herm(&[
            vec![c(1.0, 0.0), c(0.2, -0.4), c(0.0, 1.0)],
            vec![c(0.2, 0.4), c(-0.5, 0.0), c(0.3, 0.0)],
            vec![c(0.0, -1.0), c(0.3, 0.0), c(2.0, 0.0)],
        ]);
        let v = hermitian_to_real_vector(&a);
        assert_eq!(v.len(), 9);
        let b = real_vector_to_hermitian(3, &v).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn test_inner_product_preserved() {
        let a = herm(&[
            vec![c(0.7, 0.0), c(0.1, 0.9)],
            vec![c(0.1, -0.9), c(-0.3, 0.0)],
        ]);
        let b = herm(&[
            vec![c(-1.0, 0.0), c(0.6, -0.2)],
            vec![c(0.6, 0.2), c(0.4, 0.0)],
        ]);
        let va = hermitian_to_real_vector(&a);
        let vb = hermitian_to_real_vector(&b);
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        assert!((dot - a.hs_inner(&b)).abs() < 1e-13);
    }

    #[test]
    fn test_length_mismatch_rejected() {
        assert!(real_vector_to_hermitian(2, &[1.0, 2.0, 3.0]).is_err());
    }
}
