//! Haar-random unitaries via Ginibre + QR.
//!
//! Columns of a complex Gaussian matrix are orthonormalized with modified
//! Gram-Schmidt (two passes, which is plenty at these sizes). Forcing the R
//! diagonal positive removes the phase ambiguity that would otherwise bias
//! the distribution away from Haar.

use super::ComplexMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn sample_haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::Dimension("unitary dimension must be positive".into()));
    }
    let mut g = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }

    // Modified Gram-Schmidt with reorthogonalization; r_diag stays positive.
    let mut r_diag = vec![Complex64::new(0.0, 0.0); d];
    for j in 0..d {
        let mut col = g.column(j);
        for _pass in 0..2 {
            for k in 0..j {
                let qk = g.column(k);
                let proj = super::inner(&qk, &col);
                for i in 0..d {
                    col[i] -= proj * qk[i];
                }
            }
        }
        let nrm = super::norm(&col);
        if nrm < 1e-12 {
            return Err(Error::Solver(
                "Ginibre matrix numerically singular; resample".into(),
            ));
        }
        r_diag[j] = Complex64::new(nrm, 0.0);
        for i in 0..d {
            g[(i, j)] = col[i] / nrm;
        }
    }

    // Phase correction: scale column j by conj(phase(r_jj)). With
    // Gram-Schmidt the diagonal is already real positive, so this is a
    // no-op kept for the distributional argument's sake.
    for j in 0..d {
        let ph = r_diag[j] / r_diag[j].norm();
        let fix = ph.conj();
        for i in 0..d {
            g[(i, j)] *= fix;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn test_dim_one_is_unit_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let u = sample_haar_unitary(1, &mut rng).unwrap();
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn test_unitarity_d3() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let u = sample_haar_unitary(3, &mut rng).unwrap();
        assert!(u.unitarity_defect() < 1e-12, "QR output must be unitary");
    }

    #[test]
    fn test_zero_dim_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_haar_unitary(0, &mut rng).is_err());
    }

    #[test]
    fn test_first_entry_moment_d2() {
        // E |U_00|^2 = 1/2 for Haar on U(2); |U_00|^2 is uniform on [0,1],
        // so the mean of 1e5 draws has sigma ~ 9.1e-4. Allow 4 sigma.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let u = sample_haar_unitary(2, &mut rng).unwrap();
            acc += u[(0, 0)].norm_sqr();
        }
        let mean = acc / n as f64;
        assert!(
            (mean - 0.5).abs() < 4.0 * 9.2e-4,
            "Haar moment off: mean = {mean}"
        );
    }
}
