//! Cyclic Jacobi eigensolver for small Hermitian matrices.
//!
//! Each rotation zeroes one off-diagonal pair exactly; sweeps repeat until the
//! off-diagonal mass is negligible. Quadratic convergence makes the sweep cap
//! generous, so hitting it signals genuinely broken input.

use super::{ComplexMatrix, HermitianOperator};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Knobs for [`eig_hermitian_with`]; the defaults suit every matrix this
/// crate produces.
#[derive(Debug, Clone, Copy)]
pub struct EigConfig {
    /// Sweep cap as a multiple of d^2.
    pub sweep_cap_factor: usize,
    /// Relative off-diagonal Frobenius tolerance for convergence.
    pub offdiag_tol: f64,
}

impl Default for EigConfig {
    fn default() -> Self {
        EigConfig { sweep_cap_factor: 100, offdiag_tol: 1e-13 }
    }
}

/// Eigenvalues ascending, eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn eig_hermitian(op: &HermitianOperator) -> Result<Eigen> {
    eig_hermitian_with(op, &EigConfig::default())
}

pub fn eig_hermitian_with(op: &HermitianOperator, cfg: &EigConfig) -> Result<Eigen> {
    let d = op.dim();
    let mut a = op.matrix().clone();
    let mut v = ComplexMatrix::identity(d);
    if d == 1 {
        return Ok(Eigen { values: vec![a[(0, 0)].re], vectors: v });
    }

    let scale = op.frobenius_norm().max(1.0);
    let cap = cfg.sweep_cap_factor * d * d;
    let mut converged = false;
    for _sweep in 0..cap {
        let off = offdiag_norm(&a);
        if off <= cfg.offdiag_tol * scale {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && offdiag_norm(&a) > cfg.offdiag_tol * scale {
        return Err(Error::Solver(format!(
            "Jacobi failed to converge: off-diagonal norm {:.3e} after {cap} sweeps",
            offdiag_norm(&a)
        )));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(d, d);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..d {
            vectors[(i, new_j)] = v[(i, old_j)];
        }
    }
    Ok(Eigen { values, vectors })
}

fn offdiag_norm(a: &ComplexMatrix) -> f64 {
    let d = a.rows();
    let mut acc = 0.0;
    for p in 0..d {
        for q in (p + 1)..d {
            acc += 2.0 * a[(p, q)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// One complex Jacobi rotation zeroing a[(p, q)].
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let m = apq.norm();
    if m == 0.0 {
        return;
    }
    let phase = apq / m; // e^{i phi}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    // Real rotation angle for the phase-stripped 2x2 block [[app, m], [m, aqq]].
    let tau = (aqq - app) / (2.0 * m);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Full rotation W: W[p][p]=c, W[p][q]=s, W[q][p]=-s*conj(phase), W[q][q]=c*conj(phase).
    let wqp = -s * phase.conj();
    let wqq = c * phase.conj();
    let d = a.rows();

    // A <- A W on columns p, q.
    for i in 0..d {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * c + aiq * wqp;
        a[(i, q)] = aip * s + aiq * wqq;
    }
    // A <- W^dag A on rows p, q.
    for j in 0..d {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = apj * c + aqj * wqp.conj();
        a[(q, j)] = apj * s + aqj * wqq.conj();
    }
    // Clean the pair we just zeroed and enforce real diagonal.
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    // Accumulate eigenvectors: V <- V W.
    for i in 0..d {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * c + viq * wqp;
        v[(i, q)] = vip * s + viq * wqq;
    }
}

/// Minimum eigenvalue at least -tol?
pub fn is_psd(op: &HermitianOperator, tol: f64) -> Result<bool> {
    let eig = eig_hermitian(op)?;
    Ok(eig.values[0] >= -tol)
}

/// Sum of absolute eigenvalues (nuclear norm for Hermitian input).
pub fn trace_norm(op: &HermitianOperator) -> Result<f64> {
    let eig = eig_hermitian(op)?;
    Ok(eig.values.iter().map(|l| l.abs()).sum())
}

/// exp(i t H), unitary for Hermitian H.
pub fn exp_i_hermitian(h: &HermitianOperator, t: f64) -> Result<ComplexMatrix> {
    let d = h.dim();
    let eig = eig_hermitian(h)?;
    let mut out = ComplexMatrix::zeros(d, d);
    for (k, lam) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, t * lam);
        let col = eig.vectors.column(k);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += phase * col[i] * col[j].conj();
            }
        }
    }
    Ok(out)
}
