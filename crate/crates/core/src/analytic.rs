//! Closed-form visibility bounds and their Monte-Carlo verification.
//!
//! Three families of analytic guarantees: the harmonic-number bound from the
//! Haar-random device model, its sharpening when the states span a proper
//! subspace, and the constructive bound from devices built out of a fixed
//! collection of bases. The bases-model constructor returns an explicit
//! `ClassicalModel` whose reconstruction is exact at the advertised
//! visibility, and the Monte-Carlo routines estimate the Haar averages the
//! harmonic bound rests on.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, sample_haar_unitary, trace_norm, ComplexMatrix};
use crate::model::{r_subsets, ClassicalModel, Device};
use crate::states::{DensityMatrix, Povm};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which closed-form bound produced a visibility value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Haar-model bound (H_r - 1)/(d - 1).
    Harmonic,
    /// Subspace refinement for states spanning s < d dimensions.
    HarmonicSubspace,
    /// Constructive bases-model bound (r - 1)/(M (d - 1)).
    BasesModel,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyticBound {
    pub kind: BoundKind,
    pub dim: usize,
    pub r: usize,
    /// Span dimension for the subspace refinement.
    pub subspace: Option<usize>,
    /// Number of bases for the bases-model bound.
    pub n_bases: Option<usize>,
    pub visibility: f64,
}

/// Sum of 1/k for k = 1..=n, accumulated in ascending order.
pub fn harmonic(n: usize) -> f64 {
    assert!(n >= 1, "harmonic number needs n >= 1");
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

fn check_d_r(d: usize, r: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension("bounds need d >= 2".into()));
    }
    if r < 1 || r > d {
        return Err(Error::Validation(format!("r = {r} outside 1..={d}")));
    }
    Ok(())
}

/// Every d-dimensional set is r-simulable at v = (H_r - 1)/(d - 1).
pub fn harmonic_bound(d: usize, r: usize) -> Result<AnalyticBound> {
    check_d_r(d, r)?;
    let v = (harmonic(r) - 1.0) / (d as f64 - 1.0);
    Ok(AnalyticBound {
        kind: BoundKind::Harmonic,
        dim: d,
        r,
        subspace: None,
        n_bases: None,
        visibility: v,
    })
}

/// Refinement when the states span only s of the d dimensions:
/// v = (H_r - 1)/(d - 1 - H_r (d/s - 1)); reduces to the plain bound at s = d.
pub fn harmonic_subspace_bound(d: usize, s: usize, r: usize) -> Result<AnalyticBound> {
    check_d_r(d, r)?;
    if s < r || s > d {
        return Err(Error::Validation(format!("span dimension s = {s} outside {r}..={d}")));
    }
    let h = harmonic(r);
    let numerator = h - 1.0;
    let denominator = d as f64 - 1.0 - h * (d as f64 / s as f64 - 1.0);
    let v = if numerator == 0.0 {
        0.0
    } else if denominator <= 1e-12 {
        return Err(Error::Validation(format!(
            "subspace bound degenerates for d = {d}, s = {s}, r = {r}"
        )));
    } else {
        numerator / denominator
    };
    Ok(AnalyticBound {
        kind: BoundKind::HarmonicSubspace,
        dim: d,
        r,
        subspace: Some(s),
        n_bases: None,
        visibility: v,
    })
}

/// The constructive bound from M fixed bases: v = (r - 1)/(M (d - 1)).
pub fn bases_model_bound(d: usize, n_bases: usize, r: usize) -> Result<AnalyticBound> {
    check_d_r(d, r)?;
    if n_bases < 1 {
        return Err(Error::Validation("need at least one basis".into()));
    }
    let v = (r as f64 - 1.0) / (n_bases as f64 * (d as f64 - 1.0));
    Ok(AnalyticBound {
        kind: BoundKind::BasesModel,
        dim: d,
        r,
        subspace: None,
        n_bases: Some(n_bases),
        visibility: v,
    })
}

/// Extracts the unit vector of a rank-one projective effect.
fn rank_one_vector(effect: &crate::linalg::HermitianOperator) -> Result<Vec<Complex64>> {
    let tr = effect.trace();
    let purity = effect.hs_inner(effect);
    if (tr - 1.0).abs() > 1e-9 || (purity - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "effect is not a rank-one projector (trace {tr}, purity {purity})"
        )));
    }
    let d = effect.dim();
    let m = effect.matrix();
    let mut best = 0;
    for i in 1..d {
        if m[(i, i)].re > m[(best, best)].re {
            best = i;
        }
    }
    let col = m.column(best);
    let norm = m[(best, best)].re.sqrt();
    Ok(col.into_iter().map(|z| z / norm).collect())
}

/// Reassembles the unitary whose columns are the vectors of a rank-one
/// projective measurement, in outcome order.
pub(crate) fn basis_matrix_from_povm(povm: &Povm) -> Result<ComplexMatrix> {
    let d = povm.dim();
    if povm.n_outcomes() != d {
        return Err(Error::Validation(format!(
            "projective basis needs exactly {d} effects, got {}",
            povm.n_outcomes()
        )));
    }
    let mut mat = ComplexMatrix::zeros(d, d);
    for (k, effect) in povm.effects().iter().enumerate() {
        let v = rank_one_vector(effect)?;
        for i in 0..d {
            mat[(i, k)] = v[i];
        }
    }
    Ok(mat)
}

/// Explicit model over M bases with subset size r. Device (j, mu) uses basis
/// j restricted to the index set mu; on input state (j', i) it emits state i
/// deterministically when j' = j and i lies in mu, and a uniform member of mu
/// otherwise. Reconstruction is exact for the matching noisy basis-states
/// set at visibility (r - 1)/(M (d - 1)).
pub fn build_bases_model(bases: &[Povm], r: usize) -> Result<ClassicalModel> {
    if bases.is_empty() {
        return Err(Error::Validation("need at least one basis".into()));
    }
    let d = bases[0].dim();
    check_d_r(d, r)?;
    if bases.iter().any(|b| b.dim() != d) {
        return Err(Error::Dimension("bases of mixed dimension".into()));
    }
    let mut basis_mats = Vec::with_capacity(bases.len());
    for povm in bases {
        basis_mats.push(basis_matrix_from_povm(povm)?);
    }

    let n_bases = bases.len();
    let subsets = r_subsets(d, r);
    let n_dev = n_bases * subsets.len();
    let m_states = n_bases * d;
    let weight = 1.0 / n_dev as f64;
    let uniform = 1.0 / r as f64;

    let mut devices = Vec::with_capacity(n_dev);
    let mut cond = Vec::with_capacity(n_dev);
    for (j, mat) in basis_mats.iter().enumerate() {
        for mu in &subsets {
            devices.push(Device::new(mat.clone(), mu.clone())?);
            let mut table = Vec::with_capacity(m_states);
            for jp in 0..n_bases {
                for i in 0..d {
                    let row = if jp == j && mu.contains(&i) {
                        mu.iter().map(|&k| if k == i { 1.0 } else { 0.0 }).collect()
                    } else {
                        vec![uniform; r]
                    };
                    table.push(row);
                }
            }
            cond.push(table);
        }
    }
    ClassicalModel::new(devices, vec![weight; n_dev], cond)
}

/// Mean and standard error of max_{i < r} |<psi| U |e_i>|^2 over Haar
/// samples, with |psi> the first computational basis state. The population
/// mean is H_r / d.
pub fn mc_mean_max_overlap(
    d: usize,
    r: usize,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_d_r(d, r)?;
    if n_samples < 1000 {
        return Err(Error::Validation(format!(
            "need at least 1000 samples for a stable estimate, got {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let u = sample_haar_unitary(d, &mut rng)?;
        // <e_0| U |e_i> is row 0
        let mut best = 0.0f64;
        for i in 0..r {
            let ov = u[(0, i)].norm_sqr();
            if ov > best {
                best = ov;
            }
        }
        sum += best;
        sum_sq += best * best;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Empirically averages the selected-projector model over Haar samples and
/// returns the trace distance to v psi + (1 - v)/d I at the harmonic-bound
/// visibility. The distance shrinks as 1/sqrt(n).
pub fn mc_verify_harmonic_model(
    target: &DensityMatrix,
    r: usize,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let d = target.dim();
    check_d_r(d, r)?;
    if n_samples < 1000 {
        return Err(Error::Validation(format!(
            "need at least 1000 samples for a stable estimate, got {n_samples}"
        )));
    }
    if (target.purity() - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "Haar-model verification needs a pure target, purity {}",
            target.purity()
        )));
    }
    // unit vector of the pure target: top eigenvector
    let eig = eig_hermitian(target.operator())?;
    let psi = eig.vectors.column(d - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut avg = ComplexMatrix::zeros(d, d);
    for _ in 0..n_samples {
        let u = sample_haar_unitary(d, &mut rng)?;
        // overlap of psi with column i; lowest index wins ties
        let mut best_i = 0;
        let mut best = -1.0f64;
        for i in 0..r {
            let col = u.column(i);
            let ov = crate::linalg::inner(&psi, &col).norm_sqr();
            if ov > best {
                best = ov;
                best_i = i;
            }
        }
        let col = u.column(best_i);
        for a in 0..d {
            for b in 0..d {
                avg[(a, b)] += col[a] * col[b].conj();
            }
        }
    }
    let avg = avg.scale_re(1.0 / n_samples as f64);
    let v = harmonic_bound(d, r)?.visibility;
    let mut predicted = target.matrix().scale_re(v);
    let iso = (1.0 - v) / d as f64;
    for i in 0..d {
        predicted[(i, i)] += Complex64::new(iso, 0.0);
    }
    let diff = crate::linalg::HermitianOperator::symmetrize(avg.sub(&predicted))?;
    Ok(trace_norm(&diff)? / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis_ket;
    use crate::states::{apply_isotropic_noise, gen_mub_bases, gen_mub_states, NoiseSpec};

    #[test]
    fn test_harmonic_values() {
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn test_harmonic_bound_values() {
        assert!((harmonic_bound(2, 2).unwrap().visibility - 0.5).abs() < 1e-15);
        assert!((harmonic_bound(3, 3).unwrap().visibility - 5.0 / 12.0).abs() < 1e-15);
        assert!((harmonic_bound(4, 4).unwrap().visibility - 13.0 / 36.0).abs() < 1e-15);
        assert!(harmonic_bound(1, 1).is_err());
        assert!(harmonic_bound(3, 4).is_err());
    }

    #[test]
    fn test_harmonic_bound_monotonicity() {
        for d in 2..=10 {
            for r in 1..d {
                let lo = harmonic_bound(d, r).unwrap().visibility;
                let hi = harmonic_bound(d, r + 1).unwrap().visibility;
                assert!(hi >= lo);
            }
        }
        for d in 2..10 {
            let a = harmonic_bound(d, d).unwrap().visibility;
            let b = harmonic_bound(d + 1, d + 1).unwrap().visibility;
            assert!(b <= a);
        }
    }

    #[test]
    fn test_subspace_bound() {
        let full = harmonic_subspace_bound(4, 4, 4).unwrap().visibility;
        assert!((full - 13.0 / 36.0).abs() < 1e-15);
        let half = harmonic_subspace_bound(4, 2, 2).unwrap().visibility;
        assert!((half - 1.0 / 3.0).abs() < 1e-15);
        for s in 2..=4 {
            let v = harmonic_subspace_bound(4, s, 2).unwrap().visibility;
            assert!(v >= harmonic_bound(4, 2).unwrap().visibility - 1e-15);
        }
        assert!(harmonic_subspace_bound(4, 1, 2).is_err());
    }

    #[test]
    fn test_bases_model_bound_values() {
        assert!((bases_model_bound(3, 2, 3).unwrap().visibility - 0.5).abs() < 1e-15);
        assert!((bases_model_bound(3, 4, 3).unwrap().visibility - 0.25).abs() < 1e-15);
        assert_eq!(bases_model_bound(5, 3, 1).unwrap().visibility, 0.0);
        // r = d gives exactly 1/M
        assert!((bases_model_bound(4, 5, 4).unwrap().visibility - 0.2).abs() < 1e-15);
    }

    #[test]
    fn test_bases_model_reconstruction_full_subset() {
        // two bases in d = 3, r = 3: two devices, exact at v = 0.5
        let bases: Vec<_> = gen_mub_bases(3).unwrap().into_iter().take(2).collect();
        let model = build_bases_model(&bases, 3).unwrap();
        assert_eq!(model.n_devices(), 2);
        let set = gen_mub_states(3, 2).unwrap();
        let noisy = apply_isotropic_noise(&set, NoiseSpec::new(0.5).unwrap());
        for (x, want) in noisy.states().iter().enumerate() {
            let got = model.reconstruct(x).unwrap();
            let resid = got.matrix().sub(want.matrix()).frobenius_norm();
            assert!(resid <= 1e-10, "state {x}: residual {resid:.3e}");
        }
    }

    #[test]
    fn test_bases_model_reconstruction_partial_subset() {
        // r = 2 in d = 3 with two bases: 6 devices, v = 1/4
        let bases: Vec<_> = gen_mub_bases(3).unwrap().into_iter().take(2).collect();
        let model = build_bases_model(&bases, 2).unwrap();
        assert_eq!(model.n_devices(), 6);
        let v = bases_model_bound(3, 2, 2).unwrap().visibility;
        assert!((v - 0.25).abs() < 1e-15);
        let set = gen_mub_states(3, 2).unwrap();
        let noisy = apply_isotropic_noise(&set, NoiseSpec::new(v).unwrap());
        for (x, want) in noisy.states().iter().enumerate() {
            let got = model.reconstruct(x).unwrap();
            let resid = got.matrix().sub(want.matrix()).frobenius_norm();
            assert!(resid <= 1e-10, "state {x}: residual {resid:.3e}");
        }
    }

    #[test]
    fn test_mc_mean_max_overlap() {
        let (mean, se) = mc_mean_max_overlap(2, 1, 100_000, 7).unwrap();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}, se {se}");
        let (mean, se) = mc_mean_max_overlap(3, 3, 100_000, 8).unwrap();
        assert!((mean - harmonic(3) / 3.0).abs() < 3.0 * se, "mean {mean}, se {se}");
        let (mean, se) = mc_mean_max_overlap(2, 2, 100_000, 9).unwrap();
        assert!((mean - 0.75).abs() < 3.0 * se, "mean {mean}, se {se}");
        assert!(mc_mean_max_overlap(2, 1, 10, 0).is_err());
    }

    #[test]
    fn test_mc_verify_harmonic_model() {
        let zero2 = DensityMatrix::from_pure(&basis_ket(2, 0)).unwrap();
        let dist = mc_verify_harmonic_model(&zero2, 2, 100_000, 11).unwrap();
        assert!(dist <= 0.02, "d=2 distance {dist}");
        let zero3 = DensityMatrix::from_pure(&basis_ket(3, 0)).unwrap();
        let dist = mc_verify_harmonic_model(&zero3, 3, 100_000, 12).unwrap();
        assert!(dist <= 0.02, "d=3 distance {dist}");
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(mc_verify_harmonic_model(&mixed, 2, 10_000, 0).is_err());
    }
}
