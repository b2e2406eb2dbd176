//! State sets, measurement collections, and isotropic noise.
//!
//! Everything downstream (analytic bounds, the simulability LP, witnesses,
//! steering) consumes the types defined here. Generators cover the families
//! used throughout: BB84, mutually unbiased bases in prime dimensions and
//! d = 4, symmetric informationally complete sets for d = 2, 3, 4, and the
//! two-state maximally coherent pair in d = 3. Every generator validates its
//! output against the defining overlap conditions, so the hardcoded tables
//! below cannot silently rot.

use crate::error::{Error, Result};
use crate::linalg::{basis_ket, eig_hermitian, inner, ComplexMatrix, HermitianOperator};
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const POVM_SUM_TOL: f64 = 1e-9;
pub const MUB_OVERLAP_TOL: f64 = 1e-10;
pub const SIC_OVERLAP_TOL: f64 = 1e-9;

/// Unit-trace PSD operator.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Validation(format!("density matrix trace {tr} is not 1")));
        }
        let eig = eig_hermitian(&op)?;
        if eig.values[0] < -PSD_TOL {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {:.3e}",
                eig.values[0]
            )));
        }
        Ok(DensityMatrix { op })
    }

    /// Clips negative eigenvalues to zero and renormalizes the trace. Meant
    /// for user-supplied near-states; generators never need it.
    pub fn repair(op: HermitianOperator) -> Result<Self> {
        let d = op.dim();
        let eig = eig_hermitian(&op)?;
        let mut m = ComplexMatrix::zeros(d, d);
        let mut total = 0.0;
        for (k, &lam) in eig.values.iter().enumerate() {
            let lam = lam.max(0.0);
            if lam == 0.0 {
                continue;
            }
            total += lam;
            let v = eig.vectors.column(k);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += Complex64::new(lam, 0.0) * v[i] * v[j].conj();
                }
            }
        }
        if total <= 0.0 {
            return Err(Error::Validation("operator has no positive part to repair".into()));
        }
        DensityMatrix::new(HermitianOperator::symmetrize(m.scale_re(1.0 / total))?)
    }

    /// Projector onto a unit vector.
    pub fn from_pure(v: &[Complex64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("pure state vector has norm {norm}")));
        }
        DensityMatrix::new(HermitianOperator::projector(v))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { op: HermitianOperator::identity(d).scale(1.0 / d as f64) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    /// tr(rho^2); 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        self.op.hs_inner(&self.op)
    }
}

/// Ordered, labeled collection of states on a common dimension.
#[derive(Debug, Clone)]
pub struct StateSet {
    dim: usize,
    states: Vec<DensityMatrix>,
    labels: Vec<String>,
}

impl StateSet {
    pub fn new(states: Vec<DensityMatrix>, labels: Vec<String>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Validation("state set must contain at least one state".into()));
        }
        if states.len() != labels.len() {
            return Err(Error::Validation(format!(
                "{} states but {} labels",
                states.len(),
                labels.len()
            )));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::Dimension("states of mixed dimension in one set".into()));
        }
        Ok(StateSet { dim, states, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Measurement: PSD effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::Validation("POVM needs at least one effect".into()));
        }
        let dim = effects[0].dim();
        let mut sum = HermitianOperator::zeros(dim);
        for e in &effects {
            if e.dim() != dim {
                return Err(Error::Dimension("POVM effects of mixed dimension".into()));
            }
            let eig = eig_hermitian(e)?;
            if eig.values[0] < -PSD_TOL {
                return Err(Error::Validation(format!(
                    "POVM effect has negative eigenvalue {:.3e}",
                    eig.values[0]
                )));
            }
            sum = sum.add(e);
        }
        let defect = sum.sub(&HermitianOperator::identity(dim)).frobenius_norm();
        if defect > POVM_SUM_TOL {
            return Err(Error::Validation(format!(
                "POVM effects sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Povm { dim, effects })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(basis: &ComplexMatrix) -> Result<Self> {
        let d = basis.rows();
        let defect = basis.unitarity_defect();
        if defect > 1e-9 {
            return Err(Error::Validation(format!("basis matrix unitary only within {defect:.3e}")));
        }
        let effects = (0..d)
            .map(|k| HermitianOperator::projector(&basis.column(k)))
            .collect();
        Povm::new(effects)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }
}

/// Visibility of a state set under isotropic noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    visibility: f64,
}

impl NoiseSpec {
    pub fn new(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) || visibility.is_nan() {
            return Err(Error::Validation(format!("visibility {visibility} outside [0, 1]")));
        }
        Ok(NoiseSpec { visibility })
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }
}

/// rho -> v rho + (1 - v)/d I, applied to every state.
pub fn apply_isotropic_noise(set: &StateSet, noise: NoiseSpec) -> StateSet {
    let v = noise.visibility();
    let d = set.dim();
    let mixed = HermitianOperator::identity(d).scale((1.0 - v) / d as f64);
    let states = set
        .states
        .iter()
        .map(|s| DensityMatrix {
            op: s.op.scale(v).add(&mixed),
        })
        .collect();
    StateSet { dim: d, states, labels: set.labels.clone() }
}

fn pure_set(dim: usize, vectors: &[Vec<Complex64>], labels: Vec<String>) -> Result<StateSet> {
    let states = vectors
        .iter()
        .map(|v| DensityMatrix::from_pure(v))
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(states.iter().all(|s| s.dim() == dim));
    StateSet::new(states, labels)
}

/// The four qubit states |0>, |1>, |+>, |->.
pub fn gen_bb84() -> StateSet {
    let s = FRAC_1_SQRT_2;
    let vectors = vec![
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        vec![Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
    ];
    let labels = ["0", "1", "+", "-"].iter().map(|s| s.to_string()).collect();
    pure_set(2, &vectors, labels).expect("fixed data")
}

/// Columns of the d = 4 unbiased bases (after the computational one), scaled
/// by 2. Standard Galois-field construction; validated by the overlap check.
const MUB4_TABLE: [[[(f64, f64); 4]; 4]; 4] = {
    const O: (f64, f64) = (1.0, 0.0);
    const M: (f64, f64) = (-1.0, 0.0);
    const I: (f64, f64) = (0.0, 1.0);
    const N: (f64, f64) = (0.0, -1.0);
    [
        [[O, M, O, M], [O, O, M, M], [O, M, M, O], [O, O, O, O]],
        [[O, N, I, O], [O, I, N, O], [O, N, N, M], [O, I, I, M]],
        [[O, M, N, N], [O, M, I, I], [O, O, N, I], [O, O, I, N]],
        [[O, N, M, N], [O, I, M, I], [O, N, O, I], [O, I, O, N]],
    ]
};

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

fn computational_basis(d: usize) -> Vec<Vec<Complex64>> {
    (0..d).map(|k| basis_ket(d, k)).collect()
}

/// All d + 1 mutually unbiased bases for prime d or d = 4, as rank-one
/// projective measurements. The first basis is always the computational one.
pub fn gen_mub_bases(d: usize) -> Result<Vec<Povm>> {
    let vector_bases = mub_basis_vectors(d)?;
    let mut out = Vec::with_capacity(vector_bases.len());
    for vectors in &vector_bases {
        let effects = vectors.iter().map(|v| HermitianOperator::projector(v)).collect();
        out.push(Povm::new(effects)?);
    }
    validate_mub_overlaps(&vector_bases, d)?;
    Ok(out)
}

fn mub_basis_vectors(d: usize) -> Result<Vec<Vec<Vec<Complex64>>>> {
    let mut bases = vec![computational_basis(d)];
    match d {
        2 => {
            let s = FRAC_1_SQRT_2;
            bases.push(vec![
                vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
                vec![Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
            ]);
            bases.push(vec![
                vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)],
                vec![Complex64::new(s, 0.0), Complex64::new(0.0, -s)],
            ]);
        }
        4 => {
            for table in &MUB4_TABLE {
                let basis = (0..4)
                    .map(|k| {
                        table[k]
                            .iter()
                            .map(|&(re, im)| Complex64::new(0.5 * re, 0.5 * im))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                bases.push(basis);
            }
        }
        _ if is_prime(d) => {
            // odd prime: basis j, vector k, component l = w^(j l^2 + k l)/sqrt(d)
            let norm = 1.0 / (d as f64).sqrt();
            for j in 0..d {
                let mut basis = Vec::with_capacity(d);
                for k in 0..d {
                    let v = (0..d)
                        .map(|l| {
                            let phase = 2.0 * PI * ((j * l * l + k * l) % d) as f64 / d as f64;
                            Complex64::new(0.0, phase).exp() * norm
                        })
                        .collect();
                    basis.push(v);
                }
                bases.push(basis);
            }
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "unbiased bases implemented for prime d and d = 4, not d = {d}"
            )));
        }
    }
    Ok(bases)
}

fn validate_mub_overlaps(bases: &[Vec<Vec<Complex64>>], d: usize) -> Result<()> {
    let target = 1.0 / d as f64;
    for (a, basis_a) in bases.iter().enumerate() {
        for basis_b in bases.iter().skip(a + 1) {
            for va in basis_a {
                for vb in basis_b {
                    let ov = inner(va, vb).norm_sqr();
                    if (ov - target).abs() > MUB_OVERLAP_TOL {
                        return Err(Error::Validation(format!(
                            "basis overlap {ov} deviates from 1/{d}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// The d * n_bases rank-one states of the first `n_bases` unbiased bases,
/// labeled "j,k" with 1-based basis and element indices.
pub fn gen_mub_states(d: usize, n_bases: usize) -> Result<StateSet> {
    let bases = mub_basis_vectors(d)?;
    validate_mub_overlaps(&bases, d)?;
    if n_bases == 0 || n_bases > bases.len() {
        return Err(Error::Validation(format!(
            "asked for {n_bases} bases, have 1..={} in d = {d}",
            bases.len()
        )));
    }
    let mut vectors = Vec::with_capacity(d * n_bases);
    let mut labels = Vec::with_capacity(d * n_bases);
    for (j, basis) in bases.iter().take(n_bases).enumerate() {
        for (k, v) in basis.iter().enumerate() {
            vectors.push(v.clone());
            labels.push(format!("{},{}", j + 1, k + 1));
        }
    }
    pure_set(d, &vectors, labels)
}

/// d = 2 fiducial: Bloch vector (1,1,1)/sqrt(3).
fn sic_fiducial_2() -> Vec<Complex64> {
    let cos_theta = 1.0 / 3.0f64.sqrt();
    let half = ((1.0 + cos_theta) / 2.0).sqrt();
    let other = ((1.0 - cos_theta) / 2.0).sqrt();
    vec![
        Complex64::new(half, 0.0),
        Complex64::new(0.0, PI / 4.0).exp() * other,
    ]
}

fn sic_fiducial_3() -> Vec<Complex64> {
    let s = FRAC_1_SQRT_2;
    vec![Complex64::new(0.0, 0.0), Complex64::new(s, 0.0), Complex64::new(-s, 0.0)]
}

/// Numeric d = 4 fiducial, accurate to machine precision (overlap deviation
/// below 1e-15 under the validation check).
fn sic_fiducial_4() -> Vec<Complex64> {
    vec![
        Complex64::new(0.7502848558532066, 0.0),
        Complex64::new(0.1991535065040509, 0.0285434437257327),
        Complex64::new(0.2980292031827012, -0.2680634754635479),
        Complex64::new(0.0689099689594970, -0.4807990963962382),
    ]
}

/// Symmetric informationally complete set: the d^2 shift-and-clock orbit
/// states of a fiducial vector, with |<a|b>|^2 = 1/(d+1) pairwise.
pub fn gen_sic(d: usize) -> Result<StateSet> {
    let fiducial = match d {
        2 => sic_fiducial_2(),
        3 => sic_fiducial_3(),
        4 => sic_fiducial_4(),
        _ => {
            return Err(Error::Unsupported(format!(
                "SIC fiducials available for d = 2, 3, 4, not d = {d}"
            )));
        }
    };
    let omega = Complex64::new(0.0, 2.0 * PI / d as f64).exp();
    let mut vectors = Vec::with_capacity(d * d);
    let mut labels = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // X^a Z^b |fid>: component (l + a) mod d picks up w^(b l) from fid_l
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            for l in 0..d {
                v[(l + a) % d] = omega.powu((b * l) as u32) * fiducial[l];
            }
            vectors.push(v);
            labels.push(format!("{a},{b}"));
        }
    }
    let target = 1.0 / (d as f64 + 1.0);
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let ov = inner(&vectors[i], &vectors[j]).norm_sqr();
            if (ov - target).abs() > SIC_OVERLAP_TOL {
                return Err(Error::Validation(format!(
                    "orbit overlap {ov} deviates from 1/{}",
                    d + 1
                )));
            }
        }
    }
    pure_set(d, &vectors, labels)
}

/// |0> together with (|0> + |1> + |2>)/sqrt(3) in d = 3.
pub fn gen_pair_maxcoherent() -> StateSet {
    let s = 1.0 / 3.0f64.sqrt();
    let vectors = vec![
        basis_ket(3, 0),
        vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
    ];
    let labels = vec!["0".to_string(), "maxcoh".to_string()];
    pure_set(3, &vectors, labels).expect("fixed data")
}

/// Appends the complement state (I - rho)/(d - 1) for every member, with
/// labels suffixed by a prime mark. Originals keep their positions.
pub fn extend_set(set: &StateSet) -> Result<StateSet> {
    let d = set.dim();
    if d < 2 {
        return Err(Error::Dimension("complement states need d >= 2".into()));
    }
    let mut states = set.states.clone();
    let mut labels = set.labels.clone();
    let id = HermitianOperator::identity(d);
    for (s, label) in set.states.iter().zip(&set.labels) {
        let comp = id.sub(&s.op).scale(1.0 / (d as f64 - 1.0));
        states.push(DensityMatrix::new(comp)?);
        labels.push(format!("{label}\u{2032}"));
    }
    StateSet::new(states, labels)
}
