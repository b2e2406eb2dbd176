//! Bridges to steering inequalities and joint measurability.
//!
//! Full-correlation qubit steering inequalities convert directly into sign
//! witnesses with an exact classical bound. Classical models convert into
//! parent measurements whose post-processed marginals reproduce the states,
//! and for qubits the construction runs backwards. Joint measurability of
//! the binarized state measurements is decided by SDP feasibility over the
//! 2^m parent outcomes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{is_psd, ComplexMatrix, HermitianOperator};
use crate::model::{ClassicalModel, Device};
use crate::solvers::sdp::{sdp_feasible, SdpConstraint, SdpFeasibility};
use crate::states::{Povm, StateSet};
use crate::witness::{qubit_exact_bound, sign_witness, Witness, WitnessBound};

const PROJECTIVE_TOL: f64 = 1e-10;

/// Sign-form steering functional: coefficients s[alice setting][bob setting]
/// over rank-one projective qubit measurements on Bob's side.
#[derive(Debug, Clone)]
pub struct SteeringInequality {
    s: Vec<Vec<f64>>,
    bob: Vec<Povm>,
}

impl SteeringInequality {
    pub fn new(s: Vec<Vec<f64>>, bob: Vec<Povm>) -> Result<Self> {
        if s.is_empty() || bob.is_empty() {
            return Err(Error::Validation("empty steering inequality".into()));
        }
        let n_y = bob.len();
        for row in &s {
            if row.len() != n_y {
                return Err(Error::Validation(
                    "coefficient rows must match Bob's measurement count".into(),
                ));
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::Validation("non-finite steering coefficient".into()));
            }
        }
        for povm in &bob {
            if povm.dim() != 2 {
                return Err(Error::Dimension("steering conversion needs qubit measurements".into()));
            }
            if povm.n_outcomes() != 2 {
                return Err(Error::Validation("Bob's measurements must be two-outcome".into()));
            }
            for effect in povm.effects() {
                let tr = effect.trace();
                let purity = effect.hs_inner(effect);
                if (tr - 1.0).abs() > PROJECTIVE_TOL || (purity - 1.0).abs() > PROJECTIVE_TOL {
                    return Err(Error::Validation(
                        "Bob's effects must be rank-one projective".into(),
                    ));
                }
            }
        }
        Ok(SteeringInequality { s, bob })
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.s
    }

    pub fn measurements(&self) -> &[Povm] {
        &self.bob
    }

    pub fn n_alice(&self) -> usize {
        self.s.len()
    }

    pub fn n_bob(&self) -> usize {
        self.bob.len()
    }
}

/// Converts the inequality into a witness with c_{bxy} = (-1)^b s_{xy} and
/// computes its exact classical bound by sign enumeration.
pub fn steering_to_witness(ineq: &SteeringInequality) -> Result<(Witness, WitnessBound)> {
    let w = sign_witness(&ineq.s, &ineq.bob)?;
    let bound = qubit_exact_bound(&ineq.s, &ineq.bob)?;
    Ok((w, bound))
}

/// A measurement whose classically post-processed outcomes reproduce a
/// family of binary measurements: p(0|x) against outcome o is `post0[x][o]`.
#[derive(Debug, Clone)]
pub struct ParentMeasurement {
    dim: usize,
    effects: Vec<HermitianOperator>,
    labels: Vec<String>,
    post0: Vec<Vec<f64>>,
}

impl ParentMeasurement {
    pub fn new(
        effects: Vec<HermitianOperator>,
        labels: Vec<String>,
        post0: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::Validation("parent needs at least one outcome".into()));
        }
        let dim = effects[0].dim();
        if effects.iter().any(|e| e.dim() != dim) {
            return Err(Error::Dimension("parent effects of mixed dimension".into()));
        }
        if labels.len() != effects.len() {
            return Err(Error::Validation("one label per parent outcome".into()));
        }
        let mut sum = HermitianOperator::zeros(dim);
        for (effect, label) in effects.iter().zip(&labels) {
            if !is_psd(effect, 1e-10)? {
                return Err(Error::Validation(format!(
                    "parent effect {label:?} is not positive semidefinite"
                )));
            }
            sum = sum.add(effect);
        }
        let defect = sum.sub(&HermitianOperator::identity(dim)).frobenius_norm();
        if defect > 1e-9 {
            return Err(Error::Validation(format!(
                "parent effects sum to the identity only within {defect:.2e}"
            )));
        }
        for row in &post0 {
            if row.len() != effects.len() {
                return Err(Error::Validation(
                    "post-processing rows must cover every outcome".into(),
                ));
            }
            if row.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) {
                return Err(Error::Validation("post-processing outside [0, 1]".into()));
            }
        }
        Ok(ParentMeasurement { dim, effects, labels, post0 })
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

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn post0(&self) -> &[Vec<f64>] {
        &self.post0
    }

    /// The binary effect M_{0|x} = sum_o p(0|x,o) G_o.
    pub fn marginal(&self, x: usize) -> Result<HermitianOperator> {
        let row = self
            .post0
            .get(x)
            .ok_or_else(|| Error::Validation(format!("setting {x} out of range")))?;
        let mut m = HermitianOperator::zeros(self.dim);
        for (effect, &p) in self.effects.iter().zip(row) {
            if p != 0.0 {
                m = m.add(&effect.scale(p));
            }
        }
        Ok(m)
    }
}

/// Builds the parent whose outcomes are (device, basis index) pairs:
/// G = weight x basis projector, with the model's conditionals as
/// post-processing. Needs full-basis devices; complete partial ones with
/// `extend_model` first.
pub fn parent_from_model(model: &ClassicalModel) -> Result<ParentMeasurement> {
    let d = model.dim();
    if let Some(dev) = model.devices().iter().find(|dev| dev.r() < d) {
        return Err(Error::Unsupported(format!(
            "device with subset size {} < {d}: complete the bases with extend_model first",
            dev.r()
        )));
    }
    let m = model.n_states();
    let mut effects = Vec::new();
    let mut labels = Vec::new();
    let mut post0: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (lambda, dev) in model.devices().iter().enumerate() {
        let q = model.weights()[lambda];
        for i in 0..d {
            effects.push(dev.projector(i).scale(q));
            labels.push(format!("{lambda},{i}"));
            for (x, row) in post0.iter_mut().enumerate() {
                row.push(model.cond()[lambda][x][i]);
            }
        }
    }
    let parent = ParentMeasurement::new(effects, labels, post0)?;
    // the construction promises the post-processed marginals equal the
    // model's reconstructions; verify rather than trust
    for x in 0..m {
        let diff = parent
            .marginal(x)?
            .sub(model.reconstruct(x)?.operator())
            .frobenius_norm();
        if diff > 1e-9 {
            return Err(Error::Solver(format!(
                "parent marginal for state {x} misses its reconstruction by {diff:.2e}"
            )));
        }
    }
    Ok(parent)
}

fn pauli_bloch(g: &HermitianOperator) -> (f64, [f64; 3]) {
    let m = g.matrix();
    let p = (m[(0, 0)].re + m[(1, 1)].re) / 2.0;
    let bx = m[(0, 1)].re;
    let by = -m[(0, 1)].im;
    let bz = (m[(0, 0)].re - m[(1, 1)].re) / 2.0;
    (p, [bx, by, bz])
}

fn bloch_eigenbasis(n: [f64; 3]) -> ComplexMatrix {
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let phase = Complex64::new(0.0, phi).exp();
    ComplexMatrix::from_rows(&[
        vec![Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        vec![phase * s, phase * -c],
    ])
    .expect("qubit basis")
}

/// Reverses `parent_from_model` for qubits. Each parent outcome becomes a
/// device along its Bloch direction; the emission probability toward the
/// positive eigenstate is centered, 1/2 + (p(0|x,o) - 1/2) eta, which
/// reproduces the marginals exactly whenever they are unit trace, with no
/// assumption on which side of 1/2 the post-processing sits.
pub fn qubit_model_from_parent(parent: &ParentMeasurement) -> Result<ClassicalModel> {
    if parent.dim() != 2 {
        return Err(Error::Dimension("reverse construction is qubit-only".into()));
    }
    let m = parent.post0().len();
    if m == 0 {
        return Err(Error::Validation("parent carries no post-processing".into()));
    }
    let mut devices = Vec::new();
    let mut weights = Vec::new();
    let mut cond: Vec<Vec<Vec<f64>>> = Vec::new();
    for (o, effect) in parent.effects().iter().enumerate() {
        let label = &parent.labels()[o];
        let (p, b) = pauli_bloch(effect);
        if p <= 1e-14 {
            return Err(Error::Validation(format!(
                "outcome {label:?} has zero trace; no Bloch decomposition"
            )));
        }
        let blen = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        let eta = blen / p;
        if eta > 1.0 + 1e-9 {
            return Err(Error::Validation(format!(
                "outcome {label:?} has Bloch length {eta:.3e} > 1; not an effect"
            )));
        }
        let eta = eta.min(1.0);
        let n = if blen > 1e-15 {
            [b[0] / blen, b[1] / blen, b[2] / blen]
        } else {
            [0.0, 0.0, 1.0]
        };
        devices.push(Device::full(bloch_eigenbasis(n))?);
        weights.push(p);
        cond.push(
            (0..m)
                .map(|x| {
                    let alpha = 0.5 + (parent.post0()[x][o] - 0.5) * eta;
                    vec![alpha, 1.0 - alpha]
                })
                .collect(),
        );
    }
    let model = ClassicalModel::new(devices, weights, cond)?;
    for x in 0..m {
        let diff = model
            .reconstruct(x)?
            .operator()
            .sub(&parent.marginal(x)?)
            .frobenius_norm();
        if diff > 1e-9 {
            return Err(Error::Validation(format!(
                "marginal of setting {x} is not unit trace or not reproducible \
                 (residual {diff:.2e}); this parent does not binarize a state set"
            )));
        }
    }
    Ok(model)
}

fn component_basis(d: usize) -> Vec<HermitianOperator> {
    let mut basis = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, j)] = Complex64::new(1.0, 0.0);
        basis.push(HermitianOperator::new(m).expect("diag component"));
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(j, k)] = Complex64::new(1.0, 0.0);
            re[(k, j)] = Complex64::new(1.0, 0.0);
            basis.push(HermitianOperator::new(re).expect("re component"));
            let mut im = ComplexMatrix::zeros(d, d);
            im[(j, k)] = Complex64::new(0.0, -1.0);
            im[(k, j)] = Complex64::new(0.0, 1.0);
            basis.push(HermitianOperator::new(im).expect("im component"));
        }
    }
    basis
}

/// Whether the binarized measurements M_{0|x} = v rho_x + (1 - v)/d I admit
/// a common parent: an SDP feasibility problem over 2^m parent effects.
pub fn jm_binarized_feasible(set: &StateSet, v: f64) -> Result<bool> {
    Ok(jm_binarized_report(set, v)?.is_feasible())
}

/// Like `jm_binarized_feasible`, keeping the probe's certificates.
pub fn jm_binarized_report(set: &StateSet, v: f64) -> Result<SdpFeasibility> {
    let m = set.len();
    if m > 12 {
        return Err(Error::SizeCap(format!(
            "{m} binarized measurements need 2^{m} parent outcomes; the cap is 2^12"
        )));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Validation(format!("visibility {v} outside [0, 1]")));
    }
    let d = set.dim();
    let n_blocks = 1usize << m;
    let basis = component_basis(d);
    let mut constraints = Vec::new();
    // completeness: sum of all parent effects is the identity
    for comp in &basis {
        constraints.push(SdpConstraint {
            terms: (0..n_blocks).map(|a| (a, comp.clone())).collect(),
            rhs: comp.trace(),
        });
    }
    // marginals: outcomes with a_x = 0 sum to the binarized effect
    for (x, rho) in set.states().iter().enumerate() {
        let target = rho
            .operator()
            .scale(v)
            .add(&HermitianOperator::identity(d).scale((1.0 - v) / d as f64));
        for comp in &basis {
            let rhs = comp.hs_inner(&target);
            constraints.push(SdpConstraint {
                terms: (0..n_blocks)
                    .filter(|a| (a >> x) & 1 == 0)
                    .map(|a| (a, comp.clone()))
                    .collect(),
                rhs,
            });
        }
    }
    sdp_feasible(&vec![d; n_blocks], &constraints)
}

/// Largest visibility at which the binarized set stays jointly measurable,
/// certified by bisection to width 1e-4.
pub fn jm_threshold(set: &StateSet) -> Result<f64> {
    if !jm_binarized_feasible(set, 0.0)? {
        return Err(Error::Solver(
            "even the fully depolarized binarization is infeasible; \
             the feasibility SDP is misbehaving"
                .into(),
        ));
    }
    if jm_binarized_feasible(set, 1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if jm_binarized_feasible(set, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
