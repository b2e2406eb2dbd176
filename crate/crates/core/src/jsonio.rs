//! JSON wire formats for the domain types.
//!
//! Complex numbers are always `[re, im]` pairs and matrices row-major nested
//! arrays, so files stay readable and language-neutral. Deserialization goes
//! through the ordinary constructors, which means a hand-edited file that
//! breaks an invariant (non-unit trace, non-unitary basis, ...) is rejected
//! with the same errors the rest of the crate produces.

use crate::error::Result;
use crate::linalg::{ComplexMatrix, HermitianOperator};
use crate::model::{ClassicalModel, Device};
use crate::simulation::SimulationResult;
use crate::states::{DensityMatrix, Povm, StateSet};
use crate::steering::{ParentMeasurement, SteeringInequality};
use crate::witness::{BoundMethod, DeterministicStrategy, Witness, WitnessBound};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type WireMatrix = Vec<Vec<[f64; 2]>>;

pub(crate) fn matrix_to_wire(m: &ComplexMatrix) -> WireMatrix {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn matrix_from_wire(wire: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let rows = wire.len();
    if rows == 0 {
        return Err(crate::error::Error::Validation("empty matrix".into()));
    }
    let cols = wire[0].len();
    if wire.iter().any(|row| row.len() != cols) {
        return Err(crate::error::Error::Validation("ragged matrix rows".into()));
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (i, row) in wire.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct WireState {
    label: String,
    matrix: WireMatrix,
}

#[derive(Serialize, Deserialize)]
struct WireStateSet {
    dim: usize,
    states: Vec<WireState>,
}

pub fn state_set_to_json(set: &StateSet) -> String {
    let wire = WireStateSet {
        dim: set.dim(),
        states: set
            .states()
            .iter()
            .zip(set.labels())
            .map(|(rho, label)| WireState {
                label: label.clone(),
                matrix: matrix_to_wire(rho.matrix()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&wire).expect("state set serialization")
}

pub fn state_set_from_json(text: &str) -> Result<StateSet> {
    let wire: WireStateSet = serde_json::from_str(text)?;
    let mut states = Vec::with_capacity(wire.states.len());
    let mut labels = Vec::with_capacity(wire.states.len());
    for ws in wire.states {
        let mat = matrix_from_wire(&ws.matrix)?;
        if mat.rows() != wire.dim || mat.cols() != wire.dim {
            return Err(crate::error::Error::Dimension(format!(
                "state {:?} is {} x {}, expected {} x {}",
                ws.label,
                mat.rows(),
                mat.cols(),
                wire.dim,
                wire.dim
            )));
        }
        states.push(DensityMatrix::new(HermitianOperator::new(mat)?)?);
        labels.push(ws.label);
    }
    StateSet::new(states, labels)
}

#[derive(Serialize, Deserialize)]
struct WirePovm {
    dim: usize,
    effects: Vec<WireMatrix>,
}

pub fn povm_to_json(povm: &Povm) -> String {
    serde_json::to_string_pretty(&povm_to_wire(povm)).expect("povm serialization")
}

pub fn povm_from_json(text: &str) -> Result<Povm> {
    povm_from_wire(&serde_json::from_str(text)?)
}

fn povm_to_wire(povm: &Povm) -> WirePovm {
    WirePovm {
        dim: povm.dim(),
        effects: povm.effects().iter().map(|e| matrix_to_wire(e.matrix())).collect(),
    }
}

fn povm_from_wire(wire: &WirePovm) -> Result<Povm> {
    let mut effects = Vec::with_capacity(wire.effects.len());
    for raw in &wire.effects {
        let mat = matrix_from_wire(raw)?;
        if mat.rows() != wire.dim || mat.cols() != wire.dim {
            return Err(crate::error::Error::Dimension(format!(
                "effect is {} x {}, expected {} x {}",
                mat.rows(),
                mat.cols(),
                wire.dim,
                wire.dim
            )));
        }
        effects.push(HermitianOperator::new(mat)?);
    }
    Povm::new(effects)
}

/// A list of measurements sharing one file, as used by witness and steering
/// inputs.
pub fn povm_list_to_json(povms: &[Povm]) -> String {
    let wire: Vec<WirePovm> = povms.iter().map(povm_to_wire).collect();
    serde_json::to_string_pretty(&wire).expect("povm list serialization")
}

pub fn povm_list_from_json(text: &str) -> Result<Vec<Povm>> {
    let wire: Vec<WirePovm> = serde_json::from_str(text)?;
    wire.iter().map(povm_from_wire).collect()
}

#[derive(Serialize, Deserialize)]
struct WireDevice {
    basis: WireMatrix,
    subset: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct WireModel {
    dim: usize,
    devices: Vec<WireDevice>,
    weights: Vec<f64>,
    cond: Vec<Vec<Vec<f64>>>,
}

fn model_to_wire(model: &ClassicalModel) -> WireModel {
    WireModel {
        dim: model.dim(),
        devices: model
            .devices()
            .iter()
            .map(|dev| WireDevice {
                basis: matrix_to_wire(dev.basis()),
                subset: dev.subset().to_vec(),
            })
            .collect(),
        weights: model.weights().to_vec(),
        cond: model.cond().to_vec(),
    }
}

fn model_from_wire(wire: WireModel) -> Result<ClassicalModel> {
    let mut devices = Vec::with_capacity(wire.devices.len());
    for wd in wire.devices {
        let basis = matrix_from_wire(&wd.basis)?;
        if basis.rows() != wire.dim || basis.cols() != wire.dim {
            return Err(crate::error::Error::Dimension(format!(
                "device basis is {} x {}, expected {} x {}",
                basis.rows(),
                basis.cols(),
                wire.dim,
                wire.dim
            )));
        }
        devices.push(Device::new(basis, wd.subset)?);
    }
    ClassicalModel::new(devices, wire.weights, wire.cond)
}

pub fn model_to_json(model: &ClassicalModel) -> String {
    serde_json::to_string_pretty(&model_to_wire(model)).expect("model serialization")
}

pub fn model_from_json(text: &str) -> Result<ClassicalModel> {
    model_from_wire(serde_json::from_str(text)?)
}

#[derive(Serialize, Deserialize)]
struct WireDeviceFile {
    dim: usize,
    devices: Vec<WireDevice>,
}

/// Bare device list, the input side of a simulation run.
pub fn devices_to_json(dim: usize, devices: &[Device]) -> String {
    let wire = WireDeviceFile {
        dim,
        devices: devices
            .iter()
            .map(|dev| WireDevice {
                basis: matrix_to_wire(dev.basis()),
                subset: dev.subset().to_vec(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&wire).expect("device list serialization")
}

pub fn devices_from_json(text: &str) -> Result<Vec<Device>> {
    let wire: WireDeviceFile = serde_json::from_str(text)?;
    let mut devices = Vec::with_capacity(wire.devices.len());
    for wd in wire.devices {
        let basis = matrix_from_wire(&wd.basis)?;
        if basis.rows() != wire.dim || basis.cols() != wire.dim {
            return Err(crate::error::Error::Dimension(format!(
                "device basis is {} x {}, expected {} x {}",
                basis.rows(),
                basis.cols(),
                wire.dim,
                wire.dim
            )));
        }
        devices.push(Device::new(basis, wd.subset)?);
    }
    Ok(devices)
}

#[derive(Serialize, Deserialize)]
struct WireSimulation {
    visibility: f64,
    residual: f64,
    gap: f64,
    family: String,
    #[serde(flatten)]
    model: WireModel,
}

pub fn simulation_result_to_json(res: &SimulationResult) -> String {
    let wire = WireSimulation {
        visibility: res.visibility,
        residual: res.residual,
        gap: res.gap,
        family: res.family.clone(),
        model: model_to_wire(&res.model),
    };
    serde_json::to_string_pretty(&wire).expect("simulation result serialization")
}

pub fn simulation_result_from_json(text: &str) -> Result<SimulationResult> {
    let wire: WireSimulation = serde_json::from_str(text)?;
    Ok(SimulationResult {
        visibility: wire.visibility,
        residual: wire.residual,
        gap: wire.gap,
        family: wire.family,
        model: model_from_wire(wire.model)?,
    })
}

#[derive(Serialize, Deserialize)]
struct WireWitness {
    dim: usize,
    coefficients: Vec<Vec<Vec<f64>>>,
    measurements: Vec<WirePovm>,
}

pub fn witness_to_json(w: &Witness) -> String {
    let wire = WireWitness {
        dim: w.dim(),
        coefficients: w.coefficients().to_vec(),
        measurements: w.measurements().iter().map(povm_to_wire).collect(),
    };
    serde_json::to_string_pretty(&wire).expect("witness serialization")
}

pub fn witness_from_json(text: &str) -> Result<Witness> {
    let wire: WireWitness = serde_json::from_str(text)?;
    let measurements: Vec<Povm> =
        wire.measurements.iter().map(povm_from_wire).collect::<Result<_>>()?;
    if measurements.iter().any(|p| p.dim() != wire.dim) {
        return Err(crate::error::Error::Dimension(
            "witness measurements disagree with the declared dimension".into(),
        ));
    }
    Witness::new(measurements, wire.coefficients)
}

#[derive(Serialize, Deserialize)]
struct WireBound {
    beta: f64,
    method: BoundMethod,
    strategies_evaluated: usize,
    argmax: DeterministicStrategy,
    uncertainty: f64,
}

/// Per-strategy value lists are working data, not part of the wire format.
pub fn witness_bound_to_json(b: &WitnessBound) -> String {
    let wire = WireBound {
        beta: b.beta,
        method: b.method,
        strategies_evaluated: b.strategies_evaluated,
        argmax: b.argmax.clone(),
        uncertainty: b.uncertainty,
    };
    serde_json::to_string_pretty(&wire).expect("witness bound serialization")
}

pub fn witness_bound_from_json(text: &str) -> Result<WitnessBound> {
    let wire: WireBound = serde_json::from_str(text)?;
    Ok(WitnessBound {
        beta: wire.beta,
        method: wire.method,
        strategies_evaluated: wire.strategies_evaluated,
        argmax: wire.argmax,
        uncertainty: wire.uncertainty,
        values: None,
    })
}

#[derive(Serialize, Deserialize)]
struct WireSteering {
    s: Vec<Vec<f64>>,
    bob_measurements: Vec<WirePovm>,
}

pub fn steering_to_json(ineq: &SteeringInequality) -> String {
    let wire = WireSteering {
        s: ineq.coefficients().to_vec(),
        bob_measurements: ineq.measurements().iter().map(povm_to_wire).collect(),
    };
    serde_json::to_string_pretty(&wire).expect("steering serialization")
}

pub fn steering_from_json(text: &str) -> Result<SteeringInequality> {
    let wire: WireSteering = serde_json::from_str(text)?;
    let bob: Vec<Povm> =
        wire.bob_measurements.iter().map(povm_from_wire).collect::<Result<_>>()?;
    SteeringInequality::new(wire.s, bob)
}

#[derive(Serialize, Deserialize)]
struct WireOutcome {
    label: String,
    effect: WireMatrix,
}

#[derive(Serialize, Deserialize)]
struct WireParent {
    dim: usize,
    outcomes: Vec<WireOutcome>,
    post0: Vec<Vec<f64>>,
}

pub fn parent_to_json(parent: &ParentMeasurement) -> String {
    let wire = WireParent {
        dim: parent.dim(),
        outcomes: parent
            .effects()
            .iter()
            .zip(parent.labels())
            .map(|(effect, label)| WireOutcome {
                label: label.clone(),
                effect: matrix_to_wire(effect.matrix()),
            })
            .collect(),
        post0: parent.post0().to_vec(),
    };
    serde_json::to_string_pretty(&wire).expect("parent serialization")
}

pub fn parent_from_json(text: &str) -> Result<ParentMeasurement> {
    let wire: WireParent = serde_json::from_str(text)?;
    let mut effects = Vec::with_capacity(wire.outcomes.len());
    let mut labels = Vec::with_capacity(wire.outcomes.len());
    for wo in wire.outcomes {
        let mat = matrix_from_wire(&wo.effect)?;
        if mat.rows() != wire.dim || mat.cols() != wire.dim {
            return Err(crate::error::Error::Dimension(format!(
                "effect {:?} is {} x {}, expected {} x {}",
                wo.label,
                mat.rows(),
                mat.cols(),
                wire.dim,
                wire.dim
            )));
        }
        effects.push(HermitianOperator::new(mat)?);
        labels.push(wo.label);
    }
    ParentMeasurement::new(effects, labels, wire.post0)
}
