//! Classical devices and models: the explicit simulation data that the LP
//! produces and every downstream check consumes.
//!
//! A device is an orthonormal basis together with the subset of its columns
//! the device is allowed to emit; a model attaches weights to devices and
//! conditional emission probabilities per input state. Reconstruction sums
//! weighted projectors and must land on the noisy states; that residual is
//! the ground truth every solver result is checked against.

use crate::error::{Error, Result};
use crate::linalg::{inner, outer, ComplexMatrix, HermitianOperator};
use crate::states::{DensityMatrix, Povm};
use num_complex::Complex64;

pub const UNITARITY_TOL: f64 = 1e-10;
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// One classical device: a basis and the emittable column subset.
#[derive(Debug, Clone)]
pub struct Device {
    basis: ComplexMatrix,
    subset: Vec<usize>,
}

impl Device {
    pub fn new(basis: ComplexMatrix, subset: Vec<usize>) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::Dimension("device basis must be square".into()));
        }
        let d = basis.rows();
        let defect = basis.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(Error::Validation(format!(
                "device basis unitary only within {defect:.3e}"
            )));
        }
        if subset.is_empty() || subset.len() > d {
            return Err(Error::Validation(format!(
                "subset size {} outside 1..={d}",
                subset.len()
            )));
        }
        if subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("subset indices must be sorted and distinct".into()));
        }
        if *subset.last().unwrap() >= d {
            return Err(Error::Validation(format!(
                "subset index {} outside 0..{d}",
                subset.last().unwrap()
            )));
        }
        Ok(Device { basis, subset })
    }

    /// Device emitting any column of the basis.
    pub fn full(basis: ComplexMatrix) -> Result<Self> {
        let d = basis.rows();
        Device::new(basis, (0..d).collect())
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    /// Number of emittable states.
    pub fn r(&self) -> usize {
        self.subset.len()
    }

    /// Projector onto the k-th emittable state (k indexes the subset).
    pub fn projector(&self, k: usize) -> HermitianOperator {
        HermitianOperator::projector(&self.basis.column(self.subset[k]))
    }
}

/// All size-r index subsets of 0..d in lexicographic order.
pub fn r_subsets(d: usize, r: usize) -> Vec<Vec<usize>> {
    assert!(r >= 1 && r <= d);
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        // advance the rightmost index that still has room
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + (r - i) < d {
                break;
            }
        }
        if cur[i] + (r - i) >= d {
            return out;
        }
        cur[i] += 1;
        for j in (i + 1)..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Finite classical model: weighted devices plus conditional emission
/// probabilities `cond[device][x][k]` (k over the device's subset).
#[derive(Debug, Clone)]
pub struct ClassicalModel {
    dim: usize,
    devices: Vec<Device>,
    weights: Vec<f64>,
    cond: Vec<Vec<Vec<f64>>>,
}

impl ClassicalModel {
    pub fn new(
        devices: Vec<Device>,
        weights: Vec<f64>,
        cond: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if devices.is_empty() {
            return Err(Error::Validation("model needs at least one device".into()));
        }
        let dim = devices[0].dim();
        if devices.iter().any(|dev| dev.dim() != dim) {
            return Err(Error::Dimension("devices of mixed dimension".into()));
        }
        if weights.len() != devices.len() || cond.len() != devices.len() {
            return Err(Error::Validation(format!(
                "{} devices, {} weights, {} conditional tables",
                devices.len(),
                weights.len(),
                cond.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::Validation("negative or non-finite device weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Validation(format!("device weights sum to {total}")));
        }
        let m = cond[0].len();
        if m == 0 {
            return Err(Error::Validation("conditional table covers no states".into()));
        }
        for (li, (dev, table)) in devices.iter().zip(&cond).enumerate() {
            if table.len() != m {
                return Err(Error::Validation(format!(
                    "device {li} has {} state rows, expected {m}",
                    table.len()
                )));
            }
            for (x, row) in table.iter().enumerate() {
                if row.len() != dev.r() {
                    return Err(Error::Validation(format!(
                        "device {li}, state {x}: {} entries for subset size {}",
                        row.len(),
                        dev.r()
                    )));
                }
                if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                    return Err(Error::Validation(format!(
                        "device {li}, state {x}: negative or non-finite probability"
                    )));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::Validation(format!(
                        "device {li}, state {x}: probabilities sum to {s}"
                    )));
                }
            }
        }
        Ok(ClassicalModel { dim, devices, weights, cond })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_states(&self) -> usize {
        self.cond[0].len()
    }

    pub fn n_devices(&self) -> usize {
        self.devices.len()
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cond(&self) -> &[Vec<Vec<f64>>] {
        &self.cond
    }

    /// The state the model produces for input x.
    pub fn reconstruct(&self, x: usize) -> Result<DensityMatrix> {
        if x >= self.n_states() {
            return Err(Error::Validation(format!(
                "state index {x} out of range 0..{}",
                self.n_states()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for (li, dev) in self.devices.iter().enumerate() {
            let q = self.weights[li];
            if q == 0.0 {
                continue;
            }
            for (k, &p) in self.cond[li][x].iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let col = dev.basis.column(dev.subset[k]);
                let scale = Complex64::new(q * p, 0.0);
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        acc[(i, j)] += scale * col[i] * col[j].conj();
                    }
                }
            }
        }
        DensityMatrix::new(HermitianOperator::symmetrize(acc)?)
    }

    /// p(b|x,y) for every state x and measurement y; identical to the Born
    /// table of the reconstructed states.
    pub fn predict_statistics(&self, measurements: &[Povm]) -> Result<Vec<Vec<Vec<f64>>>> {
        if measurements.iter().any(|p| p.dim() != self.dim) {
            return Err(Error::Dimension("measurement dimension differs from model".into()));
        }
        let m = self.n_states();
        let mut table = Vec::with_capacity(m);
        for x in 0..m {
            let mut per_meas = Vec::with_capacity(measurements.len());
            for povm in measurements {
                let mut probs = vec![0.0; povm.n_outcomes()];
                for (li, dev) in self.devices.iter().enumerate() {
                    let q = self.weights[li];
                    if q == 0.0 {
                        continue;
                    }
                    for (k, &p) in self.cond[li][x].iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let col = dev.basis.column(dev.subset[k]);
                        for (b, effect) in povm.effects().iter().enumerate() {
                            probs[b] += q * p * effect.expectation(&col);
                        }
                    }
                }
                per_meas.push(probs);
            }
            table.push(per_meas);
        }
        Ok(table)
    }
}

/// Orthonormal completion of a device's emittable columns to a full basis,
/// via pivoted Gram-Schmidt on the complement projector's columns.
fn complete_basis(dev: &Device) -> Result<ComplexMatrix> {
    let d = dev.dim();
    let mut chosen: Vec<Vec<Complex64>> =
        dev.subset.iter().map(|&c| dev.basis.column(c)).collect();
    if chosen.len() < d {
        // complement projector K = I - sum of chosen projectors
        let mut k_mat = ComplexMatrix::identity(d);
        for v in &chosen {
            let p = outer(v, v);
            k_mat = k_mat.sub(&p);
        }
        while chosen.len() < d {
            // pick the K column with the largest residual after
            // orthogonalization against everything accepted so far
            let mut best: Option<(f64, Vec<Complex64>)> = None;
            for j in 0..d {
                let mut v = k_mat.column(j);
                for u in &chosen {
                    let c = inner(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= c * ui;
                    }
                }
                let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if best.as_ref().is_none_or(|(n, _)| norm > *n) {
                    best = Some((norm, v));
                }
            }
            let (norm, mut v) = best.expect("d >= 1");
            if norm < 1e-8 {
                return Err(Error::Validation(
                    "basis completion failed: complement space exhausted".into(),
                ));
            }
            for z in v.iter_mut() {
                *z /= Complex64::new(norm, 0.0);
            }
            chosen.push(v);
        }
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for (j, v) in chosen.iter().enumerate() {
        for i in 0..d {
            out[(i, j)] = v[i];
        }
    }
    Ok(out)
}

/// Model for the set extended with complement states: same devices (bases
/// completed to full if needed), conditionals for the new states given by
/// p'(i|x') = (1 - p(i|x))/(d - 1).
pub fn extend_model(model: &ClassicalModel) -> Result<ClassicalModel> {
    let d = model.dim();
    if d < 2 {
        return Err(Error::Dimension("complement states need d >= 2".into()));
    }
    let m = model.n_states();
    let mut devices = Vec::with_capacity(model.n_devices());
    let mut cond = Vec::with_capacity(model.n_devices());
    for (li, dev) in model.devices.iter().enumerate() {
        let r = dev.r();
        let full = if r == d {
            dev.clone()
        } else {
            Device::full(complete_basis(dev)?)?
        };
        let mut table = Vec::with_capacity(2 * m);
        for x in 0..m {
            // original states: old probabilities on the emittable columns
            // (now the leading ones), zero on the completion columns
            let mut row = vec![0.0; d];
            for (k, &p) in model.cond[li][x].iter().enumerate() {
                let col = if r == d { dev.subset[k] } else { k };
                row[col] = p;
            }
            table.push(row);
        }
        for x in 0..m {
            let mut row = vec![0.0; d];
            for (i, slot) in row.iter_mut().enumerate() {
                let p = if r == d || i < r { model.cond[li][x][i] } else { 0.0 };
                *slot = (1.0 - p) / (d as f64 - 1.0);
            }
            table.push(row);
        }
        devices.push(full);
        cond.push(table);
    }
    ClassicalModel::new(devices, model.weights.clone(), cond)
}

/// Model for the elementwise mixture {p rho_x + (1-p) sigma_y} over the
/// product index (x-major), built from models of the two parts.
pub fn mix_models(a: &ClassicalModel, b: &ClassicalModel, p: f64) -> Result<ClassicalModel> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "cannot mix models of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Validation(format!("mixing weight {p} outside [0, 1]")));
    }
    let (ma, mb) = (a.n_states(), b.n_states());
    let mut devices = Vec::new();
    let mut weights = Vec::new();
    let mut cond = Vec::new();
    for (li, dev) in a.devices.iter().enumerate() {
        let w = p * a.weights[li];
        if w == 0.0 {
            continue;
        }
        devices.push(dev.clone());
        weights.push(w);
        let mut table = Vec::with_capacity(ma * mb);
        for x in 0..ma {
            for _y in 0..mb {
                table.push(a.cond[li][x].clone());
            }
        }
        cond.push(table);
    }
    for (li, dev) in b.devices.iter().enumerate() {
        let w = (1.0 - p) * b.weights[li];
        if w == 0.0 {
            continue;
        }
        devices.push(dev.clone());
        weights.push(w);
        let mut table = Vec::with_capacity(ma * mb);
        for _x in 0..ma {
            for y in 0..mb {
                table.push(b.cond[li][y].clone());
            }
        }
        cond.push(table);
    }
    ClassicalModel::new(devices, weights, cond)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis_ket;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hadamard() -> ComplexMatrix {
        let s = FRAC_1_SQRT_2;
        ComplexMatrix::from_rows(&[
            vec![c64(s, 0.0), c64(s, 0.0)],
            vec![c64(s, 0.0), c64(-s, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn test_device_validation() {
        let id = ComplexMatrix::identity(2);
        assert!(Device::new(id.clone(), vec![0, 1]).is_ok());
        assert!(Device::new(id.clone(), vec![1, 0]).is_err());
        assert!(Device::new(id.clone(), vec![0, 0]).is_err());
        assert!(Device::new(id.clone(), vec![2]).is_err());
        assert!(Device::new(id.clone(), vec![]).is_err());
        let mut skew = ComplexMatrix::identity(2);
        skew[(0, 1)] = c64(0.1, 0.0);
        assert!(Device::new(skew, vec![0]).is_err());
        let dev = Device::new(id, vec![1]).unwrap();
        assert_eq!((dev.dim(), dev.r()), (2, 1));
    }

    #[test]
    fn test_r_subsets_lexicographic() {
        assert_eq!(r_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(r_subsets(4, 1).len(), 4);
        assert_eq!(r_subsets(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(r_subsets(5, 3).len(), 10);
    }

    #[test]
    fn test_model_validation() {
        let dev = Device::full(ComplexMatrix::identity(2)).unwrap();
        let ok = ClassicalModel::new(
            vec![dev.clone()],
            vec![1.0],
            vec![vec![vec![0.5, 0.5]]],
        );
        assert!(ok.is_ok());
        let bad_weight = ClassicalModel::new(
            vec![dev.clone()],
            vec![0.9],
            vec![vec![vec![0.5, 0.5]]],
        );
        assert!(bad_weight.is_err());
        let bad_row = ClassicalModel::new(
            vec![dev.clone()],
            vec![1.0],
            vec![vec![vec![0.7, 0.7]]],
        );
        assert!(bad_row.is_err());
        let negative = ClassicalModel::new(
            vec![dev],
            vec![1.0],
            vec![vec![vec![1.5, -0.5]]],
        );
        assert!(negative.is_err());
    }

    #[test]
    fn test_reconstruct_deterministic() {
        let dev = Device::full(ComplexMatrix::identity(2)).unwrap();
        let model = ClassicalModel::new(
            vec![dev],
            vec![1.0],
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        )
        .unwrap();
        let zero = model.reconstruct(0).unwrap();
        assert!((zero.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
        let one = model.reconstruct(1).unwrap();
        assert!((one.matrix()[(1, 1)].re - 1.0).abs() < 1e-14);
        assert!(model.reconstruct(2).is_err());
    }

    #[test]
    fn test_predict_statistics_born_identity() {
        // half Z-basis device, half X-basis device, non-trivial conditionals
        let z_dev = Device::full(ComplexMatrix::identity(2)).unwrap();
        let x_dev = Device::full(hadamard()).unwrap();
        let model = ClassicalModel::new(
            vec![z_dev, x_dev],
            vec![0.5, 0.5],
            vec![
                vec![vec![0.8, 0.2], vec![0.3, 0.7]],
                vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            ],
        )
        .unwrap();
        let z_meas = Povm::from_basis(&ComplexMatrix::identity(2)).unwrap();
        let x_meas = Povm::from_basis(&hadamard()).unwrap();
        let table = model.predict_statistics(&[z_meas.clone(), x_meas.clone()]).unwrap();
        for (x, per_meas) in table.iter().enumerate() {
            let rho = model.reconstruct(x).unwrap();
            for (y, povm) in [&z_meas, &x_meas].iter().enumerate() {
                let mut total = 0.0;
                for (b, effect) in povm.effects().iter().enumerate() {
                    let born = effect.hs_inner(rho.operator());
                    assert!(
                        (per_meas[y][b] - born).abs() < 1e-10,
                        "x={x} y={y} b={b}: {} vs {born}",
                        per_meas[y][b]
                    );
                    total += per_meas[y][b];
                }
                assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn test_predict_statistics_deterministic_table() {
        let dev = Device::full(ComplexMatrix::identity(2)).unwrap();
        let model = ClassicalModel::new(
            vec![dev],
            vec![1.0],
            vec![vec![vec![1.0, 0.0]]],
        )
        .unwrap();
        let z_meas = Povm::from_basis(&ComplexMatrix::identity(2)).unwrap();
        let table = model.predict_statistics(&[z_meas]).unwrap();
        assert!((table[0][0][0] - 1.0).abs() < 1e-14);
        assert!(table[0][0][1].abs() < 1e-14);
    }

    #[test]
    fn test_extend_model_qubit_deterministic() {
        let dev = Device::full(ComplexMatrix::identity(2)).unwrap();
        let model = ClassicalModel::new(
            vec![dev],
            vec![1.0],
            vec![vec![vec![1.0, 0.0]]],
        )
        .unwrap();
        let ext = extend_model(&model).unwrap();
        assert_eq!(ext.n_states(), 2);
        let new_state = ext.reconstruct(1).unwrap();
        let one = DensityMatrix::from_pure(&basis_ket(2, 1)).unwrap();
        assert!(new_state.matrix().max_abs_diff(one.matrix()) < 1e-12);
    }

    #[test]
    fn test_extend_model_uniform_fixed_point() {
        let dev = Device::full(ComplexMatrix::identity(3)).unwrap();
        let third = 1.0 / 3.0;
        let model = ClassicalModel::new(
            vec![dev],
            vec![1.0],
            vec![vec![vec![third, third, third]]],
        )
        .unwrap();
        let ext = extend_model(&model).unwrap();
        for &p in &ext.cond()[0][1] {
            assert!((p - third).abs() < 1e-14, "(1 - 1/3)/2 = 1/3");
        }
    }

    #[test]
    fn test_extend_model_completes_partial_basis() {
        // r = 1 device in d = 3: completion plus complement reconstruction
        let dev = Device::new(ComplexMatrix::identity(3), vec![1]).unwrap();
        let model = ClassicalModel::new(
            vec![dev],
            vec![1.0],
            vec![vec![vec![1.0]]],
        )
        .unwrap();
        let original = model.reconstruct(0).unwrap();
        let ext = extend_model(&model).unwrap();
        assert_eq!(ext.devices()[0].r(), 3);
        let same = ext.reconstruct(0).unwrap();
        assert!(same.matrix().max_abs_diff(original.matrix()) < 1e-10);
        let comp = ext.reconstruct(1).unwrap();
        let expected = HermitianOperator::identity(3)
            .sub(original.operator())
            .scale(0.5);
        assert!(comp.matrix().max_abs_diff(expected.matrix()) < 1e-10);
    }

    #[test]
    fn test_mix_models_endpoints() {
        let z_model = ClassicalModel::new(
            vec![Device::full(ComplexMatrix::identity(2)).unwrap()],
            vec![1.0],
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        )
        .unwrap();
        let x_model = ClassicalModel::new(
            vec![Device::full(hadamard()).unwrap()],
            vec![1.0],
            vec![vec![vec![1.0, 0.0]]],
        )
        .unwrap();
        let pure_a = mix_models(&z_model, &x_model, 1.0).unwrap();
        assert_eq!(pure_a.n_devices(), 1);
        assert_eq!(pure_a.n_states(), 2);
        // product index (x, y) with y a singleton: states follow model a
        let r0 = pure_a.reconstruct(0).unwrap();
        assert!((r0.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        let pure_b = mix_models(&z_model, &x_model, 0.0).unwrap();
        let plus = pure_b.reconstruct(1).unwrap();
        assert!((plus.matrix()[(0, 1)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn test_mix_model_with_itself() {
        let model = ClassicalModel::new(
            vec![Device::full(hadamard()).unwrap()],
            vec![1.0],
            vec![vec![vec![0.6, 0.4], vec![0.2, 0.8]]],
        )
        .unwrap();
        let mixed = mix_models(&model, &model, 0.5).unwrap();
        assert_eq!(mixed.n_states(), 4);
        // diagonal product entries (x, x) must reproduce the original states
        for x in 0..2 {
            let orig = model.reconstruct(x).unwrap();
            let got = mixed.reconstruct(x * 2 + x).unwrap();
            assert!(got.matrix().max_abs_diff(orig.matrix()) < 1e-12);
        }
    }
}
