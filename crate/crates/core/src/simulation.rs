//! Visibility maximization over a fixed family of classical devices.
//!
//! The decision problem: how much isotropic noise must be mixed into a state
//! set before some convex combination of the given devices reproduces every
//! state exactly. Small families are solved as one dense LP in the natural
//! variables (v, device weights, conditional distributions). Large families
//! use a column-generation reformulation over deterministic device
//! strategies, which is exactly equivalent: the per-state conditionals of a
//! device factor into a product of simplices, whose extreme points are the
//! strategies, and pricing separates over states. Either route certifies its
//! optimum through LP duality; the column-generation gap adds the best
//! reduced cost over the unpooled strategies, which is valid because the
//! strategy masses sum to one.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{
    exp_i_hermitian, hermitian_to_real_vector, sample_haar_unitary, ComplexMatrix,
    HermitianOperator,
};
use crate::model::{r_subsets, ClassicalModel, Device};
use crate::solvers::lp::{solve_lp_with, LpConfig, LpProblem, LpSolution, LpStatus};
use crate::states::{Povm, StateSet};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Weight below which a device is dropped from the extracted model. Vertex
/// solutions are sparse; anything smaller than this is numerical dust.
const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SimulationResult {
    /// Largest visibility at which the devices reproduce the noisy set.
    pub visibility: f64,
    pub model: ClassicalModel,
    /// Max over states of the Frobenius reconstruction residual.
    pub residual: f64,
    /// Certified optimality gap from LP duality.
    pub gap: f64,
    /// Human-readable description of the device family and solve route.
    pub family: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    /// Reject families whose direct formulation would exceed this many
    /// variables.
    pub variable_cap: usize,
    /// Largest direct row count solved without column generation.
    pub direct_row_limit: usize,
    /// Reduced-cost threshold for admitting new strategy columns.
    pub price_tol: f64,
    /// Cap on column-generation rounds.
    pub max_rounds: usize,
    /// New columns admitted per round.
    pub batch: usize,
    pub lp: LpConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            variable_cap: 200_000,
            direct_row_limit: 800,
            price_tol: 1e-9,
            max_rounds: 5000,
            batch: 30,
            lp: LpConfig::default(),
        }
    }
}

fn check_family(set: &StateSet, devices: &[Device]) -> Result<()> {
    if devices.is_empty() {
        return Err(Error::Validation("empty device family".into()));
    }
    if let Some(dev) = devices.iter().find(|dev| dev.dim() != set.dim()) {
        return Err(Error::Dimension(format!(
            "device dimension {} does not match state dimension {}",
            dev.dim(),
            set.dim()
        )));
    }
    Ok(())
}

fn direct_var_count(set: &StateSet, devices: &[Device]) -> usize {
    let m = set.len();
    1 + devices.len() + m * devices.iter().map(Device::r).sum::<usize>()
}

/// Embedded target vectors: per state the coefficient vector of
/// v rho_x + (1 - v)/d I = sum p (projector), split into the v coefficient
/// (I/d - rho_x) and the right-hand side I/d.
struct Targets {
    dim: usize,
    len: usize,
    /// Per state, embedding of I/d - rho_x (the v column).
    v_coeff: Vec<Vec<f64>>,
    /// Embedding of I/d (right-hand side of every state block).
    rhs: Vec<f64>,
}

impl Targets {
    fn new(set: &StateSet) -> Self {
        let d = set.dim();
        let iso = HermitianOperator::identity(d).scale(1.0 / d as f64);
        let rhs = hermitian_to_real_vector(&iso);
        let v_coeff = set
            .states()
            .iter()
            .map(|rho| hermitian_to_real_vector(&iso.sub(rho.operator())))
            .collect();
        Targets { dim: d, len: set.len(), v_coeff, rhs }
    }

    fn block(&self) -> usize {
        self.dim * self.dim
    }
}

/// Embedded projectors of every device, indexed [device][subset position].
fn embedded_projectors(devices: &[Device]) -> Vec<Vec<Vec<f64>>> {
    devices
        .iter()
        .map(|dev| {
            (0..dev.r())
                .map(|k| hermitian_to_real_vector(&dev.projector(k)))
                .collect()
        })
        .collect()
}

/// Direct LP in the natural variables: column 0 is v, then one weight per
/// device, then the conditional masses grouped by device, state, outcome.
pub fn build_simulation_lp(set: &StateSet, devices: &[Device]) -> Result<LpProblem> {
    check_family(set, devices)?;
    let n_vars = direct_var_count(set, devices);
    let cfg = SimConfig::default();
    if n_vars > cfg.variable_cap {
        return Err(Error::SizeCap(format!(
            "direct formulation needs {n_vars} variables, cap is {}",
            cfg.variable_cap
        )));
    }
    let targets = Targets::new(set);
    let proj = embedded_projectors(devices);
    let (m, block, n_dev) = (targets.len, targets.block(), devices.len());

    let n_rows = m * block + m * n_dev + 1;
    let mut lp = LpProblem::new(n_rows, n_vars);

    // v column
    lp.set_objective(0, 1.0)?;
    lp.set_bounds(0, 0.0, 1.0)?;
    for x in 0..m {
        for (i, &c) in targets.v_coeff[x].iter().enumerate() {
            lp.push_entry(x * block + i, 0, c)?;
        }
    }
    // weight columns: consistency rows and normalization
    let consistency = |lambda: usize, x: usize| m * block + lambda * m + x;
    let norm_row = n_rows - 1;
    for lambda in 0..n_dev {
        for x in 0..m {
            lp.push_entry(consistency(lambda, x), 1 + lambda, -1.0)?;
        }
        lp.push_entry(norm_row, 1 + lambda, 1.0)?;
    }
    // conditional mass columns
    let mut col = 1 + n_dev;
    for (lambda, dev_proj) in proj.iter().enumerate() {
        for x in 0..m {
            for pk in dev_proj {
                for (i, &c) in pk.iter().enumerate() {
                    lp.push_entry(x * block + i, col, c)?;
                }
                lp.push_entry(consistency(lambda, x), col, 1.0)?;
                col += 1;
            }
        }
    }
    // right-hand sides
    for x in 0..m {
        for (i, &c) in targets.rhs.iter().enumerate() {
            lp.set_rhs(x * block + i, c)?;
        }
    }
    lp.set_rhs(norm_row, 1.0)?;
    Ok(lp)
}

fn lp_failure(status: LpStatus) -> Error {
    match status {
        LpStatus::Infeasible => Error::Solver(
            "no mixture of these devices reproduces the fully depolarized set; \
             the family cannot simulate at any visibility"
                .into(),
        ),
        _ => Error::Solver("simulation LP did not reach an optimal basis".into()),
    }
}

/// Cleans raw per-device conditionals into a valid model, dropping dust
/// weights and renormalizing against solver drift.
fn assemble_model(
    devices: &[Device],
    raw: Vec<(usize, f64, Vec<Vec<f64>>)>,
) -> Result<ClassicalModel> {
    let mut kept_devices = Vec::new();
    let mut weights = Vec::new();
    let mut cond = Vec::new();
    for (lambda, q, table) in raw {
        if q < SUPPORT_TOL {
            continue;
        }
        let mut rows = Vec::with_capacity(table.len());
        for row in table {
            let mut row: Vec<f64> = row.iter().map(|&p| p.max(0.0)).collect();
            let s: f64 = row.iter().sum();
            if s <= 0.0 {
                return Err(Error::Solver(format!(
                    "degenerate conditional row extracted for device {lambda}"
                )));
            }
            for p in &mut row {
                *p /= s;
            }
            rows.push(row);
        }
        kept_devices.push(devices[lambda].clone());
        weights.push(q);
        cond.push(rows);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    ClassicalModel::new(kept_devices, weights, cond)
}

fn reconstruction_residual(set: &StateSet, model: &ClassicalModel, v: f64) -> Result<f64> {
    let d = set.dim();
    let iso = (1.0 - v) / d as f64;
    let mut worst = 0.0f64;
    for (x, rho) in set.states().iter().enumerate() {
        let mut want = rho.matrix().scale_re(v);
        for i in 0..d {
            want[(i, i)] += Complex64::new(iso, 0.0);
        }
        let got = model.reconstruct(x)?;
        let resid = got.matrix().sub(&want).frobenius_norm();
        worst = worst.max(resid);
    }
    Ok(worst)
}

fn extract_direct(
    set: &StateSet,
    devices: &[Device],
    sol: &LpSolution,
) -> Result<ClassicalModel> {
    let m = set.len();
    let n_dev = devices.len();
    let mut raw = Vec::with_capacity(n_dev);
    let mut base = 1 + n_dev;
    for (lambda, dev) in devices.iter().enumerate() {
        let r = dev.r();
        // weight recovered from the x = 0 block; the consistency rows make
        // every block agree
        let q: f64 = (0..r).map(|k| sol.x[base + k]).sum();
        let table: Vec<Vec<f64>> = (0..m)
            .map(|x| (0..r).map(|k| sol.x[base + x * r + k] / q.max(SUPPORT_TOL)).collect())
            .collect();
        raw.push((lambda, q, table));
        base += m * r;
    }
    assemble_model(devices, raw)
}

fn solve_direct(
    set: &StateSet,
    devices: &[Device],
    cfg: &SimConfig,
) -> Result<(f64, ClassicalModel, f64)> {
    let lp = build_simulation_lp(set, devices)?;
    let sol = solve_lp_with(&lp, &cfg.lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(lp_failure(sol.status));
    }
    let model = extract_direct(set, devices, &sol)?;
    Ok((sol.x[0].clamp(0.0, 1.0), model, sol.duality_gap))
}

// ---------------------------------------------------------------------------
// column generation over deterministic strategies
// ---------------------------------------------------------------------------

/// One deterministic strategy of one device: for each state, which subset
/// position the device emits.
struct StratCol {
    dev: usize,
    gamma: Vec<u8>,
}

struct ColGen<'a> {
    targets: Targets,
    devices: &'a [Device],
    proj: Vec<Vec<Vec<f64>>>,
    pool: Vec<StratCol>,
    seen: HashSet<(usize, Vec<u8>)>,
}

impl<'a> ColGen<'a> {
    fn new(set: &StateSet, devices: &'a [Device]) -> Self {
        let targets = Targets::new(set);
        let proj = embedded_projectors(devices);
        let mut cg = ColGen { targets, devices, proj, pool: Vec::new(), seen: HashSet::new() };
        // Seed with the constant strategies of the leading devices that share
        // one basis: families built from full subset enumerations mix those
        // uniformly to the depolarized point, so the restricted master starts
        // feasible. Anything else is repaired by Farkas pricing below.
        let group = cg
            .devices
            .iter()
            .take_while(|dev| dev.basis().max_abs_diff(cg.devices[0].basis()) == 0.0)
            .count();
        for dev in 0..group {
            for k in 0..cg.devices[dev].r() {
                cg.push(dev, vec![k as u8; cg.targets.len]);
            }
        }
        cg
    }

    fn push(&mut self, dev: usize, gamma: Vec<u8>) -> bool {
        if self.seen.contains(&(dev, gamma.clone())) {
            return false;
        }
        self.seen.insert((dev, gamma.clone()));
        self.pool.push(StratCol { dev, gamma });
        true
    }

    fn master(&self) -> Result<LpProblem> {
        let (m, block) = (self.targets.len, self.targets.block());
        let n_rows = m * block + 1;
        let norm_row = n_rows - 1;
        let mut lp = LpProblem::new(n_rows, 1 + self.pool.len());
        lp.set_objective(0, 1.0)?;
        lp.set_bounds(0, 0.0, 1.0)?;
        for x in 0..m {
            for (i, &c) in self.targets.v_coeff[x].iter().enumerate() {
                lp.push_entry(x * block + i, 0, c)?;
            }
        }
        for (j, col) in self.pool.iter().enumerate() {
            for x in 0..m {
                let p = &self.proj[col.dev][col.gamma[x] as usize];
                for (i, &c) in p.iter().enumerate() {
                    lp.push_entry(x * block + i, 1 + j, c)?;
                }
            }
            lp.push_entry(norm_row, 1 + j, 1.0)?;
        }
        for x in 0..m {
            for (i, &c) in self.targets.rhs.iter().enumerate() {
                lp.set_rhs(x * block + i, c)?;
            }
        }
        lp.set_rhs(norm_row, 1.0)?;
        Ok(lp)
    }

    /// Best strategy per device against row prices y. With `maximize` false
    /// this is ordinary pricing (minimize y . column, improving when the
    /// result is below -tol); with true it prices a Farkas certificate.
    fn price(&self, y: &[f64], maximize: bool) -> Vec<(f64, usize, Vec<u8>)> {
        let (m, block) = (self.targets.len, self.targets.block());
        let y_norm = y[m * block];
        let mut scored = Vec::with_capacity(self.devices.len());
        for (dev, proj) in self.proj.iter().enumerate() {
            let mut gamma = Vec::with_capacity(m);
            let mut total = y_norm;
            for x in 0..m {
                let ys = &y[x * block..(x + 1) * block];
                let mut best_k = 0usize;
                let mut best: f64 = dot(&proj[0], ys);
                for (k, p) in proj.iter().enumerate().skip(1) {
                    let s = dot(p, ys);
                    if (maximize && s > best) || (!maximize && s < best) {
                        best = s;
                        best_k = k;
                    }
                }
                gamma.push(best_k as u8);
                total += best;
            }
            scored.push((total, dev, gamma));
        }
        scored
    }

    fn extract(&self, sol: &LpSolution) -> Result<ClassicalModel> {
        let m = self.targets.len;
        let n_dev = self.devices.len();
        let mut q = vec![0.0f64; n_dev];
        let mut mass: Vec<Vec<Vec<f64>>> = self
            .devices
            .iter()
            .map(|dev| vec![vec![0.0; dev.r()]; m])
            .collect();
        for (j, col) in self.pool.iter().enumerate() {
            let c = sol.x[1 + j];
            if c <= 0.0 {
                continue;
            }
            q[col.dev] += c;
            for x in 0..m {
                mass[col.dev][x][col.gamma[x] as usize] += c;
            }
        }
        let raw: Vec<(usize, f64, Vec<Vec<f64>>)> = (0..n_dev)
            .map(|dev| {
                let table = mass[dev]
                    .iter()
                    .map(|row| row.iter().map(|&p| p / q[dev].max(SUPPORT_TOL)).collect())
                    .collect();
                (dev, q[dev], table)
            })
            .collect();
        assemble_model(self.devices, raw)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn solve_colgen(
    set: &StateSet,
    devices: &[Device],
    cfg: &SimConfig,
) -> Result<(f64, ClassicalModel, f64, usize)> {
    let mut cg = ColGen::new(set, devices);
    for _round in 0..cfg.max_rounds {
        let lp = cg.master()?;
        let sol = solve_lp_with(&lp, &cfg.lp)?;
        match sol.status {
            LpStatus::Optimal => {
                let mut scored = cg.price(&sol.dual, false);
                // improvement = reduced cost of the device's best strategy
                scored.sort_by(|a, b| a.0.total_cmp(&b.0));
                let best_rc = -scored[0].0;
                if best_rc <= cfg.price_tol {
                    let model = cg.extract(&sol)?;
                    let gap = sol.duality_gap + best_rc.max(0.0);
                    return Ok((sol.x[0].clamp(0.0, 1.0), model, gap, cg.pool.len()));
                }
                let mut added = 0;
                for (score, dev, gamma) in scored {
                    if -score <= cfg.price_tol || added >= cfg.batch {
                        break;
                    }
                    if cg.push(dev, gamma) {
                        added += 1;
                    }
                }
                if added == 0 {
                    return Err(Error::Solver(
                        "column generation stalled: improving columns already pooled".into(),
                    ));
                }
            }
            LpStatus::Infeasible => {
                // Farkas repair: admit columns that cut the certificate.
                let mut scored = cg.price(&sol.dual, true);
                scored.sort_by(|a, b| b.0.total_cmp(&a.0));
                let mut added = 0;
                for (score, dev, gamma) in scored {
                    if score <= cfg.price_tol || added >= cfg.batch {
                        break;
                    }
                    if cg.push(dev, gamma) {
                        added += 1;
                    }
                }
                if added == 0 {
                    return Err(lp_failure(LpStatus::Infeasible));
                }
            }
            LpStatus::Unbounded => return Err(lp_failure(LpStatus::Unbounded)),
        }
    }
    Err(Error::Solver(format!(
        "column generation did not converge within {} rounds",
        cfg.max_rounds
    )))
}

pub fn simulate(set: &StateSet, devices: &[Device]) -> Result<SimulationResult> {
    simulate_with(set, devices, &SimConfig::default())
}

pub fn simulate_with(
    set: &StateSet,
    devices: &[Device],
    cfg: &SimConfig,
) -> Result<SimulationResult> {
    check_family(set, devices)?;
    let n_vars = direct_var_count(set, devices);
    if n_vars > cfg.variable_cap {
        return Err(Error::SizeCap(format!(
            "direct formulation needs {n_vars} variables, cap is {}",
            cfg.variable_cap
        )));
    }
    let block = set.dim() * set.dim();
    let direct_rows = set.len() * block + set.len() * devices.len() + 1;
    let (visibility, model, gap, family) = if direct_rows <= cfg.direct_row_limit {
        let (v, model, gap) = solve_direct(set, devices, cfg)?;
        let family = format!("{} devices, direct LP ({direct_rows} rows)", devices.len());
        (v, model, gap, family)
    } else {
        let (v, model, gap, pooled) = solve_colgen(set, devices, cfg)?;
        let family = format!(
            "{} devices, column generation ({} master rows, {pooled} strategies pooled)",
            devices.len(),
            set.len() * block + 1
        );
        (v, model, gap, family)
    };
    let residual = reconstruction_residual(set, &model, visibility)?;
    Ok(SimulationResult { visibility, model, residual, gap, family })
}

/// n Haar-random bases, each expanded to every size-r subset (or the single
/// full subset when r = d).
pub fn random_device_family(d: usize, r: usize, n: usize, seed: u64) -> Result<Vec<Device>> {
    if d < 2 {
        return Err(Error::Dimension("device families need d >= 2".into()));
    }
    if r < 1 || r > d {
        return Err(Error::Validation(format!("subset size {r} outside 1..={d}")));
    }
    if n < 1 {
        return Err(Error::Validation("need at least one unitary".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets = if r == d { vec![(0..d).collect::<Vec<_>>()] } else { r_subsets(d, r) };
    let mut devices = Vec::with_capacity(n * subsets.len());
    for _ in 0..n {
        let u = sample_haar_unitary(d, &mut rng)?;
        for mu in &subsets {
            devices.push(Device::new(u.clone(), mu.clone())?);
        }
    }
    Ok(devices)
}

/// Devices from explicit rank-one projective bases, expanded over subsets
/// like `random_device_family`.
pub fn devices_from_bases(bases: &[Povm], r: usize) -> Result<Vec<Device>> {
    if bases.is_empty() {
        return Err(Error::Validation("need at least one basis".into()));
    }
    let d = bases[0].dim();
    if r < 1 || r > d {
        return Err(Error::Validation(format!("subset size {r} outside 1..={d}")));
    }
    let subsets = if r == d { vec![(0..d).collect::<Vec<_>>()] } else { r_subsets(d, r) };
    let mut devices = Vec::new();
    for povm in bases {
        let mat = crate::analytic::basis_matrix_from_povm(povm)?;
        for mu in &subsets {
            devices.push(Device::new(mat.clone(), mu.clone())?);
        }
    }
    Ok(devices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineMode {
    /// Each device gets its own random perturbation.
    Independent,
    /// One common rotation A conjugates every basis, preserving the family's
    /// internal structure.
    GlobalRotation,
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Result<HermitianOperator> {
    let mut g = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            g[(i, j)] = Complex64::new(re, im);
        }
    }
    let h = HermitianOperator::symmetrize(g)?;
    let norm = h.frobenius_norm();
    if norm <= 0.0 {
        return Err(Error::Solver("degenerate random direction".into()));
    }
    Ok(h.scale(1.0 / norm))
}

fn perturb_family(
    devices: &[Device],
    step: f64,
    mode: RefineMode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Device>> {
    match mode {
        RefineMode::Independent => devices
            .iter()
            .map(|dev| {
                let h = random_hermitian(dev.dim(), rng)?;
                let rot = exp_i_hermitian(&h, step)?;
                Device::new(rot.mul(dev.basis()), dev.subset().to_vec())
            })
            .collect(),
        RefineMode::GlobalRotation => {
            let d = devices[0].dim();
            let h = random_hermitian(d, rng)?;
            let a = exp_i_hermitian(&h, step)?;
            let a_dag = a.adjoint();
            devices
                .iter()
                .map(|dev| {
                    Device::new(a.mul(dev.basis()).mul(&a_dag), dev.subset().to_vec())
                })
                .collect()
        }
    }
}

/// Random-perturbation hill climb over the device unitaries. Each round
/// perturbs the family, re-solves, and keeps the move only when the optimum
/// does not decrease, so the reported visibility is nondecreasing. An LP
/// failure mid-climb aborts with the best result found so far.
pub fn refine_devices(
    set: &StateSet,
    devices: &[Device],
    iterations: usize,
    step: f64,
    seed: u64,
    mode: RefineMode,
) -> Result<SimulationResult> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Validation(format!("perturbation step {step} must be positive")));
    }
    let mut current = devices.to_vec();
    let mut best = simulate(set, &current)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..iterations {
        let proposal = match perturb_family(&current, step, mode, &mut rng) {
            Ok(p) => p,
            Err(_) => break,
        };
        match simulate(set, &proposal) {
            Ok(res) => {
                if res.visibility >= best.visibility {
                    best = res;
                    current = proposal;
                }
            }
            Err(_) => {
                best.family.push_str(" (climb aborted on LP failure)");
                break;
            }
        }
    }
    Ok(best)
}

/// The two fixed qubit devices whose equal mixture reproduces the four
/// noisy key-distribution states at v = 1/sqrt(2).
pub fn bb84_devices() -> Vec<Device> {
    let c = (std::f64::consts::PI / 8.0).cos();
    let s = (std::f64::consts::PI / 8.0).sin();
    let re = |v: f64| Complex64::new(v, 0.0);
    let first = ComplexMatrix::from_rows(&[vec![re(c), re(-s)], vec![re(s), re(c)]]).unwrap();
    let second = ComplexMatrix::from_rows(&[vec![re(c), re(s)], vec![re(-s), re(c)]]).unwrap();
    vec![Device::full(first).unwrap(), Device::full(second).unwrap()]
}

/// The explicit two-device model for the noisy key-distribution states:
/// deterministic assignments, weight 1/2 each, exact at v = 1/sqrt(2).
pub fn bb84_model() -> ClassicalModel {
    let devices = bb84_devices();
    // state order "0", "1", "+", "-"
    let first = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    let second = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    ClassicalModel::new(devices, vec![0.5, 0.5], vec![first, second]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis_ket;
    use crate::states::{
        apply_isotropic_noise, gen_bb84, gen_mub_bases, gen_mub_states, DensityMatrix, NoiseSpec,
        StateSet,
    };

    const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn z_basis_device() -> Device {
        Device::full(ComplexMatrix::identity(2)).unwrap()
    }

    #[test]
    fn test_variable_and_row_counts() {
        let set = gen_bb84();
        let devices = bb84_devices();
        let lp = build_simulation_lp(&set, &devices).unwrap();
        assert_eq!(lp.n_cols(), 1 + 2 + 4 * 2 * 2);
        assert_eq!(lp.n_rows(), 4 * 4 + 4 * 2 + 1);
    }

    #[test]
    fn test_single_state_eigenbasis() {
        let rho = DensityMatrix::new(
            HermitianOperator::symmetrize(ComplexMatrix::from_rows(&[
                vec![Complex64::new(0.7, 0.0), Complex64::new(0.0, 0.0)],
                vec![Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.0)],
            ]).unwrap())
            .unwrap(),
        )
        .unwrap();
        let set = StateSet::new(vec![rho], vec!["rho".into()]).unwrap();
        let res = simulate(&set, &[z_basis_device()]).unwrap();
        assert!((res.visibility - 1.0).abs() <= 1e-9, "v = {}", res.visibility);
        assert!(res.residual <= 1e-7);
    }

    #[test]
    fn test_commuting_pair() {
        let set = StateSet::new(
            vec![
                DensityMatrix::from_pure(&basis_ket(2, 0)).unwrap(),
                DensityMatrix::from_pure(&basis_ket(2, 1)).unwrap(),
            ],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let res = simulate(&set, &[z_basis_device()]).unwrap();
        assert!((res.visibility - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn test_bb84_optimum() {
        let set = gen_bb84();
        let res = simulate(&set, &bb84_devices()).unwrap();
        assert!((res.visibility - INV_SQRT2).abs() <= 1e-6, "v = {}", res.visibility);
        assert!(res.residual <= 1e-7);
        assert!(res.gap <= 1e-7);
    }

    #[test]
    fn test_bb84_hardcoded_model() {
        let model = bb84_model();
        let set = apply_isotropic_noise(&gen_bb84(), NoiseSpec::new(INV_SQRT2).unwrap());
        for x in 0..4 {
            let resid = model
                .reconstruct(x)
                .unwrap()
                .matrix()
                .sub(set.states()[x].matrix())
                .frobenius_norm();
            assert!(resid <= 1e-12, "state {x}: {resid:.3e}");
        }
        let rho0 = model.reconstruct(0).unwrap();
        assert!((rho0.matrix()[(0, 0)].re - (1.0 + INV_SQRT2) / 2.0).abs() <= 1e-12);
        assert!((rho0.matrix()[(1, 1)].re - (1.0 - INV_SQRT2) / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn test_colgen_matches_direct() {
        let set = gen_bb84();
        let devices = bb84_devices();
        let cfg = SimConfig { direct_row_limit: 0, ..SimConfig::default() }; // force column generation
        let res = simulate_with(&set, &devices, &cfg).unwrap();
        assert!((res.visibility - INV_SQRT2).abs() <= 1e-6, "v = {}", res.visibility);
        assert!(res.residual <= 1e-7);
    }

    #[test]
    fn test_two_mub_full_devices() {
        let set = gen_mub_states(3, 2).unwrap();
        let bases: Vec<_> = gen_mub_bases(3).unwrap().into_iter().take(2).collect();
        let devices = devices_from_bases(&bases, 3).unwrap();
        assert_eq!(devices.len(), 2);
        let res = simulate(&set, &devices).unwrap();
        assert!(res.visibility >= 0.5 - 1e-9, "v = {}", res.visibility);
        assert!(res.residual <= 1e-7);
    }

    #[test]
    fn test_family_counts_and_determinism() {
        assert_eq!(random_device_family(3, 3, 10, 1).unwrap().len(), 10);
        assert_eq!(random_device_family(3, 2, 10, 1).unwrap().len(), 30);
        let a = random_device_family(2, 2, 3, 42).unwrap();
        let b = random_device_family(2, 2, 3, 42).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.basis().max_abs_diff(y.basis()) == 0.0);
        }
    }

    #[test]
    fn test_monotone_in_devices() {
        let set = gen_bb84();
        let small = random_device_family(2, 2, 3, 5).unwrap();
        let mut large = small.clone();
        large.extend(random_device_family(2, 2, 3, 6).unwrap());
        let v_small = simulate(&set, &small).unwrap().visibility;
        let v_large = simulate(&set, &large).unwrap().visibility;
        assert!(v_large >= v_small - 1e-7, "{v_large} < {v_small}");
    }

    #[test]
    fn test_subset_hierarchy() {
        let set = gen_bb84();
        let r1 = random_device_family(2, 1, 4, 9).unwrap();
        let r2 = random_device_family(2, 2, 4, 9).unwrap();
        let v1 = simulate(&set, &r1).unwrap().visibility;
        let v2 = simulate(&set, &r2).unwrap().visibility;
        assert!(v1 <= v2 + 1e-7, "{v1} > {v2}");
    }

    #[test]
    fn test_r1_distinct_pure_states() {
        let plus: Vec<Complex64> = vec![
            Complex64::new(INV_SQRT2, 0.0),
            Complex64::new(INV_SQRT2, 0.0),
        ];
        let set = StateSet::new(
            vec![
                DensityMatrix::from_pure(&basis_ket(2, 0)).unwrap(),
                DensityMatrix::from_pure(&plus).unwrap(),
            ],
            vec!["0".into(), "+".into()],
        )
        .unwrap();
        let devices = random_device_family(2, 1, 4, 3).unwrap();
        let res = simulate(&set, &devices).unwrap();
        assert!(res.visibility <= 1e-7, "v = {}", res.visibility);
    }

    #[test]
    fn test_infeasible_single_device() {
        // one device that always emits |0>: cannot produce the depolarized set
        let dev = Device::new(ComplexMatrix::identity(2), vec![0]).unwrap();
        let res = simulate(&gen_bb84(), &[dev]);
        assert!(matches!(res, Err(Error::Solver(_))));
    }

    #[test]
    fn test_size_cap() {
        let set = gen_bb84();
        let dev = Device::new(ComplexMatrix::identity(2), vec![0]).unwrap();
        let devices = vec![dev; 50_001];
        assert!(matches!(simulate(&set, &devices), Err(Error::SizeCap(_))));
    }

    #[test]
    fn test_refine_zero_iterations_matches_simulate() {
        let set = gen_bb84();
        let devices = random_device_family(2, 2, 2, 17).unwrap();
        let plain = simulate(&set, &devices).unwrap();
        let refined =
            refine_devices(&set, &devices, 0, 0.1, 17, RefineMode::Independent).unwrap();
        assert!((plain.visibility - refined.visibility).abs() <= 1e-12);
    }

    #[test]
    fn test_refine_is_monotone() {
        let set = gen_bb84();
        let devices = random_device_family(2, 2, 2, 21).unwrap();
        let base = simulate(&set, &devices).unwrap().visibility;
        for mode in [RefineMode::Independent, RefineMode::GlobalRotation] {
            let refined = refine_devices(&set, &devices, 4, 0.2, 23, mode).unwrap();
            assert!(refined.visibility >= base - 1e-12);
            assert!(refined.residual <= 1e-7);
        }
    }
}
