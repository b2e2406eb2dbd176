//! Linear witnesses and their certified classical bounds.
//!
//! A witness is a real functional of measured statistics. Its classical
//! bound is the best value any classical model can reach, which splits over
//! deterministic input-output strategies; each strategy's value is bounded
//! from above by a small SDP over one basis-projector family, so the overall
//! maximum certifies non-classicality of anything exceeding it. For qubits
//! with sign-form coefficients the strategy optimum collapses to a largest
//! eigenvalue and no relaxation is involved.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, HermitianOperator};
use crate::states::{Povm, StateSet};

/// Plain enumeration refuses families larger than this; symmetry reduction
/// or a custom cap in `BoundConfig` lifts it.
pub const DEFAULT_STRATEGY_CAP: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct Witness {
    dim: usize,
    measurements: Vec<Povm>,
    /// Indexed [outcome b][state x][measurement y].
    coefficients: Vec<Vec<Vec<f64>>>,
}

impl Witness {
    pub fn new(measurements: Vec<Povm>, coefficients: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if measurements.is_empty() {
            return Err(Error::Validation("witness needs at least one measurement".into()));
        }
        let dim = measurements[0].dim();
        if measurements.iter().any(|p| p.dim() != dim) {
            return Err(Error::Dimension("measurements of mixed dimension".into()));
        }
        let n_b = measurements[0].n_outcomes();
        if measurements.iter().any(|p| p.n_outcomes() != n_b) {
            return Err(Error::Validation(
                "coefficient tensor needs a uniform outcome count across measurements".into(),
            ));
        }
        let n_y = measurements.len();
        if coefficients.len() != n_b {
            return Err(Error::Validation(format!(
                "coefficient tensor has {} outcome slices, measurements have {n_b} outcomes",
                coefficients.len()
            )));
        }
        let m = coefficients
            .first()
            .map(|slice| slice.len())
            .ok_or_else(|| Error::Validation("empty coefficient tensor".into()))?;
        if m == 0 {
            return Err(Error::Validation("witness needs at least one state".into()));
        }
        for slice in &coefficients {
            if slice.len() != m {
                return Err(Error::Validation("ragged coefficient tensor".into()));
            }
            for row in slice {
                if row.len() != n_y {
                    return Err(Error::Validation("ragged coefficient tensor".into()));
                }
                if row.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Validation("non-finite witness coefficient".into()));
                }
            }
        }
        Ok(Witness { dim, measurements, coefficients })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of states the witness addresses.
    pub fn n_states(&self) -> usize {
        self.coefficients[0].len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.coefficients.len()
    }

    pub fn measurements(&self) -> &[Povm] {
        &self.measurements
    }

    pub fn coefficients(&self) -> &[Vec<Vec<f64>>] {
        &self.coefficients
    }
}

/// Value of the witness on a state set.
pub fn evaluate(w: &Witness, set: &StateSet) -> Result<f64> {
    if set.dim() != w.dim() {
        return Err(Error::Dimension("witness and set dimension differ".into()));
    }
    if set.len() != w.n_states() {
        return Err(Error::Validation(format!(
            "witness addresses {} states, set has {}",
            w.n_states(),
            set.len()
        )));
    }
    let mut total = 0.0;
    for (b, slice) in w.coefficients.iter().enumerate() {
        for (x, row) in slice.iter().enumerate() {
            for (y, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    let effect = &w.measurements[y].effects()[b];
                    total += c * set.states()[x].operator().hs_inner(effect);
                }
            }
        }
    }
    Ok(total)
}

/// Per-state operators O_x = sum_{b,y} c_{bxy} M_{b|y}; the witness value is
/// sum_x tr(rho_x O_x).
pub fn reduced_operators(w: &Witness) -> Vec<HermitianOperator> {
    let m = w.n_states();
    (0..m)
        .map(|x| {
            let mut op = HermitianOperator::zeros(w.dim);
            for (b, slice) in w.coefficients.iter().enumerate() {
                for (y, &c) in slice[x].iter().enumerate() {
                    if c != 0.0 {
                        op = op.add(&w.measurements[y].effects()[b].scale(c));
                    }
                }
            }
            op
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    /// For each state index, which output index the strategy announces.
    pub assignment: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(assignment: Vec<usize>, d: usize) -> Result<Self> {
        if assignment.iter().any(|&v| v >= d) {
            return Err(Error::Validation(format!("strategy value outside 0..{d}")));
        }
        Ok(DeterministicStrategy { assignment })
    }
}

/// Lexicographic iterator over assignments, optionally reduced to one
/// representative per relabeling orbit (restricted growth strings: position
/// p may use at most one value beyond everything before it).
pub struct StrategyIter {
    d: usize,
    reduce: bool,
    current: Option<Vec<usize>>,
}

impl Iterator for StrategyIter {
    type Item = DeterministicStrategy;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.current.take()?;
        let out = DeterministicStrategy { assignment: cur.clone() };
        self.current = self.advance(cur);
        Some(out)
    }
}

impl StrategyIter {
    fn limit(&self, prefix: &[usize]) -> usize {
        if !self.reduce {
            return self.d - 1;
        }
        let max_seen = prefix.iter().copied().max().map_or(0, |v| v + 1);
        max_seen.min(self.d - 1)
    }

    fn advance(&self, mut cur: Vec<usize>) -> Option<Vec<usize>> {
        let m = cur.len();
        for p in (0..m).rev() {
            if cur[p] < self.limit(&cur[..p]) {
                cur[p] += 1;
                cur[p + 1..].fill(0);
                return Some(cur);
            }
        }
        None
    }
}

/// Number of strategies the iterator will yield.
pub fn count_strategies(m: usize, d: usize, symmetry_reduce: bool) -> u128 {
    if !symmetry_reduce {
        return (d as u128).pow(m as u32);
    }
    // partitions of m states into at most d labeled-in-order classes:
    // dp[k] = number of restricted growth prefixes currently using k values
    let mut dp = vec![0u128; d + 1];
    dp[0] = 1;
    for _ in 0..m {
        let mut next = vec![0u128; d + 1];
        for k in 0..=d {
            if dp[k] == 0 {
                continue;
            }
            next[k] += dp[k] * k as u128;
            if k < d {
                next[k + 1] += dp[k];
            }
        }
        dp = next;
    }
    dp.iter().skip(1).sum()
}

pub fn enumerate_strategies(m: usize, d: usize, symmetry_reduce: bool) -> Result<StrategyIter> {
    enumerate_strategies_capped(m, d, symmetry_reduce, DEFAULT_STRATEGY_CAP)
}

fn enumerate_strategies_capped(
    m: usize,
    d: usize,
    symmetry_reduce: bool,
    cap: usize,
) -> Result<StrategyIter> {
    if m == 0 || d == 0 {
        return Err(Error::Validation("strategies need m >= 1 and d >= 1".into()));
    }
    let count = count_strategies(m, d, symmetry_reduce);
    if count > cap as u128 {
        let hint = if symmetry_reduce {
            "raise the strategy cap"
        } else {
            "enable symmetry reduction or raise the strategy cap"
        };
        return Err(Error::SizeCap(format!(
            "{count} strategies for m = {m}, d = {d} exceeds the cap of {cap}; {hint}"
        )));
    }
    Ok(StrategyIter { d, reduce: symmetry_reduce, current: Some(vec![0; m]) })
}

fn diag_component(d: usize, j: usize) -> HermitianOperator {
    let mut m = crate::linalg::ComplexMatrix::zeros(d, d);
    m[(j, j)] = num_complex::Complex64::new(1.0, 0.0);
    HermitianOperator::new(m).expect("diagonal component")
}

fn offdiag_component(d: usize, j: usize, k: usize, imaginary: bool) -> HermitianOperator {
    let mut m = crate::linalg::ComplexMatrix::zeros(d, d);
    if imaginary {
        m[(j, k)] = num_complex::Complex64::new(0.0, -1.0);
        m[(k, j)] = num_complex::Complex64::new(0.0, 1.0);
    } else {
        m[(j, k)] = num_complex::Complex64::new(1.0, 0.0);
        m[(k, j)] = num_complex::Complex64::new(1.0, 0.0);
    }
    HermitianOperator::new(m).expect("off-diagonal component")
}

/// Upper bound on one strategy's witness value: maximize
/// sum_i tr(Q_i E_i) with Q_i the summed reduced operators of the states
/// mapped to output i, over unit-trace PSD blocks E_i resolving the
/// identity. Returns the optimum and the solver's absolute gap estimate.
pub fn strategy_bound_sdp(w: &Witness, gamma: &DeterministicStrategy) -> Result<(f64, f64)> {
    let ops = reduced_operators(w);
    strategy_bound_sdp_inner(w.dim(), &ops, gamma)
}

fn strategy_bound_sdp_inner(
    d: usize,
    ops: &[HermitianOperator],
    gamma: &DeterministicStrategy,
) -> Result<(f64, f64)> {
    use crate::solvers::sdp::{solve_sdp, SdpConstraint, SdpProblem};
    if gamma.assignment.len() != ops.len() {
        return Err(Error::Validation(format!(
            "strategy covers {} states, witness has {}",
            gamma.assignment.len(),
            ops.len()
        )));
    }
    if gamma.assignment.iter().any(|&i| i >= d) {
        return Err(Error::Validation("strategy output outside 0..d".into()));
    }
    let mut prob = SdpProblem::new(vec![d; d])?;
    for i in 0..d {
        let mut q = HermitianOperator::zeros(d);
        for (x, &ix) in gamma.assignment.iter().enumerate() {
            if ix == i {
                q = q.add(&ops[x]);
            }
        }
        prob.set_objective(i, q)?;
    }
    // unit traces
    for i in 0..d {
        prob.add_constraint(SdpConstraint {
            terms: vec![(i, HermitianOperator::identity(d))],
            rhs: 1.0,
        })?;
    }
    // blocks resolve the identity, one Hermitian component per row; the last
    // diagonal row is implied by the traces and must be dropped to keep the
    // rows independent
    let mut basis = Vec::new();
    for j in 0..d.saturating_sub(1) {
        basis.push((diag_component(d, j), 1.0));
    }
    for j in 0..d {
        for k in j + 1..d {
            basis.push((offdiag_component(d, j, k, false), 0.0));
            basis.push((offdiag_component(d, j, k, true), 0.0));
        }
    }
    for (f, rhs) in basis {
        prob.add_constraint(SdpConstraint {
            terms: (0..d).map(|i| (i, f.clone())).collect(),
            rhs,
        })?;
    }
    let sol = solve_sdp(&prob).map_err(|e| {
        Error::Solver(format!("strategy {:?}: {e}", gamma.assignment))
    })?;
    let gap = sol.relative_gap * sol.objective.abs().max(1.0);
    Ok((sol.objective, gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundMethod {
    SdpRelaxation,
    QubitExact,
}

#[derive(Debug, Clone)]
pub struct WitnessBound {
    /// Certified upper bound on the classical value.
    pub beta: f64,
    pub method: BoundMethod,
    pub strategies_evaluated: usize,
    pub argmax: DeterministicStrategy,
    /// Reported slack: tolerance stacking plus the worst per-strategy gap.
    pub uncertainty: f64,
    /// Per-strategy values in enumeration order, when retained.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BoundConfig {
    pub symmetry_reduce: bool,
    pub strategy_cap: usize,
    pub retain_values: bool,
    /// Progress file written after every chunk; an existing file resumes.
    pub checkpoint: Option<PathBuf>,
    pub chunk: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            symmetry_reduce: false,
            strategy_cap: DEFAULT_STRATEGY_CAP,
            retain_values: false,
            checkpoint: None,
            chunk: 1000,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    m: usize,
    d: usize,
    next: usize,
    evaluated: usize,
    beta: f64,
    argmax: Vec<usize>,
    max_gap: f64,
}

fn load_checkpoint(path: &Path, m: usize, d: usize) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    let cp: Checkpoint = serde_json::from_str(&text)?;
    if cp.m != m || cp.d != d {
        return Err(Error::Validation(format!(
            "checkpoint at {} was written for m = {}, d = {}; this run has m = {m}, d = {d}",
            path.display(),
            cp.m,
            cp.d
        )));
    }
    Ok(Some(cp))
}

pub fn classical_bound(w: &Witness, symmetry_reduce: bool) -> Result<WitnessBound> {
    classical_bound_with(
        w,
        &BoundConfig { symmetry_reduce, ..BoundConfig::default() },
    )
}

/// Maximum of the per-strategy SDP bounds. Strategies inside a chunk run in
/// parallel; the running maximum is folded in enumeration order with a
/// lowest-index tie-break, so the result does not depend on scheduling.
pub fn classical_bound_with(w: &Witness, cfg: &BoundConfig) -> Result<WitnessBound> {
    let d = w.dim();
    let m = w.n_states();
    let ops = reduced_operators(w);
    let mut iter =
        enumerate_strategies_capped(m, d, cfg.symmetry_reduce, cfg.strategy_cap)?;

    let mut best = f64::NEG_INFINITY;
    let mut argmax: Option<Vec<usize>> = None;
    let mut evaluated = 0usize;
    let mut max_gap = 0.0f64;
    let mut skip = 0usize;
    if let Some(path) = &cfg.checkpoint {
        if let Some(cp) = load_checkpoint(path, m, d)? {
            best = cp.beta;
            argmax = Some(cp.argmax);
            evaluated = cp.evaluated;
            max_gap = cp.max_gap;
            skip = cp.next;
        }
    }
    for _ in 0..skip {
        if iter.next().is_none() {
            break;
        }
    }
    let mut values = if cfg.retain_values && skip == 0 { Some(Vec::new()) } else { None };

    let mut index = skip;
    loop {
        let chunk: Vec<DeterministicStrategy> =
            iter.by_ref().take(cfg.chunk.max(1)).collect();
        if chunk.is_empty() {
            break;
        }
        let results: Vec<Result<(f64, f64)>> = chunk
            .par_iter()
            .map(|gamma| strategy_bound_sdp_inner(d, &ops, gamma))
            .collect();
        for (gamma, res) in chunk.iter().zip(results) {
            let (g, gap) = res?;
            if let Some(vs) = values.as_mut() {
                vs.push(g);
            }
            max_gap = max_gap.max(gap);
            if g > best {
                best = g;
                argmax = Some(gamma.assignment.clone());
            }
            evaluated += 1;
        }
        index += chunk.len();
        if let Some(path) = &cfg.checkpoint {
            let cp = Checkpoint {
                m,
                d,
                next: index,
                evaluated,
                beta: best,
                argmax: argmax.clone().unwrap_or_default(),
                max_gap,
            };
            std::fs::write(path, serde_json::to_string(&cp).expect("checkpoint"))?;
        }
    }
    let argmax = argmax.ok_or_else(|| Error::Solver("no strategies evaluated".into()))?;
    Ok(WitnessBound {
        beta: best,
        method: BoundMethod::SdpRelaxation,
        strategies_evaluated: evaluated,
        argmax: DeterministicStrategy { assignment: argmax },
        uncertainty: 1e-6 + max_gap,
        values,
    })
}

fn projective_qubit_difference(povm: &Povm) -> Result<HermitianOperator> {
    if povm.dim() != 2 {
        return Err(Error::Dimension("exact bound needs qubit measurements".into()));
    }
    if povm.n_outcomes() != 2 {
        return Err(Error::Validation("exact bound needs two-outcome measurements".into()));
    }
    for effect in povm.effects() {
        let tr = effect.trace();
        let purity = effect.hs_inner(effect);
        if (tr - 1.0).abs() > 1e-9 || (purity - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(
                "exact bound needs rank-one projective measurements".into(),
            ));
        }
    }
    Ok(povm.effects()[0].sub(&povm.effects()[1]))
}

/// Exact classical bound for qubit sign witnesses c_{bxy} = (-1)^b s_{xy}:
/// enumerate the 2^m sign patterns and take the largest eigenvalue of the
/// signed sum of effect differences. No relaxation.
pub fn qubit_exact_bound(s: &[Vec<f64>], bases: &[Povm]) -> Result<WitnessBound> {
    let m = s.len();
    if m == 0 {
        return Err(Error::Validation("empty coefficient matrix".into()));
    }
    let n_y = bases.len();
    if s.iter().any(|row| row.len() != n_y) {
        return Err(Error::Validation("coefficient matrix does not match measurements".into()));
    }
    let diffs: Vec<HermitianOperator> =
        bases.iter().map(projective_qubit_difference).collect::<Result<_>>()?;
    if m >= 63 || (1usize << m) > DEFAULT_STRATEGY_CAP {
        return Err(Error::SizeCap(format!(
            "2^{m} sign patterns exceed the cap of {DEFAULT_STRATEGY_CAP}"
        )));
    }
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0usize;
    for a in 0..(1usize << m) {
        let mut h = HermitianOperator::zeros(2);
        for (y, diff) in diffs.iter().enumerate() {
            let mut t = 0.0;
            for (x, row) in s.iter().enumerate() {
                let sign = if a >> x & 1 == 1 { -1.0 } else { 1.0 };
                t += sign * row[y];
            }
            if t != 0.0 {
                h = h.add(&diff.scale(t));
            }
        }
        let eig = eig_hermitian(&h)?;
        let top = *eig.values.last().expect("qubit eigenvalues");
        if top > best {
            best = top;
            arg = a;
        }
    }
    let assignment = (0..m).map(|x| arg >> x & 1).collect();
    Ok(WitnessBound {
        beta: best,
        method: BoundMethod::QubitExact,
        strategies_evaluated: 1 << m,
        argmax: DeterministicStrategy { assignment },
        uncertainty: 1e-12,
        values: None,
    })
}

/// Witness with c_{bxy} = (-1)^b s_{xy} over two-outcome measurements, the
/// form the exact qubit bound addresses.
pub fn sign_witness(s: &[Vec<f64>], bases: &[Povm]) -> Result<Witness> {
    let plus = s.to_vec();
    let minus = s.iter().map(|row| row.iter().map(|&c| -c).collect()).collect();
    Witness::new(bases.to_vec(), vec![plus, minus])
}

/// The qutrit witness family: one point per (basis j, outcome k) pair,
/// scoring the probability of outcome k when measuring basis j on the state
/// labeled (j, k). The noiseless targets reach 3N by construction.
pub fn mub_witness(n_bases: usize) -> Result<Witness> {
    if !(1..=4).contains(&n_bases) {
        return Err(Error::Unsupported(format!(
            "witness family covers 1 to 4 qutrit bases, got {n_bases}"
        )));
    }
    let bases: Vec<Povm> =
        crate::states::gen_mub_bases(3)?.into_iter().take(n_bases).collect();
    let m = 3 * n_bases;
    let mut coefficients = vec![vec![vec![0.0; n_bases]; m]; 3];
    for j in 0..n_bases {
        for k in 0..3 {
            coefficients[k][j * 3 + k][j] = 1.0;
        }
    }
    Witness::new(bases, coefficients)
}

/// Visibility where the noisy witness value crosses the classical bound:
/// the witness is linear in v, so the crossing is a single division.
pub fn critical_visibility(w: &Witness, target: &StateSet, beta: f64) -> Result<f64> {
    let w_target = evaluate(w, target)?;
    let ops = reduced_operators(w);
    let w_mixed: f64 = ops.iter().map(|op| op.trace() / w.dim() as f64).sum();
    if w_target <= w_mixed {
        return Err(Error::Validation(format!(
            "target value {w_target} does not exceed the depolarized value {w_mixed}"
        )));
    }
    if beta < w_mixed - 1e-12 || beta > w_target + 1e-12 {
        return Err(Error::Validation(format!(
            "bound {beta} outside [{w_mixed}, {w_target}]: no crossing in [0, 1]"
        )));
    }
    Ok(((beta - w_mixed) / (w_target - w_mixed)).clamp(0.0, 1.0))
}

/// Relabeling a strategy by any output permutation, for the invariance
/// checks that justify symmetry reduction.
pub fn relabel(gamma: &DeterministicStrategy, perm: &[usize]) -> Result<DeterministicStrategy> {
    let d = perm.len();
    let distinct: HashSet<_> = perm.iter().collect();
    if distinct.len() != d || perm.iter().any(|&p| p >= d) {
        return Err(Error::Validation("not a permutation".into()));
    }
    DeterministicStrategy::new(
        gamma.assignment.iter().map(|&v| perm[v]).collect(),
        d,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{apply_isotropic_noise, gen_mub_bases, gen_mub_states, NoiseSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn test_evaluate_mub_witness() {
        let w = mub_witness(2).unwrap();
        let target = gen_mub_states(3, 2).unwrap();
        assert!((evaluate(&w, &target).unwrap() - 6.0).abs() < 1e-12);
        let mixed = apply_isotropic_noise(&target, NoiseSpec::new(0.0).unwrap());
        assert!((evaluate(&w, &mixed).unwrap() - 2.0).abs() < 1e-12);
        let half = apply_isotropic_noise(&target, NoiseSpec::new(0.5).unwrap());
        assert!((evaluate(&w, &half).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn test_reduced_operators_mub() {
        let w = mub_witness(2).unwrap();
        let ops = reduced_operators(&w);
        let bases = gen_mub_bases(3).unwrap();
        for j in 0..2 {
            for k in 0..3 {
                let diff = ops[j * 3 + k].sub(&bases[j].effects()[k]).frobenius_norm();
                assert!(diff < 1e-15);
            }
        }
        let zero = Witness::new(
            w.measurements().to_vec(),
            vec![vec![vec![0.0; 2]; 6]; 3],
        )
        .unwrap();
        for op in reduced_operators(&zero) {
            assert_eq!(op.frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn test_enumerate_strategies() {
        let all: Vec<_> = enumerate_strategies(2, 2, false).unwrap().collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].assignment, vec![0, 0]);
        assert_eq!(all[3].assignment, vec![1, 1]);
        assert_eq!(enumerate_strategies(6, 3, false).unwrap().count(), 729);
        let reduced: Vec<_> = enumerate_strategies(2, 2, true).unwrap().collect();
        assert_eq!(
            reduced.iter().map(|g| g.assignment.clone()).collect::<Vec<_>>(),
            vec![vec![0, 0], vec![0, 1]]
        );
        assert_eq!(count_strategies(9, 3, true), 3281);
        assert_eq!(
            enumerate_strategies(9, 3, true).unwrap().count() as u128,
            count_strategies(9, 3, true)
        );
        assert!(matches!(
            enumerate_strategies(20, 3, false),
            Err(Error::SizeCap(_))
        ));
    }

    #[test]
    fn test_strategy_bound_simple() {
        // zero witness
        let bases = gen_mub_bases(2).unwrap();
        let w = Witness::new(bases.clone(), vec![vec![vec![0.0; 3]; 2]; 2]).unwrap();
        let gamma = DeterministicStrategy::new(vec![0, 1], 2).unwrap();
        let (g, _) = strategy_bound_sdp(&w, &gamma).unwrap();
        assert!(g.abs() <= 1e-6, "g = {g}");

        // single state, Z measurement, coefficient picking the |0> effect
        let mut c = vec![vec![vec![0.0; 1]; 1]; 2];
        c[0][0][0] = 1.0;
        let w = Witness::new(vec![bases[0].clone()], c).unwrap();
        let gamma = DeterministicStrategy::new(vec![0], 2).unwrap();
        let (g, _) = strategy_bound_sdp(&w, &gamma).unwrap();
        assert!((g - 1.0).abs() <= 1e-6, "g = {g}");
    }

    #[test]
    fn test_qubit_exact_values() {
        let bases: Vec<Povm> = gen_mub_bases(2).unwrap().into_iter().take(2).collect();
        let s = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let bound = qubit_exact_bound(&s, &bases).unwrap();
        assert!((bound.beta - std::f64::consts::SQRT_2).abs() <= 1e-12);

        let single = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        let bound = qubit_exact_bound(&single, &bases).unwrap();
        assert!((bound.beta - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn test_qubit_sdp_matches_exact() {
        let bases: Vec<Povm> = gen_mub_bases(2).unwrap().into_iter().take(2).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..10 {
            let s: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let exact = qubit_exact_bound(&s, &bases).unwrap().beta;
            let w = sign_witness(&s, &bases).unwrap();
            let sdp = classical_bound(&w, false).unwrap().beta;
            assert!((exact - sdp).abs() <= 1e-6, "trial {trial}: {exact} vs {sdp}");
        }
    }

    #[test]
    fn test_relabeling_invariance() {
        let w = mub_witness(2).unwrap();
        let gamma = DeterministicStrategy::new(vec![0, 1, 2, 1, 0, 2], 3).unwrap();
        let (g, _) = strategy_bound_sdp(&w, &gamma).unwrap();
        for perm in [[1, 2, 0], [2, 0, 1], [0, 2, 1]] {
            let relabeled = relabel(&gamma, &perm).unwrap();
            let (g2, _) = strategy_bound_sdp(&w, &relabeled).unwrap();
            assert!((g - g2).abs() <= 2e-6, "{g} vs {g2} under {perm:?}");
        }
    }

    #[test]
    fn test_shift_invariance() {
        let bases: Vec<Povm> = gen_mub_bases(2).unwrap().into_iter().take(2).collect();
        let s = vec![vec![0.7, -0.3], vec![0.2, 0.9]];
        let w = sign_witness(&s, &bases).unwrap();
        let beta = classical_bound(&w, false).unwrap().beta;

        // add a constant to every outcome of (x, y) = (0, 1)
        let shift = 0.45;
        let mut c = w.coefficients().to_vec();
        c[0][0][1] += shift;
        c[1][0][1] += shift;
        let shifted = Witness::new(bases, c).unwrap();
        let beta_shifted = classical_bound(&shifted, false).unwrap().beta;
        assert!((beta_shifted - beta - shift).abs() <= 1e-6, "{beta_shifted} vs {beta}");

        let plus: Vec<num_complex::Complex64> = vec![
            num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ];
        let set = crate::states::StateSet::new(
            vec![
                crate::states::DensityMatrix::from_pure(&crate::linalg::basis_ket(2, 0)).unwrap(),
                crate::states::DensityMatrix::from_pure(&plus).unwrap(),
            ],
            vec!["0".into(), "+".into()],
        )
        .unwrap();
        let before = evaluate(&w, &set).unwrap();
        let after = evaluate(&shifted, &set).unwrap();
        assert!((after - before - shift).abs() <= 1e-12);
    }

    #[test]
    fn test_classical_bound_mub2() {
        let w = mub_witness(2).unwrap();
        let bound = classical_bound(&w, true).unwrap();
        assert!((bound.beta - 4.6667).abs() <= 1e-3, "beta = {}", bound.beta);
        assert_eq!(bound.strategies_evaluated as u128, count_strategies(6, 3, true));
        // plain enumeration agrees
        let plain = classical_bound(&w, false).unwrap();
        assert!((plain.beta - bound.beta).abs() <= 2e-6);
    }

    #[test]
    fn test_critical_visibility() {
        let w = mub_witness(2).unwrap();
        let target = gen_mub_states(3, 2).unwrap();
        let v = critical_visibility(&w, &target, 4.6667).unwrap();
        assert!((v - 0.6667).abs() <= 1e-3, "v = {v}");
        let at_target = critical_visibility(&w, &target, 6.0).unwrap();
        assert!((at_target - 1.0).abs() <= 1e-12);
        assert!(critical_visibility(&w, &target, 7.0).is_err());
        assert!(critical_visibility(&w, &target, 1.0).is_err());
    }

    #[test]
    fn test_checkpoint_resume() {
        let dir = std::env::temp_dir().join("classim-witness-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bound.json");
        let _ = std::fs::remove_file(&path);

        let w = mub_witness(2).unwrap();
        let cfg = BoundConfig {
            symmetry_reduce: true,
            checkpoint: Some(path.clone()),
            chunk: 40,
            ..BoundConfig::default()
        };
        let full = classical_bound_with(&w, &cfg).unwrap();

        // simulate an interrupted run: rewind the checkpoint halfway
        let text = std::fs::read_to_string(&path).unwrap();
        let mut cp: serde_json::Value = serde_json::from_str(&text).unwrap();
        cp["next"] = serde_json::json!(40);
        cp["evaluated"] = serde_json::json!(40);
        cp["beta"] = serde_json::json!(0.0);
        std::fs::write(&path, cp.to_string()).unwrap();
        let resumed = classical_bound_with(&w, &cfg).unwrap();
        // the rewound prefix is not re-evaluated, but the maximum lives in
        // the tail, so the value must match
        assert!((resumed.beta - full.beta).abs() <= 2e-6);
        let _ = std::fs::remove_file(&path);
    }
}
