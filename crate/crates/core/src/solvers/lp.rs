//! Revised simplex for dense linear programs of moderate size.
//!
//! Maximizes c'x subject to Ax = b and per-variable bounds. Columns are held
//! sparse because the simulation LPs are mostly zeros, but the basis is
//! factored dense (LU with partial pivoting, refreshed every
//! `refactor_interval` pivots with product-form eta updates in between).
//! Pricing is Dantzig by default and falls back to Bland's rule after a run
//! of degenerate pivots, which restores the anti-cycling guarantee exactly
//! when it is needed.
//!
//! Vertex solutions matter here: the callers read classical models off the
//! optimal basis, and a vertex keeps those models sparse.

// Factorization and residual kernels walk several parallel arrays at once;
// explicit indices keep the algebra legible there.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Maximize `objective . x` s.t. `A x = b`, `lower <= x <= upper`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    n_rows: usize,
    n_cols: usize,
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    c: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    /// Empty problem with all variables in [0, +inf) and zero objective.
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        LpProblem {
            n_rows,
            n_cols,
            cols: vec![Vec::new(); n_cols],
            b: vec![0.0; n_rows],
            c: vec![0.0; n_cols],
            lower: vec![0.0; n_cols],
            upper: vec![f64::INFINITY; n_cols],
        }
    }

    /// Builds from dense constraint rows.
    pub fn from_dense(rows: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<Self> {
        let m = rows.len();
        if b.len() != m {
            return Err(Error::Dimension("rhs length must match row count".into()));
        }
        let n = c.len();
        let mut p = LpProblem::new(m, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension("constraint row length mismatch".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    p.push_entry(i, j, v)?;
                }
            }
        }
        for (i, &v) in b.iter().enumerate() {
            p.set_rhs(i, v)?;
        }
        for (j, &v) in c.iter().enumerate() {
            p.set_objective(j, v)?;
        }
        Ok(p)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn push_entry(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::Dimension(format!("entry ({row}, {col}) out of range")));
        }
        if !value.is_finite() {
            return Err(Error::Validation("non-finite constraint coefficient".into()));
        }
        if value != 0.0 {
            self.cols[col].push((row, value));
        }
        Ok(())
    }

    pub fn set_rhs(&mut self, row: usize, value: f64) -> Result<()> {
        if row >= self.n_rows {
            return Err(Error::Dimension(format!("rhs row {row} out of range")));
        }
        if !value.is_finite() {
            return Err(Error::Validation("non-finite rhs".into()));
        }
        self.b[row] = value;
        Ok(())
    }

    pub fn set_objective(&mut self, col: usize, value: f64) -> Result<()> {
        if col >= self.n_cols {
            return Err(Error::Dimension(format!("objective column {col} out of range")));
        }
        if !value.is_finite() {
            return Err(Error::Validation("non-finite objective coefficient".into()));
        }
        self.c[col] = value;
        Ok(())
    }

    /// Lower may be finite or -inf; upper finite or +inf.
    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) -> Result<()> {
        if col >= self.n_cols {
            return Err(Error::Dimension(format!("bounds column {col} out of range")));
        }
        if lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::Validation("bounds must be ordered and non-NaN".into()));
        }
        if lower > upper {
            return Err(Error::Validation(format!(
                "empty bound interval [{lower}, {upper}] on column {col}"
            )));
        }
        self.lower[col] = lower;
        self.upper[col] = upper;
        Ok(())
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values (meaningful when Optimal; last iterate otherwise).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals; for infeasible problems these certify infeasibility.
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// max_i |(Ax - b)_i| at the returned point.
    pub primal_residual: f64,
    /// |dual bound - primal objective| at termination.
    pub duality_gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LpConfig {
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// Smallest pivot magnitude accepted in the ratio test.
    pub pivot_tol: f64,
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_trigger: usize,
    /// Hard iteration cap; 0 means pick from the problem size.
    pub max_iters: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            pivot_tol: 1e-10,
            refactor_interval: 50,
            bland_trigger: 200,
            max_iters: 0,
        }
    }
}

pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(p, &LpConfig::default())
}

pub fn solve_lp_with(p: &LpProblem, cfg: &LpConfig) -> Result<LpSolution> {
    Simplex::new(p, cfg)?.run()
}

// ---------------------------------------------------------------------------
// dense LU with partial pivoting
// ---------------------------------------------------------------------------

struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    swaps: Vec<usize>,
}

impl DenseLu {
    /// Factors the matrix whose columns are provided sparse.
    fn factor(n: usize, columns: &[&[(usize, f64)]]) -> Result<DenseLu> {
        assert_eq!(columns.len(), n);
        let mut a = vec![0.0; n * n];
        for (j, col) in columns.iter().enumerate() {
            for &(i, v) in *col {
                a[i * n + j] += v;
            }
        }
        let mut swaps = vec![0; n];
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].abs();
            for i in (k + 1)..n {
                let cand = a[i * n + k].abs();
                if cand > best {
                    best = cand;
                    piv = i;
                }
            }
            if best < 1e-13 {
                return Err(Error::Solver(format!(
                    "singular basis: pivot {best:.3e} at column {k}"
                )));
            }
            swaps[k] = piv;
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
            }
            let inv = 1.0 / a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] * inv;
                if f != 0.0 {
                    a[i * n + k] = f;
                    let (base_k, base_i) = (k * n, i * n);
                    for j in (k + 1)..n {
                        a[base_i + j] -= f * a[base_k + j];
                    }
                } else {
                    a[i * n + k] = 0.0;
                }
            }
        }
        Ok(DenseLu { n, lu: a, swaps })
    }

    /// Solves B x = v in place.
    fn solve(&self, v: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            v.swap(k, self.swaps[k]);
        }
        for i in 1..n {
            let mut acc = v[i];
            let base = i * n;
            for j in 0..i {
                acc -= self.lu[base + j] * v[j];
            }
            v[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = v[i];
            let base = i * n;
            for j in (i + 1)..n {
                acc -= self.lu[base + j] * v[j];
            }
            v[i] = acc / self.lu[base + i];
        }
    }

    /// Solves B' y = v in place.
    fn solve_transpose(&self, v: &mut [f64]) {
        let n = self.n;
        // U' z = v (forward)
        for i in 0..n {
            let mut acc = v[i];
            for j in 0..i {
                acc -= self.lu[j * n + i] * v[j];
            }
            v[i] = acc / self.lu[i * n + i];
        }
        // L' w = z (backward, unit diagonal)
        for i in (0..n).rev() {
            let mut acc = v[i];
            for j in (i + 1)..n {
                acc -= self.lu[j * n + i] * v[j];
            }
            v[i] = acc;
        }
        for k in (0..n).rev() {
            v.swap(k, self.swaps[k]);
        }
    }
}

// ---------------------------------------------------------------------------
// simplex core
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NbState {
    AtLower,
    AtUpper,
    /// Free variable resting at zero.
    AtZero,
    Basic,
}

struct Simplex<'a> {
    p: &'a LpProblem,
    cfg: LpConfig,
    n_struct: usize,
    n_total: usize, // structural + one artificial per row
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<NbState>,
    x: Vec<f64>,
    basis: Vec<usize>,
    lu: Option<DenseLu>,
    etas: Vec<(usize, Vec<f64>)>,
    pivots_since_factor: usize,
    iterations: usize,
    max_iters: usize,
    in_phase_one: bool,
}

impl<'a> Simplex<'a> {
    fn new(p: &'a LpProblem, cfg: &LpConfig) -> Result<Simplex<'a>> {
        let m = p.n_rows;
        let n = p.n_cols;
        if m == 0 {
            return Err(Error::Dimension("LP needs at least one constraint row".into()));
        }
        let max_iters = if cfg.max_iters > 0 {
            cfg.max_iters
        } else {
            20_000 + 40 * (m + n)
        };
        let mut lower = p.lower.clone();
        let mut upper = p.upper.clone();
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(f64::INFINITY, m));
        Ok(Simplex {
            p,
            cfg: *cfg,
            n_struct: n,
            n_total: n + m,
            art_sign: vec![1.0; m],
            lower,
            upper,
            state: vec![NbState::AtLower; n + m],
            x: vec![0.0; n + m],
            basis: Vec::new(),
            lu: None,
            etas: Vec::new(),
            pivots_since_factor: 0,
            iterations: 0,
            max_iters,
            in_phase_one: true,
        })
    }

    fn column_of(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n_struct {
            self.p.cols[j].clone()
        } else {
            vec![(j - self.n_struct, self.art_sign[j - self.n_struct])]
        }
    }

    fn cost_of(&self, j: usize) -> f64 {
        if self.in_phase_one {
            if j >= self.n_struct {
                -1.0
            } else {
                0.0
            }
        } else if j < self.n_struct {
            self.p.c[j]
        } else {
            0.0
        }
    }

    fn run(mut self) -> Result<LpSolution> {
        let m = self.p.n_rows;

        // Start all structural variables at a finite bound (zero for free ones)
        // and cover the residual with artificials.
        for j in 0..self.n_struct {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_finite() {
                self.state[j] = NbState::AtLower;
                self.x[j] = l;
            } else if u.is_finite() {
                self.state[j] = NbState::AtUpper;
                self.x[j] = u;
            } else {
                self.state[j] = NbState::AtZero;
                self.x[j] = 0.0;
            }
        }
        let mut resid = self.p.b.clone();
        for j in 0..self.n_struct {
            let xj = self.x[j];
            if xj != 0.0 {
                for &(i, v) in &self.p.cols[j] {
                    resid[i] -= v * xj;
                }
            }
        }
        self.basis = (self.n_struct..self.n_total).collect();
        for i in 0..m {
            let a = self.n_struct + i;
            self.art_sign[i] = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
            self.x[a] = resid[i].abs();
            self.state[a] = NbState::Basic;
        }
        self.refactor()?;

        // Phase 1: drive the artificial mass to zero.
        self.in_phase_one = true;
        let status1 = self.iterate()?;
        if status1 == LpStatus::Unbounded {
            return Err(Error::Solver(
                "phase-1 objective diverged; numerical breakdown".into(),
            ));
        }
        let infeas: f64 = (0..m).map(|i| self.x[self.n_struct + i]).sum();
        let b_scale = 1.0 + self.p.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if infeas > self.cfg.feas_tol * b_scale * 10.0 {
            let dual = self.duals();
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: self.x[..self.n_struct].to_vec(),
                objective: -infeas,
                dual,
                reduced_costs: Vec::new(),
                primal_residual: infeas,
                duality_gap: f64::INFINITY,
                iterations: self.iterations,
            });
        }

        // Freeze artificials and optimize the real objective.
        for i in 0..m {
            let a = self.n_struct + i;
            self.upper[a] = 0.0;
            if self.state[a] != NbState::Basic {
                self.state[a] = NbState::AtLower;
                self.x[a] = 0.0;
            }
        }
        self.in_phase_one = false;
        let status2 = self.iterate()?;
        if status2 == LpStatus::Unbounded {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: self.x[..self.n_struct].to_vec(),
                objective: f64::INFINITY,
                dual: vec![0.0; m],
                reduced_costs: Vec::new(),
                primal_residual: self.primal_residual(),
                duality_gap: f64::INFINITY,
                iterations: self.iterations,
            });
        }

        // Refresh the factorization so the reported point is tight.
        self.refactor()?;
        self.recompute_basics()?;
        let dual = self.duals();
        let mut reduced = vec![0.0; self.n_struct];
        for j in 0..self.n_struct {
            let mut rc = self.p.c[j];
            for &(i, v) in &self.p.cols[j] {
                rc -= dual[i] * v;
            }
            reduced[j] = rc;
        }
        let objective: f64 = (0..self.n_struct).map(|j| self.p.c[j] * self.x[j]).sum();

        // Dual bound: y'b plus the best each variable can contribute to its
        // clamped reduced cost within its bounds.
        let mut dual_bound: f64 = dual.iter().zip(&self.p.b).map(|(y, b)| y * b).sum();
        for j in 0..self.n_struct {
            let rc = reduced[j];
            if self.state[j] == NbState::Basic || rc.abs() <= self.cfg.opt_tol * 10.0 {
                continue;
            }
            if rc > 0.0 {
                let u = self.upper[j];
                dual_bound += if u.is_finite() { rc * u } else { f64::INFINITY };
            } else {
                let l = self.lower[j];
                dual_bound += if l.is_finite() { rc * l } else { f64::INFINITY };
            }
        }
        let duality_gap = (dual_bound - objective).abs();

        Ok(LpSolution {
            status: LpStatus::Optimal,
            x: self.x[..self.n_struct].to_vec(),
            objective,
            dual,
            reduced_costs: reduced,
            primal_residual: self.primal_residual(),
            duality_gap,
            iterations: self.iterations,
        })
    }

    /// Runs pricing/pivot cycles until optimal or unbounded for the current
    /// phase objective.
    fn iterate(&mut self) -> Result<LpStatus> {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iters {
                return Err(Error::Solver(format!(
                    "simplex iteration cap {} exceeded (degenerate run {degenerate_run})",
                    self.max_iters
                )));
            }
            if self.pivots_since_factor >= self.cfg.refactor_interval {
                self.refactor()?;
                self.recompute_basics()?;
            }

            let y = self.duals();
            let entering = self.price(&y, bland);
            let (j, dir) = match entering {
                Some(pair) => pair,
                None => return Ok(LpStatus::Optimal),
            };

            let col = self.column_of(j);
            let mut d = vec![0.0; self.p.n_rows];
            for &(i, v) in &col {
                d[i] += v;
            }
            self.ftran(&mut d);

            match self.ratio_test(j, dir, &d)? {
                Step::Unbounded => {
                    return if self.in_phase_one {
                        Err(Error::Solver("phase-1 ratio test found no blocker".into()))
                    } else {
                        Ok(LpStatus::Unbounded)
                    }
                }
                Step::BoundFlip { t } => {
                    self.apply_step(j, dir, t, &d);
                    self.state[j] = match self.state[j] {
                        NbState::AtLower => NbState::AtUpper,
                        NbState::AtUpper => NbState::AtLower,
                        s => s,
                    };
                    degenerate_run = 0;
                    bland = false;
                }
                Step::Pivot { slot, t, to_upper } => {
                    let leaving = self.basis[slot];
                    self.apply_step(j, dir, t, &d);
                    self.state[leaving] = if to_upper { NbState::AtUpper } else { NbState::AtLower };
                    self.x[leaving] = if to_upper {
                        self.upper[leaving]
                    } else {
                        self.lower[leaving]
                    };
                    self.state[j] = NbState::Basic;
                    self.basis[slot] = j;
                    self.etas.push((slot, d));
                    self.pivots_since_factor += 1;

                    if t <= self.cfg.feas_tol {
                        degenerate_run += 1;
                        if degenerate_run > self.cfg.bland_trigger {
                            bland = true;
                        }
                    } else {
                        degenerate_run = 0;
                        bland = false;
                    }
                }
            }
        }
    }

    /// Applies x_j += dir * t and the induced basic update x_B -= dir * t * d.
    fn apply_step(&mut self, j: usize, dir: f64, t: f64, d: &[f64]) {
        if t == 0.0 {
            return;
        }
        self.x[j] += dir * t;
        for (slot, &di) in d.iter().enumerate() {
            if di != 0.0 {
                let k = self.basis[slot];
                self.x[k] -= dir * t * di;
            }
        }
    }

    /// Chooses an entering variable and its direction (+1 up, -1 down).
    fn price(&self, y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, score)
        let limit = if self.in_phase_one { self.n_total } else { self.n_struct };
        for j in 0..limit {
            if self.state[j] == NbState::Basic {
                continue;
            }
            if self.lower[j] == self.upper[j] {
                continue; // fixed (frozen artificials)
            }
            let mut rc = self.cost_of(j);
            for &(i, v) in &self.column_of(j) {
                rc -= y[i] * v;
            }
            let dir = match self.state[j] {
                NbState::AtLower if rc > self.cfg.opt_tol => 1.0,
                NbState::AtUpper if rc < -self.cfg.opt_tol => -1.0,
                NbState::AtZero if rc > self.cfg.opt_tol => 1.0,
                NbState::AtZero if rc < -self.cfg.opt_tol => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = rc.abs();
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ratio_test(&self, j: usize, dir: f64, d: &[f64]) -> Result<Step> {
        let mut t_limit = f64::INFINITY;
        // Bound flip: the entering variable runs to its other bound.
        let span = self.upper[j] - self.lower[j];
        if span.is_finite() {
            t_limit = span;
        }

        // Harris-style two-pass: first find the loosest tolerance-relaxed
        // limit, then pick the largest pivot among near-ties.
        let slack = self.cfg.feas_tol;
        let mut t_relaxed = t_limit + slack;
        for (slot, &di) in d.iter().enumerate() {
            let rate = dir * di;
            if rate.abs() <= self.cfg.pivot_tol {
                continue;
            }
            let k = self.basis[slot];
            let room = if rate > 0.0 {
                self.x[k] - self.lower[k]
            } else {
                self.upper[k] - self.x[k]
            };
            if room.is_finite() {
                let t = (room.max(0.0) + slack) / rate.abs();
                if t < t_relaxed {
                    t_relaxed = t;
                }
            }
        }
        if t_relaxed == f64::INFINITY {
            return Ok(Step::Unbounded);
        }

        let mut choice: Option<(usize, f64, bool, f64)> = None; // slot, t, to_upper, |pivot|
        for (slot, &di) in d.iter().enumerate() {
            let rate = dir * di;
            if rate.abs() <= self.cfg.pivot_tol {
                continue;
            }
            let k = self.basis[slot];
            let (room, to_upper) = if rate > 0.0 {
                (self.x[k] - self.lower[k], false)
            } else {
                (self.upper[k] - self.x[k], true)
            };
            if !room.is_finite() {
                continue;
            }
            let t = room.max(0.0) / rate.abs();
            if t <= t_relaxed {
                let better = match choice {
                    None => true,
                    Some((_, _, _, piv)) => rate.abs() > piv,
                };
                if better {
                    choice = Some((slot, t, to_upper, rate.abs()));
                }
            }
        }

        match choice {
            Some((slot, t, to_upper, _)) if t <= t_limit => {
                Ok(Step::Pivot { slot, t: t.max(0.0), to_upper })
            }
            _ if t_limit.is_finite() => Ok(Step::BoundFlip { t: t_limit }),
            _ => Ok(Step::Unbounded),
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let cols: Vec<Vec<(usize, f64)>> =
            self.basis.iter().map(|&j| self.column_of(j)).collect();
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        self.lu = Some(DenseLu::factor(self.p.n_rows, &refs)?);
        self.etas.clear();
        self.pivots_since_factor = 0;
        Ok(())
    }

    /// x_B = B^-1 (b - N x_N), refreshing accumulated drift.
    fn recompute_basics(&mut self) -> Result<()> {
        let mut rhs = self.p.b.clone();
        for j in 0..self.n_total {
            if self.state[j] == NbState::Basic {
                continue;
            }
            let xj = self.x[j];
            if xj != 0.0 {
                for &(i, v) in &self.column_of(j) {
                    rhs[i] -= v * xj;
                }
            }
        }
        self.ftran(&mut rhs);
        for (&bj, &r) in self.basis.iter().zip(&rhs) {
            self.x[bj] = r;
        }
        Ok(())
    }

    fn ftran(&self, v: &mut [f64]) {
        self.lu.as_ref().expect("factorized").solve(v);
        for (slot, d) in &self.etas {
            let vr = v[*slot] / d[*slot];
            v[*slot] = vr;
            if vr != 0.0 {
                for (i, &di) in d.iter().enumerate() {
                    if i != *slot && di != 0.0 {
                        v[i] -= di * vr;
                    }
                }
            }
        }
    }

    fn btran(&self, v: &mut [f64]) {
        for (slot, d) in self.etas.iter().rev() {
            let mut acc = v[*slot];
            for (i, &di) in d.iter().enumerate() {
                if i != *slot && di != 0.0 {
                    acc -= di * v[i];
                }
            }
            v[*slot] = acc / d[*slot];
        }
        self.lu.as_ref().expect("factorized").solve_transpose(v);
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.p.n_rows;
        let mut cb = vec![0.0; m];
        for (c, &bj) in cb.iter_mut().zip(&self.basis) {
            *c = self.cost_of(bj);
        }
        self.btran(&mut cb);
        cb
    }

    fn primal_residual(&self) -> f64 {
        let mut resid = self.p.b.clone();
        for j in 0..self.n_struct {
            let xj = self.x[j];
            if xj != 0.0 {
                for &(i, v) in &self.p.cols[j] {
                    resid[i] -= v * xj;
                }
            }
        }
        // Artificials pinned at zero in phase 2 still absorb what they hold.
        for i in 0..self.p.n_rows {
            let a = self.n_struct + i;
            resid[i] -= self.art_sign[i] * self.x[a];
        }
        resid.iter().fold(0.0f64, |acc, &r| acc.max(r.abs()))
    }
}

enum Step {
    Pivot { slot: usize, t: f64, to_upper: bool },
    BoundFlip { t: f64 },
    Unbounded,
}
