//! Revised simplex applied to the dual of a bounded minimization LP.
//!
//! The problems produced by the dominance check have few variables (one per
//! distinct quality vector) and many sparse rows. Working on the dual keeps
//! the basis at `num_free_vars x num_free_vars`, while every primal row turns
//! into a sparse dual column that is cheap to price. Because every primal
//! variable carries finite bounds, the bound rows alone form a feasible
//! starting basis for the dual, so no phase one is needed.
//!
//! The objective of the primal is the right-hand side of the dual. A basis
//! that was optimal for one objective therefore stays dual feasible for any
//! other one, and a session re-enters with a dual simplex phase on the kept
//! basis before finishing with primal pivots.
//!
//! Most primal rows never bind. Pivots therefore price only a working set
//! of columns (the bound columns, the start basis and the columns that
//! entered the cached basis when it was found), and a full pricing pass at
//! each apparent optimum adds the most violated remaining columns.

use super::{ConstraintKind, LinearProgram, LpError, LpSession, LpSolution, LpSolver, LpStatus, PivotRule, SolverConfig};

/// Deterministic simplex backend. Identical input and configuration always
/// produce bit-identical output.
#[derive(Debug, Clone, Default)]
pub struct DualSimplex {
    config: SolverConfig,
}

impl DualSimplex {
    pub fn new(config: SolverConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Session that keeps the last optimal basis between solves.
    pub fn warm_session<'a>(&'a self, lp: &'a LinearProgram) -> Result<WarmSession<'a>, LpError> {
        WarmSession::new(&self.config, lp)
    }
}

impl LpSolver for DualSimplex {
    fn solve(&self, lp: &LinearProgram, objective: &[f64]) -> Result<LpSolution, LpError> {
        self.warm_session(lp)?.solve(objective)
    }

    fn session<'a>(&'a self, lp: &'a LinearProgram) -> Box<dyn LpSession + 'a> {
        match self.warm_session(lp) {
            Ok(session) => Box::new(session),
            Err(err) => Box::new(FailedSession(err)),
        }
    }
}

struct FailedSession(LpError);

impl LpSession for FailedSession {
    fn solve(&mut self, _: &[f64]) -> Result<LpSolution, LpError> {
        Err(self.0.clone())
    }
}

/// Repeated solves over one constraint set.
///
/// Reduced costs of the dual do not depend on the objective, so every basis
/// that was optimal once stays dual feasible. The session keeps recent
/// optimal bases with their inverses; a new objective first tries the
/// cached vertex of least objective value, which is certified optimal
/// outright when its basic solution is nonnegative and otherwise serves as
/// the warm start.
pub struct WarmSession<'a> {
    config: &'a SolverConfig,
    lp: &'a LinearProgram,
    reduced: Reduced,
    cache: Vec<CachedBasis>,
    capacity: usize,
    /// Slot overwritten next once the cache is full.
    victim: usize,
}

struct CachedBasis {
    basis: Vec<usize>,
    binv: Vec<f64>,
    /// Primal values of the free variables at this basis.
    values: Vec<f64>,
    /// Working set the solve ended with.
    active: Vec<usize>,
}

/// Memory allowed for cached basis inverses per session.
const CACHE_BYTES: usize = 16 << 20;
const MAX_CACHED: usize = 64;

impl<'a> WarmSession<'a> {
    fn new(config: &'a SolverConfig, lp: &'a LinearProgram) -> Result<Self, LpError> {
        let reduced = Reduced::new(lp)?;
        let m = reduced.num_rows().max(1);
        let capacity = (CACHE_BYTES / (8 * m * m)).clamp(1, MAX_CACHED);
        Ok(Self {
            config,
            lp,
            reduced,
            cache: Vec::new(),
            capacity,
            victim: 0,
        })
    }

    fn solution(&self, objective: &[f64], free_values: &[f64], iterations: usize) -> LpSolution {
        let mut vector = self.reduced.fixed_values.clone();
        for (slot, &var) in self.reduced.free_vars.iter().enumerate() {
            let (lo, hi) = self.lp.bounds(var);
            vector[var] = free_values[slot].clamp(lo, hi);
        }
        let objective_value = objective.iter().zip(&vector).map(|(c, u)| c * u).sum();
        LpSolution {
            status: LpStatus::Optimal,
            objective: objective_value,
            vector,
            iterations,
        }
    }

    /// Cached basis whose vertex has the least value under `rhs`; the first
    /// one on ties.
    fn best_cached(&self, rhs: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, entry) in self.cache.iter().enumerate() {
            let v: f64 = entry.values.iter().zip(rhs).map(|(u, c)| u * c).sum();
            if best.is_none_or(|(_, bv)| v < bv) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }

    fn certifies(&self, entry: &CachedBasis, rhs: &[f64]) -> bool {
        let m = rhs.len();
        let tol = self.config.feasibility_tol;
        entry.binv.chunks_exact(m.max(1)).all(|row| row.iter().zip(rhs).map(|(b, c)| b * c).sum::<f64>() >= -tol)
    }

    fn remember(&mut self, entry: CachedBasis) {
        if self.cache.len() < self.capacity {
            self.cache.push(entry);
        } else {
            self.cache[self.victim] = entry;
            self.victim = (self.victim + 1) % self.capacity;
        }
    }
}

impl LpSession for WarmSession<'_> {
    fn solve(&mut self, objective: &[f64]) -> Result<LpSolution, LpError> {
        if objective.len() != self.lp.num_vars() {
            return Err(LpError::DimensionMismatch {
                expected: self.lp.num_vars(),
                found: objective.len(),
            });
        }
        if self.reduced.trivially_infeasible {
            return Ok(LpSolution::infeasible());
        }
        let mut rhs: Vec<f64> = self.reduced.free_vars.iter().map(|&v| objective[v]).collect();
        if rhs.iter().all(|&c| c == 0.0) {
            // Every feasible point is optimal, but all pivots would be
            // degenerate; any bounded objective yields such a point.
            rhs.fill(1.0);
        }
        let start = self.best_cached(&rhs);
        if let Some(i) = start {
            if self.certifies(&self.cache[i], &rhs) {
                return Ok(self.solution(objective, &self.cache[i].values, 0));
            }
        }
        let warm = match start {
            Some(i) => {
                let entry = &self.cache[i];
                let mut engine =
                    Engine::from_inverse(&self.reduced, rhs.clone(), self.config, &entry.basis, &entry.binv, &entry.active);
                match engine.restore_feasibility() {
                    Ok(true) => Some(engine),
                    _ => None,
                }
            }
            None => None,
        };
        let mut engine = match warm {
            Some(engine) => engine,
            None => Engine::cold(&self.reduced, rhs, self.config, &[]),
        };
        match engine.run()? {
            Outcome::Optimal => {
                let values = engine.primal_values();
                let sol = self.solution(objective, &values, engine.iterations);
                self.remember(CachedBasis {
                    basis: engine.basis,
                    binv: engine.binv,
                    values,
                    active: engine.entered,
                });
                Ok(sol)
            }
            Outcome::DualUnbounded => {
                // Emptiness of the primal does not depend on the objective.
                let iterations = engine.iterations;
                self.reduced.trivially_infeasible = true;
                Ok(LpSolution {
                    iterations,
                    ..LpSolution::infeasible()
                })
            }
        }
    }
}

/// Problem after fixed variables are substituted out, in dual column form.
struct Reduced {
    /// Original indices of the variables that stay in the problem.
    free_vars: Vec<usize>,
    /// Full-length vector holding the values of fixed variables (zero elsewhere).
    fixed_values: Vec<f64>,
    col_start: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    /// Dual cost of each column (`-b_k` for the primal row `a_k . u >= b_k`).
    cost: Vec<f64>,
    /// Index of the first column generated from a variable bound.
    first_bound_col: usize,
    trivially_infeasible: bool,
    /// Padded copy of the columns, `width` entries each; `width == 0` when
    /// some column is too long for it.
    width: usize,
    fixed_rows: Vec<u32>,
    fixed_vals: Vec<f64>,
}

impl Reduced {
    fn new(lp: &LinearProgram) -> Result<Self, LpError> {
        let n = lp.num_vars();
        let mut slot_of = vec![usize::MAX; n];
        let mut free_vars = Vec::new();
        let mut fixed_values = vec![0.0; n];
        for var in 0..n {
            let (lo, hi) = lp.bounds(var);
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(LpError::InvalidBounds { var, lower: lo, upper: hi });
            }
            if lo == hi {
                fixed_values[var] = lo;
            } else {
                slot_of[var] = free_vars.len();
                free_vars.push(var);
            }
        }
        let tol = 1e-9;
        let mut reduced = Reduced {
            free_vars,
            fixed_values,
            col_start: vec![0],
            col_rows: Vec::new(),
            col_vals: Vec::new(),
            cost: Vec::new(),
            first_bound_col: 0,
            trivially_infeasible: false,
            width: 0,
            fixed_rows: Vec::new(),
            fixed_vals: Vec::new(),
        };
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for row in lp.rows() {
            scratch.clear();
            let mut rhs = row.rhs;
            for &(var, coef) in &row.coeffs {
                if coef == 0.0 {
                    continue;
                }
                let slot = slot_of[var];
                if slot == usize::MAX {
                    rhs -= coef * reduced.fixed_values[var];
                } else {
                    scratch.push((slot, coef));
                }
            }
            merge_duplicates(&mut scratch);
            if scratch.is_empty() {
                let violated = match row.kind {
                    ConstraintKind::GreaterEq => rhs > tol,
                    ConstraintKind::Equal => rhs.abs() > tol,
                };
                if violated {
                    reduced.trivially_infeasible = true;
                }
                continue;
            }
            reduced.push_column(&scratch, 1.0, rhs);
            if row.kind == ConstraintKind::Equal {
                reduced.push_column(&scratch, -1.0, -rhs);
            }
        }
        reduced.first_bound_col = reduced.cost.len();
        for slot in 0..reduced.free_vars.len() {
            let (lo, hi) = lp.bounds(reduced.free_vars[slot]);
            reduced.push_column(&[(slot, 1.0)], 1.0, lo);
            reduced.push_column(&[(slot, 1.0)], -1.0, -hi);
        }
        reduced.build_fixed_width();
        Ok(reduced)
    }

    fn push_column(&mut self, entries: &[(usize, f64)], sign: f64, rhs: f64) {
        for &(slot, coef) in entries {
            self.col_rows.push(slot);
            self.col_vals.push(sign * coef);
        }
        self.col_start.push(self.col_rows.len());
        self.cost.push(-rhs);
    }

    fn num_rows(&self) -> usize {
        self.free_vars.len()
    }

    fn num_cols(&self) -> usize {
        self.cost.len()
    }

    #[inline]
    fn column(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[k]..self.col_start[k + 1];
        self.col_rows[range.clone()].iter().copied().zip(self.col_vals[range].iter().copied())
    }

    /// Copies the columns into a padded fixed-width layout when every
    /// column is short, which keeps full pricing passes tight.
    fn build_fixed_width(&mut self) {
        let width = (0..self.num_cols()).map(|k| self.col_start[k + 1] - self.col_start[k]).max().unwrap_or(0);
        if width == 0 || width > MAX_FIXED_WIDTH {
            return;
        }
        self.width = width;
        self.fixed_rows = vec![0; self.num_cols() * width];
        self.fixed_vals = vec![0.0; self.num_cols() * width];
        for k in 0..self.num_cols() {
            for (t, i) in (self.col_start[k]..self.col_start[k + 1]).enumerate() {
                self.fixed_rows[k * width + t] = self.col_rows[i] as u32;
                self.fixed_vals[k * width + t] = self.col_vals[i];
            }
        }
    }

    #[inline]
    fn dot(&self, k: usize, dense: &[f64]) -> f64 {
        let range = self.col_start[k]..self.col_start[k + 1];
        self.col_rows[range.clone()]
            .iter()
            .zip(&self.col_vals[range])
            .map(|(&r, &v)| dense[r] * v)
            .sum()
    }

    /// `out[k] = a_k . dense` for every column.
    fn products(&self, dense: &[f64], out: &mut [f64]) {
        match self.width {
            1 => self.products_fixed::<1>(dense, out),
            2 => self.products_fixed::<2>(dense, out),
            3 => self.products_fixed::<3>(dense, out),
            4 => self.products_fixed::<4>(dense, out),
            5 => self.products_fixed::<5>(dense, out),
            6 => self.products_fixed::<6>(dense, out),
            _ => out.iter_mut().enumerate().for_each(|(k, o)| *o = self.dot(k, dense)),
        }
    }

    fn products_fixed<const W: usize>(&self, dense: &[f64], out: &mut [f64]) {
        let cols = self.fixed_rows.chunks_exact(W).zip(self.fixed_vals.chunks_exact(W));
        for (o, (rows, vals)) in out.iter_mut().zip(cols) {
            let mut acc = 0.0;
            for t in 0..W {
                acc += dense[rows[t] as usize] * vals[t];
            }
            *o = acc;
        }
    }

    /// `out[k] = a_k . dense` for the columns in `cols`.
    fn products_on(&self, cols: &[usize], dense: &[f64], out: &mut [f64]) {
        match self.width {
            1 => self.products_on_fixed::<1>(cols, dense, out),
            2 => self.products_on_fixed::<2>(cols, dense, out),
            3 => self.products_on_fixed::<3>(cols, dense, out),
            4 => self.products_on_fixed::<4>(cols, dense, out),
            5 => self.products_on_fixed::<5>(cols, dense, out),
            6 => self.products_on_fixed::<6>(cols, dense, out),
            _ => cols.iter().for_each(|&k| out[k] = self.dot(k, dense)),
        }
    }

    fn products_on_fixed<const W: usize>(&self, cols: &[usize], dense: &[f64], out: &mut [f64]) {
        for &k in cols {
            let rows = &self.fixed_rows[k * W..(k + 1) * W];
            let vals = &self.fixed_vals[k * W..(k + 1) * W];
            let mut acc = 0.0;
            for t in 0..W {
                acc += dense[rows[t] as usize] * vals[t];
            }
            out[k] = acc;
        }
    }

    fn lower_bound_col(&self, slot: usize) -> usize {
        self.first_bound_col + 2 * slot
    }
}

fn merge_duplicates(entries: &mut Vec<(usize, f64)>) {
    entries.sort_by_key(|&(slot, _)| slot);
    let mut out = 0;
    for i in 0..entries.len() {
        if out > 0 && entries[out - 1].0 == entries[i].0 {
            entries[out - 1].1 += entries[i].1;
        } else {
            entries[out] = entries[i];
            out += 1;
        }
    }
    entries.truncate(out);
    entries.retain(|&(_, c)| c != 0.0);
}

enum Outcome {
    Optimal,
    DualUnbounded,
}

/// Simplex state over a working set of columns. Pivots price only the
/// working set; once it holds no entering column, a full pass over every
/// column either confirms optimality or adds the most violated columns.
struct Engine<'a> {
    problem: &'a Reduced,
    config: &'a SolverConfig,
    m: usize,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Dense row-major basis inverse, rows indexed by basis position.
    binv: Vec<f64>,
    x: Vec<f64>,
    pi: Vec<f64>,
    w: Vec<f64>,
    active: Vec<usize>,
    in_active: Vec<bool>,
    /// Columns that were basic at some point of this solve.
    entered: Vec<usize>,
    /// Reduced costs, kept up to date for active columns.
    d: Vec<f64>,
    /// Pivot row `e_r B^-1 A` of the current pivot, on active columns.
    alpha: Vec<f64>,
    rho: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    /// Pivots since the basic solution and costs were last recomputed.
    since_sync: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_INTERVAL: usize = 64;
const DEGENERATE_SWITCH: usize = 50;
const MAX_FIXED_WIDTH: usize = 6;
/// Columns added to the working set per full pricing pass, per basis row.
const ADD_PER_ROW: usize = 2;
const MIN_ADD: usize = 32;

impl<'a> Engine<'a> {
    fn blank(problem: &'a Reduced, rhs: Vec<f64>, config: &'a SolverConfig, basis: Vec<usize>, seed: &[usize]) -> Self {
        let m = problem.num_rows();
        let n = problem.num_cols();
        let mut is_basic = vec![false; n];
        for &col in &basis {
            is_basic[col] = true;
        }
        let entered = basis.clone();
        let mut in_active = vec![false; n];
        let mut active = Vec::with_capacity(seed.len() + 2 * m);
        for k in (problem.first_bound_col..n).chain(basis.iter().copied()).chain(seed.iter().copied()) {
            if !in_active[k] {
                in_active[k] = true;
                active.push(k);
            }
        }
        Self {
            problem,
            config,
            m,
            rhs,
            basis,
            is_basic,
            binv: vec![0.0; m * m],
            x: vec![0.0; m],
            pi: vec![0.0; m],
            w: vec![0.0; m],
            entered,
            active,
            in_active,
            d: vec![0.0; n],
            alpha: vec![0.0; n],
            rho: vec![0.0; m],
            iterations: 0,
            since_refactor: 0,
            since_sync: 0,
        }
    }

    fn cold(problem: &'a Reduced, rhs: Vec<f64>, config: &'a SolverConfig, seed: &[usize]) -> Self {
        let m = problem.num_rows();
        let basis = (0..m)
            .map(|slot| problem.lower_bound_col(slot) + usize::from(rhs[slot] < 0.0))
            .collect();
        let mut engine = Self::blank(problem, rhs, config, basis, seed);
        for slot in 0..m {
            let c = engine.rhs[slot];
            engine.binv[slot * m + slot] = if c >= 0.0 { 1.0 } else { -1.0 };
            engine.x[slot] = c.abs();
        }
        engine.refresh_costs();
        engine
    }

    /// Starts from a basis whose inverse is already known.
    fn from_inverse(
        problem: &'a Reduced,
        rhs: Vec<f64>,
        config: &'a SolverConfig,
        basis: &[usize],
        binv: &[f64],
        seed: &[usize],
    ) -> Self {
        let mut engine = Self::blank(problem, rhs, config, basis.to_vec(), seed);
        engine.binv.copy_from_slice(binv);
        let m = engine.m;
        for r in 0..m {
            engine.x[r] = engine.binv[r * m..(r + 1) * m].iter().zip(&engine.rhs).map(|(b, c)| b * c).sum();
        }
        engine.refresh_costs();
        engine
    }

    /// Recomputes `pi` and the reduced costs of the working set.
    fn refresh_costs(&mut self) {
        self.compute_pi();
        self.problem.products_on(&self.active, &self.pi, &mut self.d);
        for &k in &self.active {
            self.d[k] = self.problem.cost[k] - self.d[k];
        }
        for &col in &self.basis {
            self.d[col] = 0.0;
        }
    }

    /// Fills `alpha` with row `r` of `B^-1 A` on the working set.
    fn compute_pivot_row(&mut self, r: usize) {
        self.rho.copy_from_slice(&self.binv[r * self.m..(r + 1) * self.m]);
        self.problem.products_on(&self.active, &self.rho, &mut self.alpha);
    }

    /// Dual simplex phase: drives a dual-feasible basis back to primal
    /// feasibility. Returns false when it gives up, in which case the caller
    /// falls back to a cold start.
    fn restore_feasibility(&mut self) -> Result<bool, LpError> {
        let feas_tol = self.config.feasibility_tol;
        let dual_tol = self.config.optimality_tol;
        let limit = 50 * self.m + 1000;
        let mut pivots = 0usize;
        let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
        loop {
            if self.since_refactor >= REFACTOR_INTERVAL {
                self.refactor()?;
            }
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let v = self.x[r];
                if v < -feas_tol && leave.is_none_or(|(_, best)| v < best) {
                    leave = Some((r, v));
                }
            }
            let Some((r, xr)) = leave else {
                return Ok(true);
            };
            if pivots >= limit {
                return Ok(false);
            }
            self.compute_pivot_row(r);
            // Two-pass Harris test: bound the step with relaxed reduced
            // costs, then take the largest pivot within the bound.
            let mut bound = f64::INFINITY;
            candidates.clear();
            for &k in &self.active {
                let a = self.alpha[k];
                if a < -PIVOT_TOL && !self.is_basic[k] {
                    let d = self.d[k].max(0.0);
                    bound = bound.min((d + dual_tol) / -a);
                    candidates.push((k, d / -a, a));
                }
            }
            let mut entering: Option<(usize, f64)> = None;
            for &(k, ratio, a) in &candidates {
                if ratio <= bound && entering.is_none_or(|(_, best)| a < best) {
                    entering = Some((k, a));
                }
            }
            let Some((k, _)) = entering else {
                return Ok(false);
            };
            self.compute_column(k);
            if self.w[r].abs() <= PIVOT_TOL {
                return Ok(false);
            }
            let step = xr / self.w[r];
            self.pivot(r, k, step);
            pivots += 1;
            self.iterations += 1;
        }
    }

    fn run(&mut self) -> Result<Outcome, LpError> {
        let opt_tol = self.config.optimality_tol;
        let mut degenerate_streak = 0usize;
        loop {
            if self.since_refactor >= REFACTOR_INTERVAL {
                self.refactor()?;
            }
            let use_bland = match self.config.pivot_rule {
                PivotRule::Bland => true,
                PivotRule::DantzigWithBlandFallback => degenerate_streak >= DEGENERATE_SWITCH,
            };
            let Some(entering) = self.choose_entering(use_bland, opt_tol) else {
                if self.since_sync > 0 {
                    // Recheck against values recomputed from the inverse.
                    self.resync();
                    continue;
                }
                if self.extend_working_set(opt_tol) {
                    continue;
                }
                return Ok(Outcome::Optimal);
            };
            if self.iterations >= self.config.max_iterations {
                return Err(LpError::IterationLimit { iterations: self.iterations });
            }
            self.compute_column(entering);
            let Some((leave_row, step)) = self.ratio_test(use_bland) else {
                return Ok(Outcome::DualUnbounded);
            };
            if step <= 0.0 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.compute_pivot_row(leave_row);
            self.pivot(leave_row, entering, step);
            self.iterations += 1;
        }
    }

    /// Prices every column outside the working set and adds the most
    /// violated ones. Returns false when none has a negative reduced cost,
    /// that is when the current basis is optimal for the whole problem.
    fn extend_working_set(&mut self, tol: f64) -> bool {
        let n = self.problem.num_cols();
        if self.active.len() == n {
            return false;
        }
        let mut products = vec![0.0; n];
        self.problem.products(&self.pi, &mut products);
        let mut violated: Vec<(usize, f64)> = (0..n)
            .filter(|&k| !self.in_active[k])
            .map(|k| (k, self.problem.cost[k] - products[k]))
            .filter(|&(_, d)| d < -tol)
            .collect();
        if violated.is_empty() {
            return false;
        }
        let limit = (ADD_PER_ROW * self.m).max(MIN_ADD);
        let by_cost = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        if violated.len() > limit {
            violated.select_nth_unstable_by(limit, by_cost);
            violated.truncate(limit);
        }
        violated.sort_unstable_by(by_cost);
        for (k, d) in violated {
            self.in_active[k] = true;
            self.active.push(k);
            self.d[k] = d;
        }
        true
    }

    fn compute_pi(&mut self) {
        let m = self.m;
        self.pi.iter_mut().for_each(|p| *p = 0.0);
        for r in 0..m {
            let cb = self.problem.cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            for (p, b) in self.pi.iter_mut().zip(row) {
                *p += cb * b;
            }
        }
    }

    /// Entering column of the working set with negative reduced cost: the
    /// lowest index in Bland mode, the most negative one otherwise.
    fn choose_entering(&self, bland: bool, tol: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &k in &self.active {
            let d = self.d[k];
            if d >= -tol || self.is_basic[k] {
                continue;
            }
            let better = match best {
                None => true,
                Some((bk, bd)) => {
                    if bland {
                        k < bk
                    } else {
                        d < bd
                    }
                }
            };
            if better {
                best = Some((k, d));
            }
        }
        best.map(|(k, _)| k)
    }

    fn compute_column(&mut self, k: usize) {
        let m = self.m;
        self.w.iter_mut().for_each(|v| *v = 0.0);
        for (row, v) in self.problem.column(k) {
            for r in 0..m {
                self.w[r] += self.binv[r * m + row] * v;
            }
        }
    }

    /// Leaving row for the primal step. Bland mode takes the smallest basis
    /// index among exact ties; otherwise a two-pass Harris test prefers the
    /// largest pivot among rows whose ratio is within the feasibility
    /// tolerance of the minimum.
    fn ratio_test(&self, bland: bool) -> Option<(usize, f64)> {
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let wr = self.w[r];
                if wr <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.x[r].max(0.0) / wr;
                match best {
                    None => best = Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if (tie && self.basis[r] < self.basis[br]) || (!tie && ratio < bratio) {
                            best = Some((r, ratio));
                        }
                    }
                }
            }
            return best;
        }
        let tol = self.config.feasibility_tol;
        let mut bound = f64::INFINITY;
        for r in 0..self.m {
            let wr = self.w[r];
            if wr > PIVOT_TOL {
                bound = bound.min((self.x[r].max(0.0) + tol) / wr);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.m {
            let wr = self.w[r];
            if wr > PIVOT_TOL && self.x[r].max(0.0) / wr <= bound && best.is_none_or(|(br, _)| wr > self.w[br]) {
                best = Some((r, wr));
            }
        }
        best.map(|(r, wr)| (r, self.x[r].max(0.0) / wr))
    }

    /// Exchanges the basic column at `leave_row` for `entering`. `alpha`
    /// must hold the pivot row computed before the exchange.
    fn pivot(&mut self, leave_row: usize, entering: usize, step: f64) {
        let m = self.m;
        for r in 0..m {
            if r != leave_row {
                self.x[r] -= step * self.w[r];
            }
        }
        self.x[leave_row] = step;
        let pivot = self.w[leave_row];
        let (before, rest) = self.binv.split_at_mut(leave_row * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        pivot_row.iter_mut().for_each(|v| *v /= pivot);
        let w = &self.w;
        let eliminate = |r: usize, row: &mut [f64]| {
            let factor = w[r];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * p;
                }
            }
        };
        for (r, row) in before.chunks_mut(m).enumerate() {
            eliminate(r, row);
        }
        for (offset, row) in after.chunks_mut(m).enumerate() {
            eliminate(leave_row + 1 + offset, row);
        }
        let leaving = self.basis[leave_row];
        let theta = self.d[entering] / self.alpha[entering];
        if theta != 0.0 {
            for &k in &self.active {
                self.d[k] -= theta * self.alpha[k];
            }
        }
        self.d[entering] = 0.0;
        self.d[leaving] = -theta;
        // pi moves along the old pivot row of the basis inverse.
        for (p, r) in self.pi.iter_mut().zip(&self.rho) {
            *p += theta * r;
        }
        self.is_basic[leaving] = false;
        self.is_basic[entering] = true;
        self.basis[leave_row] = entering;
        self.entered.push(entering);
        self.since_refactor += 1;
        self.since_sync += 1;
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination with partial
    /// pivoting and recomputes the basic solution and reduced costs.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (c, &col) in self.basis.iter().enumerate() {
            for (row, v) in self.problem.column(col) {
                a[row * m + c] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut p = c;
            let mut best = a[c * m + c].abs();
            for r in c + 1..m {
                let v = a[r * m + c].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < 1e-12 {
                return Err(LpError::SingularBasis);
            }
            if p != c {
                for j in 0..m {
                    a.swap(p * m + j, c * m + j);
                    inv.swap(p * m + j, c * m + j);
                }
            }
            let d = a[c * m + c];
            for j in 0..m {
                a[c * m + j] /= d;
                inv[c * m + j] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for j in 0..m {
                    a[r * m + j] -= f * a[c * m + j];
                    inv[r * m + j] -= f * inv[c * m + j];
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        self.resync();
        Ok(())
    }

    /// Recomputes the basic solution, `pi` and reduced costs from the
    /// current inverse.
    fn resync(&mut self) {
        let m = self.m;
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[r] = row.iter().zip(&self.rhs).map(|(b, c)| b * c).sum();
        }
        self.since_sync = 0;
        self.refresh_costs();
    }

    fn primal_values(&self) -> Vec<f64> {
        self.pi.iter().map(|p| -p).collect()
    }
}
