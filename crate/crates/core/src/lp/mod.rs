//! Linear programming: the utility polytope and a deterministic simplex solver.

mod constraints;
mod simplex;

pub use constraints::{build_constraints, build_constraints_with, solve_max_delta, solve_min, ConstraintOptions, ConstraintSystem};
pub use simplex::DualSimplex;

use thiserror::Error;

/// Sense of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `coeffs . u >= rhs`
    GreaterEq,
    /// `coeffs . u == rhs`
    Equal,
}

/// One sparse constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: ConstraintKind,
    pub rhs: f64,
}

impl Row {
    pub fn dot(&self, u: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * u[v]).sum()
    }

    /// Amount by which `u` violates the row (zero when satisfied).
    pub fn violation(&self, u: &[f64]) -> f64 {
        let lhs = self.dot(u);
        match self.kind {
            ConstraintKind::GreaterEq => (self.rhs - lhs).max(0.0),
            ConstraintKind::Equal => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization problem over box-bounded variables. The objective is
/// supplied per solve so the same program can be reused.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    bounds: Vec<(f64, f64)>,
    rows: Vec<Row>,
}

impl LinearProgram {
    /// Program with `num_vars` variables, each bounded to `[lower, upper]`.
    pub fn new(num_vars: usize, lower: f64, upper: f64) -> Self {
        Self {
            bounds: vec![(lower, upper); num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        self.bounds[var]
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, kind: ConstraintKind, rhs: f64) {
        self.rows.push(Row { coeffs, kind, rhs });
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Largest violation of any row or bound by `u`.
    pub fn max_violation(&self, u: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(u));
        let bounds = self
            .bounds
            .iter()
            .zip(u)
            .map(|(&(lo, hi), &x)| (lo - x).max(x - hi).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal objective value; NaN unless `status` is optimal.
    pub objective: f64,
    /// Minimizer; empty unless `status` is optimal.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn infeasible() -> Self {
        Self {
            status: LpStatus::Infeasible,
            objective: f64::NAN,
            vector: Vec::new(),
            iterations: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("objective has {found} coefficients, program has {expected} variables")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable {var} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("simplex stopped after {iterations} iterations without converging")]
    IterationLimit { iterations: usize },
    #[error("basis matrix became numerically singular")]
    SingularBasis,
}

/// Entering-variable rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest index with negative reduced cost. Cycle-free, slow.
    Bland,
    /// Most negative reduced cost, switching to Bland after a run of
    /// degenerate pivots.
    DantzigWithBlandFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_iterations: usize,
    pub pivot_rule: PivotRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            max_iterations: 200_000,
            pivot_rule: PivotRule::DantzigWithBlandFallback,
        }
    }
}

/// Pluggable LP backend.
pub trait LpSolver: Send + Sync {
    fn solve(&self, lp: &LinearProgram, objective: &[f64]) -> Result<LpSolution, LpError>;

    /// Opens a session for solving `lp` under a sequence of objectives.
    /// Backends that can warm start override this; the default re-solves
    /// from scratch.
    fn session<'a>(&'a self, lp: &'a LinearProgram) -> Box<dyn LpSession + 'a> {
        Box::new(ColdSession { solver: self, lp })
    }
}

/// Repeated solves over one fixed constraint set.
pub trait LpSession {
    fn solve(&mut self, objective: &[f64]) -> Result<LpSolution, LpError>;
}

struct ColdSession<'a, S: LpSolver + ?Sized> {
    solver: &'a S,
    lp: &'a LinearProgram,
}

impl<S: LpSolver + ?Sized> LpSession for ColdSession<'_, S> {
    fn solve(&mut self, objective: &[f64]) -> Result<LpSolution, LpError> {
        self.solver.solve(self.lp, objective)
    }
}
