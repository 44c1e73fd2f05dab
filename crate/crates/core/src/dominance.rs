//! δ-dominance between classifiers under the empirical law.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{build_constraints, ConstraintSystem, DualSimplex, LinearProgram, LpSession, LpSolution, LpSolver, SolverConfig};
use crate::model::{build_system, reorient, PreferenceSystem, QualityTable, SystemOptions};
use crate::poset::covers_of_matrix;

/// `opt_ij >= -DECISION_TOL` counts as nonnegative.
pub const DECISION_TOL: f64 = 1e-8;

/// A witness refutes a pair only when it lies this far below zero.
const SCREEN_MARGIN: f64 = 1e-6;

/// Which quality vectors make up the element set of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolingScope {
    /// Each pair uses only its own attained vectors.
    Pairwise,
    /// All classifiers share one element set.
    All,
}

/// Per-classifier weights on the elements of a preference system, each
/// data set counting `1/s`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLaw {
    classifiers: Vec<String>,
    weights: Vec<Vec<(usize, f64)>>,
}

impl EmpiricalLaw {
    /// `assignments[c][d]` is the element hit by classifier `c` on data set `d`.
    pub fn from_assignments(classifiers: Vec<String>, assignments: &[Vec<usize>]) -> Self {
        let weights = assignments.iter().map(|a| counts_to_weights(a)).collect();
        Self { classifiers, weights }
    }

    pub fn classifiers(&self) -> &[String] {
        &self.classifiers
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.classifiers
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownClassifier(name.to_string()))
    }

    /// Sorted `(element, weight)` pairs of one classifier.
    pub fn weights(&self, classifier: usize) -> &[(usize, f64)] {
        &self.weights[classifier]
    }
}

fn counts_to_weights(hits: &[usize]) -> Vec<(usize, f64)> {
    let mut sorted = hits.to_vec();
    sorted.sort_unstable();
    let s = hits.len() as f64;
    let mut out: Vec<(usize, f64)> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&e| e == sorted[i]).count();
        out.push((sorted[i], j as f64 / s));
        i += j;
    }
    out
}

/// A preference system together with the law of the classifiers pooled in it.
#[derive(Debug, Clone)]
pub struct Pool {
    pub system: PreferenceSystem,
    pub law: EmpiricalLaw,
}

/// Pools the given classifiers of `table` (after reorientation).
pub fn pool(table: &QualityTable, classifiers: &[usize], options: &SystemOptions) -> Result<Pool> {
    let table = reorient(table);
    let vectors: Vec<_> = classifiers.iter().flat_map(|&c| table.vectors_of(c)).collect();
    let system = build_system(&vectors, table.criteria(), options)?;
    let assignments: Vec<Vec<usize>> = classifiers
        .iter()
        .map(|&c| {
            table
                .vectors_of(c)
                .iter()
                .map(|v| system.index_of(v).expect("pooled vector is an element"))
                .collect()
        })
        .collect();
    let names = classifiers.iter().map(|&c| table.classifiers()[c].clone()).collect();
    Ok(Pool {
        law: EmpiricalLaw::from_assignments(names, &assignments),
        system,
    })
}

/// Element coefficients `w_i(q) - w_j(q)`, sorted by element.
pub fn objective_between(law: &EmpiricalLaw, i: usize, j: usize) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = law.weights(i).to_vec();
    for &(e, w) in law.weights(j) {
        match out.binary_search_by_key(&e, |&(x, _)| x) {
            Ok(pos) => out[pos].1 -= w,
            Err(pos) => out.insert(pos, (e, -w)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

/// Objective row of the LP deciding whether `ci` dominates `cj`.
pub fn objective_for_pair(sys: &PreferenceSystem, law: &EmpiricalLaw, ci: &str, cj: &str) -> Result<Vec<(usize, f64)>> {
    let (i, j) = (law.index_of(ci)?, law.index_of(cj)?);
    let row = objective_between(law, i, j);
    debug_assert!(row.iter().all(|&(e, _)| e < sys.len()));
    Ok(row)
}

/// Outcome of one dominance LP.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceResult {
    pub pair: (String, String),
    pub delta: f64,
    pub opt: f64,
    /// Minimizing utility, one entry per element.
    pub certificate: Vec<f64>,
    pub verdict: bool,
}

/// The polytope at one threshold, ready for repeated objective solves.
pub struct Certifier {
    cs: ConstraintSystem,
    lp: LinearProgram,
    solver: Box<dyn LpSolver>,
}

impl Certifier {
    pub fn new(sys: &PreferenceSystem, delta: f64, config: &SolverConfig) -> Result<Self> {
        Self::with_solver(sys, delta, Box::new(DualSimplex::new(config.clone())))
    }

    pub fn with_solver(sys: &PreferenceSystem, delta: f64, solver: Box<dyn LpSolver>) -> Result<Self> {
        let cs = build_constraints(sys, delta)?;
        let lp = cs.to_lp();
        Ok(Self { cs, lp, solver })
    }

    pub fn constraints(&self) -> &ConstraintSystem {
        &self.cs
    }

    pub fn session(&self) -> CertifierSession<'_> {
        CertifierSession {
            cs: &self.cs,
            inner: self.solver.session(&self.lp),
        }
    }
}

/// Warm-started solves against one [`Certifier`].
pub struct CertifierSession<'a> {
    cs: &'a ConstraintSystem,
    inner: Box<dyn LpSession + 'a>,
}

impl CertifierSession<'_> {
    /// Minimizes the element objective. Infeasibility is an error because
    /// it means δ is above δ_max.
    pub fn solve(&mut self, objective: &[(usize, f64)]) -> Result<LpSolution> {
        let mut sol = self.inner.solve(&self.cs.objective_vars(objective))?;
        if !sol.is_optimal() {
            return Err(Error::DeltaInfeasible { delta: self.cs.delta() });
        }
        sol.vector = self.cs.element_utilities(&sol.vector);
        Ok(sol)
    }

    /// Optimal value only.
    pub fn opt(&mut self, objective: &[(usize, f64)]) -> Result<f64> {
        Ok(self.solve(objective)?.objective)
    }
}

pub fn check_dominance(sys: &PreferenceSystem, law: &EmpiricalLaw, ci: &str, cj: &str, delta: f64, config: &SolverConfig) -> Result<DominanceResult> {
    let objective = objective_for_pair(sys, law, ci, cj)?;
    let certifier = Certifier::new(sys, delta, config)?;
    let sol = certifier.session().solve(&objective)?;
    Ok(DominanceResult {
        pair: (ci.to_string(), cj.to_string()),
        delta,
        opt: sol.objective,
        verdict: sol.objective >= -DECISION_TOL,
        certificate: sol.vector,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceConfig {
    pub delta: f64,
    pub scope: PoolingScope,
    pub system: SystemOptions,
    pub solver: SolverConfig,
    /// Skip LPs for pairs already refuted by an earlier minimizer. Verdicts
    /// are unchanged; the skipped entries of [`DominanceOrder::opt`] are NaN.
    pub screen: bool,
}

impl Default for DominanceConfig {
    fn default() -> Self {
        Self {
            delta: 0.0,
            scope: PoolingScope::All,
            system: SystemOptions::default(),
            solver: SolverConfig::default(),
            screen: true,
        }
    }
}

/// The relation `>=_δ` on a set of classifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceOrder {
    pub classifiers: Vec<String>,
    /// `verdict[i][j]`: classifier i dominates classifier j.
    pub verdict: Vec<Vec<bool>>,
    /// `opt[i][j]` when computed by LP; NaN otherwise.
    pub opt: Vec<Vec<f64>>,
}

impl DominanceOrder {
    pub fn from_verdicts(classifiers: Vec<String>, verdict: Vec<Vec<bool>>) -> Self {
        let n = classifiers.len();
        Self {
            classifiers,
            verdict,
            opt: vec![vec![f64::NAN; n]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.classifiers
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownClassifier(name.to_string()))
    }

    pub fn dominates(&self, i: usize, j: usize) -> bool {
        self.verdict[i][j]
    }

    pub fn strictly_dominates(&self, i: usize, j: usize) -> bool {
        self.verdict[i][j] && !self.verdict[j][i]
    }

    pub fn incomparable(&self, i: usize, j: usize) -> bool {
        !self.verdict[i][j] && !self.verdict[j][i]
    }

    /// Strict edges `(i, j)` in index order.
    pub fn strict_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.strictly_dominates(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn strict_edge_names(&self) -> Vec<(String, String)> {
        let mut out: Vec<_> = self
            .strict_edges()
            .into_iter()
            .map(|(i, j)| (self.classifiers[i].clone(), self.classifiers[j].clone()))
            .collect();
        out.sort();
        out
    }

    /// Unordered incomparable pairs `(i, j)` with `i < j`.
    pub fn incomparable_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.incomparable(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// First triple violating transitivity, if any.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                if !self.verdict[a][b] {
                    continue;
                }
                for c in 0..n {
                    if self.verdict[b][c] && !self.verdict[a][c] {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    fn check_transitive(&self) -> Result<()> {
        match self.transitivity_violation() {
            None => Ok(()),
            Some((a, b, c)) => Err(Error::TransitivityViolation {
                a: self.classifiers[a].clone(),
                b: self.classifiers[b].clone(),
                c: self.classifiers[c].clone(),
            }),
        }
    }
}

/// Evaluates every ordered pair of classifiers of `table`.
///
/// Under [`PoolingScope::All`] the result is a preorder and a transitivity
/// failure is reported as an error. Pairwise pooling compares each pair on
/// its own element set, so transitivity is not guaranteed there.
pub fn full_order(table: &QualityTable, cfg: &DominanceConfig) -> Result<DominanceOrder> {
    let q = table.num_classifiers();
    let mut opt = vec![vec![0.0; q]; q];
    match cfg.scope {
        PoolingScope::All => {
            let all: Vec<usize> = (0..q).collect();
            let pooled = pool(table, &all, &cfg.system)?;
            let certifier = Certifier::new(&pooled.system, cfg.delta, &cfg.solver)?;
            let rows: Vec<Vec<f64>> = (0..q)
                .into_par_iter()
                .map_init(
                    || certifier.session(),
                    |session, i| {
                        // Any feasible utility bounds opt from above, so an
                        // earlier minimizer with a clearly negative difference
                        // settles a pair without another LP.
                        let mut witnesses: Vec<Vec<f64>> = Vec::new();
                        (0..q)
                            .map(|j| {
                                if i == j {
                                    return Ok(0.0);
                                }
                                let objective = objective_between(&pooled.law, i, j);
                                let refuted = cfg.screen
                                    && witnesses.iter().any(|u| objective.iter().map(|&(e, c)| c * u[e]).sum::<f64>() < -SCREEN_MARGIN);
                                if refuted {
                                    return Ok(f64::NAN);
                                }
                                let sol = session.solve(&objective)?;
                                witnesses.push(sol.vector);
                                Ok(sol.objective)
                            })
                            .collect::<Result<Vec<f64>>>()
                    },
                )
                .collect::<Result<_>>()?;
            opt = rows;
        }
        PoolingScope::Pairwise => {
            let pairs: Vec<(usize, usize)> = (0..q).flat_map(|i| (i + 1..q).map(move |j| (i, j))).collect();
            let values: Vec<(f64, f64)> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let pooled = pool(table, &[i, j], &cfg.system)?;
                    let certifier = Certifier::new(&pooled.system, cfg.delta, &cfg.solver)?;
                    let mut session = certifier.session();
                    let forward = session.opt(&objective_between(&pooled.law, 0, 1))?;
                    let backward = session.opt(&objective_between(&pooled.law, 1, 0))?;
                    Ok((forward, backward))
                })
                .collect::<Result<_>>()?;
            for (&(i, j), &(f, b)) in pairs.iter().zip(&values) {
                opt[i][j] = f;
                opt[j][i] = b;
            }
        }
    }
    let verdict = opt.iter().map(|row| row.iter().map(|&v| v >= -DECISION_TOL).collect()).collect();
    let order = DominanceOrder {
        classifiers: table.classifiers().to_vec(),
        verdict,
        opt,
    };
    if cfg.scope == PoolingScope::All {
        order.check_transitive()?;
    }
    Ok(order)
}

/// Hasse diagram of a preorder: indifference classes as nodes, covering
/// strict edges between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HasseDiagram {
    /// Members of each node, sorted; nodes sorted by their first member.
    pub nodes: Vec<Vec<String>>,
    /// `(upper, lower)` node indices, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl HasseDiagram {
    pub fn label(&self, node: usize) -> String {
        self.nodes[node].join(" ~ ")
    }

    pub fn edge_labels(&self) -> Vec<(String, String)> {
        self.edges.iter().map(|&(a, b)| (self.label(a), self.label(b))).collect()
    }
}

pub fn hasse(order: &DominanceOrder) -> Result<HasseDiagram> {
    order.check_transitive()?;
    let n = order.len();
    let mut class_of = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let class: Vec<usize> = (i..n).filter(|&j| j == i || (order.verdict[i][j] && order.verdict[j][i])).collect();
        for &j in &class {
            class_of[j] = members.len();
        }
        members.push(class);
    }
    let mut nodes: Vec<(Vec<String>, usize)> = members
        .iter()
        .map(|m| {
            let mut names: Vec<String> = m.iter().map(|&i| order.classifiers[i].clone()).collect();
            names.sort();
            (names, m[0])
        })
        .collect();
    nodes.sort();
    let k = nodes.len();
    let mut rel = vec![vec![false; k]; k];
    for a in 0..k {
        for b in 0..k {
            rel[a][b] = a != b && order.strictly_dominates(nodes[a].1, nodes[b].1);
        }
    }
    Ok(HasseDiagram {
        edges: covers_of_matrix(&rel),
        nodes: nodes.into_iter().map(|(names, _)| names).collect(),
    })
}
