//! The polytope of normalized utilities with δ-gapped strict preferences.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::{ConstraintKind, LinearProgram, LpSolution, LpSolver};
use crate::error::{Error, Result};
use crate::model::PreferenceSystem;
use crate::poset::covers;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintOptions {
    /// Keep only covering pairs of the strict parts. Disabling this emits
    /// one row per related pair and is meant for small systems and tests.
    pub prune: bool,
}

impl Default for ConstraintOptions {
    fn default() -> Self {
        Self { prune: true }
    }
}

/// Constraints over one variable per class of elements that are forced to
/// share a utility value. Gap rows read `row . u >= delta`, equality rows
/// read `row . u = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    var_of: Vec<usize>,
    num_vars: usize,
    bottom_var: usize,
    top_var: usize,
    gap_rows: Vec<Vec<(usize, f64)>>,
    equalities: Vec<Vec<(usize, f64)>>,
    delta: f64,
}

impl ConstraintSystem {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_elements(&self) -> usize {
        self.var_of.len()
    }

    /// Variable carrying the utility of `element`.
    pub fn var_of(&self, element: usize) -> usize {
        self.var_of[element]
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gap_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.gap_rows
    }

    pub fn equalities(&self) -> &[Vec<(usize, f64)>] {
        &self.equalities
    }

    /// Same rows at another threshold.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { delta, ..self.clone() })
    }

    fn pinned_lp(&self, extra_vars: usize) -> LinearProgram {
        let mut lp = LinearProgram::new(self.num_vars + extra_vars, 0.0, 1.0);
        lp.set_bounds(self.bottom_var, 0.0, 0.0);
        if self.top_var != self.bottom_var {
            lp.set_bounds(self.top_var, 1.0, 1.0);
        }
        for row in &self.equalities {
            lp.add_row(row.clone(), ConstraintKind::Equal, 0.0);
        }
        lp
    }

    /// The polytope as a linear program over the class variables.
    pub fn to_lp(&self) -> LinearProgram {
        let mut lp = self.pinned_lp(0);
        for row in &self.gap_rows {
            lp.add_row(row.clone(), ConstraintKind::GreaterEq, self.delta);
        }
        lp
    }

    /// Program with the threshold as an extra last variable in `[0, 1]`.
    pub fn max_delta_lp(&self) -> LinearProgram {
        let mut lp = self.pinned_lp(1);
        let d = self.num_vars;
        for row in &self.gap_rows {
            let mut coeffs = row.clone();
            coeffs.push((d, -1.0));
            lp.add_row(coeffs, ConstraintKind::GreaterEq, 0.0);
        }
        lp
    }

    /// Sums an element-indexed sparse objective into class variables.
    pub fn objective_vars(&self, objective: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars];
        for &(element, c) in objective {
            out[self.var_of[element]] += c;
        }
        out
    }

    /// Expands class values into per-element utilities.
    pub fn element_utilities(&self, vars: &[f64]) -> Vec<f64> {
        self.var_of.iter().map(|&v| vars[v]).collect()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn lex_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

fn sparse(terms: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut acc: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    for &(v, c) in terms {
        match acc.iter_mut().find(|(w, _)| *w == v) {
            Some(slot) => slot.1 += c,
            None => acc.push((v, c)),
        }
    }
    acc.retain(|&(_, c)| c != 0.0);
    acc.sort_by_key(|&(v, _)| v);
    acc
}

pub fn build_constraints(sys: &PreferenceSystem, delta: f64) -> Result<ConstraintSystem> {
    build_constraints_with(sys, delta, &ConstraintOptions::default())
}

pub fn build_constraints_with(sys: &PreferenceSystem, delta: f64, options: &ConstraintOptions) -> Result<ConstraintSystem> {
    check_delta(delta)?;
    let n = sys.len();
    let r1_pairs = sys.r1_pairs();

    // Pairs of R2 classes keyed by their snapped distance vector.
    let mut class_of_key: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut classes: Vec<(Vec<f64>, Vec<(usize, usize)>)> = Vec::new();
    if sys.has_cardinal_part() {
        for &(i, j) in &r1_pairs {
            let key = sys.distance_key(i, j);
            let bits: Vec<u64> = key.iter().map(|x| x.to_bits()).collect();
            let c = *class_of_key.entry(bits).or_insert_with(|| {
                classes.push((key, Vec::new()));
                classes.len() - 1
            });
            classes[c].1.push((i, j));
        }
    }

    // Indifferent elements share one variable, as do the two ends of any
    // pair at zero distance (such a pair is R2-indifferent to (q, q)).
    let mut uf = UnionFind::new(n);
    for &(i, j) in &r1_pairs {
        if i != j && sys.r1(j, i) {
            uf.union(i, j);
        }
    }
    for (key, members) in &classes {
        if key.iter().all(|&x| x == 0.0) {
            for &(i, j) in members {
                uf.union(i, j);
            }
        }
    }
    let mut var_of = vec![usize::MAX; n];
    let mut num_vars = 0;
    for e in 0..n {
        let root = uf.find(e);
        if var_of[root] == usize::MAX {
            var_of[root] = num_vars;
            num_vars += 1;
        }
        var_of[e] = var_of[root];
    }

    let mut gap_rows = Vec::new();
    let mut equalities = Vec::new();
    let diff = |a: (usize, usize), b: (usize, usize)| {
        sparse(&[(var_of[a.0], 1.0), (var_of[a.1], -1.0), (var_of[b.0], -1.0), (var_of[b.1], 1.0)])
    };

    // Strict part of R1.
    let strict_r1 = |a: usize, b: usize| sys.r1(a, b) && !sys.r1(b, a);
    let r1_strict_pairs: Vec<(usize, usize)> = if options.prune {
        let mut ext: Vec<usize> = (0..n).collect();
        ext.sort_by(|&a, &b| lex_desc(sys.elements()[a].coords(), sys.elements()[b].coords()).then(a.cmp(&b)));
        covers(&ext, strict_r1)
    } else {
        r1_pairs.iter().copied().filter(|&(a, b)| strict_r1(a, b)).collect()
    };
    for (a, b) in r1_strict_pairs {
        gap_rows.push(sparse(&[(var_of[a], 1.0), (var_of[b], -1.0)]));
    }

    // R2, one class per distance vector.
    if sys.has_cardinal_part() {
        let dominates = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x >= y);
        let strict = |a: usize, b: usize| {
            let (ka, kb) = (&classes[a].0, &classes[b].0);
            ka != kb && dominates(ka, kb)
        };
        if options.prune {
            for (_, members) in &classes {
                let rep = members[0];
                for &m in &members[1..] {
                    let row = diff(rep, m);
                    if !row.is_empty() {
                        equalities.push(row);
                    }
                }
            }
            let mut ext: Vec<usize> = (0..classes.len()).collect();
            ext.sort_by(|&a, &b| lex_desc(&classes[a].0, &classes[b].0).then(a.cmp(&b)));
            for (a, b) in covers(&ext, strict) {
                gap_rows.push(diff(classes[a].1[0], classes[b].1[0]));
            }
        } else {
            for (_, members) in &classes {
                for (x, &p) in members.iter().enumerate() {
                    for &q in &members[x + 1..] {
                        let row = diff(p, q);
                        if !row.is_empty() {
                            equalities.push(row);
                        }
                    }
                }
            }
            for a in 0..classes.len() {
                for b in 0..classes.len() {
                    if strict(a, b) {
                        for &p in &classes[a].1 {
                            for &q in &classes[b].1 {
                                gap_rows.push(diff(p, q));
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(ConstraintSystem {
        bottom_var: var_of[sys.bottom()],
        top_var: var_of[sys.top()],
        var_of,
        num_vars,
        gap_rows,
        equalities,
        delta,
    })
}

/// Minimizes an element-indexed objective over the polytope. The returned
/// vector holds one utility per element.
pub fn solve_min(cs: &ConstraintSystem, objective: &[(usize, f64)], solver: &dyn LpSolver) -> Result<LpSolution> {
    let lp = cs.to_lp();
    let mut sol = solver.solve(&lp, &cs.objective_vars(objective))?;
    if sol.is_optimal() {
        sol.vector = cs.element_utilities(&sol.vector);
    }
    Ok(sol)
}

/// Largest δ for which the polytope is nonempty.
///
/// A system whose only strict pair is `(top, bottom)` returns 1, the
/// supremum of the admissible thresholds; thresholds themselves must stay
/// below 1.
pub fn solve_max_delta(sys: &PreferenceSystem, solver: &dyn LpSolver) -> Result<f64> {
    let cs = build_constraints(sys, 0.0)?;
    let lp = cs.max_delta_lp();
    let mut objective = vec![0.0; lp.num_vars()];
    objective[cs.num_vars()] = -1.0;
    let sol = solver.solve(&lp, &objective)?;
    if !sol.is_optimal() {
        return Err(Error::Inconsistent);
    }
    Ok(sol.vector[cs.num_vars()])
}
