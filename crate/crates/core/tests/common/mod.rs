//! Instance builders and independent checkers shared by the property and
//! acceptance suites.

#![allow(dead_code)]

use gsd::dominance::{check_dominance, full_order, pool, DominanceConfig, PoolingScope, DECISION_TOL};
use gsd::lp::{build_constraints_with, solve_max_delta, solve_min, ConstraintOptions, DualSimplex, SolverConfig};
use gsd::model::{apply_automorphism, Automorphism, CriterionSpec, Direction, DimTransform, QualityTable, Scale, SystemOptions};
use rand::{Rng, RngCore};

pub const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Raw description of a random instance; `values` index into [`GRID`] in
/// classifier, data set, criterion order.
#[derive(Debug, Clone)]
pub struct Instance {
    pub q: usize,
    pub s: usize,
    pub scales: Vec<Scale>,
    pub directions: Vec<Direction>,
    pub values: Vec<usize>,
}

impl Instance {
    pub fn random(rng: &mut impl RngCore, max_q: usize, max_s: usize, max_k: usize) -> Self {
        let q = rng.random_range(2..=max_q);
        let s = rng.random_range(1..=max_s);
        let k = rng.random_range(1..=max_k);
        Self {
            q,
            s,
            scales: (0..k).map(|_| if rng.random_bool(0.5) { Scale::Metric } else { Scale::Ordinal }).collect(),
            directions: (0..k).map(|_| if rng.random_bool(0.8) { Direction::Maximize } else { Direction::Minimize }).collect(),
            values: (0..q * s * k).map(|_| rng.random_range(0..GRID.len())).collect(),
        }
    }

    pub fn table(&self) -> QualityTable {
        let k = self.scales.len();
        let criteria = (0..k).map(|c| CriterionSpec::new(format!("k{c}"), self.scales[c], self.directions[c])).collect();
        QualityTable::from_fn(
            (0..self.q).map(|c| format!("c{c}")).collect(),
            (0..self.s).map(|d| format!("d{d}")).collect(),
            criteria,
            |c, d, j| GRID[self.values[(c * self.s + d) * k + j]],
        )
        .expect("instance is a valid table")
    }
}

/// Oriented vectors of one classifier: minimized criteria are negated.
fn oriented(table: &QualityTable, c: usize) -> Vec<Vec<f64>> {
    (0..table.num_datasets())
        .map(|d| {
            table
                .criteria()
                .iter()
                .enumerate()
                .map(|(k, spec)| match spec.direction {
                    Direction::Maximize => table.value(c, d, k),
                    Direction::Minimize => -table.value(c, d, k),
                })
                .collect()
        })
        .collect()
}

fn weakly_above(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// First-order stochastic dominance of classifier `i` over `j` on the
/// componentwise order, by enumerating every upper set of their attained
/// vectors: `P_i(U) >= P_j(U)` must hold for each.
pub fn fsd_oracle(table: &QualityTable, i: usize, j: usize) -> bool {
    let (xi, xj) = (oriented(table, i), oriented(table, j));
    let mut points: Vec<Vec<f64>> = xi.iter().chain(&xj).cloned().collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    let n = points.len();
    assert!(n <= 20, "oracle enumerates 2^n subsets");
    let mass = |sample: &[Vec<f64>], set: u32| -> usize {
        sample
            .iter()
            .filter(|v| {
                let e = points.iter().position(|p| p == *v).unwrap();
                set >> e & 1 == 1
            })
            .count()
    };
    for set in 0u32..(1 << n) {
        let upward = (0..n).all(|a| set >> a & 1 == 0 || (0..n).all(|b| !weakly_above(&points[b], &points[a]) || set >> b & 1 == 1));
        if upward && mass(&xi, set) < mass(&xj, set) {
            return false;
        }
    }
    true
}

fn ordinal_options() -> SystemOptions {
    SystemOptions {
        ordinal_only: true,
        ..SystemOptions::default()
    }
}

/// Ordinal-only verdicts at δ = 0 against [`fsd_oracle`] on every ordered
/// pair, both with the pair pooled on its own and with all classifiers
/// pooled.
pub fn check_fsd_instance(inst: &Instance) -> Result<(), String> {
    let table = inst.table();
    let solver = SolverConfig::default();
    let all: Vec<usize> = (0..inst.q).collect();
    let joint = pool(&table, &all, &ordinal_options()).map_err(|e| e.to_string())?;
    for i in 0..inst.q {
        for j in 0..inst.q {
            if i == j {
                continue;
            }
            let p = pool(&table, &[i, j], &ordinal_options()).map_err(|e| e.to_string())?;
            let names = (table.classifiers()[i].as_str(), table.classifiers()[j].as_str());
            let oracle = fsd_oracle(&table, i, j);
            for (label, sys, law) in [("pairwise", &p.system, &p.law), ("joint", &joint.system, &joint.law)] {
                let lp = check_dominance(sys, law, names.0, names.1, 0.0, &solver).map_err(|e| e.to_string())?;
                if lp.verdict != oracle {
                    return Err(format!("{inst:?}: {label} pair ({i}, {j}) lp {} (opt {}) oracle {oracle}", lp.verdict, lp.opt));
                }
            }
        }
    }
    Ok(())
}

fn order_at(table: &QualityTable, delta: f64, screen: bool) -> Result<gsd::dominance::DominanceOrder, String> {
    let cfg = DominanceConfig {
        delta,
        scope: PoolingScope::All,
        screen,
        ..DominanceConfig::default()
    };
    full_order(table, &cfg).map_err(|e| e.to_string())
}

fn delta_max_all(table: &QualityTable) -> Result<f64, String> {
    let all: Vec<usize> = (0..table.num_classifiers()).collect();
    let p = pool(table, &all, &SystemOptions::default()).map_err(|e| e.to_string())?;
    solve_max_delta(&p.system, &DualSimplex::default()).map_err(|e| e.to_string())
}

/// Transitivity of the jointly pooled relation at a few thresholds, with
/// and without witness screening.
pub fn check_transitivity(inst: &Instance) -> Result<(), String> {
    let table = inst.table();
    let dm = delta_max_all(&table)?;
    for delta in [0.0, 0.5 * dm, 0.999 * dm] {
        let screened = order_at(&table, delta, true)?;
        let plain = order_at(&table, delta, false)?;
        if screened.verdict != plain.verdict {
            return Err(format!("{inst:?}: screening changed verdicts at delta {delta}"));
        }
        if let Some((a, b, c)) = plain.transitivity_violation() {
            return Err(format!("{inst:?}: {a} >= {b} >= {c} but not {a} >= {c} at delta {delta}"));
        }
    }
    Ok(())
}

/// Relations grow with δ: every pair dominating at a threshold still
/// dominates at each larger one up to δ_max.
pub fn check_nested(inst: &Instance) -> Result<(), String> {
    let table = inst.table();
    let dm = delta_max_all(&table)?;
    let grid: Vec<f64> = (0..=6).map(|t| dm * t as f64 / 6.0 * (1.0 - 1e-9)).filter(|&d| d < 1.0).collect();
    let orders = grid.iter().map(|&d| order_at(&table, d, true)).collect::<Result<Vec<_>, _>>()?;
    for w in 0..orders.len().saturating_sub(1) {
        let (lo, hi) = (&orders[w], &orders[w + 1]);
        for i in 0..inst.q {
            for j in 0..inst.q {
                if lo.verdict[i][j] && !hi.verdict[i][j] {
                    return Err(format!("{inst:?}: ({i}, {j}) holds at {} but not at {}", grid[w], grid[w + 1]));
                }
            }
        }
    }
    Ok(())
}

/// Random order-preserving automorphism: positive affine maps on metric
/// criteria, increasing relabellings or affine maps on ordinal ones.
pub fn random_automorphism(rng: &mut impl RngCore, scales: &[Scale]) -> Automorphism {
    let transforms = scales
        .iter()
        .map(|scale| {
            let affine = DimTransform::Affine {
                scale: [0.5, 2.0, 3.0, 10.0][rng.random_range(0..4)],
                shift: rng.random_range(-3..=3) as f64,
            };
            match scale {
                Scale::Metric => affine,
                Scale::Ordinal if rng.random_bool(0.5) => affine,
                Scale::Ordinal => {
                    // Increasing map of the two possible signs of every grid value.
                    let mut targets: Vec<f64> = (0..2 * GRID.len()).map(|_| rng.random_range(0.0..1.0)).collect();
                    targets.sort_by(f64::total_cmp);
                    let mut from: Vec<f64> = GRID.iter().flat_map(|&g| [g, -g]).collect();
                    from.sort_by(f64::total_cmp);
                    from.dedup();
                    let mut acc = 0.0;
                    let map = from
                        .into_iter()
                        .zip(targets)
                        .map(|(f, t)| {
                            acc += 0.01 + t;
                            (f, acc)
                        })
                        .collect();
                    DimTransform::Relabel(map)
                }
            }
        })
        .collect();
    Automorphism { transforms }
}

/// Dominance values are unchanged when an automorphism is applied to the
/// jointly pooled system.
pub fn check_automorphism(inst: &Instance, t: &Automorphism) -> Result<(), String> {
    let table = inst.table();
    let all: Vec<usize> = (0..inst.q).collect();
    let p = pool(&table, &all, &SystemOptions::default()).map_err(|e| e.to_string())?;
    let moved = apply_automorphism(&p.system, t).map_err(|e| e.to_string())?;
    let solver = DualSimplex::default();
    let dm = solve_max_delta(&p.system, &solver).map_err(|e| e.to_string())?;
    let dm_moved = solve_max_delta(&moved, &solver).map_err(|e| e.to_string())?;
    if (dm - dm_moved).abs() > 1e-9 {
        return Err(format!("{inst:?}: delta_max {dm} became {dm_moved}"));
    }
    let cfg = SolverConfig::default();
    for delta in [0.0, 0.5 * dm] {
        for i in 0..inst.q {
            for j in 0..inst.q {
                let (a, b) = (&table.classifiers()[i], &table.classifiers()[j]);
                let before = check_dominance(&p.system, &p.law, a, b, delta, &cfg).map_err(|e| e.to_string())?;
                let after = check_dominance(&moved, &p.law, a, b, delta, &cfg).map_err(|e| e.to_string())?;
                if before.verdict != after.verdict || (before.opt - after.opt).abs() > 1e-7 {
                    return Err(format!(
                        "{inst:?} {t:?}: ({i}, {j}) at {delta}: {} ({}) vs {} ({})",
                        before.verdict, before.opt, after.verdict, after.opt
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Pruned and unpruned constraint sets have the same optimum for every
/// pair.
pub fn check_pruning(inst: &Instance) -> Result<(), String> {
    let table = inst.table();
    let all: Vec<usize> = (0..inst.q).collect();
    let p = pool(&table, &all, &SystemOptions::default()).map_err(|e| e.to_string())?;
    let solver = DualSimplex::default();
    let dm = solve_max_delta(&p.system, &solver).map_err(|e| e.to_string())?;
    for delta in [0.0, 0.5 * dm] {
        let pruned = build_constraints_with(&p.system, delta, &ConstraintOptions { prune: true }).map_err(|e| e.to_string())?;
        let full = build_constraints_with(&p.system, delta, &ConstraintOptions { prune: false }).map_err(|e| e.to_string())?;
        for i in 0..inst.q {
            for j in 0..inst.q {
                let objective = gsd::dominance::objective_between(&p.law, i, j);
                let a = solve_min(&pruned, &objective, &solver).map_err(|e| e.to_string())?;
                let b = solve_min(&full, &objective, &solver).map_err(|e| e.to_string())?;
                if a.status != b.status || (a.objective - b.objective).abs() > 1e-8 {
                    return Err(format!("{inst:?}: ({i}, {j}) at {delta}: pruned {} full {}", a.objective, b.objective));
                }
                if (a.objective >= -DECISION_TOL) != (b.objective >= -DECISION_TOL) {
                    return Err(format!("{inst:?}: ({i}, {j}) verdicts differ at {delta}"));
                }
            }
        }
    }
    Ok(())
}

/// Rejection rate of the pooled permutation test when both samples come
/// from one distribution, with its standard error.
pub fn type1_rate(replications: usize, s: usize, alpha: f64, seed: u64) -> (f64, f64) {
    use gsd::model::QualityVector;
    use gsd::stat_test::{permutation_test, Resamples, TestConfig};
    use rand::SeedableRng;
    let criteria = vec![CriterionSpec::metric("a"), CriterionSpec::metric("b")];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rejections = 0usize;
    for r in 0..replications {
        let mut draw = || -> Vec<QualityVector> {
            (0..s)
                .map(|_| {
                    let base: f64 = rng.random_range(0.0..1.0);
                    QualityVector::new(vec![base, (0.5 * base + 0.5 * rng.random_range(0.0..1.0f64)).min(1.0)])
                })
                .collect()
        };
        let (x, y) = (draw(), draw());
        let cfg = TestConfig {
            alpha,
            resamples: Resamples::MonteCarlo(199),
            seed: seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            early_stop: true,
            ..TestConfig::default()
        };
        if permutation_test(&x, &y, &criteria, &cfg).expect("test runs").reject {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / replications as f64;
    (rate, (alpha * (1.0 - alpha) / replications as f64).sqrt())
}

/// Five data sets, one criterion: C1 beats C2 on average rank alone, and
/// adding C3 reverses that. Returns the average ranks of C1 and C2 without
/// and with C3.
pub fn table2() -> (QualityTable, QualityTable) {
    let c1 = [0.8, 0.8, 0.8, 0.6, 0.6];
    let c2 = [0.6, 0.6, 0.6, 0.8, 0.8];
    let c3 = [0.9, 0.9, 0.9, 0.7, 0.7];
    let build = |rows: &[[f64; 5]]| {
        QualityTable::from_fn(
            (1..=rows.len()).map(|c| format!("C{c}")).collect(),
            (1..=5).map(|d| format!("D{d}")).collect(),
            vec![CriterionSpec::metric("acc")],
            |c, d, _| rows[c][d],
        )
        .unwrap()
    };
    (build(&[c1, c2]), build(&[c1, c2, c3]))
}
