//! Rank-based comparison: per-criterion average ranks, Friedman test with
//! Nemenyi post-hoc decisions, and the all-test / one-test combinations of
//! per-criterion decisions.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dominance::DominanceOrder;
use crate::error::{Error, Result};
use crate::model::{reorient, QualityTable};

/// Ranks of every classifier, 1 being best, with mid-ranks for ties.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    pub classifiers: Vec<String>,
    pub criteria: Vec<String>,
    /// `ranks[k][d][c]`: rank of classifier c on data set d under criterion k.
    pub ranks: Vec<Vec<Vec<f64>>>,
    /// `average[k][c]`: mean rank of classifier c under criterion k.
    pub average: Vec<Vec<f64>>,
}

impl RankMatrix {
    pub fn new(table: &QualityTable) -> Self {
        let t = reorient(table);
        let (q, s) = (t.num_classifiers(), t.num_datasets());
        let ranks: Vec<Vec<Vec<f64>>> = (0..t.num_criteria())
            .map(|k| (0..s).map(|d| mid_ranks(&(0..q).map(|c| t.value(c, d, k)).collect::<Vec<_>>())).collect())
            .collect();
        let average = ranks
            .iter()
            .map(|per_set| (0..q).map(|c| per_set.iter().map(|r| r[c]).sum::<f64>() / s as f64).collect())
            .collect();
        Self {
            classifiers: t.classifiers().to_vec(),
            criteria: t.criteria().iter().map(|c| c.name.clone()).collect(),
            ranks,
            average,
        }
    }

    pub fn num_datasets(&self) -> usize {
        self.ranks.first().map_or(0, Vec::len)
    }
}

/// Ranks of `values` in decreasing order of value; tied values share the
/// mean of the positions they occupy.
fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Classifier i dominates j when its average rank is strictly better on
/// every criterion. Every classifier dominates itself.
pub fn rank_order(table: &QualityTable) -> DominanceOrder {
    let ranks = RankMatrix::new(table);
    let q = ranks.classifiers.len();
    let verdict = (0..q)
        .map(|i| (0..q).map(|j| i == j || ranks.average.iter().all(|avg| avg[i] < avg[j])).collect())
        .collect();
    DominanceOrder::from_verdicts(ranks.classifiers, verdict)
}

/// Critical values of the Nemenyi test (studentized range over `sqrt(2)`)
/// for 2 to 20 classifiers.
const NEMENYI_01: [f64; 19] = [
    2.576, 2.913, 3.113, 3.255, 3.364, 3.452, 3.526, 3.590, 3.646, 3.696, 3.741, 3.781, 3.818, 3.853, 3.884, 3.914, 3.941, 3.967,
    3.992,
];
const NEMENYI_05: [f64; 19] = [
    1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517,
    3.544,
];
const NEMENYI_10: [f64; 19] = [
    1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978, 3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291,
    3.319,
];

/// Nemenyi critical value for `q` classifiers at `alpha` ∈ {0.01, 0.05, 0.10}.
pub fn nemenyi_q(q: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.01).abs() < 1e-12 {
        &NEMENYI_01
    } else if (alpha - 0.05).abs() < 1e-12 {
        &NEMENYI_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &NEMENYI_10
    } else {
        return Err(Error::InvalidConfig(format!("Nemenyi constants exist for alpha 0.01, 0.05 and 0.10, not {alpha}")));
    };
    if !(2..=20).contains(&q) {
        return Err(Error::InvalidConfig(format!("Nemenyi constants cover 2 to 20 classifiers, not {q}")));
    }
    Ok(table[q - 2])
}

/// Friedman test on one criterion with Nemenyi post-hoc decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub classifiers: Vec<String>,
    pub criterion: String,
    pub average_ranks: Vec<f64>,
    /// Chi-square form of the Friedman statistic.
    pub statistic: f64,
    pub p_value: f64,
    pub critical_difference: f64,
    /// Whether the Friedman test rejects equal performance at `alpha`.
    pub significant: bool,
    /// `better[i][j]`: i is significantly better than j.
    pub better: Vec<Vec<bool>>,
}

pub fn friedman_nemenyi(table: &QualityTable, criterion: usize, alpha: f64) -> Result<FriedmanResult> {
    let q = table.num_classifiers();
    let s = table.num_datasets();
    if q < 3 {
        return Err(Error::Precondition(format!(
            "the Friedman test needs at least three classifiers, found {q}; compare two classifiers with a sign or Wilcoxon signed-rank test"
        )));
    }
    if s < 2 {
        return Err(Error::Precondition(format!("the Friedman test needs at least two data sets, found {s}")));
    }
    if criterion >= table.num_criteria() {
        return Err(Error::InvalidCriteria(format!("criterion index {criterion} out of range")));
    }
    let cd_q = nemenyi_q(q, alpha)?;
    let ranks = RankMatrix::new(table);
    let avg = ranks.average[criterion].clone();
    let (qf, sf) = (q as f64, s as f64);
    let sum_sq: f64 = avg.iter().map(|r| r * r).sum();
    let statistic = (12.0 * sf / (qf * (qf + 1.0)) * (sum_sq - qf * (qf + 1.0).powi(2) / 4.0)).max(0.0);
    let chi = ChiSquared::new(qf - 1.0).expect("positive degrees of freedom");
    let p_value = chi.sf(statistic);
    let significant = p_value < alpha;
    let critical_difference = cd_q * (qf * (qf + 1.0) / (6.0 * sf)).sqrt();
    let better = (0..q)
        .map(|i| (0..q).map(|j| significant && avg[j] - avg[i] >= critical_difference).collect())
        .collect();
    Ok(FriedmanResult {
        classifiers: ranks.classifiers,
        criterion: ranks.criteria[criterion].clone(),
        average_ranks: avg,
        statistic,
        p_value,
        critical_difference,
        significant,
        better,
    })
}

/// Friedman and Nemenyi on every criterion of `table`.
pub fn friedman_all(table: &QualityTable, alpha: f64) -> Result<Vec<FriedmanResult>> {
    (0..table.num_criteria()).map(|k| friedman_nemenyi(table, k, alpha)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Significance {
    Better,
    Worse,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicVerdict {
    /// `(x, y)`: the verdict is about x being better than y.
    pub pair: (String, String),
    pub directions: Vec<Significance>,
    /// Significantly better on every criterion.
    pub all_test: bool,
    /// Significantly better on some criterion and significantly worse on none.
    pub one_test: bool,
}

/// Combines per-criterion decisions into verdicts for every ordered pair.
/// No further correction for the number of criteria is applied.
pub fn combine_heuristics(per_criterion: &[FriedmanResult]) -> Result<Vec<HeuristicVerdict>> {
    let Some(first) = per_criterion.first() else {
        return Ok(Vec::new());
    };
    if let Some(other) = per_criterion.iter().find(|r| r.classifiers != first.classifiers) {
        return Err(Error::Precondition(format!(
            "criterion `{}` was ranked over a different set of classifiers than `{}`",
            other.criterion, first.criterion
        )));
    }
    let q = first.classifiers.len();
    let mut out = Vec::with_capacity(q * q.saturating_sub(1));
    for i in 0..q {
        for j in 0..q {
            if i == j {
                continue;
            }
            let directions: Vec<Significance> = per_criterion
                .iter()
                .map(|r| {
                    if r.better[i][j] {
                        Significance::Better
                    } else if r.better[j][i] {
                        Significance::Worse
                    } else {
                        Significance::None
                    }
                })
                .collect();
            let all_test = directions.iter().all(|&d| d == Significance::Better);
            let one_test = directions.contains(&Significance::Better) && !directions.contains(&Significance::Worse);
            out.push(HeuristicVerdict {
                pair: (first.classifiers[i].clone(), first.classifiers[j].clone()),
                directions,
                all_test,
                one_test,
            });
        }
    }
    Ok(out)
}

/// Edges `(x, y)` accepted by the all-test (`all = true`) or the one-test,
/// sorted.
pub fn heuristic_edges(verdicts: &[HeuristicVerdict], all: bool) -> Vec<(String, String)> {
    let mut out: Vec<_> = verdicts
        .iter()
        .filter(|v| if all { v.all_test } else { v.one_test })
        .map(|v| v.pair.clone())
        .collect();
    out.sort();
    out
}
