//! Permutation test of δ-dominance between two classifiers.
//!
//! The quality vectors of both classifiers are pooled into one preference
//! system. The observed statistic is the minimal expected-utility
//! difference under the actual assignment; every resample reassigns the
//! pooled vectors to the two roles and re-solves over the same polytope, so
//! only the objective changes between solves.

use std::fmt::Write as _;
use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dominance::Certifier;
use crate::error::{Error, Result};
use crate::lp::SolverConfig;
use crate::model::{build_system, reorient, CriterionSpec, PreferenceSystem, QualityTable, QualityVector, SystemOptions};

/// Resample values within this distance of the observed statistic count as
/// ties, so solver round-off never turns a tie into a strict inequality.
pub const TIE_TOL: f64 = 1e-9;

/// Minimizers kept for screening resamples.
const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resamples {
    /// Every assignment; refused when there are more than the configured cap.
    Exhaustive,
    MonteCarlo(usize),
    /// Monte Carlo with `max(1000, 100 s)` draws for `s` data sets.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    None,
    Bonferroni,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Index sets of size `s` drawn from the pooled `2s` vectors.
    Pooled,
    /// Swaps the two classifiers' vectors independently per data set. Not
    /// the default; offered for paired designs.
    PairedSignFlip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub alpha: f64,
    pub delta: f64,
    pub resamples: Resamples,
    pub seed: u64,
    pub correction: Correction,
    pub exhaustive_cap: u64,
    pub scheme: Scheme,
    /// Stop drawing once both the raw and the corrected decision are fixed.
    /// Shares are then computed over the resamples actually drawn.
    pub early_stop: bool,
    /// Settle a resample without an LP when an earlier minimizer already
    /// gives it a value below the observed statistic. Decisions and shares
    /// are unchanged; such resamples store that upper bound as statistic.
    pub screen: bool,
    pub system: SystemOptions,
    pub solver: SolverConfig,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            delta: 0.0,
            resamples: Resamples::Auto,
            seed: 0,
            correction: Correction::None,
            exhaustive_cap: 200_000,
            scheme: Scheme::Pooled,
            early_stop: false,
            screen: true,
            system: SystemOptions::default(),
            solver: SolverConfig::default(),
        }
    }
}

impl TestConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if matches!(self.resamples, Resamples::MonteCarlo(0)) {
            return Err(Error::InvalidConfig("number of resamples must be positive".into()));
        }
        Ok(())
    }

    /// Level applied to each of `family` tests.
    pub fn corrected_alpha(&self, family: usize) -> f64 {
        match self.correction {
            Correction::None => self.alpha,
            Correction::Bonferroni => self.alpha / family.max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairTestResult {
    /// `(x, y)`: the test asks whether x dominates y.
    pub pair: (String, String),
    pub observed: f64,
    /// Resample statistics in draw order. A resample settled by screening
    /// holds an upper bound of its statistic that lies below `observed`.
    pub statistics: Vec<f64>,
    /// Planned number of resamples; larger than `statistics.len()` only
    /// after an early stop.
    pub planned: usize,
    /// Fraction of resamples strictly below the observed statistic.
    pub share: f64,
    pub reject: bool,
    pub reject_corrected: bool,
    pub corrected_alpha: f64,
}

impl PairTestResult {
    /// Rejection at level `alpha`: the observed value exceeds the
    /// `ceil((1 - alpha) M)`-th order statistic of the `M` resample values.
    pub fn rejects_at(&self, alpha: f64) -> bool {
        order_statistic_rejects(&self.statistics, self.observed, alpha)
    }

    pub fn is_complete(&self) -> bool {
        self.statistics.len() == self.planned
    }
}

fn critical_count(m: usize, alpha: f64) -> usize {
    // Guards against (1 - alpha) * m landing a hair above an integer.
    let raw = (1.0 - alpha) * m as f64;
    let k = (raw - 1e-9).ceil().max(1.0) as usize;
    k.min(m)
}

fn count_below(statistics: &[f64], observed: f64) -> usize {
    statistics.iter().filter(|&&t| t < observed - TIE_TOL).count()
}

fn order_statistic_rejects(statistics: &[f64], observed: f64, alpha: f64) -> bool {
    if statistics.is_empty() {
        return false;
    }
    // The k-th smallest value lies below the observation exactly when at
    // least k values do.
    count_below(statistics, observed) >= critical_count(statistics.len(), alpha)
}

/// Number of k-subsets of an n-set, saturating.
fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank_subset(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    while out.len() < k {
        let remaining = k - out.len();
        let with_next = binomial((n - next - 1) as u64, (remaining - 1) as u64);
        if rank < with_next {
            out.push(next);
        } else {
            rank -= with_next;
        }
        next += 1;
    }
    out
}

/// Pooled sample with its elements, built once per unordered pair.
struct PooledPair {
    system: PreferenceSystem,
    /// Element index of each pooled vector; the first `s` belong to x.
    element: Vec<usize>,
    s: usize,
}

impl PooledPair {
    fn new(x: &[QualityVector], y: &[QualityVector], criteria: &[CriterionSpec], options: &SystemOptions) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Precondition(format!("samples differ in size ({} and {})", x.len(), y.len())));
        }
        if x.len() < 2 {
            return Err(Error::Precondition("each sample needs at least two data sets".into()));
        }
        let z: Vec<QualityVector> = x.iter().chain(y).cloned().collect();
        let system = build_system(&z, criteria, options)?;
        let element = z.iter().map(|v| system.index_of(v).expect("pooled vectors are elements")).collect();
        Ok(Self { system, element, s: x.len() })
    }

    /// Objective for the assignment whose x role is `in_x` (pooled indices).
    fn objective(&self, in_x: &[bool]) -> Vec<(usize, f64)> {
        let w = 1.0 / self.s as f64;
        let mut acc = vec![0.0; self.system.len()];
        for (k, &e) in self.element.iter().enumerate() {
            acc[e] += if in_x[k] { w } else { -w };
        }
        acc.into_iter().enumerate().filter(|&(_, c)| c != 0.0).collect()
    }
}

/// How each resample's role assignment is generated.
enum Plan {
    Subsets { exhaustive: bool },
    SignFlips { exhaustive: bool },
}

fn plan(cfg: &TestConfig, s: usize) -> Result<(Plan, usize)> {
    let total: u128 = match cfg.scheme {
        Scheme::Pooled => binomial(2 * s as u64, s as u64),
        Scheme::PairedSignFlip => 1u128.checked_shl(s as u32).unwrap_or(u128::MAX),
    };
    let (exhaustive, m) = match cfg.resamples {
        Resamples::Exhaustive => {
            if total > cfg.exhaustive_cap as u128 {
                return Err(Error::InvalidConfig(format!(
                    "exhaustive resampling needs {total} assignments, above the cap of {}",
                    cfg.exhaustive_cap
                )));
            }
            (true, total as usize)
        }
        Resamples::MonteCarlo(n) => (false, n),
        Resamples::Auto => (false, (100 * s).max(1000)),
    };
    let plan = match cfg.scheme {
        Scheme::Pooled => Plan::Subsets { exhaustive },
        Scheme::PairedSignFlip => Plan::SignFlips { exhaustive },
    };
    Ok((plan, m))
}

fn seed_bytes(seed: u64, i: usize, j: usize) -> [u8; 32] {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&(i as u64).to_le_bytes());
    bytes[16..24].copy_from_slice(&(j as u64).to_le_bytes());
    bytes
}

/// Role assignment of resample `r`; `true` marks the x role.
fn assignment(plan: &Plan, s: usize, seed: &[u8; 32], r: usize, forward: bool) -> Vec<bool> {
    let mut in_x = vec![false; 2 * s];
    match plan {
        Plan::Subsets { exhaustive: true } => {
            for k in unrank_subset(2 * s, s, r as u128) {
                in_x[k] = true;
            }
        }
        Plan::Subsets { exhaustive: false } => {
            let mut rng = ChaCha8Rng::from_seed(*seed);
            rng.set_stream(r as u64);
            for k in sample(&mut rng, 2 * s, s) {
                in_x[k] = true;
            }
        }
        Plan::SignFlips { exhaustive } => {
            let mut rng = ChaCha8Rng::from_seed(*seed);
            rng.set_stream(r as u64);
            for d in 0..s {
                let swap = if *exhaustive { (r >> d) & 1 == 1 } else { rng.random::<bool>() };
                in_x[if swap { s + d } else { d }] = true;
            }
        }
    }
    if !forward {
        // The reverse test gives the x role to the second classifier.
        in_x.iter_mut().for_each(|b| *b = !*b);
    }
    in_x
}

/// Runs one direction of the test on a prepared pooled pair.
#[allow(clippy::too_many_arguments)]
fn run_direction(
    pooled: &PooledPair,
    certifier: &Certifier,
    cfg: &TestConfig,
    seed: &[u8; 32],
    forward: bool,
    family: usize,
    names: (String, String),
) -> Result<PairTestResult> {
    let s = pooled.s;
    let (plan, m) = plan(cfg, s)?;
    let observed_roles: Vec<bool> = (0..2 * s).map(|k| (k < s) == forward).collect();
    let observed = certifier.session().opt(&pooled.objective(&observed_roles))?;
    let corrected_alpha = cfg.corrected_alpha(family);
    let k_raw = critical_count(m, cfg.alpha);
    let k_cor = critical_count(m, corrected_alpha);
    // One session in draw order: its basis cache makes later solves cheap,
    // and the fixed order keeps results independent of thread scheduling.
    let mut session = certifier.session();
    let mut statistics = Vec::with_capacity(m);
    let mut below = 0usize;
    // Recent minimizers, most recently useful first.
    let mut witnesses: Vec<Vec<f64>> = Vec::new();
    for r in 0..m {
        let objective = pooled.objective(&assignment(&plan, s, seed, r, forward));
        let value = |u: &[f64]| objective.iter().map(|&(e, c)| c * u[e]).sum::<f64>();
        let screened = if cfg.screen {
            witnesses.iter().enumerate().find_map(|(i, u)| {
                let v = value(u);
                (v < observed - TIE_TOL).then_some((i, v))
            })
        } else {
            None
        };
        let t = match screened {
            Some((i, v)) => {
                witnesses[..=i].rotate_right(1);
                v
            }
            None => {
                let sol = session.solve(&objective)?;
                if cfg.screen {
                    witnesses.insert(0, sol.vector);
                    witnesses.truncate(MAX_WITNESSES);
                }
                sol.objective
            }
        };
        if t < observed - TIE_TOL {
            below += 1;
        }
        statistics.push(t);
        if cfg.early_stop {
            let not_below = statistics.len() - below;
            let raw_fixed = below >= k_raw || not_below > m - k_raw;
            let cor_fixed = below >= k_cor || not_below > m - k_cor;
            if raw_fixed && cor_fixed {
                break;
            }
        }
    }
    let done = statistics.len();
    let complete = done == m;
    let (reject, reject_corrected) = if complete {
        (order_statistic_rejects(&statistics, observed, cfg.alpha), order_statistic_rejects(&statistics, observed, corrected_alpha))
    } else {
        (below >= k_raw, below >= k_cor)
    };
    Ok(PairTestResult {
        pair: names,
        observed,
        share: below as f64 / done as f64,
        statistics,
        planned: m,
        reject,
        reject_corrected,
        corrected_alpha,
    })
}

/// Tests whether the classifier with samples `x` dominates the one with
/// samples `y` (one vector per data set, already oriented so that larger is
/// better). The correction is applied to a family of one test.
pub fn permutation_test(x: &[QualityVector], y: &[QualityVector], criteria: &[CriterionSpec], cfg: &TestConfig) -> Result<PairTestResult> {
    cfg.validate()?;
    let pooled = PooledPair::new(x, y, criteria, &cfg.system)?;
    let certifier = Certifier::new(&pooled.system, cfg.delta, &cfg.solver)?;
    run_direction(&pooled, &certifier, cfg, &seed_bytes(cfg.seed, 0, 1), true, 1, ("x".into(), "y".into()))
}

/// Tests of every ordered pair of classifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub classifiers: Vec<String>,
    pub alpha: f64,
    pub corrected_alpha: f64,
    /// `results[i][j]` tests whether classifier i dominates j; `None` on
    /// the diagonal.
    pub results: Vec<Vec<Option<PairTestResult>>>,
}

impl TestReport {
    pub fn get(&self, x: &str, y: &str) -> Option<&PairTestResult> {
        let i = self.classifiers.iter().position(|c| c == x)?;
        let j = self.classifiers.iter().position(|c| c == y)?;
        self.results[i][j].as_ref()
    }

    pub fn pairs(&self) -> impl Iterator<Item = &PairTestResult> {
        self.results.iter().flatten().flatten()
    }

    /// Significant dominance edges `(x, y)`, sorted.
    pub fn significant_edges(&self, corrected: bool) -> Vec<(String, String)> {
        let mut out: Vec<_> = self
            .pairs()
            .filter(|r| if corrected { r.reject_corrected } else { r.reject })
            .map(|r| r.pair.clone())
            .collect();
        out.sort();
        out
    }

    /// Share matrix with rows testing dominance of the row classifier; cells
    /// below `1 - alpha` are shown as "−".
    pub fn render_table(&self) -> String {
        let width = self.classifiers.iter().map(|c| c.len()).max().unwrap_or(0).max(5);
        let mut out = String::new();
        let _ = write!(out, "{:width$}", "");
        for c in &self.classifiers {
            let _ = write!(out, " {c:>width$}");
        }
        out.push('\n');
        for (i, row) in self.results.iter().enumerate() {
            let _ = write!(out, "{:width$}", self.classifiers[i]);
            for cell in row {
                let text = match cell {
                    Some(r) if r.share >= 1.0 - self.alpha => format!("{:.3}", r.share),
                    Some(_) => "−".to_string(),
                    None => String::new(),
                };
                let _ = write!(out, " {text:>width$}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Csv {
            location: "output".into(),
            message: e.to_string(),
        };
        w.write_record(["x", "y", "observed", "share", "resamples", "reject", "reject_corrected"]).map_err(err)?;
        for r in self.pairs() {
            w.write_record([
                r.pair.0.clone(),
                r.pair.1.clone(),
                r.observed.to_string(),
                r.share.to_string(),
                r.statistics.len().to_string(),
                r.reject.to_string(),
                r.reject_corrected.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the test for every ordered pair of classifiers in `table`. Each
/// unordered pair shares one pooled system. The family size for the
/// correction is `q (q - 1)`.
pub fn test_all_pairs(table: &QualityTable, cfg: &TestConfig) -> Result<TestReport> {
    cfg.validate()?;
    let q = table.num_classifiers();
    if q < 2 {
        return Err(Error::Precondition("need at least two classifiers".into()));
    }
    let table = reorient(table);
    let family = q * (q - 1);
    let names = table.classifiers();
    let pairs: Vec<(usize, usize)> = (0..q).flat_map(|i| (i + 1..q).map(move |j| (i, j))).collect();
    let outcomes: Vec<(PairTestResult, PairTestResult)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let pooled = PooledPair::new(&table.vectors_of(i), &table.vectors_of(j), table.criteria(), &cfg.system)?;
            let certifier = Certifier::new(&pooled.system, cfg.delta, &cfg.solver)?;
            let forward = run_direction(&pooled, &certifier, cfg, &seed_bytes(cfg.seed, i, j), true, family, (names[i].clone(), names[j].clone()))?;
            let backward = run_direction(&pooled, &certifier, cfg, &seed_bytes(cfg.seed, j, i), false, family, (names[j].clone(), names[i].clone()))?;
            Ok((forward, backward))
        })
        .collect::<Result<_>>()?;
    let mut results: Vec<Vec<Option<PairTestResult>>> = vec![vec![None; q]; q];
    for (&(i, j), (f, b)) in pairs.iter().zip(outcomes) {
        results[i][j] = Some(f);
        results[j][i] = Some(b);
    }
    Ok(TestReport {
        classifiers: names.to_vec(),
        alpha: cfg.alpha,
        corrected_alpha: cfg.corrected_alpha(family),
        results,
    })
}

/// Tests whether classifier `x` dominates `y` exactly as [`test_all_pairs`]
/// would, with the same resamples and family size, but for one direction.
pub fn test_pair(table: &QualityTable, x: &str, y: &str, cfg: &TestConfig) -> Result<PairTestResult> {
    cfg.validate()?;
    let q = table.num_classifiers();
    let (i, j) = (table.classifier_index(x)?, table.classifier_index(y)?);
    if i == j {
        return Err(Error::Precondition("a classifier is not tested against itself".into()));
    }
    let table = reorient(table);
    let (lo, hi) = (i.min(j), i.max(j));
    let pooled = PooledPair::new(&table.vectors_of(lo), &table.vectors_of(hi), table.criteria(), &cfg.system)?;
    let certifier = Certifier::new(&pooled.system, cfg.delta, &cfg.solver)?;
    run_direction(&pooled, &certifier, cfg, &seed_bytes(cfg.seed, i, j), i < j, q * (q - 1), (x.to_string(), y.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crit() -> Vec<CriterionSpec> {
        vec![CriterionSpec::metric("a")]
    }

    fn vecs(values: &[f64]) -> Vec<QualityVector> {
        values.iter().map(|&v| QualityVector::new(vec![v])).collect()
    }

    #[test]
    fn binomials_and_unranking() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(32, 16), 601_080_390);
        let all: Vec<Vec<usize>> = (0..20).map(|r| unrank_subset(6, 3, r)).collect();
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[19], vec![3, 4, 5]);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all);
    }

    #[test]
    fn critical_counts() {
        assert_eq!(critical_count(20, 0.05), 19);
        assert_eq!(critical_count(1000, 0.05), 950);
        assert_eq!(critical_count(10, 0.5), 5);
    }

    #[test]
    fn separated_samples_exhaustive() {
        // x at the top, y at the bottom: only the observed assignment and
        // its mirror image are extreme; the 20 assignments give statistics
        // computed independently by a direct enumeration.
        let x = vecs(&[1.0, 1.0, 1.0]);
        let y = vecs(&[0.0, 0.0, 0.0]);
        let cfg = TestConfig {
            resamples: Resamples::Exhaustive,
            screen: false,
            ..TestConfig::default()
        };
        let r = permutation_test(&x, &y, &crit(), &cfg).unwrap();
        assert_eq!(r.statistics.len(), 20);
        assert!((r.observed - 1.0).abs() < 1e-9);
        // With u(0) = 0 and u(1) = 1 the statistic is (hits of x role on
        // the top vectors) * 2/3 - 1, for h = 0..=3 top vectors drawn:
        // C(3,h) C(3,3-h) assignments each.
        let mut expected: Vec<f64> = Vec::new();
        for (h, count) in [(0, 1), (1, 9), (2, 9), (3, 1)] {
            expected.extend(std::iter::repeat_n(2.0 * h as f64 / 3.0 - 1.0, count));
        }
        let mut got = r.statistics.clone();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-9, "{got:?}");
        }
        // 19 of 20 lie strictly below, and the 19th order statistic is 1/3.
        assert!((r.share - 0.95).abs() < 1e-12);
        assert!(r.reject);
        assert!(!r.rejects_at(0.01));
    }

    #[test]
    fn identical_samples_never_reject() {
        let x = vecs(&[0.2, 0.5, 0.9, 0.4]);
        let cfg = TestConfig {
            resamples: Resamples::Exhaustive,
            ..TestConfig::default()
        };
        let r = permutation_test(&x, &x.clone(), &crit(), &cfg).unwrap();
        assert!(r.share < 0.95 && !r.reject);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let x = vecs(&[0.9, 0.7, 0.8, 0.6, 0.75]);
        let y = vecs(&[0.5, 0.65, 0.4, 0.7, 0.55]);
        let cfg = TestConfig {
            resamples: Resamples::MonteCarlo(300),
            seed: 7,
            ..TestConfig::default()
        };
        let a = permutation_test(&x, &y, &crit(), &cfg).unwrap();
        let b = permutation_test(&x, &y, &crit(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = permutation_test(&x, &y, &crit(), &TestConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.statistics, c.statistics);
    }

    #[test]
    fn screening_keeps_counts() {
        let two = vec![CriterionSpec::metric("a"), CriterionSpec::metric("b")];
        let pts = |v: &[(f64, f64)]| v.iter().map(|&(a, b)| QualityVector::new(vec![a, b])).collect::<Vec<_>>();
        let x = pts(&[(0.9, 0.7), (0.8, 0.85), (0.75, 0.6), (0.95, 0.9), (0.7, 0.8), (0.85, 0.75)]);
        let y = pts(&[(0.6, 0.65), (0.7, 0.5), (0.8, 0.7), (0.55, 0.6), (0.65, 0.75), (0.5, 0.55)]);
        for delta in [0.0, 1e-5] {
            let plain = TestConfig {
                delta,
                resamples: Resamples::MonteCarlo(400),
                seed: 11,
                screen: false,
                ..TestConfig::default()
            };
            let a = permutation_test(&x, &y, &two, &plain).unwrap();
            let b = permutation_test(&x, &y, &two, &TestConfig { screen: true, ..plain }).unwrap();
            assert!(a.share > 0.5);
            assert_eq!((a.share, a.reject, a.observed), (b.share, b.reject, b.observed));
            for (ta, tb) in a.statistics.iter().zip(&b.statistics) {
                assert!(tb + 1e-9 >= *ta);
            }
        }
    }

    #[test]
    fn early_stop_keeps_decisions() {
        let x = vecs(&[0.9, 0.7, 0.8, 0.6, 0.75, 0.95]);
        let y = vecs(&[0.5, 0.65, 0.4, 0.7, 0.55, 0.3]);
        let full = TestConfig {
            resamples: Resamples::MonteCarlo(5000),
            seed: 3,
            ..TestConfig::default()
        };
        let a = permutation_test(&x, &y, &crit(), &full).unwrap();
        let b = permutation_test(&x, &y, &crit(), &TestConfig { early_stop: true, ..full.clone() }).unwrap();
        assert_eq!(a.reject, b.reject);
        assert!(b.statistics.len() <= a.statistics.len());
        assert_eq!(b.statistics[..], a.statistics[..b.statistics.len()]);
        let r = permutation_test(&y, &x, &crit(), &TestConfig { early_stop: true, ..full }).unwrap();
        assert!(!r.reject && !r.is_complete());
    }

    #[test]
    fn exhaustive_cap_and_preconditions() {
        let x = vecs(&[0.1; 12]);
        let cfg = TestConfig {
            resamples: Resamples::Exhaustive,
            ..TestConfig::default()
        };
        assert!(matches!(permutation_test(&x, &x, &crit(), &cfg), Err(Error::InvalidConfig(_))));
        let one = vecs(&[0.1]);
        assert!(matches!(permutation_test(&one, &one, &crit(), &TestConfig::default()), Err(Error::Precondition(_))));
        let bad = TestConfig {
            alpha: 1.5,
            ..TestConfig::default()
        };
        assert!(permutation_test(&x, &x, &crit(), &bad).is_err());
    }

    #[test]
    fn sign_flip_scheme_enumerates_flips() {
        let x = vecs(&[1.0, 1.0, 1.0]);
        let y = vecs(&[0.0, 0.0, 0.0]);
        let cfg = TestConfig {
            resamples: Resamples::Exhaustive,
            scheme: Scheme::PairedSignFlip,
            ..TestConfig::default()
        };
        let r = permutation_test(&x, &y, &crit(), &cfg).unwrap();
        assert_eq!(r.statistics.len(), 8);
        assert!((r.share - 7.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn bonferroni_level() {
        let cfg = TestConfig {
            correction: Correction::Bonferroni,
            ..TestConfig::default()
        };
        assert!((cfg.corrected_alpha(56) - 0.05 / 56.0).abs() < 1e-15);
    }

    #[test]
    fn all_pairs_report() {
        let t = QualityTable::from_fn(
            vec!["A".into(), "B".into(), "C".into()],
            (0..5).map(|d| format!("d{d}")).collect(),
            crit(),
            |c, d, _| [0.9, 0.5, 0.1][c] + 0.01 * d as f64,
        )
        .unwrap();
        let cfg = TestConfig {
            resamples: Resamples::Exhaustive,
            ..TestConfig::default()
        };
        let report = test_all_pairs(&t, &cfg).unwrap();
        assert_eq!(report.pairs().count(), 6);
        assert_eq!(report.significant_edges(false), vec![("A".into(), "B".into()), ("A".into(), "C".into()), ("B".into(), "C".into())]);
        let table = report.render_table();
        assert!(table.contains("−") && table.lines().count() == 4, "{table}");
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }

    #[test]
    fn single_pair_matches_report() {
        let t = QualityTable::from_fn(
            vec!["A".into(), "B".into(), "C".into()],
            (0..6).map(|d| format!("d{d}")).collect(),
            crit(),
            |c, d, _| [0.6, 0.5, 0.55][c] + 0.07 * ((d * (c + 2)) % 5) as f64,
        )
        .unwrap();
        let cfg = TestConfig {
            resamples: Resamples::MonteCarlo(150),
            seed: 5,
            correction: Correction::Bonferroni,
            ..TestConfig::default()
        };
        let report = test_all_pairs(&t, &cfg).unwrap();
        for (x, y) in [("A", "B"), ("C", "A"), ("B", "C")] {
            assert_eq!(&test_pair(&t, x, y, &cfg).unwrap(), report.get(x, y).unwrap());
        }
        assert!(test_pair(&t, "A", "A", &cfg).is_err());
    }
}
