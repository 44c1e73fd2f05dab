//! Simulation study on a known dominance structure.
//!
//! Seven classifiers have expected quality vectors on a recursive graph
//! whose spread is set by a separation parameter. Each run draws Gaussian
//! quality vectors around these means, computes sample orders and
//! significance orders with every method, and scores the found edges
//! against the true ones.

use std::fmt::Write as _;
use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::baselines::{combine_heuristics, friedman_all, heuristic_edges, rank_order};
use crate::dominance::{full_order, DominanceConfig, PoolingScope};
use crate::error::{Error, Result};
use crate::lp::SolverConfig;
use crate::model::{CriterionSpec, QualityTable, SystemOptions};
use crate::stat_test::{test_all_pairs, Correction, Resamples, Scheme, TestConfig};

pub const NUM_CLASSIFIERS: usize = 7;

/// Expected quality vectors and the edges of componentwise dominance
/// between them.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub eta: f64,
    pub thetas: Vec<[f64; 2]>,
    /// Directed edges `(better, worse)` over classifier indices, sorted.
    pub true_edges: Vec<(usize, usize)>,
}

/// `theta_1 = (1, 1)`; each other mean is its parent shifted down by
/// multiples of `eta`.
pub fn make_ground_truth(eta: f64) -> Result<GroundTruth> {
    if !(eta > 0.0) {
        return Err(Error::InvalidConfig(format!("separation must be positive, got {eta}")));
    }
    let shift = |t: [f64; 2], a: f64, b: f64| [t[0] - a * eta, t[1] - b * eta];
    let t1 = [1.0, 1.0];
    let t2 = shift(t1, 1.0, 2.0);
    let t3 = shift(t1, 2.0, 1.0);
    let thetas = vec![t1, t2, t3, shift(t2, 0.5, 0.5), shift(t2, 0.25, 1.0), shift(t3, 1.0, 0.25), shift(t3, 0.5, 0.5)];
    if thetas.iter().flatten().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidConfig(format!("separation {eta} moves a mean outside [0, 1]")));
    }
    let true_edges = vec![(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (1, 3), (1, 4), (2, 5), (2, 6)];
    Ok(GroundTruth { eta, thetas, true_edges })
}

pub fn classifier_names() -> Vec<String> {
    (1..=NUM_CLASSIFIERS).map(|i| format!("C{i}")).collect()
}

/// How draws are brought back into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Clamp,
    /// Per run and criterion, rescale the drawn values linearly onto [0, 1].
    MinMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub eta: f64,
    pub s: usize,
    /// Variance of each coordinate; the covariance is `sigma_eps * I`.
    pub sigma_eps: f64,
    pub runs: usize,
    /// Resamples per test; `None` uses `100 s`.
    pub resamples: Option<usize>,
    pub seed: u64,
    pub normalization: Normalization,
}

impl SimScenario {
    pub fn new(eta: f64, s: usize) -> Self {
        Self {
            eta,
            s,
            sigma_eps: 0.05,
            runs: 25,
            resamples: None,
            seed: 0,
            normalization: Normalization::Clamp,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.s < 2 {
            return Err(Error::InvalidConfig(format!("need at least two data sets, got {}", self.s)));
        }
        if !(self.sigma_eps >= 0.0) || !self.sigma_eps.is_finite() {
            return Err(Error::InvalidConfig(format!("noise variance must be finite and nonnegative, got {}", self.sigma_eps)));
        }
        if self.resamples == Some(0) {
            return Err(Error::InvalidConfig("number of resamples must be positive".into()));
        }
        Ok(())
    }

    pub fn num_resamples(&self) -> usize {
        self.resamples.unwrap_or(100 * self.s)
    }

    /// Seed of one run; it depends on the scenario's own parameters only,
    /// so a run draws the same data whatever other scenarios are studied.
    fn run_seed(&self, run: usize) -> [u8; 32] {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.eta.to_bits().to_le_bytes());
        bytes[16..24].copy_from_slice(&(self.s as u64).to_le_bytes());
        bytes[24..].copy_from_slice(&(run as u64).to_le_bytes());
        bytes
    }

    /// Seed of the permutation tests of one run, drawn from a stream apart
    /// from the data. Both δ values use it, so they see the same resamples.
    fn test_seed(&self, run: usize) -> u64 {
        let mut rng = ChaCha8Rng::from_seed(self.run_seed(run));
        rng.set_stream(1);
        rng.next_u64()
    }
}

/// The twelve scenarios: `eta` in {0.01, 0.05, 0.1} and `s` in {7, 10, 15, 18}.
pub fn standard_scenarios() -> Vec<SimScenario> {
    [0.01, 0.05, 0.1]
        .into_iter()
        .flat_map(|eta| [7, 10, 15, 18].into_iter().map(move |s| SimScenario::new(eta, s)))
        .collect()
}

pub fn simulation_criteria() -> Vec<CriterionSpec> {
    vec![CriterionSpec::metric("q1"), CriterionSpec::metric("q2")]
}

/// Quality table of one run: `s` draws per classifier around its mean.
pub fn sample_run(gt: &GroundTruth, scenario: &SimScenario, run: usize) -> Result<QualityTable> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::from_seed(scenario.run_seed(run));
    let noise = Normal::new(0.0, scenario.sigma_eps.sqrt()).expect("finite standard deviation");
    let s = scenario.s;
    let mut values = vec![0.0; NUM_CLASSIFIERS * s * 2];
    for (c, theta) in gt.thetas.iter().enumerate() {
        for d in 0..s {
            for k in 0..2 {
                values[(c * s + d) * 2 + k] = theta[k] + noise.sample(&mut rng);
            }
        }
    }
    match scenario.normalization {
        Normalization::Clamp => values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0)),
        Normalization::MinMax => {
            for k in 0..2 {
                let column = values.iter().skip(k).step_by(2);
                let lo = column.clone().copied().fold(f64::INFINITY, f64::min);
                let hi = column.copied().fold(f64::NEG_INFINITY, f64::max);
                let span = hi - lo;
                for v in values.iter_mut().skip(k).step_by(2) {
                    *v = if span > 0.0 { (*v - lo) / span } else { v.clamp(0.0, 1.0) };
                }
            }
        }
    }
    QualityTable::new(
        classifier_names(),
        (1..=s).map(|d| format!("D{d}")).collect(),
        simulation_criteria(),
        values,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// `2 TP / (2 TP + FP + FN)`, and 1 when all three counts are zero.
    pub f_score: f64,
}

/// Scores directed strict edges against the true edges.
pub fn evaluate_edges(found: &[(usize, usize)], gt: &GroundTruth) -> EvalMetrics {
    let mut found = found.to_vec();
    found.sort_unstable();
    found.dedup();
    let tp = found.iter().filter(|e| gt.true_edges.contains(e)).count();
    let fp = found.len() - tp;
    let fn_ = gt.true_edges.len() - tp;
    let denom = 2 * tp + fp + fn_;
    let f_score = if denom == 0 { 1.0 } else { 2.0 * tp as f64 / denom as f64 };
    EvalMetrics { tp, fp, fn_, f_score }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// δ-dominance evaluated in the sample.
    GsdSample,
    /// Strictly better average rank on both criteria.
    RankSample,
    /// Permutation test at δ = 0.
    GsdTest,
    /// Permutation test at the small positive δ of the study.
    GsdTestSmallDelta,
    AllTest,
    OneTest,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::GsdSample,
        Method::RankSample,
        Method::GsdTest,
        Method::GsdTestSmallDelta,
        Method::AllTest,
        Method::OneTest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::GsdSample => "gsd_sample",
            Method::RankSample => "rank_sample",
            Method::GsdTest => "gsd_test_delta0",
            Method::GsdTestSmallDelta => "gsd_test_small_delta",
            Method::AllTest => "all_test",
            Method::OneTest => "one_test",
        }
    }
}

/// Which edge set of a method a record scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Sample,
    Uncorrected,
    Bonferroni,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Sample => "sample",
            Variant::Uncorrected => "uncorrected",
            Variant::Bonferroni => "bonferroni",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub methods: Vec<Method>,
    pub alpha: f64,
    /// δ of [`Method::GsdTestSmallDelta`].
    pub small_delta: f64,
    /// δ of [`Method::GsdSample`].
    pub sample_delta: f64,
    pub sample_scope: PoolingScope,
    pub scheme: Scheme,
    /// Stop resampling once every reported decision is fixed.
    pub early_stop: bool,
    pub system: SystemOptions,
    pub solver: SolverConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            alpha: 0.05,
            small_delta: 1e-5,
            sample_delta: 0.0,
            sample_scope: PoolingScope::Pairwise,
            scheme: Scheme::Pooled,
            early_stop: true,
            system: SystemOptions::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub eta: f64,
    pub s: usize,
    pub run: usize,
    pub method: Method,
    pub variant: Variant,
    pub metrics: EvalMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub records: Vec<StudyRecord>,
}

/// Mean and standard error of the F-score over runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub se: f64,
    pub runs: usize,
}

impl StudyResult {
    /// F-score summary of one method and variant in one scenario.
    pub fn summary(&self, eta: f64, s: usize, method: Method, variant: Variant) -> Option<Summary> {
        let f: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.eta == eta && r.s == s && r.method == method && r.variant == variant)
            .map(|r| r.metrics.f_score)
            .collect();
        if f.is_empty() {
            return None;
        }
        let n = f.len() as f64;
        let mean = f.iter().sum::<f64>() / n;
        let se = if f.len() > 1 {
            (f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Some(Summary { mean, se, runs: f.len() })
    }

    fn scenarios(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for r in &self.records {
            if !out.contains(&(r.eta, r.s)) {
                out.push((r.eta, r.s));
            }
        }
        out
    }

    fn series(&self) -> Vec<(Method, Variant)> {
        let mut out: Vec<(Method, Variant)> = self.records.iter().map(|r| (r.method, r.variant)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Long format: `eta,s,run,method,variant,metric,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Csv {
            location: "output".into(),
            message: e.to_string(),
        };
        w.write_record(["eta", "s", "run", "method", "variant", "metric", "value"]).map_err(err)?;
        for r in &self.records {
            let m = &r.metrics;
            let cells = [
                ("tp", m.tp.to_string()),
                ("fp", m.fp.to_string()),
                ("fn", m.fn_.to_string()),
                ("f_score", m.f_score.to_string()),
            ];
            for (metric, value) in cells {
                w.write_record([
                    r.eta.to_string(),
                    r.s.to_string(),
                    r.run.to_string(),
                    r.method.name().to_string(),
                    r.variant.name().to_string(),
                    metric.to_string(),
                    value,
                ])
                .map_err(err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Mean F-score (± standard error) per scenario and series.
    pub fn render_summary(&self) -> String {
        let series = self.series();
        let mut out = String::new();
        for (eta, s) in self.scenarios() {
            let _ = writeln!(out, "eta={eta} s={s}");
            for &(method, variant) in &series {
                if let Some(sm) = self.summary(eta, s, method, variant) {
                    let _ = writeln!(out, "  {:<22} {:<12} F={:.3} ± {:.3}", method.name(), variant.name(), sm.mean, sm.se);
                }
            }
        }
        out
    }
}

fn index_edges(edges: &[(String, String)], names: &[String]) -> Vec<(usize, usize)> {
    let idx = |n: &String| names.iter().position(|c| c == n).expect("edge names are classifiers");
    edges.iter().map(|(a, b)| (idx(a), idx(b))).collect()
}

/// Scores every method of `cfg` on one table.
pub fn evaluate_run(table: &QualityTable, gt: &GroundTruth, scenario: &SimScenario, run: usize, cfg: &StudyConfig) -> Result<Vec<StudyRecord>> {
    let names = table.classifiers().to_vec();
    let mut out = Vec::new();
    let mut push = |method: Method, variant: Variant, edges: &[(usize, usize)]| {
        out.push(StudyRecord {
            eta: scenario.eta,
            s: scenario.s,
            run,
            method,
            variant,
            metrics: evaluate_edges(edges, gt),
        });
    };
    for &method in &cfg.methods {
        match method {
            Method::GsdSample => {
                let dcfg = DominanceConfig {
                    delta: cfg.sample_delta,
                    scope: cfg.sample_scope,
                    system: cfg.system.clone(),
                    solver: cfg.solver.clone(),
                    ..Default::default()
                };
                push(method, Variant::Sample, &full_order(table, &dcfg)?.strict_edges());
            }
            Method::RankSample => push(method, Variant::Sample, &rank_order(table).strict_edges()),
            Method::GsdTest | Method::GsdTestSmallDelta => {
                let delta = if method == Method::GsdTest { 0.0 } else { cfg.small_delta };
                let tcfg = TestConfig {
                    alpha: cfg.alpha,
                    delta,
                    resamples: Resamples::MonteCarlo(scenario.num_resamples()),
                    seed: scenario.test_seed(run),
                    correction: Correction::Bonferroni,
                    scheme: cfg.scheme,
                    early_stop: cfg.early_stop,
                    system: cfg.system.clone(),
                    solver: cfg.solver.clone(),
                    ..Default::default()
                };
                let report = test_all_pairs(table, &tcfg)?;
                push(method, Variant::Uncorrected, &index_edges(&report.significant_edges(false), &names));
                push(method, Variant::Bonferroni, &index_edges(&report.significant_edges(true), &names));
            }
            Method::AllTest | Method::OneTest => {
                let verdicts = combine_heuristics(&friedman_all(table, cfg.alpha)?)?;
                let edges = heuristic_edges(&verdicts, method == Method::AllTest);
                push(method, Variant::Uncorrected, &index_edges(&edges, &names));
            }
        }
    }
    Ok(out)
}

/// Runs every scenario. Runs are evaluated in parallel; records come out
/// in scenario, run and method order whatever the thread count.
pub fn run_study(scenarios: &[SimScenario], cfg: &StudyConfig) -> Result<StudyResult> {
    let mut jobs = Vec::new();
    for sc in scenarios {
        sc.validate()?;
        let gt = make_ground_truth(sc.eta)?;
        for run in 0..sc.runs {
            jobs.push((sc, gt.clone(), run));
        }
    }
    let per_job: Vec<Vec<StudyRecord>> = jobs
        .par_iter()
        .map(|(sc, gt, run)| {
            let table = sample_run(gt, sc, *run)?;
            evaluate_run(&table, gt, sc, *run, cfg)
        })
        .collect::<Result<_>>()?;
    Ok(StudyResult {
        records: per_job.into_iter().flatten().collect(),
    })
}
