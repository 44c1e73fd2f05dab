//! Command-line front end: ranking classifiers by generalized stochastic
//! dominance on a table of quality values.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsd::baselines::{combine_heuristics, friedman_all, heuristic_edges, rank_order};
use gsd::dominance::{check_dominance, full_order, hasse, pool, DominanceConfig, DominanceOrder, PoolingScope};
use gsd::io::{export_dot, load_csv, read_csv, uci_criteria, UCI_FIXTURES_CSV};
use gsd::lp::{solve_max_delta, DualSimplex, SolverConfig};
use gsd::model::{CriterionSpec, QualityTable, SystemOptions};
use gsd::simulation::{run_study, Normalization, SimScenario, StudyConfig};
use gsd::stat_test::{test_all_pairs, Correction, Resamples, Scheme, TestConfig};
use gsd::Error;

use crate::config::FileConfig;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "gsd", version, about = "Compare classifiers on several quality criteria by generalized stochastic dominance")]
struct Cli {
    /// Quality table in long CSV form: classifier,dataset,criterion,value.
    /// Defaults to the bundled fixtures.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// TOML file with defaults for the flags and the list of criteria.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Drop all metric information and compare by first-order dominance.
    #[arg(long, global = true)]
    ordinal_only: bool,
    /// Write the main artifact (DOT, CSV) to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether one classifier dominates another.
    Check {
        x: String,
        y: String,
        #[command(flatten)]
        order: OrderArgs,
    },
    /// Evaluate the relation on every ordered pair.
    Order(OrderArgs),
    /// Hasse diagram of the relation in DOT format. `--delta max` uses the
    /// largest admissible threshold.
    Hasse(OrderArgs),
    /// Largest admissible threshold.
    Deltamax {
        #[arg(long, value_enum)]
        pooling: Option<Pooling>,
    },
    /// Permutation test of every ordered pair.
    Test(TestArgs),
    /// Rank-based comparisons: average-rank order and Friedman/Nemenyi tests.
    Baseline {
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Simulation study on synthetic classifiers with known order.
    Simulate(SimulateArgs),
    /// Print the bundled fixture table.
    Fixtures,
}

#[derive(Debug, Args)]
struct OrderArgs {
    /// Threshold δ in [0, 1); `max` for the largest admissible one.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long, value_enum)]
    pooling: Option<Pooling>,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of Monte Carlo draws, `auto` or `exhaustive`.
    #[arg(long)]
    resamples: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    correction: Option<CorrectionArg>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    pooling: Option<Pooling>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Comma-separated effect sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1])]
    eta: Vec<f64>,
    /// Comma-separated numbers of data sets.
    #[arg(long, value_delimiter = ',', default_values_t = [7, 10, 15, 18])]
    datasets: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    runs: usize,
    /// Noise variance of each coordinate.
    #[arg(long, default_value_t = 0.05)]
    sigma_eps: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Draws per test; defaults to 100 times the number of data sets.
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Rescale each run onto [0, 1] instead of clamping.
    #[arg(long)]
    minmax: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pooling {
    Pairwise,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorrectionArg {
    None,
    Bonferroni,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Pooled,
    SignFlip,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(e) => match e {
                Error::DeltaInfeasible { .. } | Error::Inconsistent => EXIT_INFEASIBLE,
                Error::InvalidConfig(_) | Error::InvalidDelta(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// Flag values merged over the config file.
struct Context {
    file: FileConfig,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    ordinal_only: bool,
}

impl Context {
    fn new(cli: &Cli) -> Outcome<Self> {
        let file = match &cli.config {
            Some(p) => FileConfig::load(p).map_err(Failure::Usage)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            input: cli.input.clone().or_else(|| file.input.clone()),
            out: cli.out.clone().or_else(|| file.out.clone()),
            ordinal_only: cli.ordinal_only || file.ordinal_only.unwrap_or(false),
            file,
        })
    }

    fn criteria(&self) -> Outcome<Vec<CriterionSpec>> {
        Ok(self.file.criteria_specs().map_err(Failure::Usage)?.unwrap_or_else(uci_criteria))
    }

    fn table(&self) -> Outcome<QualityTable> {
        let criteria = self.criteria()?;
        Ok(match &self.input {
            Some(path) => load_csv(path, &criteria)?,
            None => read_csv(UCI_FIXTURES_CSV.as_bytes(), &criteria)?,
        })
    }

    fn system(&self) -> SystemOptions {
        SystemOptions {
            ordinal_only: self.ordinal_only,
            ..SystemOptions::default()
        }
    }

    fn pooling(&self, flag: Option<Pooling>, default: Pooling) -> Outcome<Pooling> {
        if let Some(p) = flag {
            return Ok(p);
        }
        match self.file.pooling.as_deref() {
            None => Ok(default),
            Some("pairwise") => Ok(Pooling::Pairwise),
            Some("all") => Ok(Pooling::All),
            Some(other) => Err(Failure::Usage(format!("unknown pooling `{other}` (pairwise or all)"))),
        }
    }

    fn alpha(&self, flag: Option<f64>) -> f64 {
        flag.or(self.file.alpha).unwrap_or(0.05)
    }

    fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.file.seed).unwrap_or(0)
    }

    fn scheme(&self, flag: Option<SchemeArg>) -> Outcome<Scheme> {
        let arg = match flag {
            Some(s) => s,
            None => match self.file.scheme.as_deref() {
                None | Some("pooled") => SchemeArg::Pooled,
                Some("sign-flip") => SchemeArg::SignFlip,
                Some(other) => return Err(Failure::Usage(format!("unknown scheme `{other}` (pooled or sign-flip)"))),
            },
        };
        Ok(match arg {
            SchemeArg::Pooled => Scheme::Pooled,
            SchemeArg::SignFlip => Scheme::PairedSignFlip,
        })
    }

    /// Writes `text` to `--out` when given, else to stdout.
    fn emit(&self, text: &str) -> Outcome<()> {
        match &self.out {
            Some(path) => write_file(path, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome<()> {
    std::fs::write(path, bytes).map_err(|e| Failure::Core(Error::Io(e)))
}

fn scope(p: Pooling) -> PoolingScope {
    match p {
        Pooling::Pairwise => PoolingScope::Pairwise,
        Pooling::All => PoolingScope::All,
    }
}

enum DeltaChoice {
    Value(f64),
    Max,
}

fn parse_delta(text: &str) -> Outcome<DeltaChoice> {
    if text.eq_ignore_ascii_case("max") {
        return Ok(DeltaChoice::Max);
    }
    text.parse::<f64>()
        .map(DeltaChoice::Value)
        .map_err(|_| Failure::Usage(format!("--delta expects a number or `max`, got `{text}`")))
}

/// Prints `-0` as `0` so outputs do not depend on the sign of a zero.
fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        v.to_string()
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Check { x, y, order } => cmd_check(&ctx, x, y, order),
        Command::Order(args) => cmd_order(&ctx, args),
        Command::Hasse(args) => cmd_hasse(&ctx, args),
        Command::Deltamax { pooling } => cmd_deltamax(&ctx, *pooling),
        Command::Test(args) => cmd_test(&ctx, args),
        Command::Baseline { alpha } => cmd_baseline(&ctx, *alpha),
        Command::Simulate(args) => cmd_simulate(&ctx, args),
        Command::Fixtures => ctx.emit(UCI_FIXTURES_CSV),
    }
}

fn max_delta(table: &QualityTable, pooling: Pooling, system: &SystemOptions) -> Outcome<f64> {
    let solver = DualSimplex::new(SolverConfig::default());
    let q = table.num_classifiers();
    match pooling {
        Pooling::All => {
            let all: Vec<usize> = (0..q).collect();
            Ok(solve_max_delta(&pool(table, &all, system)?.system, &solver)?)
        }
        Pooling::Pairwise => {
            let mut best = 1.0_f64;
            for i in 0..q {
                for j in i + 1..q {
                    best = best.min(solve_max_delta(&pool(table, &[i, j], system)?.system, &solver)?);
                }
            }
            Ok(best)
        }
    }
}

fn resolve_delta(ctx: &Context, table: &QualityTable, flag: &Option<String>, pooling: Pooling) -> Outcome<f64> {
    let choice = match flag {
        Some(text) => parse_delta(text)?,
        None => DeltaChoice::Value(ctx.file.delta.unwrap_or(0.0)),
    };
    match choice {
        DeltaChoice::Value(d) => Ok(d),
        DeltaChoice::Max => max_delta(table, pooling, &ctx.system()),
    }
}

fn cmd_check(ctx: &Context, x: &str, y: &str, args: &OrderArgs) -> Outcome<()> {
    let table = ctx.table()?;
    let pooling = ctx.pooling(args.pooling, Pooling::All)?;
    let delta = resolve_delta(ctx, &table, &args.delta, pooling)?;
    let (i, j) = (table.classifier_index(x)?, table.classifier_index(y)?);
    let members: Vec<usize> = match pooling {
        Pooling::All => (0..table.num_classifiers()).collect(),
        Pooling::Pairwise if i == j => vec![i],
        Pooling::Pairwise => vec![i, j],
    };
    let pooled = pool(&table, &members, &ctx.system())?;
    let result = check_dominance(&pooled.system, &pooled.law, x, y, delta, &SolverConfig::default())?;
    let mut out = String::new();
    let _ = writeln!(out, "pair: {x} >= {y}");
    let _ = writeln!(out, "delta: {}", num(delta));
    let _ = writeln!(out, "opt: {}", num(result.opt));
    let _ = writeln!(out, "verdict: {}", result.verdict);
    print!("{out}");
    if let Some(path) = &ctx.out {
        let mut cert = String::from("element,utility\n");
        for (e, u) in result.certificate.iter().enumerate() {
            let _ = writeln!(cert, "{e},{}", num(*u));
        }
        write_file(path, cert.as_bytes())?;
    }
    Ok(())
}

fn compute_order(ctx: &Context, table: &QualityTable, args: &OrderArgs) -> Outcome<(DominanceOrder, f64, Pooling)> {
    let pooling = ctx.pooling(args.pooling, Pooling::All)?;
    let delta = resolve_delta(ctx, table, &args.delta, pooling)?;
    let cfg = DominanceConfig {
        delta,
        scope: scope(pooling),
        system: ctx.system(),
        ..DominanceConfig::default()
    };
    Ok((full_order(table, &cfg)?, delta, pooling))
}

fn render_order(order: &DominanceOrder, delta: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "delta: {}", num(delta));
    let strict = order.strict_edge_names();
    let _ = writeln!(out, "strict: {}", strict.len());
    for (a, b) in &strict {
        let _ = writeln!(out, "  {a} > {b}");
    }
    let n = order.len();
    let mut equivalent = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if order.dominates(i, j) && order.dominates(j, i) {
                equivalent.push((order.classifiers[i].clone(), order.classifiers[j].clone()));
            }
        }
    }
    equivalent.sort();
    let _ = writeln!(out, "equivalent: {}", equivalent.len());
    for (a, b) in &equivalent {
        let _ = writeln!(out, "  {a} ~ {b}");
    }
    let mut incomparable: Vec<(String, String)> = order
        .incomparable_pairs()
        .into_iter()
        .map(|(i, j)| {
            let (a, b) = (order.classifiers[i].clone(), order.classifiers[j].clone());
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    incomparable.sort();
    let _ = writeln!(out, "incomparable: {}", incomparable.len());
    for (a, b) in &incomparable {
        let _ = writeln!(out, "  {a} | {b}");
    }
    out
}

fn cmd_order(ctx: &Context, args: &OrderArgs) -> Outcome<()> {
    let table = ctx.table()?;
    let (order, delta, _) = compute_order(ctx, &table, args)?;
    ctx.emit(&render_order(&order, delta))
}

fn cmd_hasse(ctx: &Context, args: &OrderArgs) -> Outcome<()> {
    let table = ctx.table()?;
    let (order, _, _) = compute_order(ctx, &table, args)?;
    ctx.emit(&export_dot(&hasse(&order)?))
}

fn cmd_deltamax(ctx: &Context, pooling: Option<Pooling>) -> Outcome<()> {
    let table = ctx.table()?;
    let pooling = ctx.pooling(pooling, Pooling::All)?;
    let dm = max_delta(&table, pooling, &ctx.system())?;
    ctx.emit(&format!("{}\n", num(dm)))
}

fn parse_resamples(text: &str) -> Outcome<Resamples> {
    match text.to_ascii_lowercase().as_str() {
        "auto" => Ok(Resamples::Auto),
        "exhaustive" => Ok(Resamples::Exhaustive),
        other => other
            .parse::<usize>()
            .map(Resamples::MonteCarlo)
            .map_err(|_| Failure::Usage(format!("--resamples expects a count, `auto` or `exhaustive`, got `{text}`"))),
    }
}

fn cmd_test(ctx: &Context, args: &TestArgs) -> Outcome<()> {
    let table = ctx.table()?;
    if ctx.pooling(args.pooling, Pooling::Pairwise)? == Pooling::All {
        return Err(Failure::Usage("the permutation test pools each pair on its own; use --pooling pairwise".into()));
    }
    let resamples = match (&args.resamples, &ctx.file.resamples) {
        (Some(text), _) => parse_resamples(text)?,
        (None, Some(v)) => parse_resamples(&v.as_text())?,
        (None, None) => Resamples::Auto,
    };
    let correction = match args.correction {
        Some(CorrectionArg::None) => Correction::None,
        Some(CorrectionArg::Bonferroni) => Correction::Bonferroni,
        None => match ctx.file.correction.as_deref() {
            None | Some("none") => Correction::None,
            Some("bonferroni") => Correction::Bonferroni,
            Some(other) => return Err(Failure::Usage(format!("unknown correction `{other}` (none or bonferroni)"))),
        },
    };
    let cfg = TestConfig {
        alpha: ctx.alpha(args.alpha),
        delta: args.delta.or(ctx.file.delta).unwrap_or(0.0),
        resamples,
        seed: ctx.seed(args.seed),
        correction,
        scheme: ctx.scheme(args.scheme)?,
        system: ctx.system(),
        ..TestConfig::default()
    };
    let report = test_all_pairs(&table, &cfg)?;
    let mut out = String::new();
    let _ = writeln!(out, "alpha: {} (per test {})", num(report.alpha), num(report.corrected_alpha));
    out.push_str(&report.render_table());
    let edges = report.significant_edges(cfg.correction == Correction::Bonferroni);
    let _ = writeln!(out, "significant: {}", edges.len());
    for (a, b) in &edges {
        let _ = writeln!(out, "  {a} > {b}");
    }
    print!("{out}");
    if let Some(path) = &ctx.out {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(())
}

fn cmd_baseline(ctx: &Context, alpha: Option<f64>) -> Outcome<()> {
    let table = ctx.table()?;
    let alpha = ctx.alpha(alpha);
    let mut out = String::new();
    let ranks = rank_order(&table);
    let strict = ranks.strict_edge_names();
    let _ = writeln!(out, "average-rank order: {}", strict.len());
    for (a, b) in &strict {
        let _ = writeln!(out, "  {a} > {b}");
    }
    let tests = friedman_all(&table, alpha)?;
    for t in &tests {
        let _ = writeln!(
            out,
            "friedman {}: statistic {:.4}, p {:.4e}, critical difference {:.4}, significant {}",
            t.criterion, t.statistic, t.p_value, t.critical_difference, t.significant
        );
    }
    let verdicts = combine_heuristics(&tests)?;
    for (label, all) in [("all-test", true), ("one-test", false)] {
        let edges = heuristic_edges(&verdicts, all);
        let _ = writeln!(out, "{label}: {}", edges.len());
        for (a, b) in &edges {
            let _ = writeln!(out, "  {a} > {b}");
        }
    }
    ctx.emit(&out)
}

fn cmd_simulate(ctx: &Context, args: &SimulateArgs) -> Outcome<()> {
    let seed = ctx.seed(args.seed);
    let scenarios: Vec<SimScenario> = args
        .eta
        .iter()
        .flat_map(|&eta| {
            args.datasets.iter().map(move |&s| SimScenario {
                sigma_eps: args.sigma_eps,
                runs: args.runs,
                resamples: args.resamples,
                seed,
                normalization: if args.minmax { Normalization::MinMax } else { Normalization::Clamp },
                ..SimScenario::new(eta, s)
            })
        })
        .collect();
    let cfg = StudyConfig {
        alpha: ctx.alpha(args.alpha),
        scheme: ctx.scheme(args.scheme)?,
        system: ctx.system(),
        ..StudyConfig::default()
    };
    let result = run_study(&scenarios, &cfg)?;
    print!("{}", result.render_summary());
    if let Some(path) = &ctx.out {
        let mut buf = Vec::new();
        result.write_csv(&mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(())
}
