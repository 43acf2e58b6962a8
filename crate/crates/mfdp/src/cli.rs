//! Command-line front end.
//!
//! Every subcommand produces one or more named documents. With `--out DIR`
//! they are written as files into `DIR`; otherwise they go to stdout, each
//! preceded by a `# name` line when there is more than one. `--json`
//! replaces the CSV documents with a single `result.json`.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfdp_core::closed::{generalized_n_bound, PsiWeight};
use mfdp_core::simulation::{Dependence, McResult, SamplerKind, Scenario, ScenarioConfig};
use mfdp_core::{
    fixed_threshold_report, median_unbiased_pi0, storey_pi0, PValueSet, ThresholdWindow,
};
use serde_json::{json, Value};

use crate::analysis::{analyze, envelope_json, kappa_json, AnalysisOptions};
use crate::format::{self, EstimateRow, SimulationRow};
use crate::input::{read_pvalues, ColumnSpec};
use crate::montecarlo::{estimate_error_rate, estimate_power, table1_scenarios, table2_scenarios};
use crate::verify::check_equivalence;
use crate::CliError;

/// Median-FDP confidence envelopes, adjusted p-values and simulations.
#[derive(Debug, Parser)]
#[command(name = "mfdp", version)]
pub struct RunConfig {
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Envelope, adjusted p-values and rejections for a p-value file.
    Analyze(AnalyzeArgs),
    /// Point estimates of the fraction of true hypotheses.
    Estimate(EstimateArgs),
    /// The envelope curves at all their jump points.
    Envelope(EnvelopeArgs),
    /// Monte Carlo error rates and power for Gaussian scenarios.
    Simulate(SimulateArgs),
    /// Check the improved envelope against brute-force closed testing.
    VerifyEquivalence(VerifyArgs),
}

/// Input file and output options shared by the data subcommands.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV or TSV file with one p-value column.
    pub input: PathBuf,
    /// Column by header name or 1-based position.
    #[arg(long)]
    pub column: Option<String>,
    #[command(flatten)]
    #[allow(missing_docs)]
    pub output: OutputArgs,
}

/// Where results go.
#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Directory for output files; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit one JSON document instead of CSV.
    #[arg(long)]
    pub json: bool,
}

/// Threshold window and envelope intercept.
#[derive(Debug, Args, Clone)]
pub struct WindowArgs {
    /// Lower end of the threshold window.
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    /// Upper end of the threshold window.
    #[arg(long, default_value_t = 0.1)]
    pub t_max_window: f64,
    /// Envelope intercept; defaults to 1/(2m).
    #[arg(long)]
    pub c: Option<f64>,
}

impl WindowArgs {
    fn window(&self) -> Result<ThresholdWindow, CliError> {
        Ok(ThresholdWindow::new(self.t_min, self.t_max_window)?)
    }
}

/// `analyze` options.
#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[allow(missing_docs)]
    pub input: InputArgs,
    #[command(flatten)]
    #[allow(missing_docs)]
    pub window: WindowArgs,
    /// Target median FDP; repeatable or comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05])]
    pub gamma: Vec<f64>,
}

/// Which estimator `estimate` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// `#{p > λ} / (m (1 - λ))`.
    Storey,
    /// `(#{p > t} + #{p >= 1 - t}) / m`.
    MedianUnbiased,
    /// Both rows.
    Both,
}

/// `estimate` options.
#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[allow(missing_docs)]
    pub input: InputArgs,
    /// Estimator.
    #[arg(long, value_enum, default_value_t = MethodArg::Storey)]
    pub method: MethodArg,
    /// Storey tuning parameter.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Median-unbiased tuning parameter.
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    /// Weight the median-unbiased estimate: one, linear or quadratic.
    #[arg(long)]
    pub psi: Option<String>,
    /// Also report FDP and TDP bounds at this fixed threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
}

/// `envelope` options.
#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    #[allow(missing_docs)]
    pub input: InputArgs,
    #[command(flatten)]
    #[allow(missing_docs)]
    pub window: WindowArgs,
}

/// What `simulate` estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    /// Error rate only.
    Error,
    /// Power only.
    Power,
    /// Error rate, and power when there are false hypotheses.
    Both,
}

/// Statistic sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    /// Factor construction.
    Factor,
    /// Dense Cholesky factor.
    Dense,
}

/// `simulate` options.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Preset table: 1 (error rates) or 2 (power).
    #[arg(long, conflicts_with = "scenario", value_parser = clap::value_parser!(u8).range(1..=2))]
    pub table: Option<u8>,
    /// in, ho:RHO, bl:RHO[:BLOCKS], ne[:BLOCKS:WITHIN:BETWEEN].
    #[arg(long)]
    pub scenario: Option<String>,
    /// Fraction of true nulls.
    #[arg(long, default_value_t = 1.0)]
    pub pi0: f64,
    /// Mean shift of the false hypotheses.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Number of hypotheses.
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    /// Replicates per scenario.
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    /// Base seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Target median FDP values for power.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1])]
    pub gamma: Vec<f64>,
    /// BH levels for power.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05])]
    pub alpha: Vec<f64>,
    #[command(flatten)]
    #[allow(missing_docs)]
    pub window: WindowArgs,
    /// Statistic sampler.
    #[arg(long, value_enum, default_value_t = SamplerArg::Factor)]
    pub sampler: SamplerArg,
    /// What to estimate for `--scenario`.
    #[arg(long, value_enum, default_value_t = MeasureArg::Both)]
    pub measure: MeasureArg,
    /// Compute power from the unimproved envelope.
    #[arg(long)]
    pub unimproved: bool,
    #[command(flatten)]
    #[allow(missing_docs)]
    pub output: OutputArgs,
}

/// `verify-equivalence` options.
#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random instances.
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    /// Seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

/// A named output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    /// File name.
    pub name: String,
    /// Contents.
    pub content: String,
}

impl Document {
    fn new(name: &str, content: String) -> Self {
        Document {
            name: name.to_string(),
            content,
        }
    }
}

/// Result of [`run`]: documents plus an exit status (nonzero only when a
/// verification found mismatches).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    /// Documents to emit.
    pub documents: Vec<Document>,
    /// Output settings, `None` for stdout only.
    pub out: Option<PathBuf>,
    /// Exit status.
    pub status: i32,
}

fn json_doc(value: Value) -> Vec<Document> {
    let mut s = serde_json::to_string_pretty(&value).expect("serialisable");
    s.push('\n');
    vec![Document::new("result.json", s)]
}

fn load(input: &InputArgs) -> Result<Vec<f64>, CliError> {
    let column = match &input.column {
        Some(c) => ColumnSpec::parse(c)?,
        None => ColumnSpec::Auto,
    };
    read_pvalues(&input.input, &column)
}

fn check_gammas(gammas: &[f64]) -> Result<(), CliError> {
    match gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        Some(g) => Err(CliError::Validation(format!("gamma {g} outside [0,1]"))),
        None => Ok(()),
    }
}

/// Executes a parsed command line.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (documents, out, status) = match &cfg.command {
        Command::Analyze(a) => (run_analyze(a)?, a.input.output.out.clone(), 0),
        Command::Estimate(a) => (run_estimate(a)?, a.input.output.out.clone(), 0),
        Command::Envelope(a) => (run_envelope(a)?, a.input.output.out.clone(), 0),
        Command::Simulate(a) => (run_simulate(a)?, a.output.out.clone(), 0),
        Command::VerifyEquivalence(a) => {
            let (docs, ok) = run_verify(a)?;
            (docs, None, if ok { 0 } else { 1 })
        }
    };
    Ok(RunOutput {
        documents,
        out,
        status,
    })
}

fn run_analyze(a: &AnalyzeArgs) -> Result<Vec<Document>, CliError> {
    check_gammas(&a.gamma)?;
    let values = load(&a.input)?;
    let opts = AnalysisOptions {
        window: a.window.window()?,
        c: a.window.c,
        gammas: a.gamma.clone(),
    };
    let analysis = analyze(&values, &opts)?;
    if a.input.output.json {
        return Ok(json_doc(analysis.to_json()));
    }
    Ok(vec![
        Document::new("adjusted.csv", analysis.adjusted_csv()),
        Document::new("summary.csv", analysis.summary_csv()),
        Document::new("envelope.csv", analysis.envelope_csv()),
    ])
}

fn run_estimate(a: &EstimateArgs) -> Result<Vec<Document>, CliError> {
    let p = PValueSet::new(&load(&a.input)?)?;
    let mut rows = Vec::new();
    if matches!(a.method, MethodArg::Storey | MethodArg::Both) {
        rows.push(EstimateRow::from(&storey_pi0(&p, a.lambda)?));
    }
    if matches!(a.method, MethodArg::MedianUnbiased | MethodArg::Both) {
        match &a.psi {
            None => rows.push(EstimateRow::from(&median_unbiased_pi0(&p, a.t)?)),
            Some(name) => {
                let psi = PsiWeight::preset(name)
                    .ok_or_else(|| CliError::Validation(format!("unknown psi preset '{name}'")))?;
                let n = generalized_n_bound(&p, a.t, &psi)?;
                let raw = n as f64 / p.len() as f64;
                rows.push(EstimateRow {
                    method: format!("median_unbiased_psi_{}", psi.name()),
                    tuning: a.t,
                    raw,
                    clamped: raw.min(1.0),
                });
            }
        }
    } else if a.psi.is_some() {
        return Err(CliError::Validation("--psi applies to the median-unbiased estimator".into()));
    }
    let fixed = a.threshold.map(|t| fixed_threshold_report(&p, t)).transpose()?;
    if a.input.output.json {
        let mut v = json!({
            "m": p.len(),
            "estimates": rows.iter().map(|r| json!({
                "method": r.method,
                "tuning": r.tuning,
                "raw": r.raw,
                "clamped": r.clamped,
            })).collect::<Vec<_>>(),
        });
        if let Some(f) = &fixed {
            v["fixed_threshold"] = json!({
                "t": f.t,
                "R": f.rejections,
                "V_bar": f.v_bar,
                "fdp_bound": f.fdp_bound,
                "tdp_lower": f.tdp_lower,
                "S_lower": f.s_lower,
            });
        }
        return Ok(json_doc(v));
    }
    let mut docs = vec![Document::new("estimate.csv", format::estimate_csv(&rows))];
    if let Some(f) = &fixed {
        docs.push(Document::new("fixed_threshold.csv", format::fixed_threshold_csv(f)));
    }
    Ok(docs)
}

fn run_envelope(a: &EnvelopeArgs) -> Result<Vec<Document>, CliError> {
    let values = load(&a.input)?;
    let opts = AnalysisOptions {
        window: a.window.window()?,
        c: a.window.c,
        gammas: Vec::new(),
    };
    let analysis = analyze(&values, &opts)?;
    if a.input.output.json {
        return Ok(json_doc(json!({
            "m": analysis.p.len(),
            "window": [opts.window.s1(), opts.window.s2()],
            "c": analysis.base.c(),
            "kappa_max": kappa_json(&analysis.base),
            "envelope": envelope_json(&analysis.envelope_rows()),
        })));
    }
    Ok(vec![Document::new("envelope.csv", analysis.envelope_csv())])
}

/// Parses `in`, `ho:RHO`, `bl:RHO[:BLOCKS]` or `ne[:BLOCKS:WITHIN:BETWEEN]`.
pub fn parse_scenario(s: &str) -> Result<Dependence, CliError> {
    let bad = || CliError::Validation(format!("cannot parse scenario '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<f64, CliError> { parts[i].parse().map_err(|_| bad()) };
    let int = |i: usize| -> Result<usize, CliError> { parts[i].parse().map_err(|_| bad()) };
    match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
        ("in", 1) => Ok(Dependence::Independent),
        ("ho", 2) => Ok(Dependence::Homogeneous { rho: num(1)? }),
        ("bl", 2) => Ok(Dependence::five_blocks(num(1)?)),
        ("bl", 3) => Ok(Dependence::Blocks {
            n_blocks: int(2)?,
            rho: num(1)?,
        }),
        ("ne", 1) => Ok(Dependence::negative_blocks()),
        ("ne", 4) => Ok(Dependence::NegativeBlocks {
            n_blocks: int(1)?,
            rho_within: num(2)?,
            rho_between: num(3)?,
        }),
        _ => Err(bad()),
    }
}

fn customise(mut cfg: ScenarioConfig, a: &SimulateArgs) -> Result<ScenarioConfig, CliError> {
    cfg.m = a.m;
    cfg.reps = a.reps;
    cfg.seed = a.seed;
    cfg.window = a.window.window()?;
    cfg.c = a.window.c;
    cfg.gamma_grid = a.gamma.clone();
    cfg.bh_alpha = a.alpha.clone();
    cfg.improved_for_power = !a.unimproved;
    cfg.sampler = match a.sampler {
        SamplerArg::Factor => SamplerKind::Factor,
        SamplerArg::Dense => SamplerKind::DenseCholesky,
    };
    Ok(cfg)
}

fn simulate_one(cfg: ScenarioConfig, error: bool, power: bool) -> Result<SimulationRow, CliError> {
    let scenario = Scenario::new(cfg)?;
    let mut result = if error {
        estimate_error_rate(&scenario)?
    } else {
        let mut r = McResult::from_error_count(0, scenario.config().reps);
        r.error_rate = None;
        r
    };
    if power && scenario.n_false() > 0 {
        let p = estimate_power(&scenario)?;
        result.power_by_gamma = p.power_by_gamma;
        result.bh_power = p.bh_power;
    }
    Ok(SimulationRow { scenario, result })
}

fn run_simulate(a: &SimulateArgs) -> Result<Vec<Document>, CliError> {
    check_gammas(&a.gamma)?;
    let rows = match (a.table, &a.scenario) {
        (Some(1), _) => table1_scenarios()
            .into_iter()
            .map(|c| simulate_one(customise(c, a)?, true, false))
            .collect::<Result<Vec<_>, _>>()?,
        (Some(_), _) => table2_scenarios()
            .into_iter()
            .map(|c| simulate_one(customise(c, a)?, false, true))
            .collect::<Result<Vec<_>, _>>()?,
        (None, Some(s)) => {
            let cfg = customise(ScenarioConfig::new(parse_scenario(s)?, a.pi0, a.delta), a)?;
            let (error, power) = match a.measure {
                MeasureArg::Error => (true, false),
                MeasureArg::Power => (false, true),
                MeasureArg::Both => (true, cfg.pi0 < 1.0),
            };
            if power && !error && n_false(&cfg) == 0 {
                return Err(CliError::Validation("power needs pi0 < 1".into()));
            }
            vec![simulate_one(cfg, error, power)?]
        }
        (None, None) => return Err(CliError::Validation("give --table or --scenario".into())),
    };
    if a.output.json {
        return Ok(json_doc(simulation_json(&rows)));
    }
    Ok(vec![Document::new("simulation.csv", format::simulation_csv(&rows))])
}

fn n_false(cfg: &ScenarioConfig) -> usize {
    ((1.0 - cfg.pi0) * cfg.m as f64).round() as usize
}

fn rate_json(r: &mfdp_core::simulation::Rate) -> Value {
    json!({ "estimate": r.estimate, "se": r.se })
}

fn simulation_json(rows: &[SimulationRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|row| {
            let c = row.scenario.config();
            json!({
                "setting": c.dependence.code(),
                "rho": c.dependence.rho(),
                "pi0": c.pi0,
                "delta": c.delta,
                "m": c.m,
                "reps": row.result.reps_used,
                "seed": c.seed,
                "error_rate": row.result.error_rate.as_ref().map(rate_json),
                "power": row.result.power_by_gamma.iter()
                    .map(|(g, r)| json!({ "gamma": g, "estimate": r.estimate, "se": r.se }))
                    .collect::<Vec<_>>(),
                "bh_power": row.result.bh_power.iter()
                    .map(|(a, r)| json!({ "alpha": a, "estimate": r.estimate, "se": r.se }))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "scenarios": rows })
}

fn run_verify(a: &VerifyArgs) -> Result<(Vec<Document>, bool), CliError> {
    let report = check_equivalence(a.instances, a.seed)?;
    let ok = report.mismatches.is_empty();
    if a.json {
        let v = json!({
            "instances": report.instances,
            "checks": report.checks,
            "mismatches": report.mismatches.iter().map(|m| json!({
                "p": m.p, "c": m.c, "t": m.t, "envelope": m.envelope, "closed": m.closed,
            })).collect::<Vec<_>>(),
            "pass": ok,
        });
        return Ok((json_doc(v), ok));
    }
    let mut s = format!(
        "{}: {} instances, {} threshold points, {} mismatches\n",
        if ok { "PASS" } else { "FAIL" },
        report.instances,
        report.checks,
        report.mismatches.len()
    );
    for m in &report.mismatches {
        s.push_str(&format!("  p={:?} c={} t={} envelope={} closed={}\n", m.p, m.c, m.t, m.envelope, m.closed));
    }
    Ok((vec![Document::new("verify.txt", s)], ok))
}

/// Writes documents to `out` (created if needed) or to stdout.
pub fn emit(documents: &[Document], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            for d in documents {
                let path = dir.join(&d.name);
                std::fs::write(&path, &d.content).map_err(|e| CliError::io(&path, e))?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let many = documents.len() > 1;
            for d in documents {
                let res = if many {
                    write!(lock, "# {}\n{}", d.name, d.content)
                } else {
                    lock.write_all(d.content.as_bytes())
                };
                res.map_err(|e| CliError::io("<stdout>", e))?;
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs, emits, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = run(&cfg).and_then(|o| emit(&o.documents, o.out.as_deref()).map(|_| o.status));
    match result {
        Ok(status) => status,
        Err(e) => {
            eprintln!("mfdp: {e}");
            e.exit_code()
        }
    }
}
