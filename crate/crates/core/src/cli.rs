//! Command-line driver: JSON configuration in, CSV tables and a JSON report
//! envelope out.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::composite::{compose_many, tensor_complex, CompositeIndex};
use crate::error::Error;
use crate::inference::PriorSpec;
use crate::infogain::{
    closed_form_gain_infogain_prior, closed_form_gain_uniform, solve_malus_ivp, three_outcome_grid,
    two_outcome_grid, verify_flatness, FFunctionParams,
};
use crate::io::{fmt_f64, MapJson, OperatorJson, PipelineJson, StateJson};
use crate::measurement::{arrangement_for, outcome_probs, simulate_arrangement};
use crate::rng::seeded;
use crate::sim::{
    completeness_check, consistency_scaling, infer_state, predicted_outcome_probs, run_pipeline, state_distance,
    HiddenLabel, RunLog, RunRecord,
};
use crate::simplex::ProbVector;
use crate::state::{to_complex, Sign, StateVectorC};
use crate::transform::{check_postulate32, constraint_coeffs_with_tol, recast_to_complex, INVARIANT_TOL};

#[derive(Debug, Parser)]
#[command(name = "qlab", version, about = "Information-gain reconstruction laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random stream; overrides a seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// `csv` writes tables as CSV next to the JSON report; `json` embeds
    /// them in the report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Information gain across true probabilities.
    Infogain,
    /// Numerical solutions of the outcome-probability ODE.
    Malus,
    /// Constraint coefficients and complex form of a real map.
    Recast {
        #[arg(long, default_value_t = INVARIANT_TOL)]
        tol: f64,
    },
    /// Global-phase invariance check of a real map.
    Check32 {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Monte Carlo run of a pipeline configuration.
    Simulate,
    /// State estimate from a run log with hidden outcomes.
    Infer,
    /// Inference/transformation commutation across run counts.
    Consistency,
    /// Independence of outcomes from pre-preparation interactions.
    Completeness,
    /// Realization of a measurement through a reference measurement.
    Arrange,
    /// Composite state from factor states.
    Compose,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Infogain => "infogain",
            Command::Malus => "malus",
            Command::Recast { .. } => "recast",
            Command::Check32 { .. } => "check32",
            Command::Simulate => "simulate",
            Command::Infer => "infer",
            Command::Consistency => "consistency",
            Command::Completeness => "completeness",
            Command::Arrange => "arrange",
            Command::Compose => "compose",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Precondition(String),
    Check(String),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Check(_) => 4,
            CliError::Output(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Precondition(m) | CliError::Check(m) | CliError::Output(m) => m,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn precondition(e: Error) -> CliError {
    CliError::Precondition(e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(u64),
    T(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(x) => x.to_string(),
            Cell::T(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) => json!(x),
            Cell::I(x) => json!(x),
            Cell::T(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
}

struct Report {
    results: Value,
    tables: Vec<Table>,
    /// Set by check commands whose acceptance threshold was missed.
    failure: Option<String>,
}

impl Report {
    fn ok(results: Value, tables: Vec<Table>) -> Self {
        Self { results, tables, failure: None }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    version: &'a str,
    seed: Option<u64>,
    config: &'a Value,
    results: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    tables: Option<Value>,
}

struct Ctx {
    config: Value,
    config_dir: PathBuf,
    seed: Option<u64>,
}

impl Ctx {
    fn parse<T: for<'de> Deserialize<'de>>(&self) -> CliResult<T> {
        serde_json::from_value(self.config.clone()).map_err(config_err)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.config_dir.join(p)
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let name = cli.command.name();
    let code = match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qlab {name}: {}", e.message());
            e.exit_code()
        }
    };
    eprintln!("qlab {name}: {:.3} s", start.elapsed().as_secs_f64());
    code
}

fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config_seed = config.get("seed").and_then(Value::as_u64);
    let ctx = Ctx {
        config,
        config_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        seed: cli.seed.or(config_seed),
    };
    let report = match &cli.command {
        Command::Infogain => cmd_infogain(&ctx)?,
        Command::Malus => cmd_malus(&ctx)?,
        Command::Recast { tol } => cmd_recast(&ctx, *tol)?,
        Command::Check32 { trials, tol } => cmd_check32(&ctx, *trials, *tol)?,
        Command::Simulate => cmd_simulate(&ctx)?,
        Command::Infer => cmd_infer(&ctx)?,
        Command::Consistency => cmd_consistency(&ctx)?,
        Command::Completeness => cmd_completeness(&ctx)?,
        Command::Arrange => cmd_arrange(&ctx)?,
        Command::Compose => cmd_compose(&ctx)?,
    };
    write_outputs(cli, &ctx, &report)?;
    match report.failure {
        Some(msg) => Err(CliError::Check(msg)),
        None => Ok(()),
    }
}

fn write_outputs(cli: &Cli, ctx: &Ctx, report: &Report) -> CliResult<()> {
    let out_err = |e: std::io::Error| CliError::Output(e.to_string());
    fs::create_dir_all(&cli.out).map_err(out_err)?;
    let name = cli.command.name();
    let tables = match cli.format {
        Format::Json => Some(Value::Object(
            report
                .tables
                .iter()
                .map(|t| {
                    let rows: Vec<Value> = t.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                    (t.name.clone(), json!({ "header": t.header, "rows": rows }))
                })
                .collect(),
        )),
        Format::Csv => {
            for t in &report.tables {
                let mut w = csv::Writer::from_path(cli.out.join(format!("{}.csv", t.name)))
                    .map_err(|e| CliError::Output(e.to_string()))?;
                w.write_record(&t.header).map_err(|e| CliError::Output(e.to_string()))?;
                for row in &t.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(|e| CliError::Output(e.to_string()))?;
                }
                w.flush().map_err(out_err)?;
            }
            None
        }
    };
    let env = Envelope {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        seed: ctx.seed,
        config: &ctx.config,
        results: &report.results,
        tables,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    fs::write(cli.out.join(format!("{name}.json")), text).map_err(out_err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PriorKind {
    InfoGain,
    UniformSimplex,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InfogainConfig {
    prior: PriorKind,
    outcomes: usize,
    trials: u64,
    #[serde(default = "default_resolution")]
    resolution: usize,
    #[serde(default)]
    points: Option<Vec<Vec<f64>>>,
}

fn default_resolution() -> usize {
    crate::inference::DEFAULT_RESOLUTION
}

fn cmd_infogain(ctx: &Ctx) -> CliResult<Report> {
    let c: InfogainConfig = ctx.parse()?;
    if c.outcomes < 2 {
        return Err(CliError::Config(format!("outcomes must be at least 2, got {}", c.outcomes)));
    }
    if c.trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    let grid: Vec<ProbVector<f64>> = match &c.points {
        Some(pts) => pts.iter().map(|p| ProbVector::new(p.clone())).collect::<Result<_, _>>().map_err(config_err)?,
        None => match c.outcomes {
            2 => two_outcome_grid(),
            3 => three_outcome_grid(),
            m => return Err(CliError::Config(format!("no default grid for {m} outcomes; give points"))),
        },
    };
    let prior = match c.prior {
        PriorKind::InfoGain => PriorSpec::InfoGain,
        PriorKind::UniformSimplex => PriorSpec::UniformSimplex,
    };
    let rep = verify_flatness(&prior, c.outcomes, c.trials, &grid, c.resolution).map_err(config_err)?;
    let closed = |p: &[f64]| -> Option<f64> {
        match c.prior {
            PriorKind::InfoGain => closed_form_gain_infogain_prior(c.outcomes, c.trials).ok().map(|f| f.total()),
            PriorKind::UniformSimplex if c.outcomes == 2 => closed_form_gain_uniform(c.trials, p[0]).ok(),
            PriorKind::UniformSimplex => None,
        }
    };
    let mut header: Vec<String> = (1..=c.outcomes).map(|k| format!("p{k}")).collect();
    header.extend(["delta_k", "quadrature_error", "closed_form"].map(String::from));
    let mut table = Table { name: "infogain".into(), header, rows: Vec::new() };
    let mut max_dev: Option<f64> = None;
    for pt in &rep.points {
        let cf = closed(&pt.truth);
        let mut row: Vec<Cell> = pt.truth.iter().map(|&x| Cell::F(x)).collect();
        row.push(Cell::F(pt.delta_k));
        row.push(Cell::F(pt.quadrature_error));
        row.push(cf.map_or(Cell::T(String::new()), Cell::F));
        if let Some(cf) = cf {
            max_dev = Some(max_dev.unwrap_or(0.0).max((pt.delta_k - cf).abs()));
        }
        table.rows.push(row);
    }
    let results = json!({
        "prior": match c.prior { PriorKind::InfoGain => "info-gain", PriorKind::UniformSimplex => "uniform-simplex" },
        "outcomes": c.outcomes,
        "trials": c.trials,
        "resolution": c.resolution,
        "chart_domain": rep.chart_domain,
        "spread": rep.spread,
        "mean": rep.fitted_constant,
        "closed_form_constant": match c.prior {
            PriorKind::InfoGain => closed_form_gain_infogain_prior(c.outcomes, c.trials).ok().map(|f| f.total()),
            PriorKind::UniformSimplex => None,
        },
        "max_closed_form_deviation": max_dev,
        "max_quadrature_error": rep.max_quadrature_error,
    });
    Ok(Report::ok(results, vec![table]))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MalusCase {
    a: f64,
    b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MalusConfig {
    cases: Vec<MalusCase>,
}

fn cmd_malus(ctx: &Ctx) -> CliResult<Report> {
    let c: MalusConfig = ctx.parse()?;
    let mut table = Table::new("malus", &["case", "a", "b", "lambda", "p1_numeric", "p1_exact"]);
    let mut summary = Vec::new();
    for (k, case) in c.cases.iter().enumerate() {
        let params = FFunctionParams::positive(case.a, case.b).map_err(config_err)?;
        let traj = solve_malus_ivp(case.a, case.b).map_err(config_err)?;
        let exact = |l: f64| crate::infogain::malus_law(l, &params);
        for (&l, &p) in traj.lambda.iter().zip(&traj.p1) {
            table.rows.push(vec![Cell::I(k as u64), Cell::F(case.a), Cell::F(case.b), Cell::F(l), Cell::F(p), Cell::F(exact(l))]);
        }
        summary.push(json!({
            "a": case.a,
            "b": case.b,
            "steps": traj.lambda.len(),
            "lambda_end": traj.lambda.last(),
            "reached_boundary": traj.reached_boundary,
            "max_deviation": traj.max_deviation(exact),
        }));
    }
    Ok(Report::ok(json!({ "cases": summary }), vec![table]))
}

fn load_ortho(ctx: &Ctx) -> CliResult<crate::transform::OrthoMap<f64>> {
    let map: MapJson = ctx.parse()?;
    let m = map.real_matrix().map_err(precondition)?;
    crate::transform::OrthoMap::new(m).map_err(precondition)
}

fn cmd_recast(ctx: &Ctx, tol: f64) -> CliResult<Report> {
    let m = load_ortho(ctx)?;
    let report = constraint_coeffs_with_tol(&m, tol);
    let complex = recast_to_complex(&m, tol).ok();
    let mut table = Table::new("blocks", &["row", "col", "type"]);
    for (k, row) in report.block_types.iter().enumerate() {
        for (i, t) in row.iter().enumerate() {
            let name = serde_json::to_value(t).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            table.rows.push(vec![Cell::I(k as u64), Cell::I(i as u64), Cell::T(name)]);
        }
    }
    let results = json!({
        "tolerance": tol,
        "report": report,
        "representable": complex.is_some(),
        "complex_map": complex.as_ref().map(MapJson::from_complex),
    });
    Ok(Report::ok(results, vec![table]))
}

fn cmd_check32(ctx: &Ctx, trials: usize, tol: f64) -> CliResult<Report> {
    let m = load_ortho(ctx)?;
    let mut rng = seeded(ctx.seed());
    let r = check_postulate32(&m, trials, &mut rng, tol).map_err(config_err)?;
    let witness = r.witness.as_ref().map(|w| {
        json!({
            "state": StateJson::from_state(&w.state),
            "chi0": w.chi0,
            "outcome": w.outcome,
            "deviation": w.deviation,
        })
    });
    let results = json!({
        "trials": trials,
        "tolerance": tol,
        "passed": r.passed,
        "max_deviation": r.max_deviation,
        "witness": witness,
    });
    let failure = (!r.passed).then(|| {
        format!(
            "outcome probabilities change under a global phase shift (max deviation {:.3e}); witness: {}",
            r.max_deviation,
            witness.map(|w| w.to_string()).unwrap_or_default()
        )
    });
    Ok(Report { results, tables: Vec::new(), failure })
}

fn label_str(h: Option<(HiddenLabel, Sign)>) -> (String, String) {
    match h {
        None => (String::new(), String::new()),
        Some((l, s)) => (
            match l {
                HiddenLabel::A => "a".into(),
                HiddenLabel::B => "b".into(),
            },
            match s {
                Sign::Plus => "+".into(),
                Sign::Minus => "-".into(),
            },
        ),
    }
}

fn cmd_simulate(ctx: &Ctx) -> CliResult<Report> {
    let j: PipelineJson = ctx.parse()?;
    let cfg = j.to_config(ctx.seed).map_err(config_err)?;
    let predicted = predicted_outcome_probs(&cfg).map_err(precondition)?;
    let log = run_pipeline(&cfg).map_err(precondition)?;
    let mut table = Table::new("runs", &["run", "outcome", "hidden_label", "hidden_sign", "retries"]);
    for r in &log.records {
        let (l, s) = label_str(r.hidden);
        table.rows.push(vec![Cell::I(r.run as u64), Cell::I(r.outcome as u64), Cell::T(l), Cell::T(s), Cell::I(r.retries)]);
    }
    let results = json!({
        "n": cfg.dim,
        "runs": log.runs(),
        "seed": cfg.seed,
        "counts": log.counts,
        "frequencies": log.frequencies(),
        "predicted_probs": predicted,
        "hidden_counts": log.hidden_counts,
        "label_counts": log.label_counts(),
        "mean_retries": log.mean_retries(),
    });
    Ok(Report::ok(results, vec![table]))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InferConfig {
    log: String,
    n: usize,
    #[serde(default)]
    truth: Option<StateJson>,
}

fn read_run_log(path: &Path, n: usize) -> CliResult<RunLog> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    let mut reveal = None;
    for row in rdr.records() {
        let row = row.map_err(config_err)?;
        let field = |i: usize| row.get(i).ok_or_else(|| CliError::Config(format!("short row {:?}", row)));
        let run: usize = field(0)?.parse().map_err(config_err)?;
        let outcome: usize = field(1)?.parse().map_err(config_err)?;
        let hidden = match (field(2)?, field(3)?) {
            ("", "") => None,
            (l, s) => Some((
                match l {
                    "a" => HiddenLabel::A,
                    "b" => HiddenLabel::B,
                    _ => return Err(CliError::Config(format!("bad hidden label {l:?}"))),
                },
                match s {
                    "+" => Sign::Plus,
                    "-" => Sign::Minus,
                    _ => return Err(CliError::Config(format!("bad hidden sign {s:?}"))),
                },
            )),
        };
        let retries: u64 = field(4)?.parse().map_err(config_err)?;
        reveal.get_or_insert(hidden.is_some());
        records.push(RunRecord { run, outcome, hidden, retries });
    }
    RunLog::from_records(n, n, records, reveal.unwrap_or(false)).map_err(config_err)
}

fn cmd_infer(ctx: &Ctx) -> CliResult<Report> {
    let c: InferConfig = ctx.parse()?;
    let log = read_run_log(&ctx.resolve(&c.log), c.n)?;
    let inf = infer_state(&log).map_err(precondition)?;
    let bound = 3.0 * inf.posterior.sigma;
    let truth = c.truth.as_ref().map(StateJson::to_state).transpose().map_err(config_err)?;
    let distance = truth.as_ref().map(|t| state_distance(t, &inf.map_state));
    let results = json!({
        "runs": inf.runs,
        "orthant": inf.orthant,
        "posterior_mean": inf.posterior.mean.entries(),
        "posterior_sigma": inf.posterior.sigma,
        "map_state": StateJson::from_state(&inf.map_state),
        "ambiguous_cells": inf.ambiguous_cells,
        "arc_distance_to_truth": distance,
        "three_sigma": bound,
        "within_three_sigma": distance.map(|d| d < bound),
    });
    Ok(Report::ok(results, Vec::new()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConsistencyConfig {
    state: StateJson,
    map: MapJson,
    measurement: OperatorJson,
    runs: Vec<usize>,
    reps: usize,
    /// Read through the envelope seed.
    #[serde(default, rename = "seed")]
    _seed: Option<u64>,
}

fn cmd_consistency(ctx: &Ctx) -> CliResult<Report> {
    let c: ConsistencyConfig = ctx.parse()?;
    let s = c.state.to_state().map_err(config_err)?;
    let m = c.map.to_complex().map_err(config_err)?;
    let meas = c.measurement.to_measurement().map_err(config_err)?;
    if c.runs.len() < 2 || c.reps == 0 {
        return Err(CliError::Config("need at least two run counts and one repetition".into()));
    }
    let pts = consistency_scaling(&s, &m, &meas, &c.runs, c.reps, ctx.seed()).map_err(precondition)?;
    let mut table = Table::new("consistency", &["runs", "mean_distance", "posterior_sigma"]);
    for p in &pts {
        table.rows.push(vec![Cell::I(p.runs as u64), Cell::F(p.mean_distance), Cell::F(0.5 / (p.runs as f64).sqrt())]);
    }
    let ratios: Vec<Value> = pts
        .windows(2)
        .map(|w| {
            let expected = (w[0].runs as f64 / w[1].runs as f64).sqrt();
            let ratio = w[1].mean_distance / w[0].mean_distance;
            json!({
                "from": w[0].runs,
                "to": w[1].runs,
                "ratio": ratio,
                "expected": expected,
                "within_band": (0.5 * expected..=1.5 * expected).contains(&ratio),
            })
        })
        .collect();
    let passed = ratios.iter().all(|r| r["within_band"] == json!(true));
    let results = json!({ "points": pts, "ratios": ratios, "passed": passed });
    let failure = (!passed).then(|| "distance does not scale as 1/sqrt(n) within 50%".to_string());
    Ok(Report { results, tables: vec![table], failure })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompletenessConfig {
    pipeline: PipelineJson,
    pre_interactions: Vec<MapJson>,
    #[serde(default = "default_alpha")]
    alpha: f64,
}

fn default_alpha() -> f64 {
    0.01
}

fn cmd_completeness(ctx: &Ctx) -> CliResult<Report> {
    let c: CompletenessConfig = ctx.parse()?;
    let cfg = c.pipeline.to_config(ctx.seed).map_err(config_err)?;
    let pres = c.pre_interactions.iter().map(MapJson::to_complex).collect::<Result<Vec<_>, _>>().map_err(config_err)?;
    let rep = completeness_check(&cfg, &pres, c.alpha).map_err(|e| match e {
        Error::UnreachablePreparation { .. } => precondition(e),
        e => config_err(e),
    })?;
    let mut header = vec!["pre_interaction".to_string()];
    header.extend((0..cfg.measurement.outcomes()).map(|k| format!("count{k}")));
    let mut table = Table { name: "completeness".into(), header, rows: Vec::new() };
    for (k, row) in rep.counts.iter().enumerate() {
        let mut r = vec![Cell::I(k as u64)];
        r.extend(row.iter().map(|&x| Cell::I(x)));
        table.rows.push(r);
    }
    let failure = (!rep.passed).then(|| format!("outcome counts depend on pre-preparation history (p = {:.3e})", rep.p_value));
    Ok(Report { results: serde_json::to_value(&rep).map_err(config_err)?, tables: vec![table], failure })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrangeConfig {
    target: OperatorJson,
    reference: OperatorJson,
    state: StateJson,
}

fn cmd_arrange(ctx: &Ctx) -> CliResult<Report> {
    let c: ArrangeConfig = ctx.parse()?;
    let target = c.target.to_measurement().map_err(config_err)?;
    let reference = c.reference.to_measurement().map_err(config_err)?;
    let v = to_complex(&c.state.to_state().map_err(config_err)?);
    let arr = arrangement_for(&target, &reference).map_err(config_err)?;
    let out = simulate_arrangement(&arr, &reference, &v).map_err(config_err)?;
    let direct = outcome_probs(&target, &v).map_err(config_err)?;
    let mut table = Table::new("arrange", &["outcome", "value", "p_direct", "p_arrangement", "overlap"]);
    let mut overlaps = Vec::new();
    for i in 0..target.dim() {
        let t = StateVectorC::new(target.basis()[i].clone()).map_err(config_err)?;
        let ov = crate::complex::modulus(out.outputs[i].inner(&t));
        overlaps.push(ov);
        table.rows.push(vec![
            Cell::I(i as u64),
            Cell::F(target.values()[i]),
            Cell::F(direct.entries()[i]),
            Cell::F(out.probs.entries()[i]),
            Cell::F(ov),
        ]);
    }
    let results = json!({
        "pre": MapJson::from_complex(&arr.pre),
        "post": MapJson::from_complex(&arr.post),
        "max_probability_deviation": direct.max_abs_diff(&out.probs),
        "min_overlap": overlaps.iter().copied().fold(f64::INFINITY, f64::min),
        "expected_value": crate::measurement::expected_value(&target, &v).map_err(config_err)?,
    });
    Ok(Report::ok(results, vec![table]))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposeConfig {
    states: Vec<StateJson>,
}

fn cmd_compose(ctx: &Ctx) -> CliResult<Report> {
    let c: ComposeConfig = ctx.parse()?;
    let states = c.states.iter().map(StateJson::to_state).collect::<Result<Vec<_>, _>>().map_err(config_err)?;
    let composite = compose_many(&states).map_err(config_err)?;
    let index = CompositeIndex::new(states.iter().map(|s| s.dim()).collect()).map_err(config_err)?;
    let tensor = states
        .iter()
        .skip(1)
        .fold(to_complex(&states[0]), |acc, s| tensor_complex(&acc, &to_complex(s)));
    let mut table = Table::new("compose", &["index", "multi_index", "prob", "phase"]);
    for k in 0..index.total() {
        let mi = index.unflatten(k).iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-");
        table.rows.push(vec![
            Cell::I(k as u64),
            Cell::T(mi),
            Cell::F(composite.probs().entries()[k]),
            Cell::F(composite.phases()[k]),
        ]);
    }
    let results = json!({
        "factor_dims": index.dims(),
        "flattening": "row-major",
        "state": StateJson::from_state(&composite),
        "tensor_max_deviation": to_complex(&composite).max_abs_diff(&tensor),
    });
    Ok(Report::ok(results, vec![table]))
}
