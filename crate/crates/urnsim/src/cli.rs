//! Command-line entry point.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage or input error,
//! 3 some vertex has zero in-degree, 4 numerically singular system.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use urn_core::graph::DirectedGraph;
use urn_core::montecarlo::{brute_force_distribution, conditional_mean, oracle_report, EnsembleSpec};
use urn_core::rng::seeded;
use urn_core::theory::{explicit_inverse_equilibrium, heterogeneous_limit, predict};
use urn_core::urn::{record_run, run_trajectory, RecordPolicy, Scheme, Simulator};

use crate::config::{load_config, RunConfig};
use crate::error::{exit, CliError};
use crate::io::{self, EnsembleOutput};
use crate::parallel::{empirical_distribution_parallel, run_ensemble_parallel, with_threads};
use crate::provenance::Provenance;
use crate::verify::{run_suite, CriticalScaling, Suite, SuiteInput, DEFAULT_DT, DEFAULT_T0};

type Result<T> = std::result::Result<T, CliError>;

/// Default horizon of `simulate`.
pub const DEFAULT_HORIZON: u64 = 1_000;

#[derive(Debug, Parser)]
#[command(name = "urnsim", version, about = "Interacting two-colour urns on directed graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated graph as an edge list and print its summary.
    Generate(CommonArgs),
    /// Print the limit, regime and covariance predictions as JSON.
    Predict(CommonArgs),
    /// Simulate one trajectory (--runs 1) or an ensemble.
    Simulate(CommonArgs),
    /// Run a verification suite; exit 1 unless every check passes.
    Verify(CommonArgs),
    /// Compare the simulated law at a short horizon with the exact law.
    Oracle(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Predict(_) => "predict",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
            Command::Oracle(_) => "oracle",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Generate(a)
            | Command::Predict(a)
            | Command::Simulate(a)
            | Command::Verify(a)
            | Command::Oracle(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Flat key = value config file, or any earlier urnsim output.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub run: RunConfig,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("urnsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a parsed command and returns its exit code.
pub fn execute(cli: &Cli) -> Result<u8> {
    let args = cli.command.args();
    let cfg = match &args.config {
        Some(path) => load_config(path)?.overridden_by(&args.run),
        None => args.run.clone(),
    };
    with_threads(args.threads, || match &cli.command {
        Command::Generate(_) => generate(resolve_generate(cfg)),
        Command::Predict(_) => predict_cmd(cfg),
        Command::Simulate(_) => simulate(resolve_simulate(cfg)),
        Command::Verify(_) => resolve_verify(cfg).and_then(verify),
        Command::Oracle(_) => oracle(resolve_oracle(cfg)),
    })
    .map_err(CliError::Usage)?
}

fn provenance(command: &str, cfg: &RunConfig) -> Provenance {
    Provenance::new(command, cfg.to_toml())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

pub fn checkpoint_policy(spec: &str) -> Result<RecordPolicy> {
    match spec.trim() {
        "geometric" => Ok(RecordPolicy::GeometricCheckpoints),
        "every" => Ok(RecordPolicy::EveryStep),
        "final" => Ok(RecordPolicy::FinalOnly),
        list => list
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(RecordPolicy::At)
            .map_err(|_| CliError::Usage(format!("checkpoints: expected geometric, every, final or t1,t2,..., got {list:?}"))),
    }
}

fn resolve_generate(mut cfg: RunConfig) -> RunConfig {
    cfg.graph_seed = Some(cfg.graph_seed.or(cfg.seed).unwrap_or(0));
    cfg
}

fn graph_summary(g: &DirectedGraph) -> String {
    let deg = g.in_degrees();
    let lo = deg.iter().min().copied().unwrap_or(0);
    let hi = deg.iter().max().copied().unwrap_or(0);
    format!(
        "n = {}, edges = {}, in-degree range = {lo}..{hi}, assumption (A) = {}",
        g.n_vertices(),
        g.n_edges(),
        g.check_assumption_a()
    )
}

fn generate(cfg: RunConfig) -> Result<u8> {
    if cfg.graph.is_some() {
        return Err(CliError::Usage("generate takes --family, not --graph".into()));
    }
    let g = cfg.load_graph(0)?;
    match &cfg.out {
        Some(path) => {
            io::write_graph(path, &g)?;
            println!("{}", graph_summary(&g));
        }
        None => {
            print!("{}", io::edge_list_to_string(&g));
            eprintln!("{}", graph_summary(&g));
        }
    }
    Ok(exit::OK)
}

fn predict_cmd(cfg: RunConfig) -> Result<u8> {
    let g = cfg.load_graph(cfg.graph_seed.unwrap_or(0))?;
    let prov = provenance("predict", &cfg);
    let allow = RunConfig::flag(cfg.allow_violations);
    let sources: Vec<usize> = g.in_degrees().iter().enumerate().filter(|(_, &d)| d == 0).map(|(i, _)| i).collect();
    let body = if let Some(path) = &cfg.scheme {
        if !sources.is_empty() && !allow {
            return Err(urn_core::Error::AssumptionAViolated { vertex: sources[0] }.into());
        }
        let h = io::read_scheme(path)?;
        let fractions = cfg.initial.as_ref().map(|_| cfg.initial_state(g.n_vertices())).transpose()?;
        let limit = heterogeneous_limit(&g, &h, fractions.map(|s| s.fractions()).as_deref())?;
        json!({ "heterogeneous_limit": limit, "sources": one_based(&sources) })
    } else {
        let (alpha, beta) = cfg
            .normalized_params()?
            .ok_or_else(|| CliError::Usage("predict needs --a/--b[/--m], --alpha/--beta, --polya or --scheme".into()))?;
        if sources.is_empty() {
            json!({ "report": predict(&g.weighted_adjacency()?, alpha, beta)? })
        } else if allow {
            let z = explicit_inverse_equilibrium(alpha, beta, &g.weighted_adjacency_allow_sources())?;
            let init = cfg.initial_state(g.n_vertices())?;
            let limits: Vec<_> = (0..g.n_vertices())
                .map(|i| {
                    if sources.contains(&i) {
                        json!({ "vertex": i + 1, "source": true, "limit": init.fraction(i) })
                    } else {
                        json!({ "vertex": i + 1, "source": false, "limit": z[i] })
                    }
                })
                .collect();
            json!({ "alpha": alpha, "beta": beta, "sources": one_based(&sources), "limits": limits })
        } else {
            return Err(urn_core::Error::AssumptionAViolated { vertex: sources[0] }.into());
        }
    };
    emit(&cfg.out, &io::json_with_provenance(&body, &prov))?;
    Ok(exit::OK)
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn resolve_simulate(mut cfg: RunConfig) -> RunConfig {
    cfg.horizon.get_or_insert(DEFAULT_HORIZON);
    cfg.runs.get_or_insert(1);
    cfg.seed.get_or_insert(0);
    cfg.checkpoints.get_or_insert_with(|| "geometric".into());
    if cfg.runs == Some(1) {
        let jsonl = cfg.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "jsonl"));
        cfg.format.get_or_insert_with(|| if jsonl { "jsonl" } else { "csv" }.into());
    }
    cfg
}

fn simulate(cfg: RunConfig) -> Result<u8> {
    let g = cfg.load_graph(cfg.graph_seed.unwrap_or(0))?;
    let n = g.n_vertices();
    let scheme = cfg.scheme(n)?;
    let initial = cfg.initial_state(n)?;
    let (horizon, runs, seed) = (cfg.horizon.unwrap(), cfg.runs.unwrap(), cfg.seed.unwrap());
    let policy = checkpoint_policy(cfg.checkpoints.as_deref().unwrap())?;
    let prov = provenance("simulate", &cfg);
    if runs == 0 {
        return Err(CliError::Usage("runs must be at least 1".into()));
    }
    if runs == 1 {
        if cfg.summary.is_some() {
            return Err(CliError::Usage("--summary needs --runs > 1".into()));
        }
        let tr = if RunConfig::flag(cfg.allow_violations) {
            let sim = Simulator::allow_sources(&g, scheme, initial)?;
            record_run(sim, horizon, &policy.times(horizon), &mut seeded(seed))?
        } else {
            run_trajectory(&g, &scheme, &initial, horizon, seed, &policy)?
        };
        let text = match cfg.format.as_deref() {
            Some("csv") => io::trajectory_csv(&tr, n, &prov),
            Some("jsonl") => io::trajectory_jsonl(&tr, &prov),
            other => return Err(CliError::Usage(format!("format must be csv or jsonl, got {other:?}"))),
        };
        emit(&cfg.out, &text)?;
        return Ok(exit::OK);
    }
    if cfg.format.is_some() {
        return Err(CliError::Usage("--format applies to single trajectories; ensembles are written as JSON".into()));
    }
    let spec = EnsembleSpec::new(&g, scheme, initial, horizon, runs, seed, &policy)?
        .retain(RunConfig::flag(cfg.retain));
    let res = run_ensemble_parallel(&spec)?;
    emit(&cfg.out, &io::json_with_provenance(&EnsembleOutput { ensemble: &res }, &prov))?;
    if let Some(path) = &cfg.summary {
        io::write_file(path, &io::summary_csv(&res, &prov))?;
    }
    Ok(exit::OK)
}

fn resolve_verify(mut cfg: RunConfig) -> Result<RunConfig> {
    let suite: Suite =
        cfg.suite.as_deref().ok_or_else(|| CliError::Usage("verify needs --suite".into()))?.parse()?;
    cfg.suite = Some(suite.name().into());
    cfg.horizon.get_or_insert(suite.default_horizon());
    cfg.runs.get_or_insert(suite.default_runs());
    cfg.seed.get_or_insert(0);
    if cfg.tol.is_none() {
        cfg.tol = suite.default_tol();
    }
    match suite {
        Suite::OdeTracking => {
            cfg.t0.get_or_insert(DEFAULT_T0);
            cfg.dt.get_or_insert(DEFAULT_DT);
        }
        Suite::CltCritical => {
            let s: CriticalScaling = cfg.scaling.as_deref().unwrap_or("tlogt").parse()?;
            cfg.scaling = Some(s.name().into());
        }
        _ => {}
    }
    Ok(cfg)
}

fn verify(cfg: RunConfig) -> Result<u8> {
    let suite: Suite = cfg.suite.as_deref().unwrap().parse()?;
    let g = cfg.load_graph(cfg.graph_seed.unwrap_or(0))?;
    let n = g.n_vertices();
    let input = SuiteInput {
        graph: &g,
        scheme: cfg.scheme(n)?,
        initial: cfg.initial_state(n)?,
        horizon: cfg.horizon.unwrap(),
        runs: cfg.runs.unwrap(),
        seed: cfg.seed.unwrap(),
        tol: cfg.tol,
        t0: cfg.t0.unwrap_or(DEFAULT_T0),
        dt: cfg.dt.unwrap_or(DEFAULT_DT),
        scaling: cfg.scaling.as_deref().unwrap_or("tlogt").parse()?,
    };
    let report = run_suite(suite, &input)?;
    if let Some(table) = report.details.get("table").and_then(|t| t.as_array()) {
        eprintln!("{:>6}  {:>10}  {:>10}  {:>10}", "vertex", "mean", "limit", "|Z - c|");
        for row in table {
            eprintln!(
                "{:>6}  {:>10.6}  {:>10.6}  {:>10.6}",
                row["vertex"],
                row["mean"].as_f64().unwrap_or(f64::NAN),
                row["limit"].as_f64().unwrap_or(f64::NAN),
                row["abs_dev"].as_f64().unwrap_or(f64::NAN)
            );
        }
    }
    for r in &report.reports {
        eprintln!("[{}] {}: {} (threshold {})", if r.pass { "PASS" } else { "FAIL" }, r.test, r.statistic, r.threshold);
    }
    emit(&cfg.out, &io::json_with_provenance(&report, &provenance("verify", &cfg)))?;
    Ok(if report.pass { exit::OK } else { exit::TEST_FAILURE })
}

fn resolve_oracle(mut cfg: RunConfig) -> RunConfig {
    cfg.horizon.get_or_insert(1);
    cfg.runs.get_or_insert(100_000);
    cfg.seed.get_or_insert(0);
    cfg
}

fn oracle(cfg: RunConfig) -> Result<u8> {
    let g = cfg.load_graph(cfg.graph_seed.unwrap_or(0))?;
    let n = g.n_vertices();
    let scheme: Scheme = cfg.scheme(n)?;
    let initial = cfg.initial_state(n)?;
    let (horizon, runs, seed) = (cfg.horizon.unwrap(), cfg.runs.unwrap(), cfg.seed.unwrap());
    let exact = brute_force_distribution(&g, &scheme, &initial, horizon)?;
    let empirical = empirical_distribution_parallel(&g, &scheme, &initial, horizon, runs, seed)?;
    let mut report = oracle_report(&empirical, &exact)?;
    if let Some(tol) = cfg.tol {
        report.threshold = tol;
        report.pass = report.tv <= tol;
    }
    let atoms: Vec<_> = exact
        .atoms
        .iter()
        .map(|(s, p)| {
            json!({
                "white": s.white,
                "black": s.black,
                "probability": p.to_string(),
                "empirical": empirical.counts.get(s).copied().unwrap_or(0) as f64 / runs as f64,
            })
        })
        .collect();
    let cm: Vec<String> = conditional_mean(&g, &scheme, &initial)?.iter().map(|q| q.to_string()).collect();
    let body = json!({ "report": report, "atoms": atoms, "conditional_mean": cm });
    emit(&cfg.out, &io::json_with_provenance(&body, &provenance("oracle", &cfg)))?;
    Ok(if report.pass { exit::OK } else { exit::TEST_FAILURE })
}
