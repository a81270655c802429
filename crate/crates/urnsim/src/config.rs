//! Run configuration: command-line flags and flat `key = value` files.
//!
//! Config files are flat TOML: one `key = value` per line, strings quoted,
//! keys spelled like the long flags with `_` for `-`. Flags override file
//! values. Any output written by `urnsim` can also be passed as a config
//! file; its embedded provenance block is read back.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use urn_core::graph::{generate_graph, DirectedGraph, GraphFamily, GraphParams};
use urn_core::urn::{ReplacementMatrix, Scheme, UrnState};

use crate::error::CliError;
use crate::io;
use crate::provenance::Provenance;

type Result<T> = std::result::Result<T, CliError>;

/// Largest `m` tried when turning fractional `α, β` into integer ball counts.
const MAX_DENOMINATOR: u64 = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Graph file: edge list, or the JSON mirror when the name ends in .json.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Generated graph family (star, cycle-undirected, cycle-directed,
    /// complete-loops, regular, er-min-indegree).
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Degree for the regular family.
    #[arg(long)]
    pub d: Option<usize>,
    /// Edge probability for the Erdős–Rényi family.
    #[arg(long)]
    pub p: Option<f64>,
    /// Seed for random graph families.
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// White balls sent after a white draw; with no --m a value in [0, 1]
    /// is read as the normalized alpha.
    #[arg(long)]
    pub a: Option<f64>,
    /// Black balls sent after a black draw; see --a.
    #[arg(long)]
    pub b: Option<f64>,
    /// Balls sent per edge and step.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Shorthand for a = b = m = 1.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub polya: Option<bool>,
    /// Per-vertex replacement matrices, JSON {"matrices": [{"a", "b", "m"}, ...]}.
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    /// Initial ball counts, JSON {"white": [...], "black": [...]}; default one of each.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub runs: Option<u64>,
    /// Master seed; for `generate` also the graph seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// geometric, every, final, or a comma-separated list of times.
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Trajectory format: csv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-checkpoint summary CSV for ensembles.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// consensus, clt, clt-critical, polya-rate, martingale, oracle, ode-tracking.
    #[arg(long)]
    pub suite: Option<String>,
    /// Override the suite's pass tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Start of the comparison window for ode-tracking.
    #[arg(long)]
    pub t0: Option<u64>,
    /// Euler step for ode-tracking.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Scaling for clt-critical: tlogt (default) or t-over-logt.
    #[arg(long)]
    pub scaling: Option<String>,
    /// Continue when some vertex has zero in-degree.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub allow_violations: Option<bool>,
    /// Keep every run's checkpoint values in the ensemble output.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub retain: Option<bool>,
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    /// Values set in `over` replace those in `self`.
    pub fn overridden_by(&self, over: &RunConfig) -> RunConfig {
        let mut base = toml::Table::try_from(self).expect("config is a table");
        let top = toml::Table::try_from(over).expect("config is a table");
        base.extend(top);
        base.try_into().expect("merged config deserializes")
    }

    pub fn family(&self) -> Result<Option<GraphFamily>> {
        self.family.as_deref().map(|f| f.parse().map_err(CliError::from)).transpose()
    }

    pub fn flag(v: Option<bool>) -> bool {
        v.unwrap_or(false)
    }

    /// Loads the graph from `graph` or generates it from `family`.
    pub fn load_graph(&self, default_seed: u64) -> Result<DirectedGraph> {
        match (&self.graph, self.family()?) {
            (Some(_), Some(_)) => Err(CliError::Usage("give either --graph or --family, not both".into())),
            (Some(path), None) => io::read_graph(path),
            (None, Some(family)) => {
                let n = self.n.ok_or_else(|| CliError::Usage("--family needs --n".into()))?;
                let params = GraphParams { n, d: self.d, p: self.p };
                Ok(generate_graph(family, &params, self.graph_seed.unwrap_or(default_seed))?)
            }
            (None, None) => Err(CliError::Usage("no graph: give --graph FILE or --family".into())),
        }
    }

    /// Homogeneous `(a, b, m)` from integer counts, fractions, or `--polya`.
    pub fn replacement_matrix(&self) -> Result<Option<ReplacementMatrix>> {
        if Self::flag(self.polya) {
            if self.a.is_some() || self.b.is_some() || self.alpha.is_some() || self.beta.is_some() {
                return Err(CliError::Usage("--polya conflicts with --a/--b/--alpha/--beta".into()));
            }
            return Ok(Some(ReplacementMatrix::polya(self.m.unwrap_or(1))?));
        }
        let (alpha, beta) = match (self.alpha, self.beta) {
            (Some(al), Some(be)) => (Some(al), Some(be)),
            (None, None) => (None, None),
            _ => return Err(CliError::Usage("--alpha and --beta go together".into())),
        };
        if let (Some(al), Some(be)) = (alpha, beta) {
            if self.a.is_some() || self.b.is_some() {
                return Err(CliError::Usage("give either --a/--b or --alpha/--beta".into()));
            }
            return rationalize(al, be, self.m).map(Some);
        }
        let (a, b) = match (self.a, self.b) {
            (Some(a), Some(b)) => (a, b),
            (None, None) => return Ok(None),
            _ => return Err(CliError::Usage("--a and --b go together".into())),
        };
        let integral = |x: f64| x >= 0.0 && x.fract() == 0.0;
        match self.m {
            Some(m) => {
                if !integral(a) || !integral(b) {
                    return Err(CliError::Usage("with --m, --a and --b must be whole ball counts".into()));
                }
                Ok(Some(ReplacementMatrix::new(a as u64, b as u64, m)?))
            }
            None if integral(a) && integral(b) => Ok(Some(ReplacementMatrix::new(a as u64, b as u64, 1)?)),
            None => rationalize(a, b, None).map(Some),
        }
    }

    /// Normalized `(α, β)` for theory-only commands.
    pub fn normalized_params(&self) -> Result<Option<(f64, f64)>> {
        if let (Some(al), Some(be)) = (self.alpha, self.beta) {
            if self.a.is_none() && self.b.is_none() && !Self::flag(self.polya) {
                return Ok(Some((al, be)));
            }
        }
        Ok(self.replacement_matrix()?.map(|r| (r.alpha(), r.beta())))
    }

    pub fn scheme(&self, n: usize) -> Result<Scheme> {
        match (&self.scheme, self.replacement_matrix()?) {
            (Some(_), Some(_)) => Err(CliError::Usage("give either --scheme or a homogeneous rule".into())),
            (Some(path), None) => {
                let s = Scheme::from(io::read_scheme(path)?);
                s.check_len(n)?;
                Ok(s)
            }
            (None, Some(r)) => Ok(Scheme::from(r)),
            (None, None) => Err(CliError::Usage("no replacement rule: give --a/--b[/--m], --polya or --scheme".into())),
        }
    }

    pub fn initial_state(&self, n: usize) -> Result<UrnState> {
        match &self.initial {
            Some(path) => {
                let s = io::read_initial(path)?;
                if s.len() != n {
                    return Err(CliError::Usage(format!("initial state has {} urns, graph has {n}", s.len())));
                }
                Ok(s)
            }
            None => Ok(UrnState::uniform(n)),
        }
    }
}

/// Smallest `m ≤ 10⁴` (or the given one) with `α m` and `β m` integral.
fn rationalize(alpha: f64, beta: f64, m: Option<u64>) -> Result<ReplacementMatrix> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
        return Err(CliError::Usage(format!("normalized parameters must lie in [0, 1], got {alpha}, {beta}")));
    }
    let fits = |m: u64| {
        let (x, y) = (alpha * m as f64, beta * m as f64);
        ((x - x.round()).abs() < 1e-9 && (y - y.round()).abs() < 1e-9).then(|| (x.round() as u64, y.round() as u64))
    };
    let candidates: Box<dyn Iterator<Item = u64>> = match m {
        Some(m) => Box::new(std::iter::once(m)),
        None => Box::new(1..=MAX_DENOMINATOR),
    };
    for m in candidates {
        if let Some((a, b)) = fits(m) {
            return Ok(ReplacementMatrix::new(a, b, m)?);
        }
    }
    Err(CliError::Usage(format!("cannot express alpha = {alpha}, beta = {beta} as whole ball counts")))
}

/// Reads a config file, or the provenance block of an earlier output.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    match Provenance::extract(&text) {
        Some(prov) => RunConfig::from_toml(&prov.config),
        None => RunConfig::from_toml(&text),
    }
}
