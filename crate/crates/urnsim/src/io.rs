//! File formats: edge lists, initial states, replacement schemes, trajectory
//! and ensemble outputs.
//!
//! Vertices are 1-based in every file and 0-based in memory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use urn_core::graph::DirectedGraph;
use urn_core::montecarlo::EnsembleResult;
use urn_core::urn::{HeterogeneousScheme, ReplacementMatrix, Trajectory, UrnState};

use crate::error::CliError;
use crate::provenance::Provenance;

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// `"n m"` then `m` lines `"i j"`.
pub fn edge_list_to_string(g: &DirectedGraph) -> String {
    let mut out = format!("{} {}\n", g.n_vertices(), g.n_edges());
    for &(i, j) in g.edges() {
        let _ = writeln!(out, "{} {}", i + 1, j + 1);
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<DirectedGraph> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let bad = |line: usize, what: &str| CliError::Usage(format!("edge list line {}: {what}", line + 1));
    let (hl, header) = lines.next().ok_or_else(|| CliError::Usage("edge list is empty".into()))?;
    let (n, m) = parse_pair(header).ok_or_else(|| bad(hl, "expected \"n m\""))?;
    let mut edges = Vec::with_capacity(m);
    for (ln, line) in lines {
        let (i, j) = parse_pair(line).ok_or_else(|| bad(ln, "expected \"i j\""))?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(bad(ln, "vertex out of range 1..n"));
        }
        edges.push((i - 1, j - 1));
    }
    if edges.len() != m {
        return Err(CliError::Usage(format!("edge list declares {m} edges but has {}", edges.len())));
    }
    Ok(DirectedGraph::new(n, edges)?)
}

fn parse_pair(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    it.next().is_none().then_some((a, b))
}

/// JSON mirror of the edge list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphJson {
    pub fn from_graph(g: &DirectedGraph) -> Self {
        GraphJson { n: g.n_vertices(), edges: g.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect() }
    }

    pub fn into_graph(self) -> Result<DirectedGraph> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for [i, j] in self.edges {
            if i == 0 || j == 0 || i > self.n || j > self.n {
                return Err(CliError::Usage(format!("edge ({i}, {j}) out of range 1..{}", self.n)));
            }
            edges.push((i - 1, j - 1));
        }
        Ok(DirectedGraph::new(self.n, edges)?)
    }
}

pub fn graph_to_json(g: &DirectedGraph) -> String {
    serde_json::to_string_pretty(&GraphJson::from_graph(g)).expect("graph serializes") + "\n"
}

pub fn parse_graph_json(text: &str) -> Result<DirectedGraph> {
    let raw: GraphJson = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("graph JSON: {e}")))?;
    raw.into_graph()
}

/// Reads a graph; `.json` files use the JSON mirror, anything else the edge list.
pub fn read_graph(path: &Path) -> Result<DirectedGraph> {
    let text = read(path)?;
    if is_json(path) {
        parse_graph_json(&text)
    } else {
        parse_edge_list(&text)
    }
}

pub fn write_graph(path: &Path, g: &DirectedGraph) -> Result<()> {
    let text = if is_json(path) { graph_to_json(g) } else { edge_list_to_string(g) };
    write_file(path, &text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialJson {
    pub white: Vec<u64>,
    pub black: Vec<u64>,
}

pub fn read_initial(path: &Path) -> Result<UrnState> {
    let raw: InitialJson =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("initial state JSON: {e}")))?;
    Ok(UrnState::new(raw.white, raw.black)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub a: u64,
    pub b: u64,
    pub m: u64,
}

/// `{"matrices": [{"a": .., "b": .., "m": ..}, ...]}`, one entry per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeJson {
    pub matrices: Vec<MatrixJson>,
}

pub fn read_scheme(path: &Path) -> Result<HeterogeneousScheme> {
    let raw: SchemeJson =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("scheme JSON: {e}")))?;
    let matrices = raw
        .matrices
        .iter()
        .map(|r| ReplacementMatrix::new(r.a, r.b, r.m))
        .collect::<urn_core::Result<Vec<_>>>()?;
    Ok(HeterogeneousScheme::new(matrices))
}

fn csv_row(t: u64, values: impl IntoIterator<Item = f64>) -> String {
    let mut line = t.to_string();
    for v in values {
        let _ = write!(line, ",{v}");
    }
    line.push('\n');
    line
}

/// Header `t,Z_1,...,Z_n`, one row per recorded time.
pub fn trajectory_csv(tr: &Trajectory, n: usize, prov: &Provenance) -> String {
    let mut out = prov.csv_block();
    out.push('t');
    for i in 1..=n {
        let _ = write!(out, ",Z_{i}");
    }
    out.push('\n');
    for (t, z) in &tr.records {
        out.push_str(&csv_row(*t, z.iter().copied()));
    }
    out
}

#[derive(Serialize)]
struct TrajectoryRecord<'a> {
    t: u64,
    z: &'a [f64],
}

/// One provenance record, then `{t, z}` per recorded time.
pub fn trajectory_jsonl(tr: &Trajectory, prov: &Provenance) -> String {
    let mut out = prov.jsonl_record();
    for (t, z) in &tr.records {
        out.push_str(&serde_json::to_string(&TrajectoryRecord { t: *t, z }).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Header `t,mean_1,...,mean_n,var_phi`, one row per checkpoint.
pub fn summary_csv(res: &EnsembleResult, prov: &Provenance) -> String {
    let n = res.n_vertices();
    let mut out = prov.csv_block();
    out.push('t');
    for i in 1..=n {
        let _ = write!(out, ",mean_{i}");
    }
    out.push_str(",var_phi\n");
    for (k, &t) in res.checkpoints.iter().enumerate() {
        out.push_str(&csv_row(t, res.mean_z.row(k).iter().copied().chain([res.var_phi[k]])));
    }
    out
}

#[derive(Serialize)]
struct WithProvenance<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON object with a leading `provenance` field and the fields of `body`.
pub fn json_with_provenance<T: Serialize>(body: &T, prov: &Provenance) -> String {
    serde_json::to_string_pretty(&WithProvenance { provenance: prov, body }).expect("output serializes") + "\n"
}

#[derive(Serialize)]
pub struct EnsembleOutput<'a> {
    pub ensemble: &'a EnsembleResult,
}

#[cfg(test)]
mod tests {
    use super::*;
    use urn_core::graph::{generate_graph, GraphFamily, GraphParams};

    #[test]
    fn edge_list_round_trip() {
        let g = generate_graph(GraphFamily::StarUndirected, &GraphParams::n(5), 0).unwrap();
        let text = edge_list_to_string(&g);
        assert!(text.starts_with("5 8\n1 2\n2 1\n"));
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(edge_list_to_string(&back), text);
        assert_eq!(parse_graph_json(&graph_to_json(&g)).unwrap(), g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("2 1\n1 3\n").is_err());
        assert!(parse_edge_list("2 2\n1 2\n").is_err());
        assert!(parse_edge_list("2 2\n1 2\n1 2\n").is_err());
        assert!(parse_edge_list("2 1\n1 x\n").is_err());
    }
}
