//! Finite directed graphs with optional self-loops.
//!
//! Vertices are `0..n` internally; file formats in `urnsim` use 1-based
//! labels. An edge `(i, j)` means urn `i` reinforces urn `j`. Undirected
//! graphs are stored with both orientations of every edge.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::spectral::Matrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    in_neighbours: Vec<Vec<usize>>,
}

impl DirectedGraph {
    /// Builds a graph, rejecting out-of-range endpoints and repeated edges.
    /// Edge order is preserved.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("graph needs at least one vertex".into()));
        }
        let mut seen = BTreeSet::new();
        let mut in_neighbours = vec![Vec::new(); n];
        for &(i, j) in &edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParams(format!("edge ({i}, {j}) out of range for {n} vertices")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidParams(format!("duplicate edge ({i}, {j})")));
            }
            in_neighbours[j].push(i);
        }
        Ok(DirectedGraph { n, edges, in_neighbours })
    }

    /// Adds both orientations of each pair; a pair `(i, i)` adds one self-loop.
    pub fn undirected(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(2 * pairs.len());
        for &(i, j) in pairs {
            edges.push((i, j));
            if i != j {
                edges.push((j, i));
            }
        }
        Self::new(n, edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        j < self.n && self.in_neighbours[j].contains(&i)
    }

    /// `in_neighbours()[i]` lists every `j` with an edge `j -> i`.
    pub fn in_neighbours(&self) -> &[Vec<usize>] {
        &self.in_neighbours
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        self.in_neighbours.iter().map(Vec::len).collect()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(i, _) in &self.edges {
            d[i] += 1;
        }
        d
    }

    /// True iff every vertex has positive in-degree.
    pub fn check_assumption_a(&self) -> bool {
        self.first_source().is_none()
    }

    /// First vertex with zero in-degree, if any.
    pub fn first_source(&self) -> Option<usize> {
        self.in_neighbours.iter().position(Vec::is_empty)
    }

    /// 0/1 adjacency, `A[i][j] = 1` iff `i -> j`.
    pub fn adjacency(&self) -> Matrix {
        let mut a = Matrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
        }
        a
    }

    /// Column-stochastic weighted adjacency: `Ã[i][j] = 1/d_j^in` on edges.
    pub fn weighted_adjacency(&self) -> Result<Matrix> {
        if let Some(vertex) = self.first_source() {
            return Err(Error::ZeroInDegree { vertex });
        }
        Ok(self.weighted_adjacency_allow_sources())
    }

    /// Same as [`weighted_adjacency`](Self::weighted_adjacency) but leaves the
    /// columns of zero in-degree vertices at zero instead of failing.
    pub fn weighted_adjacency_allow_sources(&self) -> Matrix {
        let deg = self.in_degrees();
        let mut a = Matrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0 / deg[j] as f64;
        }
        a
    }

    /// Every edge appears in both orientations.
    pub fn is_undirected(&self) -> bool {
        self.edges.iter().all(|&(i, j)| self.has_edge(j, i))
    }

    /// Common in-degree when all in- and out-degrees agree.
    pub fn regular_degree(&self) -> Option<usize> {
        let ins = self.in_degrees();
        let outs = self.out_degrees();
        let d = ins[0];
        (ins.iter().all(|&x| x == d) && outs.iter().all(|&x| x == d)).then_some(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFamily {
    CompleteWithLoops,
    CycleDirected,
    CycleUndirected,
    StarUndirected,
    DRegularRandom,
    ErdosRenyiMinIndegree,
}

impl GraphFamily {
    pub const ALL: [GraphFamily; 6] = [
        GraphFamily::CompleteWithLoops,
        GraphFamily::CycleDirected,
        GraphFamily::CycleUndirected,
        GraphFamily::StarUndirected,
        GraphFamily::DRegularRandom,
        GraphFamily::ErdosRenyiMinIndegree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphFamily::CompleteWithLoops => "complete-loops",
            GraphFamily::CycleDirected => "cycle-directed",
            GraphFamily::CycleUndirected => "cycle-undirected",
            GraphFamily::StarUndirected => "star",
            GraphFamily::DRegularRandom => "regular",
            GraphFamily::ErdosRenyiMinIndegree => "er-min-indegree",
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: alloc::string::String = s.chars().map(|c| if c == '_' { '-' } else { c.to_ascii_lowercase() }).collect();
        let family = match key.as_str() {
            "complete-loops" | "complete-with-loops" => GraphFamily::CompleteWithLoops,
            "cycle-directed" => GraphFamily::CycleDirected,
            "cycle-undirected" | "cycle" => GraphFamily::CycleUndirected,
            "star" | "star-undirected" => GraphFamily::StarUndirected,
            "regular" | "d-regular" | "d-regular-random" => GraphFamily::DRegularRandom,
            "er-min-indegree" | "erdos-renyi-min-indegree" | "er" => GraphFamily::ErdosRenyiMinIndegree,
            _ => return Err(Error::InvalidParams(format!("unknown graph family '{s}'"))),
        };
        Ok(family)
    }
}

/// Family parameters. `d` is used by the regular family, `p` by the
/// Erdős–Rényi family.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphParams {
    pub n: usize,
    pub d: Option<usize>,
    pub p: Option<f64>,
}

impl GraphParams {
    pub fn n(n: usize) -> Self {
        GraphParams { n, d: None, p: None }
    }

    pub fn regular(n: usize, d: usize) -> Self {
        GraphParams { n, d: Some(d), p: None }
    }

    pub fn erdos_renyi(n: usize, p: f64) -> Self {
        GraphParams { n, d: None, p: Some(p) }
    }
}

const PAIRING_ATTEMPTS: usize = 200;
const SWAPS_PER_EDGE: usize = 20;

/// Deterministic in `(family, params, seed)`; the seed only matters for the
/// random families.
pub fn generate_graph(family: GraphFamily, params: &GraphParams, seed: u64) -> Result<DirectedGraph> {
    let n = params.n;
    if n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    match family {
        GraphFamily::CompleteWithLoops => {
            let edges = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
            DirectedGraph::new(n, edges)
        }
        GraphFamily::CycleDirected => DirectedGraph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect()),
        GraphFamily::CycleUndirected => {
            if n < 3 {
                return Err(Error::InvalidParams("undirected cycle needs n >= 3".into()));
            }
            let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            DirectedGraph::undirected(n, &pairs)
        }
        GraphFamily::StarUndirected => {
            if n < 2 {
                return Err(Error::InvalidParams("star needs n >= 2".into()));
            }
            let pairs: Vec<_> = (1..n).map(|leaf| (0, leaf)).collect();
            DirectedGraph::undirected(n, &pairs)
        }
        GraphFamily::DRegularRandom => {
            let d = params.d.ok_or_else(|| Error::InvalidParams("regular family needs d".into()))?;
            random_regular(n, d, seed)
        }
        GraphFamily::ErdosRenyiMinIndegree => {
            let p = params.p.ok_or_else(|| Error::InvalidParams("Erdős–Rényi family needs p".into()))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("p = {p} outside [0, 1]")));
            }
            let mut rng = seeded(seed);
            let mut edges = Vec::new();
            let mut indeg = vec![0usize; n];
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen_bool(p) {
                        edges.push((i, j));
                        indeg[j] += 1;
                    }
                }
            }
            for (v, &d) in indeg.iter().enumerate() {
                if d == 0 {
                    edges.push((v, v));
                }
            }
            DirectedGraph::new(n, edges)
        }
    }
}

/// Simple undirected d-regular graph. Tries the pairing model with
/// rejection first; when that keeps producing loops or repeated pairs it
/// randomizes a circulant graph by degree-preserving double-edge swaps.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<DirectedGraph> {
    if d == 0 || d >= n {
        return Err(Error::InvalidParams(format!("need 1 <= d < n, got d = {d}, n = {n}")));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("n*d must be even, got n = {n}, d = {d}")));
    }
    let mut rng = seeded(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..PAIRING_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut pairs = BTreeSet::new();
        for chunk in stubs.chunks_exact(2) {
            let (u, v) = (chunk[0].min(chunk[1]), chunk[0].max(chunk[1]));
            if u == v || !pairs.insert((u, v)) {
                continue 'attempt;
            }
        }
        let pairs: Vec<_> = pairs.into_iter().collect();
        return DirectedGraph::undirected(n, &pairs);
    }
    let pairs = switch_chain(circulant_pairs(n, d), SWAPS_PER_EDGE, &mut rng);
    DirectedGraph::undirected(n, &pairs)
}

/// `i ~ i ± k` for `k ≤ d/2`, plus `i ~ i + n/2` when `d` is odd.
fn circulant_pairs(n: usize, d: usize) -> Vec<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for i in 0..n {
        for k in 1..=d / 2 {
            let j = (i + k) % n;
            pairs.insert((i.min(j), i.max(j)));
        }
        if d % 2 == 1 {
            let j = (i + n / 2) % n;
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    pairs.into_iter().collect()
}

/// Double-edge swaps `{u,v},{x,y} -> {u,x},{v,y}` that keep the graph simple.
fn switch_chain<R: Rng>(mut pairs: Vec<(usize, usize)>, per_edge: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut present: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
    let e = pairs.len();
    if e < 2 {
        return pairs;
    }
    for _ in 0..per_edge * e {
        let (p, q) = (rng.gen_range(0..e), rng.gen_range(0..e));
        if p == q {
            continue;
        }
        let ((u, v), (mut x, mut y)) = (pairs[p], pairs[q]);
        if rng.gen_bool(0.5) {
            core::mem::swap(&mut x, &mut y);
        }
        let a = (u.min(x), u.max(x));
        let b = (v.min(y), v.max(y));
        if a.0 == a.1 || b.0 == b.1 || a == b || present.contains(&a) || present.contains(&b) {
            continue;
        }
        present.remove(&pairs[p]);
        present.remove(&pairs[q]);
        present.insert(a);
        present.insert(b);
        pairs[p] = a;
        pairs[q] = b;
    }
    pairs.sort_unstable();
    pairs
}
