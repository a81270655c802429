//! The exact integer urn process.
//!
//! At each step every urn draws one ball. Urn `j` then sends `Y_j` white and
//! `m_j - Y_j` black balls to every out-neighbour, where `Y_j = a_j` after a
//! white draw and `Y_j = m_j - b_j` after a black draw. Equivalently urn `i`
//! is reinforced by each of its in-neighbours.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::rng::seeded;

/// Balanced rule `[[a, m-a], [m-b, b]]`: rows are the drawn colour
/// (white, black), columns the colours added (white, black).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ReplacementMatrix {
    a: u64,
    b: u64,
    m: u64,
}

impl ReplacementMatrix {
    pub fn new(a: u64, b: u64, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("m must be positive".into()));
        }
        if a > m || b > m {
            return Err(Error::InvalidParams(format!("need 0 <= a, b <= m, got a = {a}, b = {b}, m = {m}")));
        }
        Ok(ReplacementMatrix { a, b, m })
    }

    /// `a = b = m`.
    pub fn polya(m: u64) -> Result<Self> {
        Self::new(m, m, m)
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.a as f64 / self.m as f64
    }

    pub fn beta(&self) -> f64 {
        self.b as f64 / self.m as f64
    }

    pub fn is_polya(&self) -> bool {
        self.a == self.m && self.b == self.m
    }

    pub fn is_friedman(&self) -> bool {
        self.a == self.b && self.a != self.m
    }

    /// White balls sent after drawing the given colour.
    #[inline]
    pub fn white_sent(&self, drew_white: bool) -> u64 {
        if drew_white {
            self.a
        } else {
            self.m - self.b
        }
    }
}

/// One matrix per vertex; vertex `j`'s matrix governs the balls `j` sends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeterogeneousScheme {
    pub matrices: Vec<ReplacementMatrix>,
}

impl HeterogeneousScheme {
    pub fn new(matrices: Vec<ReplacementMatrix>) -> Self {
        HeterogeneousScheme { matrices }
    }

    pub fn uniform(r: ReplacementMatrix, n: usize) -> Self {
        HeterogeneousScheme { matrices: vec![r; n] }
    }

    /// `m̂_i`: total balls urn `i` receives per step.
    pub fn m_hat(&self, g: &DirectedGraph) -> Vec<u64> {
        g.in_neighbours().iter().map(|nb| nb.iter().map(|&j| self.matrices[j].m()).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    Homogeneous(ReplacementMatrix),
    Heterogeneous(HeterogeneousScheme),
}

impl From<ReplacementMatrix> for Scheme {
    fn from(r: ReplacementMatrix) -> Self {
        Scheme::Homogeneous(r)
    }
}

impl From<HeterogeneousScheme> for Scheme {
    fn from(h: HeterogeneousScheme) -> Self {
        Scheme::Heterogeneous(h)
    }
}

impl Scheme {
    #[inline]
    pub fn matrix(&self, vertex: usize) -> ReplacementMatrix {
        match self {
            Scheme::Homogeneous(r) => *r,
            Scheme::Heterogeneous(h) => h.matrices[vertex],
        }
    }

    /// The common matrix, also when a heterogeneous scheme repeats one matrix.
    pub fn common(&self) -> Option<ReplacementMatrix> {
        match self {
            Scheme::Homogeneous(r) => Some(*r),
            Scheme::Heterogeneous(h) => {
                let first = *h.matrices.first()?;
                h.matrices.iter().all(|r| *r == first).then_some(first)
            }
        }
    }

    pub fn is_polya(&self) -> bool {
        match self {
            Scheme::Homogeneous(r) => r.is_polya(),
            Scheme::Heterogeneous(h) => h.matrices.iter().all(ReplacementMatrix::is_polya),
        }
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        match self {
            Scheme::Heterogeneous(h) if h.matrices.len() != n => Err(Error::DimensionMismatch(format!(
                "scheme has {} matrices for {n} vertices",
                h.matrices.len()
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UrnState {
    pub white: Vec<u64>,
    pub black: Vec<u64>,
    pub time: u64,
}

impl UrnState {
    /// Every urn needs at least one ball.
    pub fn new(white: Vec<u64>, black: Vec<u64>) -> Result<Self> {
        let s = UrnState { white, black, time: 0 };
        s.validate()?;
        Ok(s)
    }

    /// One white and one black ball per urn.
    pub fn uniform(n: usize) -> Self {
        UrnState { white: vec![1; n], black: vec![1; n], time: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.white.len() != self.black.len() {
            return Err(Error::DimensionMismatch("white and black vectors differ in length".into()));
        }
        for (i, (&w, &b)) in self.white.iter().zip(&self.black).enumerate() {
            match w.checked_add(b) {
                None => return Err(Error::Overflow),
                Some(0) => return Err(Error::InvalidParams(format!("urn {i} is empty"))),
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.white.len()
    }

    pub fn is_empty(&self) -> bool {
        self.white.is_empty()
    }

    #[inline]
    pub fn total(&self, i: usize) -> u64 {
        self.white[i] + self.black[i]
    }

    #[inline]
    pub fn fraction(&self, i: usize) -> f64 {
        self.white[i] as f64 / self.total(i) as f64
    }

    pub fn fractions(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.fraction(i)).collect()
    }
}

/// Advances one urn process in place. Holds no randomness; the caller
/// passes the generator to each step.
#[derive(Debug, Clone)]
pub struct Simulator<'g> {
    graph: &'g DirectedGraph,
    scheme: Scheme,
    state: UrnState,
    sent: Vec<u64>,
}

impl<'g> Simulator<'g> {
    /// Requires every vertex to have an in-neighbour.
    pub fn new(graph: &'g DirectedGraph, scheme: Scheme, initial: UrnState) -> Result<Self> {
        if let Some(vertex) = graph.first_source() {
            return Err(Error::AssumptionAViolated { vertex });
        }
        Self::allow_sources(graph, scheme, initial)
    }

    /// Like [`new`](Self::new) but zero in-degree urns are accepted; they
    /// still draw and send but never change.
    pub fn allow_sources(graph: &'g DirectedGraph, scheme: Scheme, initial: UrnState) -> Result<Self> {
        let n = graph.n_vertices();
        scheme.check_len(n)?;
        initial.validate()?;
        if initial.len() != n {
            return Err(Error::DimensionMismatch(format!("initial state has {} urns for {n} vertices", initial.len())));
        }
        Ok(Simulator { graph, scheme, state: initial, sent: vec![0; n] })
    }

    pub fn state(&self) -> &UrnState {
        &self.state
    }

    pub fn into_state(self) -> UrnState {
        self.state
    }

    pub fn graph(&self) -> &DirectedGraph {
        self.graph
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// One synchronous draw-and-reinforce step. On overflow the state is
    /// left unchanged.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let n = self.state.len();
        for j in 0..n {
            let total = self.state.total(j);
            let drew_white = rng.gen_range(0..total) < self.state.white[j];
            self.sent[j] = self.scheme.matrix(j).white_sent(drew_white);
        }
        self.apply_sent()
    }

    /// Applies a fixed draw outcome, `white_draws[j]` true when urn `j` drew white.
    pub fn step_with_draws(&mut self, white_draws: &[bool]) -> Result<()> {
        if white_draws.len() != self.state.len() {
            return Err(Error::DimensionMismatch("draw vector length".into()));
        }
        for (j, &w) in white_draws.iter().enumerate() {
            self.sent[j] = self.scheme.matrix(j).white_sent(w);
        }
        self.apply_sent()
    }

    fn apply_sent(&mut self) -> Result<()> {
        let n = self.state.len();
        let mut next_white = Vec::with_capacity(n);
        let mut next_black = Vec::with_capacity(n);
        for (i, nb) in self.graph.in_neighbours().iter().enumerate() {
            let (mut dw, mut db) = (0u64, 0u64);
            for &j in nb {
                let m = self.scheme.matrix(j).m();
                dw = dw.checked_add(self.sent[j]).ok_or(Error::Overflow)?;
                db = db.checked_add(m - self.sent[j]).ok_or(Error::Overflow)?;
            }
            let w = self.state.white[i].checked_add(dw).ok_or(Error::Overflow)?;
            let b = self.state.black[i].checked_add(db).ok_or(Error::Overflow)?;
            w.checked_add(b).ok_or(Error::Overflow)?;
            next_white.push(w);
            next_black.push(b);
        }
        self.state.white = next_white;
        self.state.black = next_black;
        self.state.time += 1;
        Ok(())
    }
}

/// Functional form of a single step.
pub fn step<R: Rng + ?Sized>(state: &UrnState, g: &DirectedGraph, scheme: &Scheme, rng: &mut R) -> Result<UrnState> {
    let mut sim = Simulator::new(g, scheme.clone(), state.clone())?;
    sim.step(rng)?;
    Ok(sim.into_state())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordPolicy {
    EveryStep,
    GeometricCheckpoints,
    FinalOnly,
    /// Explicit times; entries above the horizon are ignored.
    At(Vec<u64>),
}

impl RecordPolicy {
    /// Sorted, deduplicated recording times in `[0, horizon]`.
    pub fn times(&self, horizon: u64) -> Vec<u64> {
        let mut t = match self {
            RecordPolicy::EveryStep => (0..=horizon).collect(),
            RecordPolicy::GeometricCheckpoints => geometric_checkpoints(horizon),
            RecordPolicy::FinalOnly => vec![horizon],
            RecordPolicy::At(ts) => ts.iter().copied().filter(|&x| x <= horizon).collect(),
        };
        t.sort_unstable();
        t.dedup();
        t
    }
}

/// `{0} ∪ {⌊1.5^k⌋ : k ≥ 0} ∪ {horizon}`, truncated at the horizon.
pub fn geometric_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out = vec![0];
    let mut x = 1.0f64;
    while x <= horizon as f64 {
        let t = x as u64;
        if out.last() != Some(&t) {
            out.push(t);
        }
        x *= 1.5;
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// `(t, Z^t)` in increasing `t`.
    pub records: Vec<(u64, Vec<f64>)>,
    pub final_state: UrnState,
}

/// Runs `horizon` steps from `initial` with the generator seeded by `seed`.
pub fn run_trajectory(
    g: &DirectedGraph,
    scheme: &Scheme,
    initial: &UrnState,
    horizon: u64,
    seed: u64,
    record: &RecordPolicy,
) -> Result<Trajectory> {
    let mut rng = seeded(seed);
    let sim = Simulator::new(g, scheme.clone(), initial.clone())?;
    record_run(sim, horizon, &record.times(horizon), &mut rng)
}

/// Runs a prepared simulator for `horizon` steps, recording fractions at the
/// given sorted times (relative to the start).
pub fn record_run<R: Rng + ?Sized>(mut sim: Simulator<'_>, horizon: u64, times: &[u64], rng: &mut R) -> Result<Trajectory> {
    let mut records = Vec::with_capacity(times.len());
    let mut next = times.iter().copied().peekable();
    for t in 0..=horizon {
        if next.peek() == Some(&t) {
            records.push((t, sim.state().fractions()));
            next.next();
        }
        if t < horizon {
            sim.step(rng)?;
        }
    }
    Ok(Trajectory { records, final_state: sim.into_state() })
}
