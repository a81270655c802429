use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::moments::{CovMoments, DiagMoments, ScalarMoments};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::rng::substream;
use crate::spectral::Matrix;
use crate::theory::{rho, Regime};
use crate::urn::{RecordPolicy, Scheme, Simulator, UrnState};

/// Runs per work block. Fixed so that block boundaries, and therefore the
/// merge tree, depend only on the run count.
pub const BLOCK_RUNS: u64 = 64;

#[derive(Debug, Clone)]
pub struct EnsembleSpec<'g> {
    pub graph: &'g DirectedGraph,
    pub scheme: Scheme,
    pub initial: UrnState,
    pub horizon: u64,
    pub runs: u64,
    pub master_seed: u64,
    /// Sorted, deduplicated, always ending at `horizon`.
    pub checkpoints: Vec<u64>,
    /// Keep every run's fractions at every checkpoint.
    pub retain_runs: bool,
}

impl<'g> EnsembleSpec<'g> {
    pub fn new(
        graph: &'g DirectedGraph,
        scheme: Scheme,
        initial: UrnState,
        horizon: u64,
        runs: u64,
        master_seed: u64,
        checkpoints: &RecordPolicy,
    ) -> Result<Self> {
        if runs == 0 {
            return Err(Error::InvalidParams("runs must be at least 1".into()));
        }
        if let Some(vertex) = graph.first_source() {
            return Err(Error::AssumptionAViolated { vertex });
        }
        scheme.check_len(graph.n_vertices())?;
        initial.validate()?;
        if initial.len() != graph.n_vertices() {
            return Err(Error::DimensionMismatch("initial state size".into()));
        }
        let mut cps = checkpoints.times(horizon);
        if cps.last() != Some(&horizon) {
            cps.push(horizon);
        }
        Ok(EnsembleSpec { graph, scheme, initial, horizon, runs, master_seed, checkpoints: cps, retain_runs: false })
    }

    pub fn retain(mut self, yes: bool) -> Self {
        self.retain_runs = yes;
        self
    }

    pub fn n_blocks(&self) -> u64 {
        self.runs.div_ceil(BLOCK_RUNS)
    }

    pub fn meta(&self) -> EnsembleMeta {
        let common = self.scheme.common();
        let polya = self.scheme.is_polya();
        let regime = if polya {
            Some(Regime::Polya)
        } else {
            common.and_then(|r| {
                let a = self.graph.weighted_adjacency().ok()?;
                rho(r.alpha(), r.beta(), &a).ok().map(|info| info.regime)
            })
        };
        EnsembleMeta {
            n_vertices: self.graph.n_vertices(),
            alpha: common.map(|r| r.alpha()),
            beta: common.map(|r| r.beta()),
            polya,
            regular: self.graph.regular_degree().is_some(),
            regime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub n_vertices: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub polya: bool,
    /// Every in- and out-degree equal.
    pub regular: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
}

/// Statistics of a contiguous range of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockAccumulator {
    pub first_run: u64,
    pub runs: u64,
    pub z: Vec<DiagMoments>,
    pub phi: Vec<DiagMoments>,
    pub zbar: Vec<ScalarMoments>,
    pub final_z: CovMoments,
    /// run × checkpoint × vertex, present only when retention is on.
    pub retained: Vec<Vec<Vec<f64>>>,
}

impl BlockAccumulator {
    fn empty(first_run: u64, n_checkpoints: usize, n: usize) -> Self {
        BlockAccumulator {
            first_run,
            runs: 0,
            z: vec![DiagMoments::new(n); n_checkpoints],
            phi: vec![DiagMoments::new(n); n_checkpoints],
            zbar: vec![ScalarMoments::default(); n_checkpoints],
            final_z: CovMoments::new(n),
            retained: Vec::new(),
        }
    }

    /// Appends `other`, which must cover the runs directly after `self`.
    pub fn merge(&mut self, other: &BlockAccumulator) {
        debug_assert_eq!(self.first_run + self.runs, other.first_run);
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            a.merge(b);
        }
        for (a, b) in self.phi.iter_mut().zip(&other.phi) {
            a.merge(b);
        }
        for (a, b) in self.zbar.iter_mut().zip(&other.zbar) {
            a.merge(b);
        }
        self.final_z.merge(&other.final_z);
        self.retained.extend(other.retained.iter().cloned());
        self.runs += other.runs;
    }
}

/// Simulates runs `[block·64, min(runs, block·64 + 64))` in order.
pub fn run_block(spec: &EnsembleSpec<'_>, block: u64) -> Result<BlockAccumulator> {
    let n = spec.graph.n_vertices();
    let first = block * BLOCK_RUNS;
    let last = (first + BLOCK_RUNS).min(spec.runs);
    let cps = &spec.checkpoints;
    let mut acc = BlockAccumulator::empty(first, cps.len(), n);
    let mut phi = vec![0.0; n];
    for run in first..last {
        let mut rng = substream(spec.master_seed, run);
        let mut sim = Simulator::new(spec.graph, spec.scheme.clone(), spec.initial.clone())?;
        let mut record = Vec::new();
        let mut k = 0;
        for t in 0..=spec.horizon {
            if cps[k] == t {
                let z = sim.state().fractions();
                let zbar = z.iter().sum::<f64>() / n as f64;
                phi.iter_mut().zip(&z).for_each(|(p, zi)| *p = zi - zbar);
                acc.z[k].push(&z);
                acc.phi[k].push(&phi);
                acc.zbar[k].push(zbar);
                if k + 1 == cps.len() {
                    acc.final_z.push(&z);
                }
                if spec.retain_runs {
                    record.push(z);
                }
                k += 1;
            }
            if t < spec.horizon {
                sim.step(&mut rng)?;
            }
        }
        if spec.retain_runs {
            acc.retained.push(record);
        }
        acc.runs += 1;
    }
    Ok(acc)
}

/// Merges blocks ordered by index with a fixed balanced pairwise tree:
/// neighbours `(0,1), (2,3), …` at each level, an odd tail carried up.
pub fn merge_blocks(mut level: Vec<BlockAccumulator>) -> Option<BlockAccumulator> {
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.merge(&b);
            }
            next.push(a);
        }
        level = next;
    }
    level.pop()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub runs: u64,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    /// checkpoint × vertex.
    pub mean_z: Matrix,
    /// checkpoint × vertex, unbiased across runs.
    pub var_z: Matrix,
    /// Per checkpoint, mean over vertices of `Var(Z_i - Z̄)`.
    pub var_phi: Vec<f64>,
    pub zbar_mean: Vec<f64>,
    pub zbar_var: Vec<f64>,
    /// Unscaled sample covariance of `Z` at the final checkpoint.
    pub cov_final: Matrix,
    pub raw_seed: u64,
    pub meta: EnsembleMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_run: Option<Vec<Vec<Vec<f64>>>>,
}

impl EnsembleResult {
    pub fn final_mean(&self) -> &[f64] {
        self.mean_z.row(self.mean_z.rows() - 1)
    }

    pub fn n_vertices(&self) -> usize {
        self.mean_z.cols()
    }
}

pub fn finish(spec: &EnsembleSpec<'_>, acc: BlockAccumulator) -> EnsembleResult {
    let n = spec.graph.n_vertices();
    let k = spec.checkpoints.len();
    let mut mean_z = Matrix::zeros(k, n);
    let mut var_z = Matrix::zeros(k, n);
    for (c, m) in acc.z.iter().enumerate() {
        let v = m.variances();
        for i in 0..n {
            mean_z[(c, i)] = m.mean[i];
            var_z[(c, i)] = v[i];
        }
    }
    let var_phi = acc.phi.iter().map(|m| m.variances().iter().sum::<f64>() / n as f64).collect();
    EnsembleResult {
        runs: acc.runs,
        horizon: spec.horizon,
        checkpoints: spec.checkpoints.clone(),
        mean_z,
        var_z,
        var_phi,
        zbar_mean: acc.zbar.iter().map(|m| m.mean).collect(),
        zbar_var: acc.zbar.iter().map(ScalarMoments::variance).collect(),
        cov_final: acc.final_z.covariance(),
        raw_seed: spec.master_seed,
        meta: spec.meta(),
        per_run: spec.retain_runs.then_some(acc.retained),
    }
}

/// Serial ensemble. Any executor that runs [`run_block`] for every block and
/// feeds the results, in block order, to [`merge_blocks`] and [`finish`]
/// produces the identical result.
pub fn run_ensemble(spec: &EnsembleSpec<'_>) -> Result<EnsembleResult> {
    let blocks = (0..spec.n_blocks()).map(|b| run_block(spec, b)).collect::<Result<Vec<_>>>()?;
    let acc = merge_blocks(blocks).ok_or_else(|| Error::InvalidParams("no runs".into()))?;
    Ok(finish(spec, acc))
}
