//! Thread-pool executors for the core's block-structured work.
//!
//! Every function here returns exactly what its serial counterpart in the
//! core returns; the worker count changes only the wall time.

use std::collections::BTreeMap;

use rayon::prelude::*;
use urn_core::graph::DirectedGraph;
use urn_core::montecarlo::{finish, merge_blocks, run_block, EmpiricalLaw, EnsembleResult, EnsembleSpec, BLOCK_RUNS};
use urn_core::rng::substream;
use urn_core::urn::{Scheme, Simulator, UrnState};
use urn_core::{Error, Result};

/// Blocks run on the pool, then merge through the fixed tree in block order.
pub fn run_ensemble_parallel(spec: &EnsembleSpec<'_>) -> Result<EnsembleResult> {
    let blocks = (0..spec.n_blocks()).into_par_iter().map(|b| run_block(spec, b)).collect::<Result<Vec<_>>>()?;
    let acc = merge_blocks(blocks).ok_or_else(|| Error::InvalidParams("no runs".into()))?;
    Ok(finish(spec, acc))
}

/// Same law as the serial `empirical_distribution`: run `k` uses substream `k`.
pub fn empirical_distribution_parallel(
    g: &DirectedGraph,
    scheme: &Scheme,
    initial: &UrnState,
    horizon: u64,
    runs: u64,
    seed: u64,
) -> Result<EmpiricalLaw> {
    let blocks = runs.div_ceil(BLOCK_RUNS);
    let partial = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut counts = BTreeMap::new();
            for run in b * BLOCK_RUNS..((b + 1) * BLOCK_RUNS).min(runs) {
                let mut rng = substream(seed, run);
                let mut sim = Simulator::new(g, scheme.clone(), initial.clone())?;
                for _ in 0..horizon {
                    sim.step(&mut rng)?;
                }
                *counts.entry(sim.into_state()).or_insert(0u64) += 1;
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts = BTreeMap::new();
    for part in partial {
        for (state, c) in part {
            *counts.entry(state).or_insert(0) += c;
        }
    }
    Ok(EmpiricalLaw { horizon, runs, counts })
}

/// Order-preserving parallel map.
pub fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.par_iter().map(f).collect()
}

/// Runs `f` inside a pool of `threads` workers, or the global pool for `None`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> std::result::Result<R, String> {
    match threads {
        None => Ok(f()),
        Some(0) => Err("--threads must be at least 1".into()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build().map_err(|e| e.to_string())?;
            Ok(pool.install(f))
        }
    }
}
