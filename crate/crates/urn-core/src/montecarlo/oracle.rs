//! Exact laws of tiny urn processes by enumerating every draw sequence.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::rng::substream;
use crate::urn::{Scheme, Simulator, UrnState};

/// Largest `n · T` accepted by [`brute_force_distribution`].
pub const MAX_DRAWS: u64 = 20;

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact law of the state at time `horizon` as `(state, probability)` in
/// increasing state order. Probabilities are exact and sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLaw {
    pub horizon: u64,
    pub atoms: Vec<(UrnState, BigRational)>,
}

impl ExactLaw {
    pub fn total_probability(&self) -> BigRational {
        self.atoms.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }

    /// Exact `E[Z_i^T]` for every vertex.
    pub fn mean_fractions(&self) -> Vec<BigRational> {
        let n = self.atoms.first().map_or(0, |(s, _)| s.len());
        let mut out = vec![BigRational::zero(); n];
        for (s, p) in &self.atoms {
            for (i, o) in out.iter_mut().enumerate() {
                *o += p * ratio(s.white[i], s.total(i));
            }
        }
        out
    }
}

pub fn brute_force_distribution(g: &DirectedGraph, scheme: &Scheme, initial: &UrnState, horizon: u64) -> Result<ExactLaw> {
    let n = g.n_vertices() as u64;
    let draws = n.checked_mul(horizon).ok_or(Error::TooLarge(u64::MAX))?;
    if draws > MAX_DRAWS {
        return Err(Error::TooLarge(draws));
    }
    Simulator::new(g, scheme.clone(), initial.clone())?;
    let mut law: BTreeMap<UrnState, BigRational> = BTreeMap::new();
    law.insert(initial.clone(), BigRational::one());
    for _ in 0..horizon {
        let mut next: BTreeMap<UrnState, BigRational> = BTreeMap::new();
        for (state, p) in &law {
            for (draws, q) in draw_outcomes(state) {
                let mut sim = Simulator::new(g, scheme.clone(), state.clone())?;
                sim.step_with_draws(&draws)?;
                *next.entry(sim.into_state()).or_insert_with(BigRational::zero) += p * q;
            }
        }
        law = next;
    }
    Ok(ExactLaw { horizon, atoms: law.into_iter().collect() })
}

/// Every joint draw with positive probability, `true` meaning white.
fn draw_outcomes(state: &UrnState) -> Vec<(Vec<bool>, BigRational)> {
    let mut out = vec![(Vec::with_capacity(state.len()), BigRational::one())];
    for j in 0..state.len() {
        let (w, b, total) = (state.white[j], state.black[j], state.total(j));
        let mut grown = Vec::with_capacity(out.len() * 2);
        for (prefix, p) in out {
            if w > 0 {
                let mut d = prefix.clone();
                d.push(true);
                grown.push((d, &p * ratio(w, total)));
            }
            if b > 0 {
                let mut d = prefix;
                d.push(false);
                grown.push((d, p * ratio(b, total)));
            }
        }
        out = grown;
    }
    out
}

/// Exact `E[Z_i^{t+1} | state]`: urn `i` gains
/// `Σ_{j→i} (a_j Z_j + (m_j - b_j)(1 - Z_j))` white balls in expectation
/// over a deterministic total.
pub fn conditional_mean(g: &DirectedGraph, scheme: &Scheme, state: &UrnState) -> Result<Vec<BigRational>> {
    Simulator::new(g, scheme.clone(), state.clone())?;
    let mut out = Vec::with_capacity(state.len());
    for (i, nb) in g.in_neighbours().iter().enumerate() {
        let mut white = BigRational::from_integer(BigInt::from(state.white[i]));
        let mut total = state.total(i);
        for &j in nb {
            let r = scheme.matrix(j);
            let z = ratio(state.white[j], state.total(j));
            let a = BigRational::from_integer(BigInt::from(r.a()));
            let mb = BigRational::from_integer(BigInt::from(r.m() - r.b()));
            white += &a * &z + mb * (BigRational::one() - z);
            total += r.m();
        }
        out.push(white / BigRational::from_integer(BigInt::from(total)));
    }
    Ok(out)
}

/// Empirical law of simulated states at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLaw {
    pub horizon: u64,
    pub runs: u64,
    pub counts: BTreeMap<UrnState, u64>,
}

/// Simulates `runs` runs of length `horizon`, run `k` on substream `k`.
pub fn empirical_distribution(
    g: &DirectedGraph,
    scheme: &Scheme,
    initial: &UrnState,
    horizon: u64,
    runs: u64,
    seed: u64,
) -> Result<EmpiricalLaw> {
    let mut counts = BTreeMap::new();
    for run in 0..runs {
        let mut rng = substream(seed, run);
        let mut sim = Simulator::new(g, scheme.clone(), initial.clone())?;
        for _ in 0..horizon {
            sim.step(&mut rng)?;
        }
        *counts.entry(sim.into_state()).or_insert(0) += 1;
    }
    Ok(EmpiricalLaw { horizon, runs, counts })
}

/// `½ Σ |p̂ - p|` over the union of supports.
pub fn total_variation(empirical: &EmpiricalLaw, exact: &ExactLaw) -> Result<f64> {
    if empirical.horizon != exact.horizon {
        return Err(Error::HorizonMismatch(empirical.horizon, exact.horizon));
    }
    if empirical.runs == 0 {
        return Err(Error::InvalidParams("empirical law has no runs".into()));
    }
    let runs = BigInt::from(empirical.runs);
    let mut sum = BigRational::zero();
    for (state, p) in &exact.atoms {
        let count = empirical.counts.get(state).copied().unwrap_or(0);
        sum += (BigRational::new(BigInt::from(count), runs.clone()) - p).abs();
    }
    let extra: u64 = empirical
        .counts
        .iter()
        .filter(|(s, _)| exact.atoms.binary_search_by(|(a, _)| a.cmp(s)).is_err())
        .map(|(_, c)| *c)
        .sum();
    sum += BigRational::new(BigInt::from(extra), runs);
    Ok(sum.to_f64().unwrap_or(f64::NAN) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    pub tv: f64,
    /// `3 √(|support| / runs)`.
    pub threshold: f64,
    pub support: usize,
    pub runs: u64,
    pub pass: bool,
}

pub fn oracle_check(g: &DirectedGraph, scheme: &Scheme, initial: &UrnState, horizon: u64, runs: u64, seed: u64) -> Result<OracleReport> {
    let exact = brute_force_distribution(g, scheme, initial, horizon)?;
    let empirical = empirical_distribution(g, scheme, initial, horizon, runs, seed)?;
    oracle_report(&empirical, &exact)
}

pub fn oracle_report(empirical: &EmpiricalLaw, exact: &ExactLaw) -> Result<OracleReport> {
    let tv = total_variation(empirical, exact)?;
    let support = exact.atoms.len();
    let threshold = 3.0 * libm::sqrt(support as f64 / empirical.runs as f64);
    Ok(OracleReport { tv, threshold, support, runs: empirical.runs, pass: tv <= threshold })
}
