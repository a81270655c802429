//! Interacting two-colour urns on finite directed graphs.
//!
//! Every vertex of a directed graph carries an urn of white and black balls.
//! At each step one ball is drawn from every urn and each urn reinforces its
//! out-neighbours with a balanced 2x2 replacement rule. This crate holds the
//! pure algorithmic pieces:
//!
//! - [`graph`]: directed graphs, degrees, the column-stochastic weighted
//!   adjacency and standard graph families.
//! - [`spectral`]: dense eigenvalues, Lyapunov solves, inversion and the
//!   log-averaged Gram integral used for the critical regime.
//! - [`urn`]: the exact integer state machine.
//! - [`theory`]: drift, equilibria, the regime exponent, asymptotic
//!   covariances, Pólya rate classes and heterogeneous limits.
//! - [`montecarlo`]: seeded ensembles, streaming moments, statistical checks
//!   and an exact enumeration oracle for tiny instances.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! thread-parallel ensembles live in the `urnsim` crate.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod rng;
pub mod spectral;
pub mod theory;
pub mod urn;

pub use error::{Error, Result};

pub use graph::{generate_graph, DirectedGraph, GraphFamily, GraphParams};
pub use spectral::{Matrix, Spectrum};
pub use urn::{HeterogeneousScheme, RecordPolicy, ReplacementMatrix, Scheme, Simulator, UrnState};

