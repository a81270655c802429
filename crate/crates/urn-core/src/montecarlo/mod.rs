//! Seeded ensembles, fluctuation statistics and an exact oracle.
//!
//! Run `k` of an ensemble with master seed `s` always uses substream
//! `(s, k)`. Runs are grouped in fixed blocks and block statistics are merged
//! in a fixed tree, so results do not depend on how blocks are scheduled.

mod ensemble;
mod moments;
mod oracle;
mod stats;

use alloc::string::String;
use serde::{Deserialize, Serialize};

pub use ensemble::{
    finish, merge_blocks, run_block, run_ensemble, BlockAccumulator, EnsembleMeta, EnsembleResult, EnsembleSpec, BLOCK_RUNS,
};
pub use moments::{CovMoments, DiagMoments, ScalarMoments};
pub use oracle::{
    brute_force_distribution, conditional_mean, empirical_distribution, oracle_check, oracle_report, total_variation,
    EmpiricalLaw, ExactLaw, OracleReport, MAX_DRAWS,
};
pub use stats::{
    linear_fit, log_correction_slope, martingale_test, scaled_covariance, variance_decay_slope, MartingaleReport, Scaling,
    SlopeFit, MIN_SLOPE_CHECKPOINTS, VAR_PHI_FLOOR, Z95,
};

/// Machine-readable verdict of one statistical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl TestReport {
    /// Passes when `statistic <= threshold`.
    pub fn at_most(test: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        TestReport { test: test.into(), statistic, threshold, pass: statistic <= threshold }
    }
}
