use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::ensemble::EnsembleResult;
use crate::error::{Error, Result};
use crate::spectral::Matrix;
use crate::theory::Regime;

/// Two-sided 95% normal quantile used for confidence half-widths.
pub const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rho", rename_all = "snake_case")]
pub enum Scaling {
    /// `√t`.
    SqrtT,
    /// `√(t log t)`.
    SqrtTLogT,
    /// `√(t / log t)`.
    SqrtTOverLogT,
    /// `t^ρ`.
    TPow(f64),
}

impl Scaling {
    /// Squared scale factor at time `t`; needs `t > 1` for the log scalings.
    pub fn variance_factor(self, t: f64) -> f64 {
        match self {
            Scaling::SqrtT => t,
            Scaling::SqrtTLogT => t * libm::log(t),
            Scaling::SqrtTOverLogT => t / libm::log(t),
            Scaling::TPow(rho) => libm::pow(t, 2.0 * rho),
        }
    }

    pub fn regime(self) -> Regime {
        match self {
            Scaling::SqrtT => Regime::GaussianSqrtT,
            Scaling::SqrtTLogT | Scaling::SqrtTOverLogT => Regime::GaussianSqrtTlogt,
            Scaling::TPow(_) => Regime::SubcriticalTRho,
        }
    }
}

/// Second moment of `s(T)(Z^T - c 1)` across runs at the final checkpoint:
/// `s(T)² (Cov(Z^T) + (Z̄ - c)(Z̄ - c)ᵀ)` with the unbiased covariance.
pub fn scaled_covariance(result: &EnsembleResult, c: f64, scaling: Scaling) -> Result<Matrix> {
    match result.meta.regime {
        Some(r) if r == scaling.regime() => {}
        other => {
            return Err(Error::RegimeMismatch(format!("scaling {:?} needs regime {}, ensemble has {:?}", scaling, scaling.regime().name(), other)))
        }
    }
    let t = result.horizon as f64;
    if t <= 1.0 {
        return Err(Error::InvalidParams("horizon must exceed 1".into()));
    }
    let mean = result.final_mean();
    let n = mean.len();
    let bias = Matrix::from_fn(n, n, |i, j| (mean[i] - c) * (mean[j] - c));
    Ok((&result.cov_final + &bias).scale(scaling.variance_factor(t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// `1.96 ·` standard error of the slope.
    pub ci_halfwidth: f64,
    pub points: usize,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    let k = x.len();
    if k < 3 || y.len() != k {
        return Err(Error::InsufficientCheckpoints { needed: 3, got: k });
    }
    let kf = k as f64;
    let mx = x.iter().sum::<f64>() / kf;
    let my = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParams("regressor has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let e = yi - intercept - slope * xi;
            e * e
        })
        .sum();
    let se = libm::sqrt(rss / (kf - 2.0) / sxx);
    Ok(SlopeFit { slope, intercept, ci_halfwidth: Z95 * se, points: k })
}

/// Minimum number of positive checkpoints for a decay fit.
pub const MIN_SLOPE_CHECKPOINTS: usize = 5;

/// `var_phi` at or below this is rounding noise of identical fractions.
pub const VAR_PHI_FLOOR: f64 = 1e-24;

fn tail_points(result: &EnsembleResult) -> Result<(Vec<f64>, Vec<f64>)> {
    let pts: Vec<(f64, f64)> = result
        .checkpoints
        .iter()
        .zip(&result.var_phi)
        .filter(|(&t, _)| t > 1)
        .map(|(&t, &v)| (t as f64, v))
        .collect();
    if pts.len() < MIN_SLOPE_CHECKPOINTS {
        return Err(Error::InsufficientCheckpoints { needed: MIN_SLOPE_CHECKPOINTS, got: pts.len() });
    }
    let tail = &pts[pts.len() / 2..];
    if let Some(&(t, _)) = tail.iter().find(|p| !(p.1 > VAR_PHI_FLOOR)) {
        return Err(Error::NotApplicable(format!("var_phi vanishes at t = {t}; no log-log slope")));
    }
    Ok(tail.iter().copied().unzip())
}

/// Slope of `log var_phi` against `log t` over the later half of the
/// checkpoints with `t > 1`.
pub fn variance_decay_slope(result: &EnsembleResult) -> Result<SlopeFit> {
    if !result.meta.polya {
        return Err(Error::NotApplicable("variance decay slope needs a Pólya scheme".into()));
    }
    let (t, v) = tail_points(result)?;
    let x: Vec<f64> = t.iter().map(|&t| libm::log(t)).collect();
    let y: Vec<f64> = v.iter().map(|&v| libm::log(v)).collect();
    linear_fit(&x, &y)
}

/// Slope of `log(t · var_phi)` against `log log t` over the same window as
/// [`variance_decay_slope`]: about 1 for `log t / t` decay, about 0 for `1/t`.
pub fn log_correction_slope(result: &EnsembleResult) -> Result<SlopeFit> {
    let (t, v) = tail_points(result)?;
    let x: Vec<f64> = t.iter().map(|&t| libm::log(libm::log(t))).collect();
    let y: Vec<f64> = t.iter().zip(&v).map(|(&t, &v)| libm::log(t * v)).collect();
    linear_fit(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    /// Mean over runs of `Z̄^T - Z̄^0`.
    pub drift_estimate: f64,
    /// `3 · SD / √runs`.
    pub threshold: f64,
    pub pass: bool,
}

/// Checks that the cross-sectional mean has no drift. Needs a Pólya scheme
/// on a graph whose in- and out-degrees all agree, started from a single
/// initial state.
pub fn martingale_test(result: &EnsembleResult) -> Result<MartingaleReport> {
    if !result.meta.polya {
        return Err(Error::NotApplicable("martingale test needs a Pólya scheme".into()));
    }
    if !result.meta.regular {
        return Err(Error::NotApplicable("martingale test needs a regular graph".into()));
    }
    if result.checkpoints.first() != Some(&0) || result.checkpoints.len() < 2 {
        return Err(Error::NotApplicable("martingale test needs checkpoints at t = 0 and a later time".into()));
    }
    let last = result.zbar_mean.len() - 1;
    let drift_estimate = result.zbar_mean[last] - result.zbar_mean[0];
    // Z̄⁰ is shared by every run, so the increment has the spread of Z̄^T.
    let sd = libm::sqrt(result.zbar_var[last]);
    let threshold = 3.0 * sd / libm::sqrt(result.runs as f64);
    Ok(MartingaleReport { drift_estimate, threshold, pass: drift_estimate.abs() <= threshold })
}
