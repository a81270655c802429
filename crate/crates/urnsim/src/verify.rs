//! Verification suites: each simulates, compares with a prediction and
//! returns machine-readable reports.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};
use urn_core::graph::DirectedGraph;
use urn_core::montecarlo::{
    brute_force_distribution, conditional_mean, log_correction_slope, martingale_test, oracle_report,
    scaled_covariance, variance_decay_slope, EnsembleResult, EnsembleSpec, Scaling, TestReport,
};
use urn_core::rng::substream;
use urn_core::spectral::Matrix;
use urn_core::theory::{
    clt_covariance, clt_covariance_critical, consensus_equilibrium, heterogeneous_limit, integrate_ode,
    polya_rate_class, rho, OdePath, RateClass, Regime,
};
use urn_core::urn::{RecordPolicy, ReplacementMatrix, Scheme, Simulator, UrnState};
use urn_core::Error;

use crate::error::CliError;
use crate::parallel::{empirical_distribution_parallel, par_map, run_ensemble_parallel};

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Consensus,
    Clt,
    CltCritical,
    PolyaRate,
    Martingale,
    Oracle,
    OdeTracking,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Consensus,
        Suite::Clt,
        Suite::CltCritical,
        Suite::PolyaRate,
        Suite::Martingale,
        Suite::Oracle,
        Suite::OdeTracking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Consensus => "consensus",
            Suite::Clt => "clt",
            Suite::CltCritical => "clt-critical",
            Suite::PolyaRate => "polya-rate",
            Suite::Martingale => "martingale",
            Suite::Oracle => "oracle",
            Suite::OdeTracking => "ode-tracking",
        }
    }

    pub fn default_horizon(self) -> u64 {
        match self {
            Suite::Clt | Suite::Martingale => 10_000,
            Suite::Oracle => 1,
            _ => 100_000,
        }
    }

    pub fn default_runs(self) -> u64 {
        match self {
            Suite::Consensus => 200,
            Suite::Clt | Suite::CltCritical => 5_000,
            Suite::PolyaRate => 500,
            Suite::Martingale => 2_000,
            Suite::Oracle => 100_000,
            Suite::OdeTracking => 100,
        }
    }

    /// `None` where the threshold is derived from the data or the rate class.
    pub fn default_tol(self) -> Option<f64> {
        match self {
            Suite::Consensus => Some(0.02),
            Suite::Clt => Some(0.15),
            Suite::CltCritical => Some(0.20),
            Suite::OdeTracking => Some(0.05),
            Suite::PolyaRate | Suite::Martingale | Suite::Oracle => None,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Suite::ALL.into_iter().find(|x| x.name() == key).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            CliError::Usage(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Scaling used by the critical CLT suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalScaling {
    /// `√(t log t)`.
    TLogT,
    /// `√(t / log t)`.
    TOverLogT,
}

impl CriticalScaling {
    pub fn name(self) -> &'static str {
        match self {
            CriticalScaling::TLogT => "tlogt",
            CriticalScaling::TOverLogT => "t-over-logt",
        }
    }

    pub fn scaling(self) -> Scaling {
        match self {
            CriticalScaling::TLogT => Scaling::SqrtTLogT,
            CriticalScaling::TOverLogT => Scaling::SqrtTOverLogT,
        }
    }

    fn other(self) -> Self {
        match self {
            CriticalScaling::TLogT => CriticalScaling::TOverLogT,
            CriticalScaling::TOverLogT => CriticalScaling::TLogT,
        }
    }
}

impl FromStr for CriticalScaling {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "tlogt" | "t-log-t" | "sqrt-t-log-t" => Ok(CriticalScaling::TLogT),
            "t-over-logt" | "t-over-log-t" | "sqrt-t-over-log-t" => Ok(CriticalScaling::TOverLogT),
            other => Err(CliError::Usage(format!("unknown scaling {other:?}; expected tlogt or t-over-logt"))),
        }
    }
}

/// Fully resolved inputs of one suite run.
#[derive(Debug, Clone)]
pub struct SuiteInput<'g> {
    pub graph: &'g DirectedGraph,
    pub scheme: Scheme,
    pub initial: UrnState,
    pub horizon: u64,
    pub runs: u64,
    pub seed: u64,
    pub tol: Option<f64>,
    pub t0: u64,
    pub dt: f64,
    pub scaling: CriticalScaling,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub pass: bool,
    pub reports: Vec<TestReport>,
    pub details: Value,
}

impl VerifyReport {
    fn new(suite: Suite, reports: Vec<TestReport>, details: Value) -> Self {
        let pass = !reports.is_empty() && reports.iter().all(|r| r.pass);
        VerifyReport { suite, pass, reports, details }
    }
}

/// Default Euler step of the ode-tracking suite.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default start of the ode-tracking comparison window.
pub const DEFAULT_T0: u64 = 1_000;
/// Largest share of runs allowed to leave the tolerance band in ode-tracking.
pub const ODE_MAX_FAIL_SHARE: f64 = 0.1;

pub fn run_suite(suite: Suite, input: &SuiteInput<'_>) -> Result<VerifyReport> {
    match suite {
        Suite::Consensus => consensus(input),
        Suite::Clt => clt(input),
        Suite::CltCritical => clt_critical(input),
        Suite::PolyaRate => polya_rate(input),
        Suite::Martingale => martingale(input),
        Suite::Oracle => oracle(input),
        Suite::OdeTracking => ode_tracking(input),
    }
}

fn ensemble(input: &SuiteInput<'_>, policy: &RecordPolicy) -> Result<EnsembleResult> {
    let spec = EnsembleSpec::new(
        input.graph,
        input.scheme.clone(),
        input.initial.clone(),
        input.horizon,
        input.runs,
        input.seed,
        policy,
    )?;
    Ok(run_ensemble_parallel(&spec)?)
}

fn homogeneous(input: &SuiteInput<'_>, suite: Suite) -> Result<ReplacementMatrix> {
    input
        .scheme
        .common()
        .ok_or_else(|| CliError::Usage(format!("suite {suite} needs a homogeneous replacement rule")))
}

fn non_polya(input: &SuiteInput<'_>, suite: Suite) -> Result<ReplacementMatrix> {
    let r = homogeneous(input, suite)?;
    if r.is_polya() {
        return Err(CliError::Usage(format!("suite {suite} needs a non-Pólya rule")));
    }
    Ok(r)
}

fn regime_of(input: &SuiteInput<'_>, r: ReplacementMatrix) -> Result<(f64, Regime)> {
    let a = input.graph.weighted_adjacency()?;
    let info = rho(r.alpha(), r.beta(), &a)?;
    Ok((info.rho, info.regime))
}

fn consensus(input: &SuiteInput<'_>) -> Result<VerifyReport> {
    let tol = input.tol.unwrap_or(0.02);
    let target: Vec<f64> = match input.scheme.common() {
        Some(r) if r.is_polya() => return Err(CliError::Usage("suite consensus needs a non-Pólya rule".into())),
        Some(r) => vec![consensus_equilibrium(r.alpha(), r.beta())?; input.graph.n_vertices()],
        None => match &input.scheme {
            Scheme::Heterogeneous(h) => heterogeneous_limit(input.graph, h, None)?,
            Scheme::Homogeneous(_) => unreachable!(),
        },
    };
    let res = ensemble(input, &RecordPolicy::FinalOnly)?;
    let mean = res.final_mean();
    let mut reports = Vec::new();
    let mut table = Vec::new();
    for (i, (&z, &c)) in mean.iter().zip(&target).enumerate() {
        let dev = (z - c).abs();
        reports.push(TestReport::at_most(format!("consensus vertex {}", i + 1), dev, tol));
        table.push(json!({ "vertex": i + 1, "mean": z, "limit": c, "abs_dev": dev }));
    }
    Ok(VerifyReport::new(Suite::Consensus, reports, json!({ "runs": res.runs, "horizon": res.horizon, "table": table })))
}

fn covariance_check(
    suite: Suite,
    name: &str,
    res: &EnsembleResult,
    c: f64,
    scaling: Scaling,
    target: &Matrix,
    tol: f64,
) -> Result<(TestReport, Matrix)> {
    let emp = scaled_covariance(res, c, scaling).map_err(|e| match e {
        Error::RegimeMismatch(m) => CliError::Usage(format!("suite {suite}: {m}")),
        other => other.into(),
    })?;
    Ok((TestReport::at_most(name, emp.relative_error(target), tol), emp))
}

fn clt(input: &SuiteInput<'_>) -> Result<VerifyReport> {
    let r = non_polya(input, Suite::Clt)?;
    let (rho_v, regime) = regime_of(input, r)?;
    if regime != Regime::GaussianSqrtT {
        return Err(CliError::Usage(format!("suite clt needs rho > 1/2, got rho = {rho_v} ({})", regime.name())));
    }
    let a = input.graph.weighted_adjacency()?;
    let sigma = clt_covariance(r.alpha(), r.beta(), &a)?;
    let c = consensus_equilibrium(r.alpha(), r.beta())?;
    let res = ensemble(input, &RecordPolicy::FinalOnly)?;
    let tol = input.tol.unwrap_or(0.15);
    let (report, emp) = covariance_check(Suite::Clt, "clt frobenius relative error", &res, c, Scaling::SqrtT, &sigma, tol)?;
    let details = json!({ "rho": rho_v, "c": c, "sigma": sigma, "empirical": emp, "runs": res.runs, "horizon": res.horizon });
    Ok(VerifyReport::new(Suite::Clt, vec![report], details))
}

fn clt_critical(input: &SuiteInput<'_>) -> Result<VerifyReport> {
    let r = non_polya(input, Suite::CltCritical)?;
    let (rho_v, regime) = regime_of(input, r)?;
    if regime != Regime::GaussianSqrtTlogt {
        return Err(CliError::Usage(format!("suite clt-critical needs rho = 1/2, got rho = {rho_v} ({})", regime.name())));
    }
    let a = input.graph.weighted_adjacency()?;
    let sigma = clt_covariance_critical(r.alpha(), r.beta(), &a)?;
    let c = consensus_equilibrium(r.alpha(), r.beta())?;
    let res = ensemble(input, &RecordPolicy::FinalOnly)?;
    let tol = input.tol.unwrap_or(0.20);
    let name = format!("clt-critical frobenius relative error ({})", input.scaling.name());
    let (report, emp) = covariance_check(Suite::CltCritical, &name, &res, c, input.scaling.scaling(), &sigma, tol)?;
    let alt = input.scaling.other();
    let (alt_report, alt_emp) =
        covariance_check(Suite::CltCritical, alt.name(), &res, c, alt.scaling(), &sigma, tol)?;
    let details = json!({
        "rho": rho_v,
        "c": c,
        "sigma_tilde": sigma,
        "scaling": input.scaling.name(),
        "empirical": emp,
        "diagnostic": { "scaling": alt.name(), "relative_error": alt_report.statistic, "empirical": alt_emp },
        "runs": res.runs,
        "horizon": res.horizon,
    });
    Ok(VerifyReport::new(Suite::CltCritical, vec![report], details))
}

/// Accepted slope window `(center, half-width)` for a rate class; `tol`
/// replaces the half-width around the class slope.
pub fn slope_window(class: RateClass, tol: Option<f64>) -> (f64, f64) {
    match (class, tol) {
        (_, Some(t)) => (class.slope(), t),
        // [-1.1, -0.75]
        (RateClass::LogtOverT, None) => (-0.925, 0.175),
        (_, None) => (class.slope(), 0.15),
    }
}

fn polya_rate(input: &SuiteInput<'_>) -> Result<VerifyReport> {
    if !input.scheme.is_polya() {
        return Err(CliError::Usage("suite polya-rate needs a Pólya rule".into()));
    }
    let a = input.graph.weighted_adjacency()?;
    let class = polya_rate_class(&a).map_err(|e| match e {
        Error::NotRegular => CliError::Usage("suite polya-rate needs a symmetric doubly stochastic weighted adjacency".into()),
        other => other.into(),
    })?;
    let res = ensemble(input, &RecordPolicy::GeometricCheckpoints)?;
    let (center, half) = slope_window(class, input.tol);
    let (report, fit) = match variance_decay_slope(&res) {
        Ok(fit) => (TestReport::at_most("polya-rate slope distance", (fit.slope - center).abs(), half), json!(fit)),
        Err(Error::NotApplicable(why)) => {
            (TestReport::at_most("polya-rate slope distance", f64::NAN, half), json!({ "not_applicable": why }))
        }
        Err(e) => return Err(e.into()),
    };
    let log_corr = match log_correction_slope(&res) {
        Ok(fit) => json!(fit),
        Err(e) => json!({ "not_applicable": e.to_string() }),
    };
    let details = json!({
        "rate_class": class,
        "window": [center - half, center + half],
        "fit": fit,
        "log_correction": log_corr,
        "checkpoints": res.checkpoints,
        "var_phi": res.var_phi,
    });
    Ok(VerifyReport::new(Suite::PolyaRate, vec![report], details))
}

fn martingale(input: &SuiteInput<'_>) -> Result<VerifyReport> {
    let res = ensemble(input, &RecordPolicy::GeometricCheckpoints)?;
    let m = martingale_test(&res).map_err(|e| match e {
        Error::NotApplicable(why) => CliError::Usage(format!("suite martingale: {why}")),
        other => other.into(),
    })?;
    let report = TestReport::at_most("martingale drift", m.drift_estimate.abs(), input.tol.unwrap_or(m.threshold));
    let details = json!({ "zbar_start": res.zbar_mean[0], "zbar_end": res.zbar_mean[res.zbar_mean.len() - 1], "report": m });
    Ok(VerifyReport::new(Suite::Martingale, vec![report], details))
}

fn oracle(input: &SuiteInput<'_>) -> Result<VerifyReport> {
    let g = input.graph;
    let exact = brute_force_distribution(g, &input.scheme, &input.initial, input.horizon)?;
    let empirical = empirical_distribution_parallel(g, &input.scheme, &input.initial, input.horizon, input.runs, input.seed)?;
    let rep = oracle_report(&empirical, &exact)?;
    let tv = TestReport::at_most("oracle total variation", rep.tv, input.tol.unwrap_or(rep.threshold));
    // Two exact routes to E[Z¹ | Z⁰]: the closed form and the one-step law.
    let formula = conditional_mean(g, &input.scheme, &input.initial)?;
    let one_step = brute_force_distribution(g, &input.scheme, &input.initial, 1)?.mean_fractions();
    let mismatches = formula.iter().zip(&one_step).filter(|(x, y)| x != y).count();
    let cm = TestReport::at_most("oracle conditional mean mismatches", mismatches as f64, 0.0);
    let details = json!({
        "support": rep.support,
        "runs": rep.runs,
        "tv_threshold": rep.threshold,
        "conditional_mean": formula.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
    });
    Ok(VerifyReport::new(Suite::Oracle, vec![tv, cm], details))
}

/// ODE time reached after `t` urn steps: the harmonic number `H_t`.
pub fn ode_time(t: u64) -> f64 {
    (1..=t).map(|s| 1.0 / s as f64).sum()
}

/// Largest sup-norm gap between `Z^t` and the ODE path at time `H_t` over
/// `t0 ≤ t ≤ horizon`, for one run on substream `run` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn ode_sup_deviation(
    g: &DirectedGraph,
    scheme: &Scheme,
    initial: &UrnState,
    path: &OdePath,
    horizon: u64,
    t0: u64,
    seed: u64,
    run: u64,
) -> urn_core::Result<f64> {
    let mut rng = substream(seed, run);
    let mut sim = Simulator::new(g, scheme.clone(), initial.clone())?;
    let mut tau = 0.0;
    let mut worst = 0.0f64;
    for t in 1..=horizon {
        sim.step(&mut rng)?;
        tau += 1.0 / t as f64;
        if t >= t0 {
            let ode = path.at(tau);
            let s = sim.state();
            for (i, zi) in ode.iter().enumerate() {
                worst = worst.max((s.fraction(i) - zi).abs());
            }
        }
    }
    Ok(worst)
}

fn ode_tracking(input: &SuiteInput<'_>) -> Result<VerifyReport> {
    let r = homogeneous(input, Suite::OdeTracking)?;
    if input.t0 > input.horizon {
        return Err(CliError::Usage(format!("t0 = {} exceeds the horizon {}", input.t0, input.horizon)));
    }
    let a = input.graph.weighted_adjacency()?;
    let path = integrate_ode(&input.initial.fractions(), &a, r.alpha(), r.beta(), ode_time(input.horizon), input.dt)?;
    let tol = input.tol.unwrap_or(0.05);
    let runs: Vec<u64> = (0..input.runs).collect();
    let devs = par_map(&runs, |&k| {
        ode_sup_deviation(input.graph, &input.scheme, &input.initial, &path, input.horizon, input.t0, input.seed, k)
    })
    .into_iter()
    .collect::<urn_core::Result<Vec<f64>>>()?;
    let failing = devs.iter().filter(|&&d| d > tol).count() as f64 / devs.len() as f64;
    let report = TestReport::at_most("ode-tracking share of runs beyond tolerance", failing, ODE_MAX_FAIL_SHARE);
    let details = json!({ "tol": tol, "t0": input.t0, "dt": input.dt, "sup_deviation": devs });
    Ok(VerifyReport::new(Suite::OdeTracking, vec![report], details))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
        assert_eq!("t_over_logt".parse::<CriticalScaling>().unwrap(), CriticalScaling::TOverLogT);
    }

    #[test]
    fn harmonic_time() {
        assert_eq!(ode_time(0), 0.0);
        assert!((ode_time(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn slope_windows() {
        assert_eq!(slope_window(RateClass::TInv, None), (-1.0, 0.15));
        let (c, h) = slope_window(RateClass::LogtOverT, None);
        assert!((c - h + 1.1).abs() < 1e-15 && (c + h + 0.75).abs() < 1e-15);
        assert_eq!(slope_window(RateClass::TPow { exponent: -0.5 }, Some(0.1)), (-0.5, 0.1));
    }
}
