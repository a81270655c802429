//! Closed-form limits and fluctuation predictions.
//!
//! All parameters are normalized: `α = a/m`, `β = b/m`, `r = α + β - 1`.
//! Vectors are row vectors acting on the left of `Ã`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::spectral::{eigenvalues, invert, log_averaged_gram, lyapunov_solve, Matrix, CRITICAL_TOL};
use crate::urn::HeterogeneousScheme;

/// `|α + β - 2|` below this is the reinforcing (Pólya) case.
const POLYA_TOL: f64 = 1e-12;
/// Tolerance for symmetry and unit row sums in the regular-graph checks.
const REGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Polya,
    GaussianSqrtT,
    GaussianSqrtTlogt,
    SubcriticalTRho,
}

impl Regime {
    pub fn from_rho(rho: f64) -> Self {
        if (rho - 0.5).abs() <= CRITICAL_TOL {
            Regime::GaussianSqrtTlogt
        } else if rho > 0.5 {
            Regime::GaussianSqrtT
        } else {
            Regime::SubcriticalTRho
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Polya => "polya",
            Regime::GaussianSqrtT => "gaussian_sqrt_t",
            Regime::GaussianSqrtTlogt => "gaussian_sqrt_tlogt",
            Regime::SubcriticalTRho => "subcritical_t_rho",
        }
    }
}

/// Decay class of `Var(Z^t - Z̄^t 1)` in the Pólya case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RateClass {
    TInv,
    LogtOverT,
    TPow { exponent: f64 },
}

impl RateClass {
    /// Log-log slope of the leading term; the log factor is ignored.
    pub fn slope(self) -> f64 {
        match self {
            RateClass::TInv | RateClass::LogtOverT => -1.0,
            RateClass::TPow { exponent } => exponent,
        }
    }
}

pub fn is_polya(alpha: f64, beta: f64) -> bool {
    (alpha + beta - 2.0).abs() <= POLYA_TOL
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParams(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_params(alpha: f64, beta: f64) -> Result<()> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    if is_polya(alpha, beta) {
        return Err(Error::PolyaType);
    }
    Ok(())
}

/// `h(z) = (αz + (1-β)(1-z)) Ã - z`.
pub fn drift(z: &[f64], a_tilde: &Matrix, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    if a_tilde.rows() != z.len() || !a_tilde.is_square() {
        return Err(Error::DimensionMismatch("z and Ã".into()));
    }
    let y: Vec<f64> = z.iter().map(|&zi| alpha * zi + (1.0 - beta) * (1.0 - zi)).collect();
    let mut out = a_tilde.left_mul_vec(&y);
    out.iter_mut().zip(z).for_each(|(o, zi)| *o -= zi);
    Ok(out)
}

/// `H = I - (α+β-1) Ã`; the drift Jacobian is `-H`.
pub fn h_matrix(a_tilde: &Matrix, alpha: f64, beta: f64) -> Matrix {
    &Matrix::identity(a_tilde.rows()) - &a_tilde.scale(alpha + beta - 1.0)
}

/// `c = (1-β)/(2-α-β)`.
pub fn consensus_equilibrium(alpha: f64, beta: f64) -> Result<f64> {
    check_params(alpha, beta)?;
    Ok((1.0 - beta) / (2.0 - alpha - beta))
}

/// `C(α, β)`: variance of the white increment at the equilibrium.
pub fn noise_variance_c(alpha: f64, beta: f64) -> Result<f64> {
    let c = consensus_equilibrium(alpha, beta)?;
    let second = alpha * alpha * c + (1.0 - beta) * (1.0 - beta) * (1.0 - c);
    let first = alpha * c + (1.0 - beta) * (1.0 - c);
    Ok((second - first * first).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoInfo {
    pub rho: f64,
    pub regime: Regime,
}

/// Smallest real part of the spectrum of `H`.
///
/// For `r ≥ 0` this is `1 - r = 2 - α - β` because the Perron value 1 of the
/// column-stochastic `Ã` has the largest real part; for `r < 0` it is
/// `1 - r Re λ_min(Ã)`.
pub fn rho(alpha: f64, beta: f64, a_tilde: &Matrix) -> Result<RhoInfo> {
    check_params(alpha, beta)?;
    let r = alpha + beta - 1.0;
    let rho = if r >= 0.0 {
        2.0 - alpha - beta
    } else {
        1.0 - r * eigenvalues(a_tilde)?.min_real
    };
    Ok(RhoInfo { rho, regime: Regime::from_rho(rho) })
}

fn gram(a_tilde: &Matrix) -> Matrix {
    a_tilde.transpose().matmul(a_tilde)
}

/// `Σ = C(α, β) S` with `(H - I/2)ᵀ S + S (H - I/2) = ÃᵀÃ`.
pub fn clt_covariance(alpha: f64, beta: f64, a_tilde: &Matrix) -> Result<Matrix> {
    let info = rho(alpha, beta, a_tilde)?;
    if info.regime != Regime::GaussianSqrtT {
        return Err(Error::WrongRegime(format!("rho = {} is not above 1/2", info.rho)));
    }
    let n = a_tilde.rows();
    let b = &h_matrix(a_tilde, alpha, beta) - &Matrix::identity(n).scale(0.5);
    let s = lyapunov_solve(&b, &gram(a_tilde))?;
    Ok(s.scale(noise_variance_c(alpha, beta)?))
}

/// `Σ̃ = C(α, β)` times the log-averaged Gram integral of `H` against `ÃᵀÃ`.
pub fn clt_covariance_critical(alpha: f64, beta: f64, a_tilde: &Matrix) -> Result<Matrix> {
    let info = rho(alpha, beta, a_tilde)?;
    if info.regime != Regime::GaussianSqrtTlogt {
        return Err(Error::WrongRegime(format!("rho = {} is not 1/2", info.rho)));
    }
    let s = log_averaged_gram(&h_matrix(a_tilde, alpha, beta), &gram(a_tilde))?;
    Ok(s.scale(noise_variance_c(alpha, beta)?))
}

/// Symmetric with unit row and column sums.
pub fn is_symmetric_doubly_stochastic(a_tilde: &Matrix) -> bool {
    a_tilde.is_square()
        && a_tilde.is_symmetric(REGULAR_TOL)
        && a_tilde.row_sums().iter().all(|s| (s - 1.0).abs() <= REGULAR_TOL)
}

/// Rate class keyed on `λ₂`, the largest real eigenvalue of `Ã` other than
/// one copy of 1. A single vertex has no `λ₂`; its deviation vanishes and it
/// is reported as `TInv`.
pub fn polya_rate_class(a_tilde: &Matrix) -> Result<RateClass> {
    if !is_symmetric_doubly_stochastic(a_tilde) {
        return Err(Error::NotRegular);
    }
    let lambda2 = eigenvalues(a_tilde)?.second_max_real.unwrap_or(f64::NEG_INFINITY);
    Ok(rate_class_from_lambda2(lambda2))
}

pub fn rate_class_from_lambda2(lambda2: f64) -> RateClass {
    if (lambda2 - 0.5).abs() <= CRITICAL_TOL {
        RateClass::LogtOverT
    } else if lambda2 < 0.5 {
        RateClass::TInv
    } else {
        RateClass::TPow { exponent: 2.0 * lambda2 - 2.0 }
    }
}

/// Almost-sure limit under per-vertex replacement matrices.
///
/// Non-source vertices satisfy
/// `z_i m̂_i = Σ_{j→i} (c_j z_j + m_j - b_j)` with `c_j = a_j + b_j - m_j`.
/// Zero in-degree vertices are never reinforced; they are pinned at
/// `source_fractions[i]`, or at 1 when `None`.
pub fn heterogeneous_limit(
    g: &DirectedGraph,
    scheme: &HeterogeneousScheme,
    source_fractions: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = g.n_vertices();
    if scheme.matrices.len() != n {
        return Err(Error::DimensionMismatch(format!("{} matrices for {n} vertices", scheme.matrices.len())));
    }
    if let Some(s) = source_fractions {
        if s.len() != n {
            return Err(Error::DimensionMismatch("source fractions length".into()));
        }
    }
    let mut system = Matrix::zeros(n, n);
    let mut rhs = vec![0.0; n];
    for (i, nb) in g.in_neighbours().iter().enumerate() {
        if nb.is_empty() {
            system[(i, i)] = 1.0;
            rhs[i] = source_fractions.map_or(1.0, |s| s[i]);
            continue;
        }
        for &j in nb {
            let r = scheme.matrices[j];
            let (a, b, m) = (r.a() as f64, r.b() as f64, r.m() as f64);
            system[(i, i)] += m;
            system[(i, j)] -= a + b - m;
            rhs[i] += m - b;
        }
    }
    let inv = invert(&system).map_err(|e| match e {
        Error::SingularMatrix { .. } => Error::SingularLimitSystem,
        other => other,
    })?;
    Ok(inv.mul_vec(&rhs))
}

/// `(1-β) 1 (I - rÃ)⁻¹`, with zero columns of `Ã` allowed for sources.
pub fn explicit_inverse_equilibrium(alpha: f64, beta: f64, a_tilde: &Matrix) -> Result<Vec<f64>> {
    check_params(alpha, beta)?;
    let n = a_tilde.rows();
    let m = &Matrix::identity(n) - &a_tilde.scale(alpha + beta - 1.0);
    let inv = invert(&m)?;
    Ok(inv.left_mul_vec(&vec![1.0 - beta; n]))
}

/// Smallest `d₁ ∈ [0, d]` with `(a d₁ + r (d - d₁)) / d ≥ target`.
///
/// Inputs are converted to exact rationals, so the answer is exact for the
/// binary values given. `b` is shared by both groups and does not enter.
pub fn influence_threshold(d: u64, a: f64, r: f64, _b: f64, target: f64) -> Option<u64> {
    if d == 0 {
        return None;
    }
    let a = BigRational::from_float(a)?;
    let r = BigRational::from_float(r)?;
    let target = BigRational::from_float(target)?;
    let dd = BigRational::from_integer(BigInt::from(d));
    // a d₁ + r (d - d₁) ≥ target d  ⇔  (a - r) d₁ ≥ (target - r) d
    let need = (&target - &r) * &dd;
    if !need.is_positive() {
        return Some(0);
    }
    let slope = &a - &r;
    if !slope.is_positive() {
        return None;
    }
    let d1 = (need / slope).ceil();
    if d1 > dd {
        return None;
    }
    d1.to_integer().to_u64()
}

/// Exact group-share value `(a d₁ + r (d - d₁)) / d` as a rational.
pub fn influence_value(d: u64, d1: u64, a: f64, r: f64) -> Option<BigRational> {
    let a = BigRational::from_float(a)?;
    let r = BigRational::from_float(r)?;
    let d1r = BigRational::from_integer(BigInt::from(d1));
    let dr = BigRational::from_integer(BigInt::from(d));
    if dr.is_zero() {
        return None;
    }
    Some((a * &d1r + r * (&dr - &d1r)) / dr)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdePath {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl OdePath {
    /// Linear interpolation at `t`, clamped to the path's time range.
    pub fn at(&self, t: f64) -> Vec<f64> {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[last] {
            return self.states[last].clone();
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.states[k].iter().zip(&self.states[k + 1]).map(|(x, y)| x + w * (y - x)).collect()
    }
}

/// Explicit Euler path of `ż = h(z)` on `[0, horizon]`; the final step is
/// shortened to land on `horizon`. The Pólya case is allowed.
pub fn integrate_ode(z0: &[f64], a_tilde: &Matrix, alpha: f64, beta: f64, horizon: f64, dt: f64) -> Result<OdePath> {
    if !(dt > 0.0) || !(horizon >= 0.0) {
        return Err(Error::InvalidParams(format!("need dt > 0 and horizon >= 0, got dt = {dt}, horizon = {horizon}")));
    }
    let steps = libm::ceil(horizon / dt - 1e-9).max(0.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut z = z0.to_vec();
    times.push(0.0);
    states.push(z.clone());
    for k in 0..steps {
        let t = k as f64 * dt;
        let h = (horizon - t).min(dt);
        let dz = drift(&z, a_tilde, alpha, beta)?;
        z.iter_mut().zip(&dz).for_each(|(zi, di)| *zi += h * di);
        times.push(t + h);
        states.push(z.clone());
    }
    Ok(OdePath { times, states })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub regime: Regime,
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_var_c: Option<f64>,
    /// `Σ` when `ρ > 1/2`, `Σ̃` when `ρ = 1/2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_class: Option<RateClass>,
    pub notes: Vec<String>,
}

/// Every prediction that applies to `(α, β)` on `Ã`.
pub fn predict(a_tilde: &Matrix, alpha: f64, beta: f64) -> Result<TheoryReport> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let mut report = TheoryReport {
        regime: Regime::Polya,
        alpha,
        beta,
        rho: None,
        c: None,
        equilibrium: None,
        noise_var_c: None,
        sigma: None,
        lambda2: None,
        rate_class: None,
        notes: Vec::new(),
    };
    if is_polya(alpha, beta) {
        report.lambda2 = eigenvalues(a_tilde)?.second_max_real;
        match polya_rate_class(a_tilde) {
            Ok(class) => {
                report.rate_class = Some(class);
                report.notes.push("rate class keyed on the second-largest real eigenvalue of the weighted adjacency".into());
            }
            Err(Error::NotRegular) => {
                report.notes.push("rate class needs a symmetric doubly stochastic weighted adjacency".into())
            }
            Err(e) => return Err(e),
        }
        return Ok(report);
    }
    let n = a_tilde.rows();
    let r = alpha + beta - 1.0;
    // I - rÃ must be invertible for |r| < 1; the equilibrium is built from it.
    let z_star = explicit_inverse_equilibrium(alpha, beta, a_tilde)?;
    let c = consensus_equilibrium(alpha, beta)?;
    let info = rho(alpha, beta, a_tilde)?;
    report.regime = info.regime;
    report.rho = Some(info.rho);
    report.c = Some(c);
    report.equilibrium = Some(vec![c; n]);
    report.noise_var_c = Some(noise_variance_c(alpha, beta)?);
    let dev = z_star.iter().map(|z| (z - c).abs()).fold(0.0, f64::max);
    if dev > 1e-8 {
        report.notes.push(format!("explicit-inverse equilibrium deviates from c by {dev:e}"));
    }
    if r.abs() < 1.0 {
        invert(&(&a_tilde.scale(r) - &Matrix::identity(n)))?;
    }
    match info.regime {
        Regime::GaussianSqrtT => report.sigma = Some(clt_covariance(alpha, beta, a_tilde)?),
        Regime::GaussianSqrtTlogt => report.sigma = Some(clt_covariance_critical(alpha, beta, a_tilde)?),
        Regime::SubcriticalTRho => report.notes.push("t^rho scaling only; no limit covariance".into()),
        Regime::Polya => unreachable!(),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphFamily, GraphParams};
    use crate::urn::ReplacementMatrix;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn family(f: GraphFamily, n: usize) -> Matrix {
        generate_graph(f, &GraphParams::n(n), 0).unwrap().weighted_adjacency().unwrap()
    }

    fn j_matrix(n: usize, v: f64) -> Matrix {
        Matrix::from_fn(n, n, |_, _| v)
    }

    #[test]
    fn drift_vanishes_at_equilibrium() {
        let a = family(GraphFamily::StarUndirected, 5);
        for &(al, be) in &[(0.25, 0.25), (0.25, 0.5), (0.0, 0.0), (0.9, 0.3)] {
            let c = consensus_equilibrium(al, be).unwrap();
            let h = drift(&[c; 5], &a, al, be).unwrap();
            assert!(h.iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn polya_drift_vanishes_on_constants() {
        let a = family(GraphFamily::CycleDirected, 4);
        let h = drift(&[0.3; 4], &a, 1.0, 1.0).unwrap();
        assert!(h.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn drift_jacobian_finite_difference() {
        let a = family(GraphFamily::StarUndirected, 5);
        let (al, be) = (0.3, 0.6);
        let z = [0.1, 0.5, 0.7, 0.2, 0.9];
        let expected = (&a.scale(al + be - 1.0) - &Matrix::identity(5)).transpose();
        let eps = 1e-6;
        for k in 0..5 {
            let mut zp = z;
            let mut zm = z;
            zp[k] += eps;
            zm[k] -= eps;
            let hp = drift(&zp, &a, al, be).unwrap();
            let hm = drift(&zm, &a, al, be).unwrap();
            for i in 0..5 {
                // row-vector convention: ∂h_i/∂z_k = (rÃ - I)[k][i]
                assert!(close((hp[i] - hm[i]) / (2.0 * eps), expected[(i, k)], 1e-6));
            }
        }
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(consensus_equilibrium(0.3, 0.3).unwrap(), 0.5);
        assert_eq!(consensus_equilibrium(0.0, 0.0).unwrap(), 0.5);
        assert_eq!(consensus_equilibrium(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(consensus_equilibrium(1.0, 1.0), Err(Error::PolyaType));
    }

    #[test]
    fn rho_examples() {
        let star = family(GraphFamily::StarUndirected, 5);
        let info = rho(0.75, 0.75, &star).unwrap();
        assert_eq!(info.rho, 0.5);
        assert_eq!(info.regime, Regime::GaussianSqrtTlogt);
        assert_eq!(rho(0.4, 0.6, &star).unwrap().rho, 1.0);
        let k2 = family(GraphFamily::CompleteWithLoops, 2);
        let info = rho(0.0, 0.0, &k2).unwrap();
        assert!(close(info.rho, 1.0, 1e-12));
        assert_eq!(info.regime, Regime::GaussianSqrtT);
        assert_eq!(rho(1.0, 1.0, &k2), Err(Error::PolyaType));
    }

    #[test]
    fn subcritical_on_odd_cycle() {
        let c5 = family(GraphFamily::CycleUndirected, 5);
        let info = rho(0.0, 0.0, &c5).unwrap();
        let expected = 1.0 + libm::cos(4.0 * core::f64::consts::PI / 5.0);
        assert!(close(info.rho, expected, 1e-12));
        assert_eq!(info.regime, Regime::SubcriticalTRho);
    }

    #[test]
    fn noise_variance_examples() {
        for &a in &[0.0, 0.25, 0.75, 0.9] {
            assert!(close(noise_variance_c(a, a).unwrap(), (a - 0.5) * (a - 0.5), 1e-15));
        }
        assert_eq!(noise_variance_c(1.0, 0.0).unwrap(), 0.0);
        assert!(close(noise_variance_c(0.0, 0.0).unwrap(), 0.25, 1e-15));
    }

    #[test]
    fn sigma_two_vertex_complete() {
        let k2 = family(GraphFamily::CompleteWithLoops, 2);
        let s = clt_covariance(0.25, 0.25, &k2).unwrap();
        assert!(s.relative_error(&j_matrix(2, 1.0 / 64.0)) < 1e-12);
    }

    #[test]
    fn sigma_when_h_is_identity() {
        let a = family(GraphFamily::StarUndirected, 5);
        let s = clt_covariance(0.4, 0.6, &a).unwrap();
        let expected = gram(&a).scale(noise_variance_c(0.4, 0.6).unwrap());
        assert!(s.relative_error(&expected) < 1e-10);
    }

    #[test]
    fn sigma_rejects_other_regimes() {
        let k2 = family(GraphFamily::CompleteWithLoops, 2);
        assert!(matches!(clt_covariance(0.75, 0.75, &k2), Err(Error::WrongRegime(_))));
        assert!(matches!(clt_covariance_critical(0.25, 0.25, &k2), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn critical_sigma_regular() {
        let k4 = family(GraphFamily::CompleteWithLoops, 4);
        let s = clt_covariance_critical(0.75, 0.75, &k4).unwrap();
        assert!(s.relative_error(&j_matrix(4, 1.0 / 64.0)) < 1e-8);
        let c6 = family(GraphFamily::CycleUndirected, 6);
        let (al, be) = (0.6, 0.9);
        let s = clt_covariance_critical(al, be, &c6).unwrap();
        let cv = noise_variance_c(al, be).unwrap();
        assert!(s.relative_error(&j_matrix(6, cv / 6.0)) < 1e-8);
    }

    #[test]
    fn critical_sigma_single_loop() {
        let one = DirectedGraph::new(1, vec![(0, 0)]).unwrap().weighted_adjacency().unwrap();
        let s = clt_covariance_critical(0.75, 0.75, &one).unwrap();
        assert!(close(s[(0, 0)], noise_variance_c(0.75, 0.75).unwrap(), 1e-14));
    }

    #[test]
    fn rate_classes() {
        assert_eq!(polya_rate_class(&family(GraphFamily::CompleteWithLoops, 5)).unwrap(), RateClass::TInv);
        assert_eq!(polya_rate_class(&family(GraphFamily::CycleUndirected, 6)).unwrap(), RateClass::LogtOverT);
        match polya_rate_class(&family(GraphFamily::CycleUndirected, 8)).unwrap() {
            RateClass::TPow { exponent } => assert!(close(exponent, libm::sqrt(2.0) - 2.0, 1e-9)),
            other => panic!("unexpected {other:?}"),
        }
        let star = family(GraphFamily::StarUndirected, 5);
        assert_eq!(polya_rate_class(&star), Err(Error::NotRegular));
    }

    fn example3(a1: u64, b1: u64, a2: u64, b2: u64, m: u64) -> (Vec<f64>, f64) {
        let g = generate_graph(GraphFamily::CompleteWithLoops, &GraphParams::n(2), 0).unwrap();
        let scheme = HeterogeneousScheme::new(vec![
            ReplacementMatrix::new(a1, b1, m).unwrap(),
            ReplacementMatrix::new(a2, b2, m).unwrap(),
        ]);
        let z = heterogeneous_limit(&g, &scheme, None).unwrap();
        let mm = 2.0 * m as f64;
        let sb = (b1 + b2) as f64 / mm;
        let sa = (a1 + a2) as f64 / mm;
        (z, (1.0 - sb) / (2.0 - sa - sb))
    }

    #[test]
    fn heterogeneous_two_node() {
        for &(a1, b1, a2, b2) in &[(1, 2, 3, 0), (4, 4, 0, 1), (2, 3, 2, 3)] {
            let (z, expected) = example3(a1, b1, a2, b2, 5);
            assert!(close(z[0], expected, 1e-12) && close(z[1], expected, 1e-12));
        }
    }

    #[test]
    fn heterogeneous_reduces_to_homogeneous() {
        let g = generate_graph(GraphFamily::StarUndirected, &GraphParams::n(5), 0).unwrap();
        let r = ReplacementMatrix::new(1, 1, 3).unwrap();
        let z = heterogeneous_limit(&g, &HeterogeneousScheme::uniform(r, 5), None).unwrap();
        assert!(z.iter().all(|x| close(*x, 0.5, 1e-12)));
    }

    #[test]
    fn star_influence() {
        let (d1, d2) = (3usize, 4usize);
        let d = d1 + d2;
        let edges = (1..=d).map(|j| (j, 0)).collect();
        let g = DirectedGraph::new(d + 1, edges).unwrap();
        let (a, r, b, m) = (9u64, 2u64, 3u64, 10u64);
        let mut mats = vec![ReplacementMatrix::new(a, b, m).unwrap(); d + 1];
        for mat in mats.iter_mut().skip(d1 + 1) {
            *mat = ReplacementMatrix::new(r, b, m).unwrap();
        }
        let z = heterogeneous_limit(&g, &HeterogeneousScheme::new(mats), None).unwrap();
        let expected = (0.9 * d1 as f64 + 0.2 * d2 as f64) / d as f64;
        assert!(close(z[0], expected, 1e-12));
    }

    #[test]
    fn explicit_inverse_with_sources() {
        let g = DirectedGraph::new(5, (1..5).map(|j| (j, 0)).collect()).unwrap();
        let a = g.weighted_adjacency_allow_sources();
        let (al, be) = (0.3, 0.4);
        let z = explicit_inverse_equilibrium(al, be, &a).unwrap();
        assert!(close(z[0], (1.0 - be) * (al + be), 1e-12));
    }

    #[test]
    fn influence_examples() {
        assert_eq!(influence_threshold(10, 0.9, 0.1, 0.0, 0.5), Some(5));
        assert_eq!(influence_threshold(10, 0.4, 0.4, 0.0, 0.3), Some(0));
        assert_eq!(influence_threshold(10, 0.4, 0.4, 0.0, 0.5), None);
        assert_eq!(influence_threshold(10, 0.2, 0.7, 0.0, 0.0), Some(0));
        assert_eq!(influence_threshold(10, 0.6, 0.1, 0.0, 0.9), None);
    }

    #[test]
    fn ode_equilibrium_is_fixed() {
        let a = family(GraphFamily::StarUndirected, 5);
        let path = integrate_ode(&[0.5; 5], &a, 0.25, 0.25, 1.0, 1e-2).unwrap();
        assert!(path.states.iter().all(|s| s.iter().all(|x| close(*x, 0.5, 1e-15))));
        assert!(close(*path.times.last().unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn predict_polya_cycle() {
        let report = predict(&family(GraphFamily::CycleUndirected, 8), 1.0, 1.0).unwrap();
        assert_eq!(report.regime, Regime::Polya);
        assert!(report.rho.is_none() && report.equilibrium.is_none());
        assert!(matches!(report.rate_class, Some(RateClass::TPow { .. })));
    }

    #[test]
    fn predict_friedman_star() {
        let report = predict(&family(GraphFamily::StarUndirected, 5), 0.5, 0.5).unwrap();
        assert_eq!(report.regime, Regime::GaussianSqrtT);
        assert_eq!(report.c, Some(0.5));
        assert_eq!(report.rho, Some(1.0));
        assert!(report.sigma.is_some());
    }
}
