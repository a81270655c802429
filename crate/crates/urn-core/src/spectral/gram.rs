use num_complex::Complex64;

use super::eigen::eigen_decomposition;
use super::matrix::{CMatrix, Matrix};
use super::CRITICAL_TOL;
use crate::error::{Error, Result};

/// `lim_{L→∞} (1/L) ∫₀ᴸ [e^{-(H-I/2)u}]ᵀ Γ e^{-(H-I/2)u} du`.
///
/// With `H - I/2 = V diag(μ) V⁻¹` the integrand is
/// `V⁻ᵀ [e^{-μ_a u} (VᵀΓV)_{ab} e^{-μ_b u}] V⁻¹`. Averaging over `[0, L]`
/// keeps exactly the entries with `μ_a + μ_b = 0` (both modes on the critical
/// line with opposite imaginary parts) and sends every other entry to zero.
pub fn log_averaged_gram(h: &Matrix, gamma: &Matrix) -> Result<Matrix> {
    if !h.is_square() || !gamma.is_square() || h.rows() != gamma.rows() {
        return Err(Error::DimensionMismatch("H and Γ must be square and equal size".into()));
    }
    let n = h.rows();
    let d = eigen_decomposition(h)?;
    let mu: alloc::vec::Vec<Complex64> = d.values.iter().map(|l| l - Complex64::new(0.5, 0.0)).collect();
    if mu.iter().any(|m| m.re < -CRITICAL_TOL) {
        return Err(Error::WrongRegime("H has an eigenvalue with real part below 1/2".into()));
    }
    if !mu.iter().any(|m| m.re.abs() <= CRITICAL_TOL) {
        return Err(Error::NotCriticalRegime);
    }
    let g = d.vectors.transpose().matmul(&gamma.to_complex()).matmul(&d.vectors);
    let mut x = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if (mu[a] + mu[b]).norm() <= CRITICAL_TOL {
                x[(a, b)] = g[(a, b)];
            }
        }
    }
    let vinv = &d.vectors_inv;
    let s = vinv.transpose().matmul(&x).matmul(vinv);
    Ok(s.real_part().symmetrize())
}
