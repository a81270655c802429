use num_complex::Complex64;

use super::eigen::{eigen_decomposition, eigenvalues};
use super::lu::Lu;
use super::matrix::{CMatrix, Matrix};
use crate::error::{Error, Result};

/// Above this size the n²×n² Kronecker system gets too expensive and the
/// eigendecomposition route is used instead.
const KRONECKER_MAX_N: usize = 24;

/// Solve `Aᵀ S + S A = Q` for symmetric `Q`.
///
/// Requires `λ_i + λ_j ≠ 0` for every pair of eigenvalues of `A`, otherwise
/// [`Error::SingularSylvester`]. Small systems are solved through the
/// vectorized Kronecker form; larger ones through a complex
/// eigendecomposition of `A`.
pub fn lyapunov_solve(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    check_shapes(a, q)?;
    let spectrum = eigenvalues(a)?;
    let scale = spectrum.max_modulus().max(1.0);
    for (i, li) in spectrum.eigenvalues.iter().enumerate() {
        for lj in &spectrum.eigenvalues[i..] {
            if (li + lj).norm() <= 1e-12 * scale {
                return Err(Error::SingularSylvester(li.re, lj.re));
            }
        }
    }
    if a.rows() <= KRONECKER_MAX_N {
        lyapunov_solve_kronecker(a, q)
    } else {
        lyapunov_solve_eigen(a, q)
    }
}

fn check_shapes(a: &Matrix, q: &Matrix) -> Result<()> {
    if !a.is_square() || !q.is_square() || a.rows() != q.rows() {
        return Err(Error::DimensionMismatch("Lyapunov operands must be square and equal size".into()));
    }
    Ok(())
}

/// Vectorized solve: `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec(S) = vec(Q)` in row-major layout.
pub fn lyapunov_solve_kronecker(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    check_shapes(a, q)?;
    let n = a.rows();
    let nn = n * n;
    let mut k = Matrix::zeros(nn, nn);
    for i in 0..n {
        for c in 0..n {
            let row = i * n + c;
            // (Aᵀ S)[i][c] = Σ_j A[j][i] S[j][c]
            for j in 0..n {
                k[(row, j * n + c)] += a[(j, i)];
            }
            // (S A)[i][c] = Σ_j S[i][j] A[j][c]
            for j in 0..n {
                k[(row, i * n + j)] += a[(j, c)];
            }
        }
    }
    let lu = Lu::factor(&k)?;
    if lu.is_singular() || lu.min_pivot_ratio < 1e-14 {
        return Err(Error::SingularSylvester(f64::NAN, f64::NAN));
    }
    let s = lu.solve_vec(q.as_slice())?;
    Ok(Matrix::from_row_major(n, n, s).symmetrize())
}

/// Eigenbasis solve. With `A = V Λ V⁻¹` and `S = V⁻ᵀ X V⁻¹` the equation
/// becomes `Λ X + X Λ = Vᵀ Q V`, solved entrywise.
pub fn lyapunov_solve_eigen(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    check_shapes(a, q)?;
    let n = a.rows();
    let d = eigen_decomposition(a)?;
    let g = d.vectors.transpose().matmul(&q.to_complex()).matmul(&d.vectors);
    let scale = d.values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut x = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let denom: Complex64 = d.values[r] + d.values[c];
            if denom.norm() <= 1e-12 * scale {
                return Err(Error::SingularSylvester(d.values[r].re, d.values[c].re));
            }
            x[(r, c)] = g[(r, c)] / denom;
        }
    }
    let vinv = &d.vectors_inv;
    let s = vinv.transpose().matmul(&x).matmul(vinv);
    Ok(s.real_part().symmetrize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn residual(a: &Matrix, s: &Matrix, q: &Matrix) -> f64 {
        let lhs = &a.transpose().matmul(s) + &s.matmul(a);
        (&lhs - q).frobenius_norm()
    }

    #[test]
    fn half_identity() {
        let a = Matrix::identity(3).scale(0.5);
        let q = Matrix::identity(3);
        let s = lyapunov_solve(&a, &q).unwrap();
        assert!((&s - &q).frobenius_norm() < 1e-14);
    }

    #[test]
    fn scalar_case() {
        let s = lyapunov_solve(&Matrix::identity(1), &Matrix::diagonal(&[2.0])).unwrap();
        assert!((s[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonsymmetric_both_routes_agree() {
        let a = Matrix::from_row_major(3, 3, vec![1.0, 0.4, 0.0, -0.3, 0.8, 0.2, 0.1, 0.0, 1.5]);
        let q = Matrix::from_row_major(3, 3, vec![2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 3.0]);
        let s1 = lyapunov_solve_kronecker(&a, &q).unwrap();
        let s2 = lyapunov_solve_eigen(&a, &q).unwrap();
        assert!(residual(&a, &s1, &q) < 1e-12);
        assert!(residual(&a, &s2, &q) < 1e-10);
        assert!((&s1 - &s2).frobenius_norm() < 1e-10);
    }

    #[test]
    fn singular_spectrum_is_rejected() {
        // eigenvalues 1 and -1 sum to zero
        let a = Matrix::diagonal(&[1.0, -1.0]);
        let q = Matrix::identity(2);
        assert!(matches!(lyapunov_solve(&a, &q), Err(Error::SingularSylvester(..))));
    }
}
