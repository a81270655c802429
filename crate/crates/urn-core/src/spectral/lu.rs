use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::matrix::{CMatrix, Mat, Matrix};
use crate::error::{Error, Result};

/// Condition numbers above this are reported as singular by [`invert`].
const MAX_CONDITION: f64 = 1e13;

pub trait LuScalar:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn modulus(self) -> f64;
}

impl LuScalar for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl LuScalar for Complex64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
    /// Smallest pivot modulus relative to the largest entry of the input.
    pub min_pivot_ratio: f64,
}

impl<T: LuScalar> Lu<T> {
    pub fn factor(a: &Mat<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("LU needs a square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.as_slice().iter().fold(0.0f64, |m, x| m.max(x.modulus()));
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].modulus()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            min_pivot = min_pivot.min(pmax);
            if pmax == 0.0 {
                continue;
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.modulus() != 0.0 {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - f * u;
                    }
                }
            }
        }
        let min_pivot_ratio = if n == 0 {
            1.0
        } else if scale > 0.0 {
            min_pivot / scale
        } else {
            0.0
        };
        Ok(Lu { lu, perm, min_pivot_ratio })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn is_singular(&self) -> bool {
        (0..self.dim()).any(|k| self.lu[(k, k)].modulus() == 0.0)
    }

    /// Solve `A x = b`.
    pub fn solve_vec(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch("right-hand side length".into()));
        }
        if self.is_singular() {
            return Err(Error::SingularMatrix { condition: f64::INFINITY });
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Mat<T>> {
        let n = self.dim();
        let mut inv = Mat::zeros(n, n);
        let mut e = alloc::vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve_vec(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// Solve `A x = b` for square real `A`.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Lu::factor(a)?.solve_vec(b)
}

/// Inverse of a real square matrix.
///
/// Fails with [`Error::SingularMatrix`] carrying the 1-norm condition
/// estimate `‖M‖₁‖M⁻¹‖₁` when it exceeds 1e13 or a pivot vanishes.
pub fn invert(m: &Matrix) -> Result<Matrix> {
    if !m.is_finite() {
        return Err(Error::InvalidParams("matrix has non-finite entries".into()));
    }
    let lu = Lu::factor(m)?;
    if lu.is_singular() {
        return Err(Error::SingularMatrix { condition: f64::INFINITY });
    }
    let inv = lu.inverse()?;
    let condition = m.norm_1() * inv.norm_1();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularMatrix { condition });
    }
    Ok(inv)
}

pub fn invert_complex(m: &CMatrix) -> Result<(CMatrix, f64)> {
    let lu = Lu::factor(m)?;
    if lu.is_singular() {
        return Err(Error::SingularMatrix { condition: f64::INFINITY });
    }
    let inv = lu.inverse()?;
    let condition = m.norm_1() * inv.norm_1();
    Ok((inv, condition))
}
