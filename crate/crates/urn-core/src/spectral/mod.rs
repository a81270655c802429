//! Dense linear algebra for the theory engine.
//!
//! Everything here works on small dense matrices (n up to a few hundred):
//! general real eigenvalues through Hessenberg reduction and shifted QR,
//! a Jacobi path for symmetric input, complex eigendecompositions for
//! diagonalizable matrices, Lyapunov solves and the log-averaged Gram
//! integral of the critical fluctuation regime.

mod eigen;
mod gram;
mod lu;
mod lyapunov;
mod matrix;

pub use eigen::{eigen_decomposition, eigenvalues, symmetric_eigen, EigenDecomposition, Spectrum};
pub use gram::log_averaged_gram;
pub use lu::{invert, invert_complex, solve, Lu};
pub use lyapunov::{lyapunov_solve, lyapunov_solve_eigen, lyapunov_solve_kronecker};
pub use matrix::{CMatrix, Mat, Matrix};

pub use num_complex::Complex64;

/// Tolerance used when deciding whether a real part sits exactly on 1/2.
pub const CRITICAL_TOL: f64 = 1e-9;
