use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lu::invert_complex;
use super::matrix::{CMatrix, Matrix};
use crate::error::{Error, Result};

/// Iteration cap per eigenvalue in the shifted QR sweep.
const QR_MAX_ITERS: usize = 60;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvector matrices with a larger 1-norm condition number are treated
/// as non-diagonalizable.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e8;
/// An eigenvalue within this distance of 1 is taken as the Perron value.
const PERRON_TOL: f64 = 1e-9;

/// Eigenvalues of a real square matrix with a few summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by decreasing real part, then decreasing imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub min_real: f64,
    pub max_real: f64,
    /// Largest real part once one copy of the eigenvalue 1 is removed.
    /// `None` when 1 is not an eigenvalue or nothing else remains.
    pub second_max_real: Option<f64>,
}

impl Spectrum {
    fn from_values(mut eigenvalues: Vec<Complex64>) -> Self {
        eigenvalues.sort_by(|a, b| {
            b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal).then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
        });
        let min_real = eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let max_real = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let perron = eigenvalues
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z - Complex64::new(1.0, 0.0)).norm()))
            .filter(|&(_, d)| d <= PERRON_TOL)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
            .map(|(i, _)| i);
        let second_max_real = perron.and_then(|skip| {
            eigenvalues
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, z)| z.re)
                .reduce(f64::max)
        });
        Spectrum { eigenvalues, min_real, max_real, second_max_real }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalue with minimum real part; ties go to the smallest |Im|.
    pub fn lambda_min(&self) -> Option<Complex64> {
        self.extreme(|a, b| a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal))
    }

    /// Eigenvalue with maximum real part; ties go to the smallest |Im|.
    pub fn lambda_max(&self) -> Option<Complex64> {
        self.extreme(|a, b| b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal))
    }

    fn extreme(&self, by: impl Fn(&Complex64, &Complex64) -> Ordering) -> Option<Complex64> {
        self.eigenvalues.iter().copied().min_by(|a, b| {
            let tie = (a.re - b.re).abs() <= 1e-12 * (1.0 + a.re.abs());
            if tie {
                a.im.abs().partial_cmp(&b.im.abs()).unwrap_or(Ordering::Equal)
            } else {
                by(a, b)
            }
        })
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Eigenvalues of a real square matrix.
///
/// Symmetric input goes through cyclic Jacobi rotations; everything else is
/// balanced, reduced to upper Hessenberg form and run through the Francis
/// double-shift QR iteration. Complex eigenvalues come out in conjugate pairs.
pub fn eigenvalues(m: &Matrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues need a square matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::InvalidParams("matrix has non-finite entries".into()));
    }
    let tol = 1e-14 * m.max_abs().max(1.0);
    let values = if m.is_symmetric(tol) {
        symmetric_eigen(m)?.0.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
    } else {
        hessenberg_qr(m)?
    };
    Ok(Spectrum::from_values(values))
}

/// Cyclic Jacobi for symmetric matrices. Returns eigenvalues (descending)
/// and the orthogonal matrix whose columns are the matching eigenvectors.
pub fn symmetric_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = m.rows();
    let mut a = m.symmetrize();
    let mut v = Matrix::identity(n);
    let total = a.frobenius_norm();
    let mut converged = n <= 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if libm::sqrt(off) <= 1e-15 * total.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { iterations: JACOBI_MAX_SWEEPS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap_or(Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

fn hessenberg_qr(m: &Matrix) -> Result<Vec<Complex64>> {
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-based working copy keeps the index arithmetic of the classic
    // balance / elmhes / hqr routines readable.
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    balance(&mut a, n);
    reduce_to_hessenberg(&mut a, n);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a[i][j] = 0.0;
        }
    }
    hqr(&mut a, n)
}

fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for j in 1..=n {
                        a[j][i] *= f;
                    }
                }
            }
        }
    }
}

/// Similarity reduction to upper Hessenberg form by stabilized elimination.
fn reduce_to_hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (1-based).
fn hqr(a: &mut [Vec<f64>], n: usize) -> Result<Vec<Complex64>> {
    let mut wr = vec![0.0f64; n + 1];
    let mut wi = vec![0.0f64; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = libm::sqrt(q.abs());
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn = nn.saturating_sub(2);
                } else {
                    if its == QR_MAX_ITERS {
                        return Err(Error::ConvergenceFailure { iterations: QR_MAX_ITERS });
                    }
                    if its % 10 == 0 && its > 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign(libm::sqrt(p * p + q * q + r * r), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// `M = V diag(values) V⁻¹` for a diagonalizable real matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// Columns are unit-norm right eigenvectors.
    pub vectors: CMatrix,
    pub vectors_inv: CMatrix,
    /// 1-norm condition number of `vectors`.
    pub condition: f64,
}

/// Complex eigendecomposition of a real square matrix.
///
/// Eigenvalues closer than a relative 1e-7 are clustered and the eigenspace
/// of each cluster is taken as the numerical null space of `M - λI`. Fails
/// with [`Error::NonDiagonalizable`] when a cluster has a deficient
/// eigenspace or the eigenvector matrix condition exceeds 1e8.
pub fn eigen_decomposition(m: &Matrix) -> Result<EigenDecomposition> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigen decomposition needs a square matrix".into()));
    }
    let scale = m.max_abs().max(1.0);
    if m.is_symmetric(1e-14 * scale) {
        let (vals, vecs) = symmetric_eigen(m)?;
        let values = vals.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let vectors = vecs.to_complex();
        let vectors_inv = vecs.transpose().to_complex();
        return Ok(EigenDecomposition { values, vectors, vectors_inv, condition: 1.0 });
    }

    let spectrum = eigenvalues(m)?;
    let cluster_tol = 1e-7 * scale;
    let mut assigned = vec![false; n];
    let mut values = Vec::with_capacity(n);
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mc = m.to_complex();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..n)
            .filter(|&j| !assigned[j] && (spectrum.eigenvalues[j] - spectrum.eigenvalues[i]).norm() <= cluster_tol)
            .collect();
        let k = members.len();
        let lambda = members.iter().map(|&j| spectrum.eigenvalues[j]).sum::<Complex64>() / k as f64;
        for &j in &members {
            assigned[j] = true;
        }
        let mut shifted = mc.clone();
        for d in 0..n {
            shifted[(d, d)] -= lambda;
        }
        let basis = null_space(&shifted, 1e-8 * scale);
        if basis.len() < k {
            return Err(Error::NonDiagonalizable { condition: f64::INFINITY });
        }
        for v in basis.into_iter().take(k) {
            values.push(lambda);
            columns.push(v);
        }
    }
    let vectors = CMatrix::from_fn(n, n, |r, c| columns[c][r]);
    let (vectors_inv, condition) = match invert_complex(&vectors) {
        Ok(x) => x,
        Err(_) => return Err(Error::NonDiagonalizable { condition: f64::INFINITY }),
    };
    if !(condition <= MAX_EIGENVECTOR_CONDITION) {
        return Err(Error::NonDiagonalizable { condition });
    }
    Ok(EigenDecomposition { values, vectors, vectors_inv, condition })
}

/// Null space basis of a square complex matrix by fully pivoted elimination.
/// Pivots at or below `tol` count as zero. Returned vectors have unit norm.
fn null_space(m: &CMatrix, tol: f64) -> Vec<Vec<Complex64>> {
    let n = m.rows();
    let mut a = m.clone();
    let mut colperm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for k in 0..n {
        let mut best = (k, k, -1.0f64);
        for i in k..n {
            for j in k..n {
                let v = a[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        let (pi, pj, _) = best;
        if pi != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(pi, j)];
                a[(pi, j)] = tmp;
            }
        }
        if pj != k {
            colperm.swap(pj, k);
            for i in 0..n {
                let tmp = a[(i, k)];
                a[(i, k)] = a[(i, pj)];
                a[(i, pj)] = tmp;
            }
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f.norm() != 0.0 {
                for j in k..n {
                    let u = a[(k, j)];
                    a[(i, j)] -= f * u;
                }
            }
        }
        rank += 1;
    }
    let mut basis = Vec::with_capacity(n - rank);
    for free in rank..n {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[free] = Complex64::new(1.0, 0.0);
        for i in (0..rank).rev() {
            let mut s = -a[(i, free)];
            for j in i + 1..rank {
                s -= a[(i, j)] * x[j];
            }
            x[i] = s / a[(i, i)];
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for (pos, &orig) in colperm.iter().enumerate() {
            v[orig] = x[pos];
        }
        let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        v.iter_mut().for_each(|z| *z /= norm);
        basis.push(v);
    }
    basis
}
