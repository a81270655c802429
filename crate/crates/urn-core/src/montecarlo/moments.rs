//! Streaming moment accumulators with pairwise merging.
//!
//! Updates follow Welford; merges follow Chan et al. Merging is exact in
//! exact arithmetic; in floating point the result depends on merge order,
//! so callers fix the order.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::spectral::Matrix;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalarMoments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl ScalarMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Per-coordinate means and variances of a vector sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagMoments {
    pub count: u64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl DiagMoments {
    pub fn new(dim: usize) -> Self {
        DiagMoments { count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &xi) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let delta = xi - *m;
            *m += delta / k;
            *s += delta * (xi - *m);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    pub fn variances(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let denom = (self.count - 1) as f64;
        self.m2.iter().map(|s| s / denom).collect()
    }
}

/// Mean vector and full co-moment matrix of a vector sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovMoments {
    pub count: u64,
    pub mean: Vec<f64>,
    pub comoment: Matrix,
}

impl CovMoments {
    pub fn new(dim: usize) -> Self {
        CovMoments { count: 0, mean: vec![0.0; dim], comoment: Matrix::zeros(dim, dim) }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        let d = self.mean.len();
        let before: Vec<f64> = x.iter().zip(&self.mean).map(|(xi, m)| xi - m).collect();
        for (m, b) in self.mean.iter_mut().zip(&before) {
            *m += b / k;
        }
        for i in 0..d {
            let after_i = x[i] - self.mean[i];
            for j in 0..d {
                self.comoment[(i, j)] += after_i * before[j];
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = self.mean.len();
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for i in 0..d {
            for j in 0..d {
                self.comoment[(i, j)] += other.comoment[(i, j)] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl * nb / n;
        }
        self.count += other.count;
    }

    /// Unbiased, symmetrized sample covariance.
    pub fn covariance(&self) -> Matrix {
        let d = self.mean.len();
        if self.count < 2 {
            return Matrix::zeros(d, d);
        }
        self.comoment.scale(1.0 / (self.count - 1) as f64).symmetrize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let mut m = ScalarMoments::default();
        xs.iter().for_each(|&x| m.push(x));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert!((m.mean - mean).abs() < 1e-14);
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<[f64; 2]> = (0..50).map(|i| [i as f64 * 0.3, (i * i % 7) as f64]).collect();
        let mut all = CovMoments::new(2);
        xs.iter().for_each(|x| all.push(x));
        let mut a = CovMoments::new(2);
        let mut b = CovMoments::new(2);
        xs[..17].iter().for_each(|x| a.push(x));
        xs[17..].iter().for_each(|x| b.push(x));
        a.merge(&b);
        assert!((&a.covariance() - &all.covariance()).max_abs() < 1e-10);
        let mut d = DiagMoments::new(2);
        xs.iter().for_each(|x| d.push(x));
        let cov = all.covariance();
        assert!((d.variances()[1] - cov[(1, 1)]).abs() < 1e-10);
    }
}
