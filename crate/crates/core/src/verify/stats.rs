//! Running first and second moments of paired Monte Carlo observations.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Sums, cross sums and count of `d`-dimensional observations. Merging is
/// associative, so per-chunk moments can be combined in any grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub sums: Vec<f64>,
    /// Row-major `d × d` sums of products.
    pub cross: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Moments {
            count: 0,
            sums: vec![0.0; dim],
            cross: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sums.len()
    }

    pub fn push(&mut self, x: &[f64]) {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        self.count += 1;
        for i in 0..d {
            self.sums[i] += x[i];
            for j in 0..d {
                self.cross[i * d + j] += x[i] * x[j];
            }
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += b;
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sums[i] / self.count as f64
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mean(i)).collect()
    }

    /// Unbiased sample covariance of coordinates `i` and `j`.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return 0.0;
        }
        let d = self.dim();
        let c = (self.cross[i * d + j] - self.sums[i] * self.sums[j] / n) / (n - 1.0);
        if i == j {
            c.max(0.0)
        } else {
            c
        }
    }

    /// Standard error of `g · mean`, for a fixed weight vector `g`. Also the
    /// delta-method standard error of a smooth function of the means when `g`
    /// is its gradient.
    pub fn std_error(&self, g: &[f64]) -> f64 {
        let d = self.dim();
        let mut var = 0.0;
        for i in 0..d {
            for j in 0..d {
                var += g[i] * g[j] * self.cov(i, j);
            }
        }
        (var.max(0.0) / self.count as f64).sqrt()
    }
}

/// `z` with `Pr[N(0,1) > z] = tail`.
pub fn upper_quantile(tail: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - tail)
}

/// Two-sided 95% normal quantile.
pub fn z95() -> f64 {
    upper_quantile(0.025)
}

/// One-sided critical value of a `sigmas`-sigma test split over `tests`
/// comparisons (Bonferroni).
pub fn bonferroni_z(sigmas: f64, tests: usize) -> f64 {
    let tail = Normal::standard().cdf(-sigmas) / tests.max(1) as f64;
    upper_quantile(tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_direct_formulas() {
        let data = [[1.0, 2.0], [2.0, 1.0], [4.0, 5.0], [3.0, 3.0]];
        let mut m = Moments::new(2);
        for x in &data {
            m.push(x);
        }
        assert_eq!(m.mean(0), 2.5);
        assert!((m.cov(0, 0) - 5.0 / 3.0).abs() < 1e-12);
        assert!((m.cov(0, 1) - 5.5 / 3.0).abs() < 1e-12);
        let diff: Vec<f64> = data.iter().map(|x| x[0] - x[1]).collect();
        let mean = diff.iter().sum::<f64>() / 4.0;
        let var = diff.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 3.0;
        assert!((m.std_error(&[1.0, -1.0]) - (var / 4.0).sqrt()).abs() < 1e-12);

        let mut a = Moments::new(2);
        let mut b = Moments::new(2);
        a.push(&data[0]);
        a.push(&data[1]);
        b.push(&data[2]);
        b.push(&data[3]);
        a.merge(&b);
        assert_eq!(a, m);
    }

    #[test]
    fn quantiles() {
        assert!((z95() - 1.959964).abs() < 1e-5);
        assert!((bonferroni_z(3.0, 1) - 3.0).abs() < 1e-9);
        assert!(bonferroni_z(3.0, 10) > 3.0);
    }
}
