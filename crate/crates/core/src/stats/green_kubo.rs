//! Truncated Green–Kubo sums of empirical autocovariances.
//!
//! Lagged products of the integer increments are accumulated exactly in
//! `i64`, so merging streams in any order gives identical results. Standard
//! errors come from batch means: each stream is cut into batches of
//! `batch_len` consecutive samples (pairs are attributed to the batch of
//! their later element) and the spread of per-batch estimates is reported.

use std::collections::VecDeque;

use super::StatsError;
use crate::mc::Observer;

pub type Matrix2 = [[f64; 2]; 2];

/// Estimated covariance of the limiting Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub dim: usize,
    /// Unused entries are 0 when `dim == 1`.
    pub sigma: Matrix2,
    pub std_err: Matrix2,
    pub truncation: usize,
    pub samples: u64,
    pub batches: usize,
}

impl CovarianceEstimate {
    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.sigma[0][0],
            _ => self.sigma[0][0] * self.sigma[1][1] - self.sigma[0][1] * self.sigma[1][0],
        }
    }

    /// Symmetric and positive semidefinite within `z` standard errors.
    pub fn is_psd_within(&self, z: f64) -> bool {
        let sym = (0..self.dim).all(|i| (0..self.dim).all(|j| self.sigma[i][j] == self.sigma[j][i]));
        let diag = (0..self.dim).all(|i| self.sigma[i][i] + z * self.std_err[i][i] >= 0.0);
        let det_ok = self.dim == 1 || {
            let s = &self.sigma;
            let e = &self.std_err;
            // loosen each diagonal entry up, off-diagonal towards zero
            let a = s[0][0] + z * e[0][0];
            let d = s[1][1] + z * e[1][1];
            let b = (s[0][1].abs() - z * e[0][1]).max(0.0);
            a * d - b * b >= 0.0
        };
        sym && diag && det_ok
    }
}

#[derive(Debug, Clone)]
struct Batch {
    count: u64,
    sum: [i64; 2],
    /// `lag[j][a][b]` sums `x_{t-j}[a] * x_t[b]` over `t` in the batch.
    lag: Vec<[[i64; 2]; 2]>,
    pairs: Vec<u64>,
}

impl Batch {
    fn new(max_lag: usize) -> Self {
        Self {
            count: 0,
            sum: [0; 2],
            lag: vec![[[0; 2]; 2]; max_lag + 1],
            pairs: vec![0; max_lag + 1],
        }
    }

    fn absorb(&mut self, other: &Batch) {
        self.count += other.count;
        for a in 0..2 {
            self.sum[a] += other.sum[a];
        }
        for (j, l) in other.lag.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    self.lag[j][a][b] += l[a][b];
                }
            }
            self.pairs[j] += other.pairs[j];
        }
    }

    fn estimate(&self, mean: [f64; 2], dim: usize) -> Matrix2 {
        let mut s = [[0.0; 2]; 2];
        for (j, l) in self.lag.iter().enumerate() {
            if self.pairs[j] == 0 {
                continue;
            }
            let n = self.pairs[j] as f64;
            for a in 0..dim {
                for b in 0..dim {
                    let c_ab = l[a][b] as f64 / n - mean[a] * mean[b];
                    let c_ba = l[b][a] as f64 / n - mean[a] * mean[b];
                    s[a][b] += if j == 0 { c_ab } else { c_ab + c_ba };
                }
            }
        }
        s
    }
}

/// Streaming accumulator; one stream per trajectory when used as an
/// [`Observer`].
#[derive(Debug, Clone)]
pub struct GreenKubo {
    dim: usize,
    max_lag: usize,
    batch_len: u64,
    history: VecDeque<[i64; 2]>,
    current: Batch,
    complete: Vec<Batch>,
    /// Leftover partial batches: used for the estimate, not for errors.
    partial: Batch,
}

impl GreenKubo {
    /// Batches hold `50 (J + 1)` samples unless overridden.
    pub fn new(dim: usize, max_lag: usize) -> Self {
        Self::with_batch_len(dim, max_lag, 50 * (max_lag as u64 + 1))
    }

    pub fn with_batch_len(dim: usize, max_lag: usize, batch_len: u64) -> Self {
        assert!(dim == 1 || dim == 2, "dimension must be 1 or 2");
        assert!(batch_len > 0, "batch length must be positive");
        Self {
            dim,
            max_lag,
            batch_len,
            history: VecDeque::with_capacity(max_lag + 1),
            current: Batch::new(max_lag),
            complete: Vec::new(),
            partial: Batch::new(max_lag),
        }
    }

    /// Starts a new independent stream.
    pub fn start_stream(&mut self) {
        self.close_stream();
        self.history.clear();
    }

    fn close_stream(&mut self) {
        if self.current.count > 0 {
            let b = std::mem::replace(&mut self.current, Batch::new(self.max_lag));
            self.partial.absorb(&b);
        }
    }

    pub fn push(&mut self, x: [i64; 2]) {
        let b = &mut self.current;
        b.count += 1;
        b.sum[0] += x[0];
        b.sum[1] += x[1];
        self.history.push_front(x);
        for (j, y) in self.history.iter().enumerate() {
            let l = &mut b.lag[j];
            l[0][0] += y[0] * x[0];
            l[0][1] += y[0] * x[1];
            l[1][0] += y[1] * x[0];
            l[1][1] += y[1] * x[1];
            b.pairs[j] += 1;
        }
        if self.history.len() > self.max_lag {
            self.history.pop_back();
        }
        if b.count == self.batch_len {
            let b = std::mem::replace(&mut self.current, Batch::new(self.max_lag));
            self.complete.push(b);
        }
    }

    pub fn samples(&self) -> u64 {
        self.complete.iter().map(|b| b.count).sum::<u64>() + self.partial.count + self.current.count
    }

    /// `Sigma = C_0 + sum_{j=1}^{J} (C_j + C_j^T)` with batch-means errors.
    pub fn estimate(&self) -> Result<CovarianceEstimate, StatsError> {
        let mut total = self.partial.clone();
        total.absorb(&self.current);
        for b in &self.complete {
            total.absorb(b);
        }
        let needed = 100 * self.max_lag.max(1) as u64;
        if total.count < needed || self.complete.len() < 2 {
            return Err(StatsError::InsufficientData {
                needed: needed.max(2 * self.batch_len),
                got: total.count,
            });
        }
        let n = total.count as f64;
        let mean = [total.sum[0] as f64 / n, total.sum[1] as f64 / n];
        let sigma = total.estimate(mean, self.dim);

        let per_batch: Vec<Matrix2> = self.complete.iter().map(|b| b.estimate(mean, self.dim)).collect();
        let k = per_batch.len() as f64;
        let mut std_err = [[0.0; 2]; 2];
        for a in 0..self.dim {
            for b in 0..self.dim {
                let m = per_batch.iter().map(|s| s[a][b]).sum::<f64>() / k;
                let var = per_batch.iter().map(|s| (s[a][b] - m).powi(2)).sum::<f64>() / (k - 1.0);
                std_err[a][b] = (var / k).sqrt();
            }
        }
        // symmetrize the off-diagonal rounding
        let off = 0.5 * (sigma[0][1] + sigma[1][0]);
        let sigma = [[sigma[0][0], off], [off, sigma[1][1]]];
        Ok(CovarianceEstimate {
            dim: self.dim,
            sigma,
            std_err,
            truncation: self.max_lag,
            samples: total.count,
            batches: self.complete.len(),
        })
    }
}

impl Observer for GreenKubo {
    fn begin(&mut self) {
        self.start_stream();
    }

    fn observe(&mut self, _n: usize, _s: [i64; 2], increment: [i64; 2]) {
        self.push(increment);
    }

    fn end(&mut self) {
        self.close_stream();
    }

    fn merge(&mut self, other: Self) {
        self.close_stream();
        self.partial.absorb(&other.partial);
        self.partial.absorb(&other.current);
        self.complete.extend(other.complete);
    }
}

/// Green–Kubo estimate from explicit streams.
pub fn green_kubo_covariance(
    streams: &[Vec<[i64; 2]>],
    dim: usize,
    max_lag: usize,
) -> Result<CovarianceEstimate, StatsError> {
    let mut acc = GreenKubo::new(dim, max_lag);
    for s in streams {
        acc.start_stream();
        for &x in s {
            acc.push(x);
        }
    }
    acc.close_stream();
    acc.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{increment_stream, run_ensemble, DyadicWalk, EnsembleSpec, Ssrw};
    use crate::toy::{exact_correlation, DyadicSystem};

    #[test]
    fn iid_signs_have_unit_variance() {
        let s = increment_stream(&Ssrw::new(1), 4, 0, 0, 200_000).unwrap();
        let est = green_kubo_covariance(&[s], 1, 5).unwrap();
        let se = est.std_err[0][0];
        assert!(se > 0.0 && se < 0.05);
        assert!((est.sigma[0][0] - 1.0).abs() < 4.0 * se, "{est:?}");
    }

    #[test]
    fn two_bit_toy_variance() {
        let sys = DyadicSystem::new(2, vec![2, 0, 0, -2]).unwrap();
        let walk = DyadicWalk { system: sys };
        let spec = EnsembleSpec {
            trajectories: 4,
            steps: 100_000,
            seed: 21,
        };
        let est = run_ensemble(&walk, &spec, || GreenKubo::new(1, 4)).unwrap().estimate().unwrap();
        assert!((est.sigma[0][0] - 4.0).abs() < 4.0 * est.std_err[0][0], "{est:?}");
    }

    #[test]
    fn lag_products_match_direct_sums() {
        let sys = DyadicSystem::new(3, vec![3, -1, 0, 2, -2, 1, 1, 0]).unwrap();
        let xs: Vec<[i64; 2]> = increment_stream(&DyadicWalk { system: sys.clone() }, 2, 0, 0, 5000)
            .unwrap();
        let est = green_kubo_covariance(&[xs.clone()], 1, 3).unwrap();
        let n = xs.len() as f64;
        let mu = xs.iter().map(|x| x[0] as f64).sum::<f64>() / n;
        let mut direct = 0.0;
        for j in 0..=3usize {
            let c = xs.iter().zip(&xs[j..]).map(|(a, b)| (a[0] * b[0]) as f64).sum::<f64>()
                / (xs.len() - j) as f64
                - mu * mu;
            direct += if j == 0 { c } else { 2.0 * c };
        }
        assert!((est.sigma[0][0] - direct).abs() < 1e-9);
        // and the exact value is within reach
        let exact: f64 = (0..3)
            .map(|j| {
                let c = exact_correlation(&sys, j);
                let c = *c.numer() as f64 / *c.denom() as f64;
                if j == 0 { c } else { 2.0 * c }
            })
            .sum();
        assert!((est.sigma[0][0] - exact).abs() < 5.0 * est.std_err[0][0] + 0.05);
    }

    #[test]
    fn merge_is_order_independent_for_totals() {
        let s1 = increment_stream(&Ssrw::new(2), 1, 0, 0, 3000).unwrap();
        let s2 = increment_stream(&Ssrw::new(2), 1, 1, 0, 3000).unwrap();
        let a = green_kubo_covariance(&[s1.clone(), s2.clone()], 2, 2).unwrap();
        let b = green_kubo_covariance(&[s2, s1], 2, 2).unwrap();
        assert_eq!(a.sigma, b.sigma);
        assert!(a.is_psd_within(3.0));
    }

    #[test]
    fn refuses_short_streams() {
        let s = increment_stream(&Ssrw::new(2), 1, 0, 0, 500).unwrap();
        assert!(matches!(
            green_kubo_covariance(&[s], 2, 40),
            Err(StatsError::InsufficientData { .. })
        ));
    }
}
