use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::green_kubo::{CovarianceEstimate, Matrix2};
use super::StatsError;
use crate::lattice::{AffineLattice, LatticeVec};
use crate::mc::{trajectory_rng, Observer};

/// Observed counts of `S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub n: usize,
    pub dim: usize,
    pub counts: BTreeMap<LatticeVec, u64>,
    pub samples: u64,
}

impl EmpiricalDistribution {
    pub fn count(&self, k: LatticeVec) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn probability(&self, k: LatticeVec) -> f64 {
        self.count(k) as f64 / self.samples as f64
    }

    /// Checks that every observed value lies in `lattice`.
    pub fn check_coset(&self, lattice: &AffineLattice) -> Result<(), StatsError> {
        match self.counts.keys().find(|k| !lattice.contains(**k)) {
            Some(k) => Err(StatsError::OffCoset {
                n: self.n,
                value: k.to_string(),
                lattice: lattice.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Mean and covariance of `S_n / sqrt(n)`.
    pub fn scaled_moments(&self) -> ([f64; 2], Matrix2) {
        let total = self.samples as f64;
        let mut mean = [0.0; 2];
        let mut second = [[0.0; 2]; 2];
        for (k, &c) in &self.counts {
            let v = coords2(*k);
            for a in 0..2 {
                mean[a] += c as f64 * v[a] as f64;
                for b in 0..2 {
                    second[a][b] += c as f64 * (v[a] * v[b]) as f64;
                }
            }
        }
        let scale = self.n.max(1) as f64;
        let mut cov = [[0.0; 2]; 2];
        for a in 0..2 {
            mean[a] /= total;
        }
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] = (second[a][b] / total - mean[a] * mean[b]) / scale;
            }
        }
        (mean.map(|m| m / scale.sqrt()), cov)
    }
}

fn coords2(k: LatticeVec) -> [i64; 2] {
    let c = k.coords();
    [c[0], c.get(1).copied().unwrap_or(0)]
}

fn to_vec(s: [i64; 2], dim: usize) -> LatticeVec {
    LatticeVec::new(&s[..dim])
}

/// Counts of `S_n` at several `n`, plus every `S_n` at one chosen `n`
/// when `keep_samples_at` is set.
#[derive(Debug, Clone)]
pub struct DistributionObserver {
    dim: usize,
    ns: Vec<usize>,
    slot: Vec<Option<usize>>,
    counts: Vec<BTreeMap<[i64; 2], u64>>,
    samples: u64,
    keep_samples_at: Option<usize>,
    kept: Vec<[i64; 2]>,
}

impl DistributionObserver {
    pub fn new(dim: usize, ns: &[usize]) -> Self {
        let max = ns.iter().copied().max().unwrap_or(0);
        let mut slot = vec![None; max + 1];
        for (i, &n) in ns.iter().enumerate() {
            slot[n] = Some(i);
        }
        Self {
            dim,
            ns: ns.to_vec(),
            slot,
            counts: vec![BTreeMap::new(); ns.len()],
            samples: 0,
            keep_samples_at: None,
            kept: Vec::new(),
        }
    }

    pub fn keeping_samples_at(mut self, n: usize) -> Self {
        self.keep_samples_at = Some(n);
        self
    }

    pub fn distributions(&self) -> Vec<EmpiricalDistribution> {
        self.ns
            .iter()
            .zip(&self.counts)
            .map(|(&n, c)| EmpiricalDistribution {
                n,
                dim: self.dim,
                counts: c.iter().map(|(k, v)| (to_vec(*k, self.dim), *v)).collect(),
                samples: self.samples,
            })
            .collect()
    }

    /// `S_n` for each trajectory in ensemble order.
    pub fn kept_samples(&self) -> &[[i64; 2]] {
        &self.kept
    }
}

impl Observer for DistributionObserver {
    fn begin(&mut self) {
        self.samples += 1;
        if let Some(Some(i)) = self.slot.first() {
            *self.counts[*i].entry([0, 0]).or_insert(0) += 1;
        }
        if self.keep_samples_at == Some(0) {
            self.kept.push([0, 0]);
        }
    }

    #[inline]
    fn observe(&mut self, n: usize, s: [i64; 2], _inc: [i64; 2]) {
        if let Some(Some(i)) = self.slot.get(n) {
            *self.counts[*i].entry(s).or_insert(0) += 1;
        }
        if self.keep_samples_at == Some(n) {
            self.kept.push(s);
        }
    }

    fn merge(&mut self, other: Self) {
        self.samples += other.samples;
        for (mine, theirs) in self.counts.iter_mut().zip(other.counts) {
            for (k, v) in theirs {
                *mine.entry(k).or_insert(0) += v;
            }
        }
        self.kept.extend(other.kept);
    }
}

/// Normalized local limit statistic with a 95% confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct LcltStatistic {
    pub statistic: f64,
    pub ci: (f64, f64),
    pub count: u64,
    pub samples: u64,
    /// `n^{d/2} (2 pi)^{d/2} sqrt(det Sigma) / covol`.
    pub scale: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(count: u64, samples: u64, z: f64) -> (f64, f64) {
    let n = samples as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `n^{d/2} P(S_n = k_n) (2 pi)^{d/2} sqrt(det Sigma) / covol(V)`, which
/// tends to the Gaussian density ratio `exp(-k Sigma^{-1} k / 2)` along the
/// support coset.
pub fn lclt_point_statistic(
    dist: &EmpiricalDistribution,
    sigma: &CovarianceEstimate,
    k_n: LatticeVec,
    covol: u64,
) -> Result<LcltStatistic, StatsError> {
    let det = sigma.det();
    if !(det > 0.0) {
        return Err(StatsError::Degenerate(format!("det Sigma = {det}")));
    }
    if dist.samples == 0 {
        return Err(StatsError::InsufficientData { needed: 1, got: 0 });
    }
    let d = dist.dim as f64;
    let scale = (dist.n as f64).powf(d / 2.0) * (2.0 * PI).powf(d / 2.0) * det.sqrt() / covol as f64;
    let count = dist.count(k_n);
    let ci = if count == 0 {
        // rule of three, one-sided
        (0.0, scale * 3.0 / dist.samples as f64)
    } else {
        let (lo, hi) = wilson_interval(count, dist.samples, Z95);
        (scale * lo, scale * hi)
    };
    Ok(LcltStatistic {
        statistic: scale * dist.probability(k_n),
        ci,
        count,
        samples: dist.samples,
        scale,
    })
}

/// One-sample Kolmogorov–Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov survival function `Q(lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `samples` against the centered normal with standard deviation `sd`.
pub fn ks_normal(samples: &mut [f64], sd: f64) -> KsResult {
    samples.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, sd).expect("positive sd");
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = normal.cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sqrt_n = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d),
    }
}

/// CLT diagnostics for lattice-valued sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CltComparison {
    /// Per-axis KS of `(S_n + U) / sqrt(n)` against `N(0, Sigma_ii)`, `U`
    /// uniform on `[-1/2, 1/2)^d` to undo the lattice steps.
    pub ks: Vec<KsResult>,
    pub sample_covariance: Matrix2,
    /// `Sample_ij / Sigma_ij` (meaningful on the diagonal).
    pub covariance_ratio: Matrix2,
    /// `|Sample_ij - Sigma_ij| / sqrt(Sigma_ii Sigma_jj)`.
    pub relative_deviation: Matrix2,
}

pub fn clt_compare(
    sums: &[[i64; 2]],
    n: usize,
    dim: usize,
    sigma: &Matrix2,
    jitter_seed: u64,
) -> Result<CltComparison, StatsError> {
    if sums.len() < 10_000 {
        return Err(StatsError::InsufficientData {
            needed: 10_000,
            got: sums.len() as u64,
        });
    }
    let scale = (n as f64).sqrt();
    let mut rng = trajectory_rng(jitter_seed, 0);
    let mut ks = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut xs: Vec<f64> = sums
            .iter()
            .map(|s| (s[a] as f64 + rng.random::<f64>() - 0.5) / scale)
            .collect();
        ks.push(ks_normal(&mut xs, sigma[a][a].sqrt()));
    }
    let m = sums.len() as f64;
    let mut mean = [0.0; 2];
    for s in sums {
        for a in 0..2 {
            mean[a] += s[a] as f64;
        }
    }
    let mean = mean.map(|x| x / m);
    let mut cov = [[0.0; 2]; 2];
    for s in sums {
        for a in 0..dim {
            for b in 0..dim {
                cov[a][b] += (s[a] as f64 - mean[a]) * (s[b] as f64 - mean[b]);
            }
        }
    }
    let mut ratio = [[0.0; 2]; 2];
    let mut rel = [[0.0; 2]; 2];
    for a in 0..dim {
        for b in 0..dim {
            cov[a][b] /= (m - 1.0) * n as f64;
            ratio[a][b] = cov[a][b] / sigma[a][b];
            rel[a][b] = (cov[a][b] - sigma[a][b]).abs() / (sigma[a][a] * sigma[b][b]).sqrt();
        }
    }
    Ok(CltComparison {
        ks,
        sample_covariance: cov,
        covariance_ratio: ratio,
        relative_deviation: rel,
    })
}
