//! Doubling map `x -> 2x mod 1` with observables that are constant on the
//! dyadic intervals of depth `m`.
//!
//! Under Lebesgue measure the binary digits of `x` are iid fair bits, and
//! `f(T^k x)` only depends on digits `k+1 ..= k+m`. Birkhoff sums are
//! therefore a finite-state additive functional over a sliding window of
//! `m - 1` bits, which the dynamic programs here evaluate exactly.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;
use thiserror::Error;

use crate::lattice::{affine_support, AffineLattice, LatticeVec};

/// Largest number of `(window, sum)` DP states accepted.
pub const MAX_DP_STATES: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToyError {
    #[error("depth must be in 1..=20, got {0}")]
    BadDepth(u32),
    #[error("expected {expected} values for depth {depth}, got {got}")]
    WrongLength {
        depth: u32,
        expected: usize,
        got: usize,
    },
    #[error("state space too large: {states} states (limit {limit})")]
    StateSpaceTooLarge { states: u128, limit: u128 },
}

/// An integer observable on the depth-`m` dyadic partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicSystem {
    depth: u32,
    values: Vec<i64>,
}

impl DyadicSystem {
    /// `values[j]` is the value on `[j 2^-m, (j+1) 2^-m)`.
    pub fn new(depth: u32, values: Vec<i64>) -> Result<Self, ToyError> {
        if !(1..=20).contains(&depth) {
            return Err(ToyError::BadDepth(depth));
        }
        let expected = 1usize << depth;
        if values.len() != expected {
            return Err(ToyError::WrongLength {
                depth,
                expected,
                got: values.len(),
            });
        }
        Ok(DyadicSystem { depth, values })
    }

    /// Infers the depth from the number of values (a power of two, at least 2).
    pub fn from_values(values: Vec<i64>) -> Result<Self, ToyError> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(ToyError::WrongLength {
                depth: 0,
                expected: len.next_power_of_two().max(2),
                got: len,
            });
        }
        DyadicSystem::new(len.trailing_zeros(), values)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Lebesgue mean of the observable.
    pub fn mean(&self) -> Ratio<i64> {
        Ratio::new(self.values.iter().sum(), self.values.len() as i64)
    }

    pub fn mean_f64(&self) -> f64 {
        self.values.iter().sum::<i64>() as f64 / self.values.len() as f64
    }

    /// Smallest translated lattice containing every value of `f`.
    pub fn value_support(&self) -> AffineLattice {
        let pts: Vec<LatticeVec> = self.values.iter().map(|&v| LatticeVec::from([v])).collect();
        affine_support(&pts).expect("values are nonempty")
    }

    fn window_mask(&self) -> usize {
        (1usize << (self.depth - 1)) - 1
    }

    /// Value of `f` on the cylinder whose first `m` digits are the bits of `j`.
    pub fn value_at(&self, j: usize) -> i64 {
        self.values[j]
    }

    /// Samples a fresh digit window for an orbit started from Lebesgue measure.
    pub fn sample_window<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        (rng.random::<u64>() as usize) & self.window_mask()
    }

    /// Appends a digit to the window, returning the observable value read.
    #[inline]
    pub fn push_digit(&self, window: &mut usize, bit: bool) -> i64 {
        let j = (*window << 1) | bit as usize;
        *window = j & self.window_mask();
        self.values[j]
    }

    fn check_states(&self, n: usize) -> Result<(i64, usize), ToyError> {
        let range = 2 * (n as i64) * self.max_abs() + 1;
        let states = (1u128 << (self.depth - 1)) * range as u128;
        if states > MAX_DP_STATES as u128 {
            return Err(ToyError::StateSpaceTooLarge {
                states,
                limit: MAX_DP_STATES as u128,
            });
        }
        Ok((n as i64 * self.max_abs(), range as usize))
    }

    /// DP over `(window, partial sum)`. `branch` maps a weight to the weight
    /// carried along one digit choice.
    fn birkhoff_dp<W: Copy + Default + std::ops::AddAssign>(
        &self,
        n: usize,
        unit: W,
        branch: impl Fn(W) -> W,
    ) -> Result<(i64, Vec<W>), ToyError> {
        let (offset, range) = self.check_states(n)?;
        let windows = 1usize << (self.depth - 1);
        let mut cur = vec![W::default(); windows * range];
        for w in 0..windows {
            cur[w * range + offset as usize] = unit;
        }
        let mut next = vec![W::default(); windows * range];
        for step in 0..n {
            // sums reachable after `step` steps lie within +-step*max|f|
            let reach = step as i64 * self.max_abs();
            let lo = (offset - reach) as usize;
            let hi = (offset + reach) as usize;
            next.iter_mut().for_each(|x| *x = W::default());
            for w in 0..windows {
                for s in lo..=hi {
                    let weight = branch(cur[w * range + s]);
                    for bit in [false, true] {
                        let mut nw = w;
                        let v = self.push_digit(&mut nw, bit);
                        let ns = (s as i64 + v) as usize;
                        next[nw * range + ns] += weight;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let mut marginal = vec![W::default(); range];
        for w in 0..windows {
            for s in 0..range {
                marginal[s] += cur[w * range + s];
            }
        }
        Ok((offset, marginal))
    }
}

/// Exact law of `S_n`: integer counts over the common denominator `2^(n+m-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    pub n: usize,
    log2_denominator: u32,
    counts: BTreeMap<i64, u128>,
}

impl ExactDistribution {
    pub fn probability(&self, k: i64) -> Ratio<u128> {
        let c = self.counts.get(&k).copied().unwrap_or(0);
        Ratio::new(c, 1u128 << self.log2_denominator)
    }

    pub fn probability_f64(&self, k: i64) -> f64 {
        let c = self.counts.get(&k).copied().unwrap_or(0);
        c as f64 / (self.log2_denominator as f64).exp2()
    }

    /// Nonzero probabilities, reduced.
    pub fn probabilities(&self) -> BTreeMap<i64, Ratio<u128>> {
        self.counts.keys().map(|&k| (k, self.probability(k))).collect()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.counts.keys().copied()
    }

    pub fn total(&self) -> Ratio<u128> {
        Ratio::new(self.counts.values().sum(), 1u128 << self.log2_denominator)
    }

    /// Exact variance `E[S_n^2] - E[S_n]^2`.
    pub fn variance(&self) -> Ratio<i128> {
        let den = 1i128 << self.log2_denominator;
        let mut m1 = Ratio::from_integer(0i128);
        let mut m2 = Ratio::from_integer(0i128);
        for (&k, &c) in &self.counts {
            let p = Ratio::new(c as i128, den);
            m1 += p * k as i128;
            m2 += p * (k as i128 * k as i128);
        }
        m2 - m1 * m1
    }
}

/// Exact law of `S_n = f + f o T + ... + f o T^(n-1)` under Lebesgue measure.
pub fn exact_birkhoff_distribution(
    sys: &DyadicSystem,
    n: usize,
) -> Result<ExactDistribution, ToyError> {
    let log2_denominator = n as u32 + sys.depth - 1;
    if log2_denominator > 126 {
        return Err(ToyError::StateSpaceTooLarge {
            states: 1u128 << 126,
            limit: 1u128 << 126,
        });
    }
    let (offset, marginal) = sys.birkhoff_dp::<u128>(n, 1, |w| w)?;
    let counts = marginal
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != 0)
        .map(|(s, c)| (s as i64 - offset, c))
        .collect();
    Ok(ExactDistribution {
        n,
        log2_denominator,
        counts,
    })
}

/// Law of `S_n` in floating point, for `n` beyond the exact integer range.
///
/// Returns `(offset, probs)` with `probs[s]` = `P(S_n = s - offset)`.
pub fn birkhoff_distribution_f64(sys: &DyadicSystem, n: usize) -> Result<(i64, Vec<f64>), ToyError> {
    let windows = (1usize << (sys.depth - 1)) as f64;
    sys.birkhoff_dp::<f64>(n, 1.0 / windows, |w| 0.5 * w)
}

/// Exact autocovariance `E[f . f o T^j] - E[f]^2`.
pub fn exact_correlation(sys: &DyadicSystem, j: usize) -> Ratio<i128> {
    let m = sys.depth as usize;
    if j >= m {
        // f and f o T^j read disjoint digit blocks
        return Ratio::from_integer(0);
    }
    let bits = j + m;
    let mask = (1usize << m) - 1;
    let mut acc: i128 = 0;
    for w in 0..(1usize << bits) {
        let first = (w >> j) & mask;
        let later = w & mask;
        acc += sys.values[first] as i128 * sys.values[later] as i128;
    }
    let mean = Ratio::new(sys.values.iter().map(|&v| v as i128).sum(), 1i128 << m);
    Ratio::new(acc, 1i128 << bits) - mean * mean
}

/// Green–Kubo variance `C_0 + 2 sum_{j>=1} C_j`, exact by finite dependence.
pub fn green_kubo_sigma2(sys: &DyadicSystem) -> Ratio<i128> {
    let mut s = exact_correlation(sys, 0);
    for j in 1..sys.depth as usize {
        s += exact_correlation(sys, j) * 2;
    }
    s
}

/// `E[exp(i t S_n)]` from the exact distribution.
pub fn char_function_exact(sys: &DyadicSystem, n: usize, t: f64) -> Result<Complex64, ToyError> {
    let dist = exact_birkhoff_distribution(sys, n)?;
    Ok(dist
        .support()
        .map(|k| Complex64::from_polar(dist.probability_f64(k), t * k as f64))
        .sum())
}
