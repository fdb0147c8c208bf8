//! Exact laws of the simple symmetric random walk.
//!
//! In the plane the coordinates `u = x + y` and `v = x - y` of the SSRW are
//! two independent walks with `+-1` steps, so every planar quantity reduces
//! to one-dimensional dynamic programming.

use std::collections::BTreeMap;

use super::StatsError;
use crate::lattice::LatticeVec;

/// Regression bound on the planar Lamperti ratio for `N` in `[100, 10^4]`,
/// frozen from the exact values (2.576 at `N = 100`, decreasing to 2.317).
pub const PLANAR_LAMPERTI_BOUND: f64 = 2.6;

/// Largest `n` accepted in the plane.
pub const MAX_PLANAR_STEPS: usize = 10_000;

/// Law of `W_n` for the SSRW on `Z^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsrwExact {
    pub n: usize,
    pub dim: usize,
    /// `line[i]` is the probability that an `n`-step `+-1` walk ends at `n - 2i`.
    line: Vec<f64>,
}

/// Distribution of an `n`-step `+-1` walk by repeated convolution.
fn line_walk(n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    for step in 1..=n {
        for i in (1..=step).rev() {
            p[i] = 0.5 * (p[i] + p[i - 1]);
        }
        p[0] *= 0.5;
    }
    p
}

impl SsrwExact {
    fn line_at(&self, x: i64) -> f64 {
        let n = self.n as i64;
        if x.abs() > n || (n - x) % 2 != 0 {
            return 0.0;
        }
        self.line[((n - x) / 2) as usize]
    }

    pub fn probability(&self, k: LatticeVec) -> f64 {
        let c = k.coords();
        match self.dim {
            1 => self.line_at(c[0]),
            _ => self.line_at(c[0] + c[1]) * self.line_at(c[0] - c[1]),
        }
    }

    pub fn return_probability(&self) -> f64 {
        self.probability(LatticeVec::zero(self.dim))
    }

    /// Every point of positive probability. Quadratic in `n` in the plane.
    pub fn distribution(&self) -> BTreeMap<LatticeVec, f64> {
        let n = self.n as i64;
        let mut out = BTreeMap::new();
        match self.dim {
            1 => {
                for (i, &p) in self.line.iter().enumerate() {
                    out.insert(LatticeVec::from([n - 2 * i as i64]), p);
                }
            }
            _ => {
                for (i, &pu) in self.line.iter().enumerate() {
                    for (j, &pv) in self.line.iter().enumerate() {
                        let (u, v) = (n - 2 * i as i64, n - 2 * j as i64);
                        // u and v share parity with n, so u + v is even
                        out.insert(LatticeVec::from([(u + v) / 2, (u - v) / 2]), pu * pv);
                    }
                }
            }
        }
        out
    }
}

fn check_dim(dim: usize) -> Result<(), StatsError> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(StatsError::InvalidArgument(format!("SSRW dimension must be 1 or 2, got {dim}")))
    }
}

pub fn ssrw_exact(n: usize, dim: usize) -> Result<SsrwExact, StatsError> {
    check_dim(dim)?;
    if dim == 2 && n > MAX_PLANAR_STEPS {
        return Err(StatsError::InvalidArgument(format!(
            "planar SSRW limited to n <= {MAX_PLANAR_STEPS}, got {n}"
        )));
    }
    Ok(SsrwExact {
        n,
        dim,
        line: line_walk(n),
    })
}

/// `P(W_n = 0)` for `n = 0..=nmax`, from a single forward pass of the
/// one-dimensional walk.
pub fn ssrw_return_probabilities(nmax: usize, dim: usize) -> Result<Vec<f64>, StatsError> {
    check_dim(dim)?;
    // p[i] = P(walk at position i - nmax)
    let width = 2 * nmax + 3;
    let mut p = vec![0.0; width];
    let mut q = vec![0.0; width];
    let origin = nmax + 1;
    p[origin] = 1.0;
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    for step in 1..=nmax {
        let (lo, hi) = (origin - step, origin + step);
        for i in lo..=hi {
            q[i] = 0.5 * (p[i - 1] + p[i + 1]);
        }
        std::mem::swap(&mut p, &mut q);
        let r = p[origin];
        out.push(if dim == 1 { r } else { r * r });
    }
    Ok(out)
}

/// `E[R_N^2] / (E[R_N])^2` for the number `R_N` of returns to the origin
/// in steps `1..=N`, computed exactly from the renewal structure.
pub fn ssrw_lamperti_ratio(returns: &[f64], horizon: usize) -> f64 {
    let mut cum = vec![0.0; horizon + 1];
    for k in 1..=horizon {
        cum[k] = cum[k - 1] + returns[k];
    }
    // E[R^2] = sum_k p_k + 2 sum_{j<k} p_j p_{k-j}
    let cross: f64 = (1..horizon).map(|j| returns[j] * cum[horizon - j]).sum();
    (cum[horizon] + 2.0 * cross) / (cum[horizon] * cum[horizon])
}

/// `P(W_m = 0, W_n = 0) / (P(W_m = 0) P(W_n = 0))`, which equals
/// `P(W_{n-m} = 0) / P(W_n = 0)` by independence of increments.
pub fn ssrw_joint_ratio(returns: &[f64], m: usize, n: usize) -> f64 {
    returns[n - m] / returns[n]
}
