use std::f64::consts::TAU;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::billiard::{Billiard, BilliardError, BoundaryPoint};
use crate::mc::trajectory_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub samples: u64,
}

/// Pearson test that `T` preserves `mu_1`.
///
/// Points drawn from `mu_1` are pushed forward once and binned by disk,
/// `theta` and `sin(phi)`; under `mu_1` the `theta` and `sin(phi)` bins are
/// equally likely and the disk has probability proportional to its radius.
pub fn mu1_invariance_test(
    billiard: &Billiard,
    samples: u64,
    bins: usize,
    seed: u64,
) -> Result<ChiSquareResult, BilliardError> {
    let disks = &billiard.config().disks;
    let total_r: f64 = disks.iter().map(|d| d.radius).sum();
    let mut counts = vec![0u64; disks.len() * bins * bins];
    let mut rng = trajectory_rng(seed, 0);
    let bin = |x: f64, lo: f64, hi: f64| (((x - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1);
    let index = |y: &BoundaryPoint| (y.disk * bins + bin(y.theta, 0.0, TAU)) * bins + bin(y.phi.sin(), -1.0, 1.0);
    for _ in 0..samples {
        let x = billiard.sample_mu1(&mut rng);
        let y = billiard.map(&x)?.next;
        counts[index(&y)] += 1;
    }
    let mut statistic = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let d = i / (bins * bins);
        let expected = samples as f64 * disks[d].radius / total_r / (bins * bins) as f64;
        statistic += (c as f64 - expected).powi(2) / expected;
    }
    let dof = counts.len() - 1;
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(statistic);
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::{Disk, ScattererConfig};

    #[test]
    fn reference_map_preserves_mu1() {
        let r = mu1_invariance_test(&Billiard::reference(), 50_000, 6, 3).unwrap();
        assert!(r.p_value > 0.001, "{r:?}");
        assert_eq!(r.dof, 2 * 36 - 1);
    }

    #[test]
    fn unequal_disks_weighted_by_radius() {
        let cfg = ScattererConfig::new(vec![Disk::new(0.0, 0.0, 0.45), Disk::new(0.5, 0.5, 0.1)], 5.0);
        let b = Billiard::new(cfg).unwrap();
        let r = mu1_invariance_test(&b, 50_000, 4, 8).unwrap();
        assert!(r.p_value > 0.001, "{r:?}");
    }
}
