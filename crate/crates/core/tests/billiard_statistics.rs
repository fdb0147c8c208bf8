//! Moderate-size Monte Carlo checks of the reference Lorentz gas.

use std::f64::consts::PI;

use lorentz::billiard::Billiard;
use lorentz::lattice::{affine_support, AffineLattice, LatticeVec};
use lorentz::mc::{run_ensemble, trajectory_rng, BilliardWalk, EnsembleSpec};
use lorentz::stats::DistributionObserver;

#[test]
fn mean_free_path_matches_santalo() {
    // under mu_1 the mean flight is pi |Q| / |boundary|
    let b = Billiard::reference();
    let area = 1.0 - PI * (0.4f64 * 0.4 + 0.2 * 0.2);
    let expected = PI * area / (2.0 * PI * 0.6);
    let mut rng = trajectory_rng(1, 0);
    let mut p = b.sample_particle(&mut rng);
    let n = 400_000;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let t = b.advance(&mut p).unwrap().tau;
        sum += t;
        sum2 += t * t;
    }
    let mean = sum / n as f64;
    // flights are correlated; allow a generous multiple of the iid error
    let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - expected).abs() < 8.0 * se, "{mean} vs {expected}");
}

#[test]
fn kappa_values_generate_the_full_lattice() {
    let b = Billiard::reference();
    let mut rng = trajectory_rng(2, 0);
    let mut p = b.sample_particle(&mut rng);
    let mut seen = std::collections::BTreeSet::new();
    for _ in 0..100_000 {
        seen.insert(LatticeVec::from(b.advance(&mut p).unwrap().kappa));
    }
    let values: Vec<LatticeVec> = seen.into_iter().collect();
    assert!(values.contains(&LatticeVec::zero(2)));
    assert_eq!(affine_support(&values).unwrap(), AffineLattice::full(2));
}

#[test]
fn burn_in_does_not_move_the_covariance() {
    let b = Billiard::reference();
    let n = 50;
    let run = |burn_in| {
        let spec = EnsembleSpec {
            trajectories: 60_000,
            steps: n,
            seed: 77,
        };
        let obs = run_ensemble(&BilliardWalk::new(b.clone(), burn_in), &spec, || {
            DistributionObserver::new(2, &[n])
        })
        .unwrap();
        obs.distributions()[0].scaled_moments().1
    };
    let cold = run(0);
    let warm = run(1000);
    for i in 0..2 {
        // relative standard error of a variance from 6e4 samples is about 0.6%
        let rel = (cold[i][i] - warm[i][i]).abs() / warm[i][i];
        assert!(rel < 0.03, "{cold:?} vs {warm:?}");
    }
}
