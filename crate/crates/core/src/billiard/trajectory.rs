use std::f64::consts::{PI, TAU};

use super::{time_reverse, Billiard, BilliardError, BoundaryPoint, FlightRecord};
use crate::lattice::LatticeVec;

/// Orbit segment with running Birkhoff sums of `kappa` and `psi`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: BoundaryPoint,
    pub records: Vec<FlightRecord>,
    /// `S_0 .. S_n` of `kappa`.
    pub kappa_sums: Vec<LatticeVec>,
    /// `S_0 .. S_n` of `psi`.
    pub psi_sums: Vec<[f64; 2]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn end(&self) -> BoundaryPoint {
        self.records.last().map_or(self.start, |r| r.next)
    }
}

impl Billiard {
    /// Applies the billiard map `n` times starting from `x0`.
    pub fn simulate(&self, x0: BoundaryPoint, n: usize) -> Result<Trajectory, BilliardError> {
        let mut records = Vec::with_capacity(n);
        let mut kappa_sums = Vec::with_capacity(n + 1);
        let mut psi_sums = Vec::with_capacity(n + 1);
        let mut s_kappa = LatticeVec::zero(2);
        let mut s_psi = [0.0; 2];
        kappa_sums.push(s_kappa);
        psi_sums.push(s_psi);
        let mut x = x0;
        for step in 0..n {
            let rec = self.map(&x).map_err(|e| BilliardError::AtStep {
                step,
                source: Box::new(e),
            })?;
            s_kappa = s_kappa + rec.kappa;
            s_psi = [s_psi[0] + rec.psi[0], s_psi[1] + rec.psi[1]];
            kappa_sums.push(s_kappa);
            psi_sums.push(s_psi);
            x = rec.next;
            records.push(rec);
        }
        Ok(Trajectory {
            start: x0,
            records,
            kappa_sums,
            psi_sums,
        })
    }
}

/// Largest violation of `psi = kappa + h - h o T` along `traj`, where
/// `h(x)` is minus the in-cell position of `x`.
pub fn cohomology_check(billiard: &Billiard, traj: &Trajectory) -> f64 {
    let mut prev = traj.start;
    let mut worst: f64 = 0.0;
    for rec in &traj.records {
        let q0 = billiard.position_in_cell(&prev);
        let q1 = billiard.position_in_cell(&rec.next);
        let k = rec.kappa.coords();
        for i in 0..2 {
            let defect = rec.psi[i] - k[i] as f64 - (q1[i] - q0[i]);
            worst = worst.max(defect.abs());
        }
        prev = rec.next;
    }
    worst
}

/// Distance between `T(I(T x))` and `I(x)`, with `I` the time reversal:
/// the largest wrapped angle difference, or infinity if the disk or the cell
/// differs.
pub fn reversibility_defect(billiard: &Billiard, x: &BoundaryPoint) -> Result<f64, BilliardError> {
    let y = billiard.map(x)?.next;
    let z = billiard.map(&time_reverse(&y))?.next;
    let target = time_reverse(x);
    if z.disk != target.disk || z.cell != target.cell {
        return Ok(f64::INFINITY);
    }
    let wrap = |a: f64| (a + PI).rem_euclid(TAU) - PI;
    Ok(wrap(z.theta - target.theta).abs().max((z.phi - target.phi).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_and_single_step() {
        let b = Billiard::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = b.sample_mu1(&mut rng);
        let t = b.simulate(x, 0).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.kappa_sums, vec![LatticeVec::zero(2)]);
        let t = b.simulate(x, 1).unwrap();
        assert_eq!(t.records[0], b.map(&x).unwrap());
        assert_eq!(t.kappa_sums[1], t.records[0].kappa);
    }

    #[test]
    fn sums_are_additive_and_identity_holds() {
        let b = Billiard::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = b.sample_mu1(&mut rng);
        let t = b.simulate(x, 5000).unwrap();
        for (k, rec) in t.records.iter().enumerate() {
            assert_eq!(t.kappa_sums[k + 1], t.kappa_sums[k] + rec.kappa);
            assert!((rec.tau - rec.psi[0].hypot(rec.psi[1])).abs() < 1e-14);
            assert!(rec.tau <= b.config().tau_max_hint);
        }
        assert!(cohomology_check(&b, &t) < 1e-12);
        // telescoping: S(psi) - S(kappa) = q(end) - q(start)
        let q0 = b.position_in_cell(&t.start);
        let q1 = b.position_in_cell(&t.end());
        let sk = t.kappa_sums.last().unwrap().coords();
        let sp = t.psi_sums.last().unwrap();
        for i in 0..2 {
            assert!((sp[i] - sk[i] as f64 - (q1[i] - q0[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn reversal_defect_is_tiny() {
        let b = Billiard::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let x = b.sample_mu1(&mut rng);
            assert!(reversibility_defect(&b, &x).unwrap() < 1e-10);
        }
    }

    #[test]
    fn head_on_defect_is_zero() {
        let b = Billiard::reference();
        let x = BoundaryPoint {
            disk: 0,
            theta: 0.0,
            phi: 0.0,
            cell: LatticeVec::from([0, 0]),
        };
        let t = b.simulate(x, 1).unwrap();
        assert!(cohomology_check(&b, &t) < 1e-15);
    }
}
