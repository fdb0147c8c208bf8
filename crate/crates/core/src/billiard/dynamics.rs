use std::f64::consts::{PI, TAU};

use rand::distr::Open01;
use rand::Rng;

use super::{validate_config, BilliardError, ScattererConfig};
use crate::lattice::LatticeVec;

/// Ray–circle discriminants at or below this are tangencies, treated as misses.
pub const TANGENT_TOLERANCE: f64 = 1e-12;

/// A phase point on a scatterer boundary, lifted to the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub disk: usize,
    /// Position on the circle, in `[0, 2pi)`.
    pub theta: f64,
    /// Outgoing angle from the normal, in `(-pi/2, pi/2)`.
    pub phi: f64,
    /// Lift: floor of the lifted position.
    pub cell: LatticeVec,
}

/// One application of the billiard map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightRecord {
    /// Free flight displacement.
    pub psi: [f64; 2],
    /// Cell displacement.
    pub kappa: LatticeVec,
    /// Flight length, `|psi|`.
    pub tau: f64,
    pub next: BoundaryPoint,
}

/// Observables of one flight of a [`Particle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub psi: [f64; 2],
    pub kappa: [i64; 2],
    pub tau: f64,
}

/// Cartesian post-collision state used by the fast path.
///
/// Positions are kept relative to the current cell, so precision does not
/// degrade as the particle wanders off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    cell: [i64; 2],
    pos: [f64; 2],
    vel: [f64; 2],
    disk: usize,
    /// Integer offset of the current disk copy relative to `cell`.
    shift: [i64; 2],
}

impl Particle {
    pub fn cell(&self) -> [i64; 2] {
        self.cell
    }

    /// Position within the current cell, in `[0,1)^2`.
    pub fn position(&self) -> [f64; 2] {
        self.pos
    }

    pub fn velocity(&self) -> [f64; 2] {
        self.vel
    }

    pub fn disk(&self) -> usize {
        self.disk
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    disk: usize,
    shift: [i64; 2],
    center: [f64; 2],
    radius: f64,
    radius2: f64,
}

/// A validated scatterer configuration ready for tracing.
#[derive(Debug, Clone)]
pub struct Billiard {
    cfg: ScattererConfig,
    /// Disk translates meeting the closed unit square.
    candidates: Vec<Candidate>,
    circumference_cdf: Vec<f64>,
}

fn square_distance(center: [f64; 2]) -> f64 {
    let dx = center[0] - center[0].clamp(0.0, 1.0);
    let dy = center[1] - center[1].clamp(0.0, 1.0);
    dx.hypot(dy)
}

impl Billiard {
    pub fn new(cfg: ScattererConfig) -> Result<Self, BilliardError> {
        validate_config(&cfg)?;
        let mut candidates = Vec::new();
        for (k, d) in cfg.disks.iter().enumerate() {
            for sx in -1..=1i64 {
                for sy in -1..=1i64 {
                    let center = [d.center[0] + sx as f64, d.center[1] + sy as f64];
                    if square_distance(center) <= d.radius + 1e-9 {
                        candidates.push(Candidate {
                            disk: k,
                            shift: [sx, sy],
                            center,
                            radius: d.radius,
                            radius2: d.radius * d.radius,
                        });
                    }
                }
            }
        }
        let total: f64 = cfg.disks.iter().map(|d| d.radius).sum();
        let mut acc = 0.0;
        let circumference_cdf = cfg
            .disks
            .iter()
            .map(|d| {
                acc += d.radius / total;
                acc
            })
            .collect();
        Ok(Billiard {
            cfg,
            candidates,
            circumference_cdf,
        })
    }

    pub fn reference() -> Self {
        Billiard::new(ScattererConfig::reference()).expect("reference configuration is valid")
    }

    pub fn config(&self) -> &ScattererConfig {
        &self.cfg
    }

    fn check_point(&self, x: &BoundaryPoint) -> Result<(), BilliardError> {
        if x.disk >= self.cfg.disks.len() {
            return Err(BilliardError::InvalidPoint(format!("no disk {}", x.disk)));
        }
        if !(x.phi.abs() < PI / 2.0) {
            return Err(BilliardError::InvalidPoint(format!("|phi| = {} >= pi/2", x.phi)));
        }
        if !x.theta.is_finite() || x.cell.dim() != 2 {
            return Err(BilliardError::InvalidPoint("bad theta or cell".into()));
        }
        Ok(())
    }

    /// Position of `x` within its cell, in `[0,1)^2`.
    pub fn position_in_cell(&self, x: &BoundaryPoint) -> [f64; 2] {
        self.split_position(x).0
    }

    fn split_position(&self, x: &BoundaryPoint) -> ([f64; 2], [i64; 2]) {
        let d = &self.cfg.disks[x.disk];
        let (s, c) = x.theta.sin_cos();
        let raw = [d.center[0] + d.radius * c, d.center[1] + d.radius * s];
        let fl = [raw[0].floor(), raw[1].floor()];
        let mut pos = [raw[0] - fl[0], raw[1] - fl[1]];
        let mut shift = [-(fl[0] as i64), -(fl[1] as i64)];
        for i in 0..2 {
            if pos[i] >= 1.0 {
                pos[i] -= 1.0;
                shift[i] -= 1;
            }
        }
        (pos, shift)
    }

    pub fn to_particle(&self, x: &BoundaryPoint) -> Result<Particle, BilliardError> {
        self.check_point(x)?;
        let (pos, shift) = self.split_position(x);
        let (s, c) = (x.theta + x.phi).sin_cos();
        Ok(Particle {
            cell: [x.cell.coords()[0], x.cell.coords()[1]],
            pos,
            vel: [c, s],
            disk: x.disk,
            shift,
        })
    }

    pub fn to_boundary_point(&self, p: &Particle) -> BoundaryPoint {
        let d = &self.cfg.disks[p.disk];
        let nx = p.pos[0] - (d.center[0] + p.shift[0] as f64);
        let ny = p.pos[1] - (d.center[1] + p.shift[1] as f64);
        let mut theta = ny.atan2(nx).rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        let phi = (nx * p.vel[1] - ny * p.vel[0]).atan2(nx * p.vel[0] + ny * p.vel[1]);
        BoundaryPoint {
            disk: p.disk,
            theta,
            phi,
            cell: LatticeVec::from(p.cell),
        }
    }

    /// Draws a point from the invariant measure `cos(phi) ds dphi` of the
    /// billiard map, lifted to cell `(0, 0)`.
    pub fn sample_mu1<R: Rng + ?Sized>(&self, rng: &mut R) -> BoundaryPoint {
        let u: f64 = rng.random();
        let disk = self
            .circumference_cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cfg.disks.len() - 1);
        let theta = TAU * rng.random::<f64>();
        let w: f64 = rng.sample(Open01);
        BoundaryPoint {
            disk,
            theta,
            phi: phi_from_uniform(w),
            cell: LatticeVec::from([0, 0]),
        }
    }

    pub fn sample_particle<R: Rng + ?Sized>(&self, rng: &mut R) -> Particle {
        let x = self.sample_mu1(rng);
        self.to_particle(&x).expect("sampled point is valid")
    }

    /// Traces one free flight and reflects.
    pub fn advance(&self, p: &mut Particle) -> Result<Step, BilliardError> {
        let [px, py] = p.pos;
        let [vx, vy] = p.vel;
        let (step_x, mut t_max_x, t_delta_x) = dda_axis(px, vx);
        let (step_y, mut t_max_y, t_delta_y) = dda_axis(py, vy);
        let (mut cx, mut cy) = (0i64, 0i64);
        let mut best_t = f64::INFINITY;
        let mut best: Option<(Candidate, [i64; 2])> = None;
        loop {
            for c in &self.candidates {
                let shift = [c.shift[0] + cx, c.shift[1] + cy];
                if c.disk == p.disk && shift == p.shift {
                    continue;
                }
                let dx = px - (c.center[0] + cx as f64);
                let dy = py - (c.center[1] + cy as f64);
                let b = vx * dx + vy * dy;
                if b >= 0.0 {
                    continue;
                }
                let disc = b * b - (dx * dx + dy * dy - c.radius2);
                if disc <= TANGENT_TOLERANCE {
                    continue;
                }
                let t = -b - disc.sqrt();
                if t > 0.0 && t < best_t {
                    best_t = t;
                    best = Some((*c, shift));
                }
            }
            let t_exit = t_max_x.min(t_max_y);
            if best_t <= t_exit {
                break;
            }
            if t_exit > self.cfg.tau_max_hint {
                return Err(BilliardError::HorizonGuard {
                    limit: self.cfg.tau_max_hint,
                });
            }
            if t_max_x < t_max_y {
                cx += step_x;
                t_max_x += t_delta_x;
            } else {
                cy += step_y;
                t_max_y += t_delta_y;
            }
        }
        let (c, shift) = best.expect("loop exits with a hit");
        if best_t > self.cfg.tau_max_hint {
            return Err(BilliardError::HorizonGuard {
                limit: self.cfg.tau_max_hint,
            });
        }

        let hx = px + best_t * vx;
        let hy = py + best_t * vy;
        let nx = (hx - (c.center[0] + (shift[0] - c.shift[0]) as f64)) / c.radius;
        let ny = (hy - (c.center[1] + (shift[1] - c.shift[1]) as f64)) / c.radius;
        let dot = vx * nx + vy * ny;
        let mut wx = vx - 2.0 * dot * nx;
        let mut wy = vy - 2.0 * dot * ny;
        let norm = wx.hypot(wy);
        debug_assert!((norm - 1.0).abs() < 1e-12, "speed drift {norm}");
        wx /= norm;
        wy /= norm;

        let mut fx = hx.floor();
        let mut fy = hy.floor();
        let mut qx = hx - fx;
        let mut qy = hy - fy;
        if qx >= 1.0 {
            qx -= 1.0;
            fx += 1.0;
        }
        if qy >= 1.0 {
            qy -= 1.0;
            fy += 1.0;
        }
        let kappa = [fx as i64, fy as i64];
        p.cell = [p.cell[0] + kappa[0], p.cell[1] + kappa[1]];
        p.pos = [qx, qy];
        p.vel = [wx, wy];
        p.disk = c.disk;
        p.shift = [shift[0] - kappa[0], shift[1] - kappa[1]];
        Ok(Step {
            psi: [best_t * vx, best_t * vy],
            kappa,
            tau: best_t,
        })
    }

    /// The billiard map on lifted boundary points.
    pub fn map(&self, x: &BoundaryPoint) -> Result<FlightRecord, BilliardError> {
        let mut p = self.to_particle(x)?;
        let step = self.advance(&mut p)?;
        Ok(FlightRecord {
            psi: step.psi,
            kappa: LatticeVec::from(step.kappa),
            tau: step.tau,
            next: self.to_boundary_point(&p),
        })
    }
}

/// Inverse CDF of the `cos(phi)/2` density on `(-pi/2, pi/2)`.
pub(crate) fn phi_from_uniform(u: f64) -> f64 {
    (2.0 * u - 1.0).asin()
}

fn dda_axis(p: f64, v: f64) -> (i64, f64, f64) {
    if v > 0.0 {
        (1, (1.0 - p) / v, 1.0 / v)
    } else if v < 0.0 {
        (-1, p / -v, -1.0 / v)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}

/// Reverses the direction of motion: `(theta, phi) -> (theta, -phi)`.
pub fn time_reverse(x: &BoundaryPoint) -> BoundaryPoint {
    BoundaryPoint { phi: -x.phi, ..*x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::Disk;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(disk: usize, theta: f64, phi: f64) -> BoundaryPoint {
        BoundaryPoint {
            disk,
            theta,
            phi,
            cell: LatticeVec::from([0, 0]),
        }
    }

    #[test]
    fn head_on_flight() {
        let b = Billiard::reference();
        let rec = b.map(&pt(0, 0.0, 0.0)).unwrap();
        assert!((rec.psi[0] - 0.2).abs() < 1e-15 && rec.psi[1].abs() < 1e-15);
        assert!((rec.tau - 0.2).abs() < 1e-15);
        assert_eq!(rec.kappa, LatticeVec::from([0, 0]));
        assert_eq!(rec.next.disk, 0);
        assert!((rec.next.theta - PI).abs() < 1e-12);
        assert!(rec.next.phi.abs() < 1e-12);
        let q = b.position_in_cell(&rec.next);
        assert!((q[0] - 0.6).abs() < 1e-15 && q[1].abs() < 1e-15);
        let p = b.to_particle(&rec.next).unwrap();
        assert!((p.velocity()[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn time_reverse_is_an_involution() {
        let x = pt(1, 1.0, 0.3);
        assert_eq!(time_reverse(&time_reverse(&x)), x);
        let fixed = pt(0, 2.0, 0.0);
        assert_eq!(time_reverse(&fixed), fixed);
    }

    #[test]
    fn reverse_conjugation_gives_preimage() {
        let b = Billiard::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let x = b.sample_mu1(&mut rng);
            let y = b.map(&x).unwrap().next;
            let back = time_reverse(&b.map(&time_reverse(&y)).unwrap().next);
            assert_eq!(back.disk, x.disk);
            assert_eq!(back.cell, x.cell);
            let qa = b.position_in_cell(&back);
            let qb = b.position_in_cell(&x);
            assert!((qa[0] - qb[0]).abs() < 1e-9 && (qa[1] - qb[1]).abs() < 1e-9);
            assert!((back.phi - x.phi).abs() < 1e-9);
        }
    }

    #[test]
    fn phi_sampling_edges() {
        assert_eq!(phi_from_uniform(0.5), 0.0);
        let top = phi_from_uniform(1.0 - f64::EPSILON / 2.0);
        assert!(top < PI / 2.0 && top > 1.5);
    }

    #[test]
    fn invalid_points_are_rejected() {
        let b = Billiard::reference();
        assert!(b.map(&pt(0, 0.0, PI / 2.0)).is_err());
        assert!(b.map(&pt(5, 0.0, 0.0)).is_err());
    }

    #[test]
    fn crossing_a_vertical_wall() {
        // from disk 1 (center (0.5,0.5)) heading right; psi - kappa is the in-cell displacement
        let b = Billiard::reference();
        let x = pt(1, 0.1, -0.1);
        let rec = b.map(&x).unwrap();
        let q0 = b.position_in_cell(&x);
        let q1 = b.position_in_cell(&rec.next);
        let k = rec.kappa.coords();
        assert_eq!(k, &[1, 0]);
        for i in 0..2 {
            assert!((rec.psi[i] - k[i] as f64 - (q1[i] - q0[i])).abs() < 1e-14);
        }
    }

    #[test]
    fn horizon_guard_fires_on_open_corridor() {
        let cfg = ScattererConfig::new(vec![Disk::new(0.0, 0.0, 0.4)], 5.0);
        let b = Billiard::new(cfg).unwrap();
        // from the top of the disk, nearly horizontal: stays in the corridor (0.4, 0.6)
        let x = pt(0, PI / 2.0, -PI / 2.0 + 1e-3);
        let p = b.to_particle(&x).unwrap();
        assert!(p.velocity()[0] > 0.99);
        assert!(matches!(b.map(&x), Err(BilliardError::HorizonGuard { .. })));
    }

    #[test]
    fn particle_roundtrip() {
        let b = Billiard::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = b.sample_mu1(&mut rng);
            let y = b.to_boundary_point(&b.to_particle(&x).unwrap());
            assert_eq!(y.disk, x.disk);
            assert!((y.theta - x.theta).abs() < 1e-12 || (y.theta - x.theta).abs() > TAU - 1e-12);
            assert!((y.phi - x.phi).abs() < 1e-12);
        }
    }
}
