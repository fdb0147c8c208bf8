//! The planar periodic Lorentz gas with circular scatterers.
//!
//! Phase points live on the scatterer boundaries: a [`BoundaryPoint`] names a
//! disk, a boundary angle `theta`, the outgoing angle `phi` measured from the
//! outward disk normal (the inward normal of the billiard table), and the
//! lift `cell` in `Z^2`. The lifted position of a point is
//! `cell + q_cell` where `q_cell` is its position reduced into `[0,1)^2`;
//! the cell is therefore the coordinate-wise floor of the lifted position.
//!
//! [`Billiard`] precomputes, for the unit cell, every disk translate that
//! meets it, so a flight is traced by marching cell by cell along the ray
//! and testing only those candidates.

mod config;
mod dynamics;
mod horizon;
mod trajectory;

pub use config::{validate_config, Disk, ScattererConfig};
pub use dynamics::{time_reverse, Billiard, BoundaryPoint, FlightRecord, Particle, Step};
pub use horizon::{finite_horizon_check, HorizonVerdict};
pub use trajectory::{cohomology_check, reversibility_defect, Trajectory};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BilliardError {
    #[error("nonpositive radius {radius} for disk {disk}")]
    NonpositiveRadius { disk: usize, radius: f64 },
    #[error("disk {disk} center ({x}, {y}) outside the unit cell [0,1)^2")]
    CenterOutsideCell { disk: usize, x: f64, y: f64 },
    #[error("overlapping scatterers: disk {a} and disk {b} translated by ({dx},{dy})")]
    Overlapping {
        a: usize,
        b: usize,
        dx: i64,
        dy: i64,
    },
    #[error("configuration has no scatterers")]
    Empty,
    #[error("invalid tau_max_hint {0}")]
    InvalidTauMax(f64),
    #[error("invalid boundary point: {0}")]
    InvalidPoint(String),
    #[error("horizon guard: free flight exceeded {limit} without a collision")]
    HorizonGuard { limit: f64 },
    #[error("at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<BilliardError>,
    },
}
