use super::BilliardError;

/// A circular scatterer in the unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    pub fn new(x: f64, y: f64, radius: f64) -> Self {
        Disk {
            center: [x, y],
            radius,
        }
    }
}

/// Scatterers of one period cell, repeated over `Z^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScattererConfig {
    pub disks: Vec<Disk>,
    /// Longest free flight tolerated before the horizon guard fires.
    pub tau_max_hint: f64,
}

impl ScattererConfig {
    pub fn new(disks: Vec<Disk>, tau_max_hint: f64) -> Self {
        ScattererConfig {
            disks,
            tau_max_hint,
        }
    }

    /// Disks of radius 0.4 at the origin and 0.2 at the cell center.
    pub fn reference() -> Self {
        ScattererConfig::new(
            vec![Disk::new(0.0, 0.0, 0.4), Disk::new(0.5, 0.5, 0.2)],
            5.0,
        )
    }

    pub fn min_radius(&self) -> f64 {
        self.disks.iter().map(|d| d.radius).fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.disks.iter().map(|d| d.radius).fold(0.0, f64::max)
    }
}

/// Checks radii, centers and strict disjointness of all periodic translates.
pub fn validate_config(cfg: &ScattererConfig) -> Result<(), BilliardError> {
    if cfg.disks.is_empty() {
        return Err(BilliardError::Empty);
    }
    if !(cfg.tau_max_hint > 0.0) || !cfg.tau_max_hint.is_finite() {
        return Err(BilliardError::InvalidTauMax(cfg.tau_max_hint));
    }
    for (i, d) in cfg.disks.iter().enumerate() {
        if !(d.radius > 0.0) || !d.radius.is_finite() {
            return Err(BilliardError::NonpositiveRadius {
                disk: i,
                radius: d.radius,
            });
        }
        let [x, y] = d.center;
        if !(0.0..1.0).contains(&x) || !(0.0..1.0).contains(&y) {
            return Err(BilliardError::CenterOutsideCell { disk: i, x, y });
        }
    }
    for (a, da) in cfg.disks.iter().enumerate() {
        for (b, db) in cfg.disks.iter().enumerate().skip(a) {
            for dx in -1..=1i64 {
                for dy in -1..=1i64 {
                    if a == b && dx == 0 && dy == 0 {
                        continue;
                    }
                    let ex = db.center[0] + dx as f64 - da.center[0];
                    let ey = db.center[1] + dy as f64 - da.center[1];
                    if ex.hypot(ey) <= da.radius + db.radius {
                        return Err(BilliardError::Overlapping { a, b, dx, dy });
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_valid() {
        validate_config(&ScattererConfig::reference()).unwrap();
    }

    #[test]
    fn overlapping_pair_is_rejected() {
        let cfg = ScattererConfig::new(vec![Disk::new(0.0, 0.0, 0.4), Disk::new(0.5, 0.5, 0.4)], 5.0);
        assert!(matches!(
            validate_config(&cfg),
            Err(BilliardError::Overlapping { a: 0, b: 1, .. })
        ));
    }

    #[test]
    fn negative_radius_is_rejected() {
        let cfg = ScattererConfig::new(vec![Disk::new(0.0, 0.0, -0.1)], 5.0);
        assert!(matches!(
            validate_config(&cfg),
            Err(BilliardError::NonpositiveRadius { disk: 0, .. })
        ));
    }

    #[test]
    fn disk_overlapping_its_own_translate() {
        let cfg = ScattererConfig::new(vec![Disk::new(0.0, 0.0, 0.51)], 5.0);
        assert!(matches!(
            validate_config(&cfg),
            Err(BilliardError::Overlapping { a: 0, b: 0, .. })
        ));
    }

    #[test]
    fn center_must_be_in_unit_cell() {
        let cfg = ScattererConfig::new(vec![Disk::new(1.0, 0.0, 0.1)], 5.0);
        assert!(matches!(
            validate_config(&cfg),
            Err(BilliardError::CenterOutsideCell { .. })
        ));
    }
}
