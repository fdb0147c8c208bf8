use super::ScattererConfig;

/// Outcome of the corridor search.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonVerdict {
    pub finite: bool,
    /// Primitive direction `(p, q)` of a collision-free corridor.
    pub witness_direction: Option<(i64, i64)>,
    /// Open interval of line offsets (along the unit normal `(-q, p)/|(p,q)|`,
    /// modulo the line spacing) that meet no scatterer.
    pub uncovered_offset: Option<(f64, f64)>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Primitive directions whose line spacing exceeds `2 * radius`, sorted by
/// length. Each direction is listed once, up to sign.
fn directions_needing_check(radius: f64) -> Vec<(i64, i64)> {
    // spacing 1/|(p,q)| > 2r  <=>  p^2 + q^2 < 1/(4 r^2)
    let bound = 1.0 / (4.0 * radius * radius);
    let max = bound.sqrt().ceil() as i64 + 1;
    let mut dirs = Vec::new();
    for p in 0..=max {
        for q in -max..=max {
            if (p == 0 && q <= 0) || gcd(p, q) != 1 {
                continue;
            }
            if ((p * p + q * q) as f64) < bound {
                dirs.push((p, q));
            }
        }
    }
    dirs.sort_by_key(|&(p, q)| (p * p + q * q, -p, -q));
    dirs
}

/// First uncovered open interval of the circle `R / spacing Z`, if any.
fn first_gap(mut intervals: Vec<(f64, f64)>, spacing: f64) -> Option<(f64, f64)> {
    let mut segments = Vec::with_capacity(intervals.len() * 2);
    for (a, b) in intervals.drain(..) {
        if b - a >= spacing {
            return None;
        }
        let start = a.rem_euclid(spacing);
        let end = start + (b - a);
        if end > spacing {
            segments.push((start, spacing));
            segments.push((0.0, end - spacing));
        } else {
            segments.push((start, end));
        }
    }
    segments.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut covered = 0.0;
    for (s, e) in segments {
        if s > covered {
            return Some((covered, s));
        }
        covered = f64::max(covered, e);
    }
    (covered < spacing).then_some((covered, spacing))
}

/// Searches for a straight corridor avoiding every scatterer.
///
/// Only rational directions matter (irrational lines are dense on the
/// torus), and a direction whose line spacing is at most twice the smallest
/// radius is blocked by any single disk family. The rest are checked by
/// projecting disk centers onto the unit normal.
pub fn finite_horizon_check(cfg: &ScattererConfig) -> HorizonVerdict {
    for (p, q) in directions_needing_check(cfg.min_radius()) {
        let len = ((p * p + q * q) as f64).sqrt();
        let normal = [-(q as f64) / len, p as f64 / len];
        let spacing = 1.0 / len;
        let intervals = cfg
            .disks
            .iter()
            .map(|d| {
                let o = d.center[0] * normal[0] + d.center[1] * normal[1];
                (o - d.radius, o + d.radius)
            })
            .collect();
        if let Some(gap) = first_gap(intervals, spacing) {
            return HorizonVerdict {
                finite: false,
                witness_direction: Some((p, q)),
                uncovered_offset: Some(gap),
            };
        }
    }
    HorizonVerdict {
        finite: true,
        witness_direction: None,
        uncovered_offset: None,
    }
}
