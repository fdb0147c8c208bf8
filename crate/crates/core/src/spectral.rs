//! Twisted transfer operators `P_t phi = P(e^{itf} phi)` of dyadic systems.
//!
//! For the doubling map the two preimages of a point in the depth-`m`
//! cylinder `i` lie in cylinders `i >> 1` and `(i >> 1) + 2^(m-1)`, so
//! `P_t` maps depth-`m` step functions to depth-`m` step functions and is
//! represented exactly by a `2^m x 2^m` complex matrix. Everything below
//! (leading eigenvalue curves, drift and variance from their Taylor
//! coefficients, the set of `t` with a unit-modulus eigenvalue, inversion of
//! the characteristic function) is computed from that matrix.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::{AffineLattice, LatticeVec};
use crate::toy::DyadicSystem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("ill-conditioned: two leading eigenvalues of modulus {modulus} with distinct phases at t = {t}")]
    IllConditioned { t: f64, modulus: f64 },
    #[error("eigen-decomposition did not converge at t = {0}")]
    NoConvergence(f64),
    #[error("quadrature grid of {got} points is coarser than the required {required}")]
    QuadratureResolution { got: usize, required: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Matrix of `P_t` on the depth-`m` indicator basis.
#[derive(Debug, Clone)]
pub struct TwistedMatrix {
    pub t: f64,
    entries: DMatrix<Complex64>,
}

impl TwistedMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.entries * v
    }

    /// All eigenvalues, by decreasing modulus and then increasing `|phase|`.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, SpectralError> {
        let schur = nalgebra::Schur::try_new(self.entries.clone(), 1e-15, 10_000)
            .ok_or(SpectralError::NoConvergence(self.t))?;
        let ev = schur.eigenvalues().ok_or(SpectralError::NoConvergence(self.t))?;
        let mut ev: Vec<Complex64> = ev.iter().copied().collect();
        ev.sort_by(|a, b| {
            let (ma, mb) = (a.norm(), b.norm());
            if (ma - mb).abs() > 1e-13 {
                mb.total_cmp(&ma)
            } else {
                a.arg().abs().total_cmp(&b.arg().abs())
            }
        });
        Ok(ev)
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> Result<f64, SpectralError> {
        Ok(self.eigenvalues()?.first().map_or(0.0, |z| z.norm()))
    }
}

/// Builds `P_t` exactly.
pub fn twisted_matrix(sys: &DyadicSystem, t: f64) -> TwistedMatrix {
    let n = sys.values().len();
    let half = n / 2;
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in [i >> 1, (i >> 1) + half] {
            entries[(i, j)] = Complex64::from_polar(0.5, t * sys.values()[j] as f64);
        }
    }
    TwistedMatrix { t, entries }
}

/// Leading eigenpair of `P_t` and the gap to the rest of the spectrum.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub t: f64,
    pub lambda: Complex64,
    /// Eigenfunction values on the partition; integral 1 when the integral
    /// does not vanish.
    pub eigvec: Vec<Complex64>,
    /// `|lambda_1| - |lambda_2|`.
    pub gap: f64,
}

/// Leading eigenvalue with its eigenvector, seeded from `prev` for
/// continuity along a scan.
pub fn leading_eig(
    m: &TwistedMatrix,
    prev: Option<&[Complex64]>,
) -> Result<SpectralResult, SpectralError> {
    let ev = m.eigenvalues()?;
    let lambda = ev[0];
    let second = ev.get(1).copied().unwrap_or_default();
    if lambda.norm() > 1e-13
        && (lambda.norm() - second.norm()).abs() <= 1e-13
        && (lambda - second).norm() > 1e-9
    {
        return Err(SpectralError::IllConditioned {
            t: m.t,
            modulus: lambda.norm(),
        });
    }
    let eigvec = inverse_iteration(m, lambda, prev);
    Ok(SpectralResult {
        t: m.t,
        lambda,
        eigvec,
        gap: lambda.norm() - second.norm(),
    })
}

fn inverse_iteration(m: &TwistedMatrix, lambda: Complex64, prev: Option<&[Complex64]>) -> Vec<Complex64> {
    let n = m.dim();
    let shift = lambda + Complex64::new(1e-10 * lambda.norm().max(1e-3), 0.0);
    let shifted = m.entries() - DMatrix::from_diagonal_element(n, n, shift);
    let lu = shifted.lu();
    let mut v = match prev {
        Some(p) if p.len() == n => DVector::from_column_slice(p),
        _ => DVector::from_element(n, Complex64::new(1.0, 0.0)),
    };
    for _ in 0..4 {
        match lu.solve(&v) {
            Some(w) if w.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                let norm = w.norm();
                if norm == 0.0 {
                    break;
                }
                v = w / Complex64::new(norm, 0.0);
            }
            _ => break,
        }
    }
    let integral = v.mean();
    let scale = if integral.norm() > 1e-8 {
        integral
    } else {
        // integral vanishes: fix the phase against `prev`, else the largest entry
        let anchor = match prev {
            Some(p) if p.len() == n => p.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum(),
            _ => v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default(),
        };
        if anchor.norm() > 0.0 {
            anchor / anchor.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    v.iter().map(|z| z / scale).collect()
}

/// Leading eigenpairs along `ts`, each solve seeded by the previous one.
pub fn eigenvalue_curve(sys: &DyadicSystem, ts: &[f64]) -> Result<Vec<SpectralResult>, SpectralError> {
    let mut out: Vec<SpectralResult> = Vec::with_capacity(ts.len());
    for &t in ts {
        let prev = out.last().map(|r| r.eigvec.as_slice());
        out.push(leading_eig(&twisted_matrix(sys, t), prev)?);
    }
    Ok(out)
}

/// Drift and variance read off the leading eigenvalue near `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NagaevFit {
    pub a: f64,
    pub sigma2: f64,
    /// Max deviation of `log lambda_t` from `i a t - sigma2 t^2 / 2` on the window.
    pub residual: f64,
    /// Set when `sigma2` is below `1e-10`.
    pub degenerate: bool,
    /// Same coefficients from a least-squares polynomial fit, as a cross-check.
    pub poly_a: f64,
    pub poly_sigma2: f64,
}

const RICHARDSON_LEVELS: usize = 5;

fn log_lambda(sys: &DyadicSystem, t: f64) -> Result<Complex64, SpectralError> {
    let r = leading_eig(&twisted_matrix(sys, t), None)?;
    Ok(r.lambda.ln())
}

fn richardson(estimates: &[f64]) -> f64 {
    let mut table = estimates.to_vec();
    let mut factor = 4.0;
    for level in 1..table.len() {
        for j in (level..table.len()).rev() {
            table[j] = (factor * table[j] - table[j - 1]) / (factor - 1.0);
        }
        factor *= 4.0;
    }
    *table.last().expect("nonempty")
}

/// Fits `log lambda_t = i a t - sigma2 t^2 / 2 + o(t^2)` on `[-window, window]`.
///
/// Derivatives at 0 come from Richardson-extrapolated central differences
/// with steps `window / 2^j`; an odd/even polynomial least-squares fit on a
/// uniform grid is reported alongside.
pub fn nagaev_fit(sys: &DyadicSystem, window: f64) -> Result<NagaevFit, SpectralError> {
    if !(window > 0.0 && window <= 0.1) {
        return Err(SpectralError::InvalidArgument(format!(
            "window must be in (0, 0.1], got {window}"
        )));
    }
    let g0 = log_lambda(sys, 0.0)?;
    let mut d1 = Vec::with_capacity(RICHARDSON_LEVELS);
    let mut d2 = Vec::with_capacity(RICHARDSON_LEVELS);
    for j in 0..RICHARDSON_LEVELS {
        let h = window / (1u32 << j) as f64;
        let gp = log_lambda(sys, h)?;
        let gm = log_lambda(sys, -h)?;
        d1.push((gp.im - gm.im) / (2.0 * h));
        d2.push((gp.re - 2.0 * g0.re + gm.re) / (h * h));
    }
    let a = richardson(&d1);
    let sigma2 = -richardson(&d2);

    let grid: Vec<f64> = (-10..=10).map(|i| window * i as f64 / 10.0).collect();
    let logs: Vec<Complex64> = grid.iter().map(|&t| log_lambda(sys, t)).collect::<Result<_, _>>()?;
    let residual = grid
        .iter()
        .zip(&logs)
        .map(|(&t, g)| (g - Complex64::new(-sigma2 * t * t / 2.0, a * t)).norm())
        .fold(0.0, f64::max);

    // Re log lambda is even in t, Im log lambda odd (f is real-valued).
    let even = poly_fit(&grid, &logs.iter().map(|g| g.re).collect::<Vec<_>>(), &[0, 2, 4, 6]);
    let odd = poly_fit(&grid, &logs.iter().map(|g| g.im).collect::<Vec<_>>(), &[1, 3, 5]);

    Ok(NagaevFit {
        a,
        sigma2,
        residual,
        degenerate: sigma2 < 1e-10,
        poly_a: odd[0],
        poly_sigma2: -2.0 * even[1],
    })
}

fn poly_fit(xs: &[f64], ys: &[f64], powers: &[i32]) -> Vec<f64> {
    let a = DMatrix::from_fn(xs.len(), powers.len(), |i, j| xs[i].powi(powers[j]));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14)
        .expect("svd computed with u and v")
        .iter()
        .copied()
        .collect()
}

/// Smallest admissible quadrature grid for inverting `S_n`.
pub fn required_grid(sys: &DyadicSystem, n: usize) -> usize {
    (8 * n).max(4 * (n * sys.max_abs() as usize + 1))
}

/// `E[exp(i t S_n)] = integral of P_t^n 1`.
pub fn characteristic_function(sys: &DyadicSystem, n: usize, t: f64) -> Complex64 {
    let m = twisted_matrix(sys, t);
    let mut v = DVector::from_element(m.dim(), Complex64::new(1.0, 0.0));
    for _ in 0..n {
        v = m.apply(&v);
    }
    v.mean()
}

/// `P(S_n = k)` for every `k` in `[-n max|f|, n max|f|]`, by trapezoid
/// inversion of the characteristic function on a uniform grid of `grid`
/// points. The integrand is a trigonometric polynomial, so the rule is exact
/// once the grid exceeds the frequency span.
pub fn lclt_inversion_grid(
    sys: &DyadicSystem,
    n: usize,
    grid: usize,
) -> Result<BTreeMap<i64, f64>, SpectralError> {
    if n == 0 {
        return Err(SpectralError::InvalidArgument("n must be at least 1".into()));
    }
    let required = required_grid(sys, n);
    if grid < required {
        return Err(SpectralError::QuadratureResolution { got: grid, required });
    }
    let phis: Vec<(f64, Complex64)> = (0..grid)
        .map(|j| {
            let t = -PI + TAU * j as f64 / grid as f64;
            (t, characteristic_function(sys, n, t))
        })
        .collect();
    let span = n as i64 * sys.max_abs();
    let mut out = BTreeMap::new();
    for k in -span..=span {
        let z: Complex64 = phis
            .iter()
            .map(|&(t, phi)| phi * Complex64::from_polar(1.0, -t * k as f64))
            .sum::<Complex64>()
            / grid as f64;
        debug_assert!(z.im.abs() < 1e-12, "imaginary residue {}", z.im);
        out.insert(k, z.re.clamp(0.0, 1.0));
    }
    Ok(out)
}

pub fn lclt_inversion_all(sys: &DyadicSystem, n: usize) -> Result<BTreeMap<i64, f64>, SpectralError> {
    lclt_inversion_grid(sys, n, required_grid(sys, n))
}

/// `P(S_n = k)` by characteristic-function inversion.
pub fn lclt_inversion(sys: &DyadicSystem, n: usize, k: i64) -> Result<f64, SpectralError> {
    if k.abs() > n as i64 * sys.max_abs() {
        return Ok(0.0);
    }
    Ok(lclt_inversion_all(sys, n)?[&k])
}

/// The `t` in `(-pi, pi]` where `P_t` has an eigenvalue on the unit circle.
#[derive(Debug, Clone)]
pub struct ArithmeticityReport {
    pub unit_circle_points: Vec<f64>,
    /// `arg lambda_t` at each point.
    pub phases: Vec<f64>,
    /// Every scanned `t` was on the unit circle (the observable is
    /// cohomologous to a constant).
    pub continuous: bool,
    /// The points are closed under addition mod `2 pi`.
    pub closed: bool,
    /// `r` with `phase(t) = t r (mod 2 pi)` at every point, if one exists.
    pub r: Option<i64>,
}

impl ArithmeticityReport {
    pub fn order(&self) -> usize {
        self.unit_circle_points.len()
    }

    /// The minimal lattice `V + r` dual to the reported group, `V = qZ`.
    pub fn minimal_lattice(&self) -> Option<AffineLattice> {
        if self.continuous || !self.closed {
            return None;
        }
        let r = self.r?;
        let q = self.order() as i64;
        let lat = AffineLattice::span(1, &[LatticeVec::from([q])]).ok()?;
        Some(lat.translated(LatticeVec::from([r])))
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

const UNIT_TOLERANCE: f64 = 1e-9;

/// Scans `t` over `[-pi, pi)` for unit-modulus eigenvalues of `P_t`.
pub fn arithmeticity_scan(sys: &DyadicSystem, resolution: usize) -> Result<ArithmeticityReport, SpectralError> {
    if resolution < 64 {
        return Err(SpectralError::InvalidArgument(format!(
            "resolution must be at least 64, got {resolution}"
        )));
    }
    let step = TAU / resolution as f64;
    let ts: Vec<f64> = (0..resolution).map(|i| -PI + step * i as f64).collect();
    let radius = |t: f64| twisted_matrix(sys, t).spectral_radius();
    let rho: Vec<f64> = ts.iter().map(|&t| radius(t)).collect::<Result<_, _>>()?;

    if rho.iter().all(|&r| r >= 1.0 - UNIT_TOLERANCE) {
        let phases = ts
            .iter()
            .map(|&t| leading_eig(&twisted_matrix(sys, t), None).map(|r| r.lambda.arg()))
            .collect::<Result<_, _>>()?;
        return Ok(ArithmeticityReport {
            unit_circle_points: ts.iter().map(|&t| wrap_angle(t)).collect(),
            phases,
            continuous: true,
            closed: true,
            r: None,
        });
    }

    let mut points: Vec<f64> = Vec::new();
    for i in 0..resolution {
        let left = rho[(i + resolution - 1) % resolution];
        let right = rho[(i + 1) % resolution];
        if rho[i] < left || rho[i] < right || rho[i] < 0.5 {
            continue;
        }
        let (t, r) = golden_max(|t| radius(t).unwrap_or(0.0), ts[i] - step, ts[i] + step);
        if r >= 1.0 - UNIT_TOLERANCE {
            let t = wrap_angle(t);
            if !points.iter().any(|&p| wrap_angle(p - t).abs() < step) {
                points.push(t);
            }
        }
    }
    // A closed finite subgroup of the circle is (2 pi / q) Z; snap onto it.
    let q = points.len();
    let unit = TAU / q as f64;
    if points.iter().all(|&t| wrap_angle(t - unit * (t / unit).round()).abs() < 1e-6) {
        for t in &mut points {
            // + 0.0 turns -0.0 into 0.0
            *t = wrap_angle(unit * (*t / unit).round()) + 0.0;
        }
    }
    points.sort_by(f64::total_cmp);
    let phases: Vec<f64> = points
        .iter()
        .map(|&t| leading_eig(&twisted_matrix(sys, t), None).map(|r| r.lambda.arg()))
        .collect::<Result<_, _>>()?;

    let tol = 1e-6;
    let closed = points.iter().all(|&a| {
        points
            .iter()
            .all(|&b| points.iter().any(|&c| wrap_angle(a + b - c).abs() < tol))
    });
    let q = q as i64;
    let r = (0..q.max(1)).find(|&r| {
        points
            .iter()
            .zip(&phases)
            .all(|(&t, &ph)| wrap_angle(ph - t * r as f64).abs() < tol)
    });
    Ok(ArithmeticityReport {
        unit_circle_points: points,
        phases,
        continuous: false,
        closed,
        r,
    })
}

/// Supremum of the spectral radius over `[lo, hi]`: grid of `resolution`
/// points, then golden-section refinement around the best one.
pub fn sup_spectral_radius(
    sys: &DyadicSystem,
    lo: f64,
    hi: f64,
    resolution: usize,
) -> Result<(f64, f64), SpectralError> {
    let n = resolution.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (lo, f64::NEG_INFINITY);
    for i in 0..n {
        let t = lo + step * i as f64;
        let r = twisted_matrix(sys, t).spectral_radius()?;
        if r > best.1 {
            best = (t, r);
        }
    }
    let radius = |t: f64| twisted_matrix(sys, t).spectral_radius().unwrap_or(0.0);
    let (t, r) = golden_max(radius, (best.0 - step).max(lo), (best.0 + step).min(hi));
    Ok(if r > best.1 { (t, r) } else { best })
}
