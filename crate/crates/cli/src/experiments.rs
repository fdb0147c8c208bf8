//! The named experiments.

use std::f64::consts::PI;

use serde_json::json;

use lorentz::billiard::{finite_horizon_check, validate_config, Billiard, BilliardError, Particle};
use lorentz::lattice::LatticeVec;
use lorentz::mc::{run_ensemble, BilliardWalk, BitStream, DyadicWalk, EnsembleError, EnsembleSpec, McRng, Ssrw, Walk};
use lorentz::spectral::{
    arithmeticity_scan, eigenvalue_curve, lclt_inversion_all, nagaev_fit, sup_spectral_radius, SpectralError,
};
use lorentz::stats::{
    joint_return_statistic, lclt_point_statistic, log_fit, ssrw_exact, ssrw_joint_ratio, ssrw_lamperti_ratio,
    ssrw_return_probabilities, wilson_interval, CovarianceEstimate, DistributionObserver, GreenKubo, Matrix2,
    ReturnObserver, StatsError,
};
use lorentz::toy::{birkhoff_distribution_f64, green_kubo_sigma2, DyadicSystem, ToyError};

use crate::config::{ExperimentConfig, ExperimentKind, GreenKuboSpec, Mode, SystemSpec};
use crate::output::{ExperimentResult, Statistic, Table};
use crate::CliError;

const Z95: f64 = 1.959_963_984_540_054;
/// Default scan resolution of `arithmetic`.
const DEFAULT_RESOLUTION: usize = 4096;
/// Window of the Nagaev fit.
const NAGAEV_WINDOW: f64 = 0.05;

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::InvalidArgument(m) => CliError::Validation(m),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::InvalidArgument(m) => CliError::Validation(m),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<ToyError> for CliError {
    fn from(e: ToyError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn is_guard(e: &BilliardError) -> bool {
    match e {
        BilliardError::HorizonGuard { .. } => true,
        BilliardError::AtStep { source, .. } => is_guard(source),
        _ => false,
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        if is_guard(&e.source) {
            CliError::Guard(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

/// Any walk the runner can drive.
#[derive(Debug, Clone)]
pub enum AnyWalk {
    Billiard(BilliardWalk),
    Dyadic(DyadicWalk),
    Ssrw(Ssrw),
}

pub enum AnyState {
    Billiard(Particle),
    Dyadic((usize, BitStream)),
    Ssrw(BitStream),
}

impl Walk for AnyWalk {
    type State = AnyState;

    fn dim(&self) -> usize {
        match self {
            AnyWalk::Billiard(w) => w.dim(),
            AnyWalk::Dyadic(w) => w.dim(),
            AnyWalk::Ssrw(w) => w.dim(),
        }
    }

    fn init(&self, rng: &mut McRng) -> Result<AnyState, BilliardError> {
        Ok(match self {
            AnyWalk::Billiard(w) => AnyState::Billiard(w.init(rng)?),
            AnyWalk::Dyadic(w) => AnyState::Dyadic(w.init(rng)?),
            AnyWalk::Ssrw(w) => AnyState::Ssrw(w.init(rng)?),
        })
    }

    #[inline]
    fn step(&self, state: &mut AnyState, rng: &mut McRng) -> Result<[i64; 2], BilliardError> {
        match (self, state) {
            (AnyWalk::Billiard(w), AnyState::Billiard(s)) => w.step(s, rng),
            (AnyWalk::Dyadic(w), AnyState::Dyadic(s)) => w.step(s, rng),
            (AnyWalk::Ssrw(w), AnyState::Ssrw(s)) => w.step(s, rng),
            _ => unreachable!("state built by a different walk"),
        }
    }
}

/// Billiard after validation and the finite-horizon check.
fn checked_billiard(system: &SystemSpec) -> Result<Billiard, CliError> {
    let cfg = system.scatterers().expect("billiard system");
    validate_config(&cfg).map_err(|e| CliError::Validation(e.to_string()))?;
    let verdict = finite_horizon_check(&cfg);
    if !verdict.finite {
        let (p, q) = verdict.witness_direction.unwrap_or((0, 0));
        return Err(CliError::Validation(format!(
            "infinite horizon: free corridor in direction ({p}, {q})"
        )));
    }
    Billiard::new(cfg).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn build_walk(system: &SystemSpec) -> Result<AnyWalk, CliError> {
    Ok(match system {
        SystemSpec::Billiard { burn_in, .. } => AnyWalk::Billiard(BilliardWalk::new(checked_billiard(system)?, *burn_in)),
        SystemSpec::Dyadic { .. } => AnyWalk::Dyadic(DyadicWalk {
            system: system.dyadic()?.expect("dyadic system"),
        }),
        SystemSpec::Ssrw { dim } => AnyWalk::Ssrw(Ssrw::new(*dim)),
    })
}

fn dyadic_only(config: &ExperimentConfig) -> Result<DyadicSystem, CliError> {
    config.system.dyadic()?.ok_or_else(|| {
        CliError::Validation(format!("experiment {} needs a dyadic system", config.experiment.name()))
    })
}

fn require_n(config: &ExperimentConfig) -> Result<Vec<usize>, CliError> {
    if config.n.is_empty() {
        return Err(CliError::Validation(format!(
            "experiment {} needs a non-empty n list",
            config.experiment.name()
        )));
    }
    let mut ns = config.n.clone();
    ns.sort_unstable();
    ns.dedup();
    Ok(ns)
}

fn mode(config: &ExperimentConfig, default: Mode) -> Mode {
    config.mode.unwrap_or(default)
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    match config.experiment {
        ExperimentKind::Simulate => simulate(config),
        ExperimentKind::Lclt => lclt(config),
        ExperimentKind::Recurrence => recurrence(config),
        ExperimentKind::Spectral => spectral(config),
        ExperimentKind::Arithmetic => arithmetic(config),
        ExperimentKind::Ssrw => ssrw(config),
        ExperimentKind::Joint => joint(config),
    }
}

/// Seed of the Green–Kubo streams, kept apart from the ensemble streams.
fn green_kubo_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

fn green_kubo(config: &ExperimentConfig, walk: &AnyWalk, spec: &GreenKuboSpec) -> Result<CovarianceEstimate, CliError> {
    let walk = match walk {
        AnyWalk::Billiard(b) => AnyWalk::Billiard(BilliardWalk::new(b.billiard.clone(), spec.burn_in)),
        w => w.clone(),
    };
    let ens = EnsembleSpec {
        trajectories: spec.streams,
        steps: spec.stream_length,
        seed: green_kubo_seed(config.seed),
    };
    let dim = walk.dim();
    Ok(run_ensemble(&walk, &ens, || GreenKubo::new(dim, spec.max_lag))?.estimate()?)
}

/// The limiting covariance, exact where known.
fn reference_sigma(system: &SystemSpec) -> Result<Option<Matrix2>, CliError> {
    Ok(match system {
        SystemSpec::Ssrw { dim } => {
            let v = 1.0 / *dim as f64;
            Some(if *dim == 1 { [[1.0, 0.0], [0.0, 0.0]] } else { [[v, 0.0], [0.0, v]] })
        }
        SystemSpec::Dyadic { .. } => {
            let s = green_kubo_sigma2(&system.dyadic()?.expect("dyadic system"));
            Some([[*s.numer() as f64 / *s.denom() as f64, 0.0], [0.0, 0.0]])
        }
        SystemSpec::Billiard { .. } => None,
    })
}

fn push_covariance(result: &mut ExperimentResult, prefix: &str, est: &CovarianceEstimate) {
    for a in 0..est.dim {
        for b in a..est.dim {
            result.statistics.push(Statistic::with_se(
                format!("{prefix}_{}{}", a + 1, b + 1),
                est.sigma[a][b],
                est.std_err[a][b],
            ));
        }
    }
}

fn matrix_json(m: &Matrix2, dim: usize) -> serde_json::Value {
    json!((0..dim).map(|a| (0..dim).map(|b| m[a][b]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn simulate(config: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let ns = require_n(config)?;
    let walk = build_walk(&config.system)?;
    let dim = walk.dim();
    let spec = EnsembleSpec {
        trajectories: config.ensemble()?,
        steps: *ns.last().expect("non-empty"),
        seed: config.seed,
    };
    let obs = run_ensemble(&walk, &spec, || DistributionObserver::new(dim, &ns))?;
    let mut table = Table::new(
        "simulate",
        &[
            ("n", "Birkhoff length"),
            ("mean_1", "mean of S_n/sqrt(n), first coordinate"),
            ("mean_2", "second coordinate (0 in dimension 1)"),
            ("cov_11", "covariance of S_n/sqrt(n)"),
            ("cov_12", "covariance of S_n/sqrt(n)"),
            ("cov_22", "covariance of S_n/sqrt(n)"),
            ("samples", "trajectories"),
        ],
    );
    let mut result = ExperimentResult::default();
    for dist in obs.distributions() {
        let (mean, cov) = dist.scaled_moments();
        table.push(vec![
            dist.n.into(),
            mean[0].into(),
            mean[1].into(),
            cov[0][0].into(),
            cov[0][1].into(),
            cov[1][1].into(),
            dist.samples.into(),
        ]);
        let total = dist.samples as f64;
        for a in 0..dim {
            result.statistics.push(Statistic::with_se(
                format!("mean_{}_n{}", a + 1, dist.n),
                mean[a],
                (cov[a][a] / total).sqrt(),
            ));
            for b in a..dim {
                // normal-theory standard error of a sample covariance
                let se = ((cov[a][a] * cov[b][b] + cov[a][b] * cov[a][b]) / total).sqrt();
                result.statistics.push(Statistic::with_se(
                    format!("cov_{}{}_n{}", a + 1, b + 1, dist.n),
                    cov[a][b],
                    se,
                ));
            }
        }
    }
    result.tables.push(table);
    if let Some(gk) = &config.green_kubo {
        let est = green_kubo(config, &walk, gk)?;
        push_covariance(&mut result, "green_kubo_sigma", &est);
        result.diagnostic("green_kubo_samples", est.samples);
    }
    if let Some(s) = reference_sigma(&config.system)? {
        result.diagnostic("exact_sigma", matrix_json(&s, dim));
    }
    Ok(result)
}

fn lclt(config: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let ns = require_n(config)?;
    let default = if matches!(config.system, SystemSpec::Dyadic { .. }) { Mode::Exact } else { Mode::MonteCarlo };
    match mode(config, default) {
        Mode::Exact => lclt_exact(config, &ns),
        Mode::MonteCarlo => lclt_monte_carlo(config, &ns),
    }
}

fn lclt_exact(config: &ExperimentConfig, ns: &[usize]) -> Result<ExperimentResult, CliError> {
    let sys = dyadic_only(config)?;
    let mut table = Table::new(
        "lclt",
        &[
            ("n", "Birkhoff length"),
            ("k", "lattice point"),
            ("inversion", "P(S_n = k) by characteristic-function inversion"),
            ("exact", "P(S_n = k) by dynamic programming"),
            ("abs_diff", "absolute difference"),
        ],
    );
    let mut result = ExperimentResult::default();
    for &n in ns {
        let inv = lclt_inversion_all(&sys, n)?;
        let (offset, probs) = birkhoff_distribution_f64(&sys, n)?;
        let mut worst: f64 = 0.0;
        for (&k, &p) in &inv {
            let idx = k + offset;
            let exact = if (0..probs.len() as i64).contains(&idx) { probs[idx as usize] } else { 0.0 };
            worst = worst.max((p - exact).abs());
            table.push(vec![n.into(), k.into(), p.into(), exact.into(), (p - exact).abs().into()]);
        }
        result.statistics.push(Statistic::exact(format!("max_abs_diff_n{n}"), worst));
    }
    result.tables.push(table);
    Ok(result)
}

fn lclt_monte_carlo(config: &ExperimentConfig, ns: &[usize]) -> Result<ExperimentResult, CliError> {
    let walk = build_walk(&config.system)?;
    let dim = walk.dim();
    let mut result = ExperimentResult::default();
    // the support of S_n is a coset of a sublattice of this covolume
    let (sigma, covol) = match &config.system {
        SystemSpec::Billiard { .. } => {
            let spec = config.green_kubo.clone().unwrap_or_default();
            let est = green_kubo(config, &walk, &spec)?;
            push_covariance(&mut result, "green_kubo_sigma", &est);
            (est, 1)
        }
        SystemSpec::Ssrw { .. } => {
            if let Some(&n) = ns.iter().find(|&&n| n % 2 == 1) {
                return Err(CliError::Validation(format!("SSRW cannot return to 0 at odd n = {n}")));
            }
            let sigma = reference_sigma(&config.system)?.expect("ssrw covariance");
            let est = CovarianceEstimate {
                dim,
                sigma,
                std_err: [[0.0; 2]; 2],
                truncation: 0,
                samples: 0,
                batches: 0,
            };
            (est, 2)
        }
        SystemSpec::Dyadic { .. } => {
            return Err(CliError::Validation(
                "Monte Carlo lclt needs a billiard or ssrw system; use exact mode for dyadic systems".into(),
            ))
        }
    };
    result.diagnostic("sigma", matrix_json(&sigma.sigma, dim));
    result.diagnostic("covolume", covol);
    let spec = EnsembleSpec {
        trajectories: config.ensemble()?,
        steps: *ns.last().expect("non-empty"),
        seed: config.seed,
    };
    let obs = run_ensemble(&walk, &spec, || DistributionObserver::new(dim, ns))?;
    let mut table = Table::new(
        "lclt",
        &[
            ("n", "Birkhoff length"),
            ("statistic", "n^(d/2) P(S_n = 0) (2 pi)^(d/2) sqrt(det Sigma) / covolume"),
            ("ci_low", "95% Wilson lower bound"),
            ("ci_high", "95% Wilson upper bound"),
            ("count", "trajectories with S_n = 0"),
            ("samples", "trajectories"),
        ],
    );
    let mut values = Vec::new();
    for dist in obs.distributions() {
        let s = lclt_point_statistic(&dist, &sigma, LatticeVec::zero(dim), covol)?;
        table.push(vec![
            dist.n.into(),
            s.statistic.into(),
            s.ci.0.into(),
            s.ci.1.into(),
            s.count.into(),
            s.samples.into(),
        ]);
        result.statistics.push(Statistic::with_ci(format!("lclt_n{}", dist.n), s.statistic, s.ci));
        values.push(s.statistic);
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    result.statistics.push(Statistic::exact("relative_spread", (hi - lo) / lo));
    result.tables.push(table);
    Ok(result)
}

fn recurrence(config: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let ns = require_n(config)?;
    let horizon = *ns.last().expect("non-empty");
    let default = if matches!(config.system, SystemSpec::Ssrw { .. }) { Mode::Exact } else { Mode::MonteCarlo };
    let mut result = ExperimentResult::default();
    let sums: Vec<f64>;
    match mode(config, default) {
        Mode::Exact => {
            let SystemSpec::Ssrw { dim } = config.system else {
                return Err(CliError::Validation("exact recurrence needs an ssrw system".into()));
            };
            let p = ssrw_return_probabilities(horizon, dim)?;
            let mut cum = vec![0.0; horizon + 1];
            for k in 1..=horizon {
                cum[k] = cum[k - 1] + p[k];
            }
            let mut table = Table::new(
                "recurrence",
                &[
                    ("N", "horizon"),
                    ("sum_pa", "sum over 1 <= k <= N of P(S_k = 0)"),
                    ("lamperti", "E[R_N^2] / E[R_N]^2 for the return count R_N"),
                ],
            );
            for &n in &ns {
                let lam = ssrw_lamperti_ratio(&p, n);
                table.push(vec![n.into(), cum[n].into(), lam.into()]);
                result.statistics.push(Statistic::exact(format!("lamperti_N{n}"), lam));
            }
            sums = ns.iter().map(|&n| cum[n]).collect();
            result.tables.push(table);
        }
        Mode::MonteCarlo => {
            let walk = build_walk(&config.system)?;
            let spec = EnsembleSpec {
                trajectories: config.ensemble()?,
                steps: horizon,
                seed: config.seed,
            };
            let stats = run_ensemble(&walk, &spec, || ReturnObserver::new(horizon, &ns, &[]))?.stats();
            let mut table = Table::new(
                "recurrence",
                &[
                    ("N", "horizon"),
                    ("sum_pa", "sum over 1 <= k <= N of the empirical P(S_k = 0)"),
                    ("returned_fraction", "fraction of trajectories back at 0 by step N"),
                    ("lamperti", "E[R_N^2] / E[R_N]^2 for the return count R_N (empty if no returns)"),
                ],
            );
            let t = stats.trajectories;
            for &n in &ns {
                let lam = stats.lamperti.iter().find(|l| l.0 == n).map(|l| l.1);
                let frac = stats.returned_fraction[n];
                table.push(vec![n.into(), stats.sum_pa[n].into(), frac.into(), lam.into()]);
                let count = (frac * t as f64).round() as u64;
                result.statistics.push(Statistic::with_ci(
                    format!("returned_fraction_N{n}"),
                    frac,
                    wilson_interval(count, t, Z95),
                ));
                if let Some(lam) = lam {
                    result.statistics.push(Statistic::exact(format!("lamperti_N{n}"), lam));
                }
            }
            result.diagnostic("returned_fraction_monotone", stats.returned_fraction_is_monotone());
            result.diagnostic("never_returned", stats.never_returned);
            sums = ns.iter().map(|&n| stats.sum_pa[n]).collect();
            result.tables.push(table);
        }
    }
    if ns.len() >= 2 {
        let fit = log_fit(&ns, &sums)?;
        result.statistics.push(Statistic::exact("log_fit_slope", fit.slope));
        result.statistics.push(Statistic::exact("log_fit_intercept", fit.intercept));
        result.statistics.push(Statistic::exact("log_fit_r_squared", fit.r_squared));
    }
    Ok(result)
}

fn joint(config: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    if config.pairs.is_empty() {
        return Err(CliError::Validation("experiment joint needs a non-empty pairs list".into()));
    }
    for &(m, n) in &config.pairs {
        if m < 20 || n - m < 20 {
            return Err(CliError::Validation(format!("pair ({m}, {n}) needs m >= 20 and n - m >= 20")));
        }
    }
    let walk = build_walk(&config.system)?;
    let horizon = config.pairs.iter().map(|p| p.1).max().expect("non-empty");
    let spec = EnsembleSpec {
        trajectories: config.ensemble()?,
        steps: horizon,
        seed: config.seed,
    };
    let obs = run_ensemble(&walk, &spec, || ReturnObserver::new(horizon, &[], &config.pairs))?;
    let exact = match config.system {
        SystemSpec::Ssrw { dim } => Some(ssrw_return_probabilities(horizon, dim)?),
        _ => None,
    };
    let mut table = Table::new(
        "joint",
        &[
            ("m", "first time"),
            ("n", "second time"),
            ("ratio", "P(S_m = 0, S_n = 0) / (P(S_m = 0) P(S_n = 0))"),
            ("std_err", "delta-method standard error"),
            ("ci_low", "ratio - 1.96 std_err"),
            ("ci_high", "ratio + 1.96 std_err"),
            ("count_m", "trajectories with S_m = 0"),
            ("count_n", "trajectories with S_n = 0"),
            ("count_both", "trajectories with both"),
            ("exact", "exact ratio (SSRW only)"),
        ],
    );
    let mut result = ExperimentResult::default();
    for &(m, n) in &config.pairs {
        let s = joint_return_statistic(&obs, m, n)?;
        let ex = exact.as_ref().map(|p| ssrw_joint_ratio(p, m, n));
        table.push(vec![
            m.into(),
            n.into(),
            s.ratio.into(),
            s.std_err.into(),
            (s.ratio - Z95 * s.std_err).into(),
            (s.ratio + Z95 * s.std_err).into(),
            s.count_m.into(),
            s.count_n.into(),
            s.count_both.into(),
            ex.into(),
        ]);
        result.statistics.push(Statistic::with_se(format!("joint_ratio_m{m}_n{n}"), s.ratio, s.std_err));
        if let Some(ex) = ex {
            result.statistics.push(Statistic::exact(format!("exact_ratio_m{m}_n{n}"), ex));
        }
    }
    result.tables.push(table);
    Ok(result)
}

fn spectral(config: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let sys = dyadic_only(config)?;
    let grid = config
        .t_grid
        .as_ref()
        .ok_or_else(|| CliError::Validation("experiment spectral needs t_grid".into()))?;
    if grid.points < 2 || !(grid.min < grid.max) || !grid.min.is_finite() || !grid.max.is_finite() {
        return Err(CliError::Validation("t_grid needs min < max and at least 2 points".into()));
    }
    let ts: Vec<f64> = (0..grid.points)
        .map(|i| grid.min + (grid.max - grid.min) * i as f64 / (grid.points - 1) as f64)
        .collect();
    let curve = eigenvalue_curve(&sys, &ts)?;
    let mut table = Table::new(
        "spectral",
        &[
            ("t", "twist parameter"),
            ("lambda_re", "leading eigenvalue, real part"),
            ("lambda_im", "leading eigenvalue, imaginary part"),
            ("modulus", "|lambda_t|"),
            ("gap", "|lambda_t| - |second eigenvalue|"),
        ],
    );
    for r in &curve {
        table.push(vec![r.t.into(), r.lambda.re.into(), r.lambda.im.into(), r.lambda.norm().into(), r.gap.into()]);
    }
    let mut result = ExperimentResult::default();
    result.tables.push(table);
    let fit = nagaev_fit(&sys, NAGAEV_WINDOW)?;
    result.statistics.push(Statistic::exact("nagaev_a", fit.a));
    result.statistics.push(Statistic::exact("nagaev_sigma2", fit.sigma2));
    result.statistics.push(Statistic::exact("nagaev_residual", fit.residual));
    let exact = green_kubo_sigma2(&sys);
    result.statistics.push(Statistic::exact("exact_sigma2", *exact.numer() as f64 / *exact.denom() as f64));
    result.statistics.push(Statistic::exact("exact_mean", sys.mean_f64()));
    result.diagnostic("degenerate", fit.degenerate);
    Ok(result)
}

fn arithmetic(config: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let sys = dyadic_only(config)?;
    let resolution = config.resolution.unwrap_or(DEFAULT_RESOLUTION);
    let report = arithmeticity_scan(&sys, resolution)?;
    let mut table = Table::new(
        "arithmetic",
        &[("t", "point of (-pi, pi] with an eigenvalue on the unit circle"), ("phase", "arg lambda_t")],
    );
    for (&t, &phase) in report.unit_circle_points.iter().zip(&report.phases) {
        table.push(vec![t.into(), phase.into()]);
    }
    let mut result = ExperimentResult::default();
    result.tables.push(table);
    let (t_sup, sup) = sup_spectral_radius(&sys, 0.1, PI, resolution)?;
    result.statistics.push(Statistic::exact("sup_radius_0.1_to_pi", sup));
    result.statistics.push(Statistic::exact("sup_radius_argmax", t_sup));
    result.diagnostic("order", report.order());
    result.diagnostic("continuous", report.continuous);
    result.diagnostic("closed", report.closed);
    result.diagnostic("r", report.r);
    result.diagnostic("minimal_lattice", report.minimal_lattice().map(|l| l.to_string()));
    result.diagnostic("value_support", sys.value_support().to_string());
    Ok(result)
}

fn ssrw(config: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let ns = require_n(config)?;
    let SystemSpec::Ssrw { dim } = config.system else {
        return Err(CliError::Validation("experiment ssrw needs an ssrw system".into()));
    };
    let mut result = ExperimentResult::default();
    match mode(config, Mode::Exact) {
        Mode::Exact => {
            let mut table = Table::new(
                "ssrw",
                &[("n", "steps"), ("return_probability", "exact P(W_n = 0)")],
            );
            for &n in &ns {
                let p = ssrw_exact(n, dim)?.return_probability();
                table.push(vec![n.into(), p.into()]);
                result.statistics.push(Statistic::exact(format!("return_probability_n{n}"), p));
            }
            result.tables.push(table);
        }
        Mode::MonteCarlo => {
            let walk = AnyWalk::Ssrw(Ssrw::new(dim));
            let spec = EnsembleSpec {
                trajectories: config.ensemble()?,
                steps: *ns.last().expect("non-empty"),
                seed: config.seed,
            };
            let obs = run_ensemble(&walk, &spec, || DistributionObserver::new(dim, &ns))?;
            let exact = ssrw_return_probabilities(spec.steps, dim)?;
            let mut table = Table::new(
                "ssrw",
                &[
                    ("n", "steps"),
                    ("return_probability", "empirical P(W_n = 0)"),
                    ("ci_low", "95% Wilson lower bound"),
                    ("ci_high", "95% Wilson upper bound"),
                    ("count", "walks at 0 after n steps"),
                    ("exact", "exact P(W_n = 0)"),
                ],
            );
            for dist in obs.distributions() {
                let count = dist.count(LatticeVec::zero(dim));
                let p = dist.probability(LatticeVec::zero(dim));
                let ci = wilson_interval(count, dist.samples, Z95);
                table.push(vec![dist.n.into(), p.into(), ci.0.into(), ci.1.into(), count.into(), exact[dist.n].into()]);
                result.statistics.push(Statistic::with_ci(format!("return_probability_n{}", dist.n), p, ci));
            }
            result.tables.push(table);
        }
    }
    Ok(result)
}
