//! Exact and Monte Carlo statistics of lattice-valued Birkhoff sums.

mod distribution;
mod green_kubo;
mod invariance;
mod recurrence;
mod ssrw;

pub use distribution::{
    clt_compare, kolmogorov_q, ks_normal, lclt_point_statistic, wilson_interval, CltComparison,
    DistributionObserver, EmpiricalDistribution, KsResult, LcltStatistic,
};
pub use green_kubo::{green_kubo_covariance, CovarianceEstimate, GreenKubo, Matrix2};
pub use invariance::{mu1_invariance_test, ChiSquareResult};
pub use recurrence::{
    first_return, joint_from_counts, joint_return_statistic, log_fit, log_grid, JointStatistic, LogFit,
    RecurrenceStats, ReturnObserver,
};
pub use ssrw::{
    ssrw_exact, ssrw_joint_ratio, ssrw_lamperti_ratio, ssrw_return_probabilities, SsrwExact, MAX_PLANAR_STEPS,
    PLANAR_LAMPERTI_BOUND,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: u64, got: u64 },
    #[error("zero denominator: a marginal event was never observed")]
    ZeroDenominator,
    #[error("degenerate covariance: {0}")]
    Degenerate(String),
    #[error("S_{n} = {value} is outside {lattice}")]
    OffCoset { n: usize, value: String, lattice: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
