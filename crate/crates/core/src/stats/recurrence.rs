use super::StatsError;
use crate::mc::Observer;

/// Returns to the origin along an ensemble, tracked up to a fixed horizon.
///
/// The event `A_k` is `S_k = 0`. Besides first-return times and the hit
/// counts of each `A_k`, the observer keeps `sum R_N` and `sum R_N^2` at
/// chosen checkpoints `N` (with `R_N` the number of `k <= N` in `A_k`) and
/// the joint counts of `A_m` and `A_n` for chosen pairs.
#[derive(Debug, Clone)]
pub struct ReturnObserver {
    horizon: usize,
    checkpoints: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    trajectories: u64,
    first_return: Vec<u64>,
    hits: Vec<u64>,
    r_sum: Vec<u128>,
    r2_sum: Vec<u128>,
    joint: Vec<u64>,
    // per-trajectory state
    returns: u64,
    first: bool,
    next_checkpoint: usize,
    hit_at_m: Vec<bool>,
}

impl ReturnObserver {
    pub fn new(horizon: usize, checkpoints: &[usize], pairs: &[(usize, usize)]) -> Self {
        let mut cps: Vec<usize> = checkpoints.iter().copied().filter(|&n| n >= 1 && n <= horizon).collect();
        cps.sort_unstable();
        cps.dedup();
        Self {
            horizon,
            checkpoints: cps.clone(),
            pairs: pairs.to_vec(),
            trajectories: 0,
            first_return: vec![0; horizon + 1],
            hits: vec![0; horizon + 1],
            r_sum: vec![0; cps.len()],
            r2_sum: vec![0; cps.len()],
            joint: vec![0; pairs.len()],
            returns: 0,
            first: true,
            next_checkpoint: 0,
            hit_at_m: vec![false; pairs.len()],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn checkpoint(&mut self) {
        let r = self.returns as u128;
        self.r_sum[self.next_checkpoint] += r;
        self.r2_sum[self.next_checkpoint] += r * r;
        self.next_checkpoint += 1;
    }

    /// `(count of A_m, count of A_n, count of both, trajectories)`.
    pub fn joint_counts(&self, m: usize, n: usize) -> Option<(u64, u64, u64, u64)> {
        let i = self.pairs.iter().position(|&p| p == (m, n))?;
        Some((self.hits[m], self.hits[n], self.joint[i], self.trajectories))
    }

    pub fn stats(&self) -> RecurrenceStats {
        let t = self.trajectories as f64;
        let mut returned = Vec::with_capacity(self.horizon + 1);
        let mut sum_pa = Vec::with_capacity(self.horizon + 1);
        let (mut f, mut s) = (0u64, 0u64);
        for k in 0..=self.horizon {
            f += self.first_return[k];
            s += self.hits[k];
            returned.push(f as f64 / t);
            sum_pa.push(s as f64 / t);
        }
        let lamperti = self
            .checkpoints
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.r_sum[i] > 0)
            .map(|(i, &n)| {
                let m1 = self.r_sum[i] as f64 / t;
                let m2 = self.r2_sum[i] as f64 / t;
                (n, m2 / (m1 * m1))
            })
            .collect();
        RecurrenceStats {
            trajectories: self.trajectories,
            first_return: self.first_return.clone(),
            never_returned: self.trajectories - f,
            returned_fraction: returned,
            sum_pa,
            lamperti,
        }
    }
}

impl Observer for ReturnObserver {
    fn begin(&mut self) {
        self.trajectories += 1;
        self.returns = 0;
        self.first = true;
        self.next_checkpoint = 0;
        self.hit_at_m.iter_mut().for_each(|h| *h = false);
    }

    #[inline]
    fn observe(&mut self, n: usize, s: [i64; 2], _inc: [i64; 2]) {
        if n > self.horizon {
            return;
        }
        if s == [0, 0] {
            self.returns += 1;
            self.hits[n] += 1;
            if self.first {
                self.first_return[n] += 1;
                self.first = false;
            }
            for (i, &(m, big)) in self.pairs.iter().enumerate() {
                if n == m {
                    self.hit_at_m[i] = true;
                } else if n == big && self.hit_at_m[i] {
                    self.joint[i] += 1;
                }
            }
        }
        if self.checkpoints.get(self.next_checkpoint) == Some(&n) {
            self.checkpoint();
        }
    }

    fn end(&mut self) {
        while self.next_checkpoint < self.checkpoints.len() {
            self.checkpoint();
        }
    }

    fn merge(&mut self, other: Self) {
        self.trajectories += other.trajectories;
        for (a, b) in self.first_return.iter_mut().zip(&other.first_return) {
            *a += b;
        }
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        for (a, b) in self.r_sum.iter_mut().zip(&other.r_sum) {
            *a += b;
        }
        for (a, b) in self.r2_sum.iter_mut().zip(&other.r2_sum) {
            *a += b;
        }
        for (a, b) in self.joint.iter_mut().zip(&other.joint) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceStats {
    pub trajectories: u64,
    /// `first_return[k]` trajectories first hit the origin at step `k`.
    pub first_return: Vec<u64>,
    pub never_returned: u64,
    /// Indexed by `N`.
    pub returned_fraction: Vec<f64>,
    /// `sum_{k <= N} P(A_k)`, indexed by `N`.
    pub sum_pa: Vec<f64>,
    /// `(N, E[R_N^2] / E[R_N]^2)` at the checkpoints.
    pub lamperti: Vec<(usize, f64)>,
}

impl RecurrenceStats {
    pub fn returned_fraction_is_monotone(&self) -> bool {
        self.returned_fraction.windows(2).all(|w| w[0] <= w[1])
    }
}

/// First `n >= 1` with `S_n = 0`.
pub fn first_return(increments: &[[i64; 2]]) -> Option<usize> {
    let mut s = [0i64; 2];
    for (i, d) in increments.iter().enumerate() {
        s = [s[0] + d[0], s[1] + d[1]];
        if s == [0, 0] {
            return Some(i + 1);
        }
    }
    None
}

/// Ordinary least squares of `y` on `ln N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn log_fit(ns: &[usize], ys: &[f64]) -> Result<LogFit, StatsError> {
    if ns.len() != ys.len() || ns.len() < 3 {
        return Err(StatsError::InvalidArgument("need at least 3 paired points".into()));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(LogFit {
        slope,
        intercept: my - slope * mx,
        r_squared: if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 },
    })
}

/// Roughly geometric grid of `count` integers from `lo` to `hi`.
pub fn log_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    out
}

/// `P(A_m and A_n) / (P(A_m) P(A_n))` with a delta-method interval.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStatistic {
    pub m: usize,
    pub n: usize,
    pub ratio: f64,
    pub std_err: f64,
    pub ci: (f64, f64),
    pub count_m: u64,
    pub count_n: u64,
    pub count_both: u64,
    pub trajectories: u64,
}

pub fn joint_return_statistic(obs: &ReturnObserver, m: usize, n: usize) -> Result<JointStatistic, StatsError> {
    if !(m < n && m >= 20 && n - m >= 20) {
        return Err(StatsError::InvalidArgument(format!(
            "need m >= 20 and n - m >= 20, got m = {m}, n = {n}"
        )));
    }
    let (cm, cn, cb, t) = obs
        .joint_counts(m, n)
        .ok_or_else(|| StatsError::InvalidArgument(format!("pair ({m}, {n}) was not tracked")))?;
    joint_from_counts(m, n, cm, cn, cb, t)
}

pub fn joint_from_counts(m: usize, n: usize, cm: u64, cn: u64, cb: u64, t: u64) -> Result<JointStatistic, StatsError> {
    if cm == 0 || cn == 0 {
        return Err(StatsError::ZeroDenominator);
    }
    let total = t as f64;
    let (pm, pn, pb) = (cm as f64 / total, cn as f64 / total, cb as f64 / total);
    let ratio = pb / (pm * pn);
    let std_err = if cb == 0 {
        f64::INFINITY
    } else {
        // multinomial cells: both, m only, n only (rest implicit)
        let cells = [pb, pm - pb, pn - pb];
        let grad = [1.0 / pb - 1.0 / pm - 1.0 / pn, -1.0 / pm, -1.0 / pn];
        let e1: f64 = cells.iter().zip(&grad).map(|(p, g)| p * g * g).sum();
        let e0: f64 = cells.iter().zip(&grad).map(|(p, g)| p * g).sum();
        ratio * ((e1 - e0 * e0) / total).sqrt()
    };
    Ok(JointStatistic {
        m,
        n,
        ratio,
        std_err,
        ci: ((ratio - 1.96 * std_err).max(0.0), ratio + 1.96 * std_err),
        count_m: cm,
        count_n: cn,
        count_both: cb,
        trajectories: t,
    })
}

#[cfg(test)]
mod tests {
    use super::super::ssrw::{ssrw_joint_ratio, ssrw_lamperti_ratio, ssrw_return_probabilities};
    use super::*;
    use crate::mc::{run_ensemble, EnsembleSpec, Ssrw};

    #[test]
    fn hand_built_return() {
        assert_eq!(first_return(&[[1, 0], [-1, 0]]), Some(2));
        assert_eq!(first_return(&[[1, 0], [0, 1]]), None);
    }

    #[test]
    fn ssrw_expected_returns_grow_like_log() {
        let p = ssrw_return_probabilities(10_000, 2).unwrap();
        let mut cum = vec![0.0; p.len()];
        for k in 1..p.len() {
            cum[k] = cum[k - 1] + p[k];
        }
        let ns = log_grid(100, 10_000, 20);
        let ys: Vec<f64> = ns.iter().map(|&n| cum[n]).collect();
        let fit = log_fit(&ns, &ys).unwrap();
        assert!((fit.slope * std::f64::consts::PI - 1.0).abs() < 0.05, "{fit:?}");
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn observer_matches_exact_ssrw() {
        let spec = EnsembleSpec {
            trajectories: 200_000,
            steps: 200,
            seed: 17,
        };
        let obs = run_ensemble(&Ssrw::new(2), &spec, || ReturnObserver::new(200, &[50, 200], &[(40, 200)])).unwrap();
        let st = obs.stats();
        let p = ssrw_return_probabilities(200, 2).unwrap();
        let t = spec.trajectories as f64;
        for n in [2, 4, 10, 50, 200] {
            let se = (p[n] * (1.0 - p[n]) / t).sqrt();
            let got = obs.hits[n] as f64 / t;
            assert!((got - p[n]).abs() < 4.0 * se, "n={n}: {got} vs {}", p[n]);
        }
        assert!(st.returned_fraction_is_monotone());
        assert_eq!(st.first_return[1], 0);
        assert_eq!(st.never_returned + st.first_return.iter().sum::<u64>(), st.trajectories);
        // sum_pa is the mean number of returns
        let (n, ratio) = st.lamperti[1];
        assert_eq!(n, 200);
        assert!((st.sum_pa[200] - obs.r_sum[1] as f64 / t).abs() < 1e-12);
        let exact = ssrw_lamperti_ratio(&p, 200);
        assert!((ratio - exact).abs() < 0.05 * exact, "{ratio} vs {exact}");
        let j = joint_return_statistic(&obs, 40, 200).unwrap();
        let exact = ssrw_joint_ratio(&p, 40, 200);
        assert!((j.ratio - exact).abs() < 4.0 * j.std_err, "{j:?} vs {exact}");
    }

    #[test]
    fn joint_argument_checks() {
        let obs = ReturnObserver::new(100, &[], &[(30, 100)]);
        assert!(joint_return_statistic(&obs, 10, 100).is_err());
        assert!(joint_return_statistic(&obs, 90, 100).is_err());
        assert_eq!(joint_return_statistic(&obs, 30, 100), Err(StatsError::ZeroDenominator));
    }

    #[test]
    fn delta_method_against_bootstrap_formula() {
        // independent events: ratio near 1 and the interval covers it
        let j = joint_from_counts(20, 40, 1000, 2000, 20, 100_000).unwrap();
        assert!((j.ratio - 1.0).abs() < 1e-12);
        // leading term: relative error about 1 / sqrt(count_both)
        assert!((j.std_err - (1.0 / 20f64).sqrt()).abs() < 0.02, "{j:?}");
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(100, 10_000, 5);
        assert_eq!(g, vec![100, 316, 1000, 3162, 10_000]);
    }
}
