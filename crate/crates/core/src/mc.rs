//! Seeded ensembles of lattice-valued walks.
//!
//! Trajectory `i` of an ensemble draws from its own ChaCha8 stream `i` under
//! the ensemble seed, so any trajectory can be replayed alone. Trajectories
//! are grouped in fixed chunks; every chunk gets a fresh observer and the
//! observers are merged in chunk order, which makes results independent of
//! the number of worker threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::billiard::{Billiard, BilliardError, Particle};
use crate::toy::DyadicSystem;

pub type McRng = ChaCha8Rng;

/// Trajectories per chunk.
pub const CHUNK: u64 = 1024;

/// RNG of trajectory `index` in the ensemble seeded by `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> McRng {
    let mut rng = McRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A random walk on `Z^d` (`d <= 2`) driven by a dynamical system.
pub trait Walk: Sync {
    type State: Send;

    fn dim(&self) -> usize;

    fn init(&self, rng: &mut McRng) -> Result<Self::State, BilliardError>;

    /// Next increment; unused coordinates are 0.
    fn step(&self, state: &mut Self::State, rng: &mut McRng) -> Result<[i64; 2], BilliardError>;
}

/// The discrete free flight `kappa` of the Lorentz process, started from
/// exact `mu_1` samples.
#[derive(Debug, Clone)]
pub struct BilliardWalk {
    pub billiard: Billiard,
    /// Collisions discarded after the initial `mu_1` draw.
    pub burn_in: usize,
}

impl BilliardWalk {
    pub fn new(billiard: Billiard, burn_in: usize) -> Self {
        Self { billiard, burn_in }
    }
}

impl Walk for BilliardWalk {
    type State = Particle;

    fn dim(&self) -> usize {
        2
    }

    fn init(&self, rng: &mut McRng) -> Result<Particle, BilliardError> {
        let mut p = self.billiard.sample_particle(rng);
        for _ in 0..self.burn_in {
            self.billiard.advance(&mut p)?;
        }
        Ok(p)
    }

    #[inline]
    fn step(&self, p: &mut Particle, _rng: &mut McRng) -> Result<[i64; 2], BilliardError> {
        Ok(self.billiard.advance(p)?.kappa)
    }
}

/// Simple symmetric random walk on `Z` or `Z^2`.
#[derive(Debug, Clone, Copy)]
pub struct Ssrw {
    dim: usize,
}

impl Ssrw {
    /// # Panics
    /// If `dim` is not 1 or 2.
    pub fn new(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "SSRW dimension must be 1 or 2");
        Self { dim }
    }
}

/// Buffered random bits.
#[derive(Debug, Clone, Default)]
pub struct BitStream {
    word: u64,
    left: u32,
}

impl BitStream {
    #[inline]
    fn take(&mut self, rng: &mut McRng, bits: u32) -> u64 {
        if self.left < bits {
            self.word = rng.next_u64();
            self.left = 64;
        }
        let out = self.word & ((1 << bits) - 1);
        self.word >>= bits;
        self.left -= bits;
        out
    }
}

impl Walk for Ssrw {
    type State = BitStream;

    fn dim(&self) -> usize {
        self.dim
    }

    fn init(&self, _rng: &mut McRng) -> Result<BitStream, BilliardError> {
        Ok(BitStream::default())
    }

    #[inline]
    fn step(&self, s: &mut BitStream, rng: &mut McRng) -> Result<[i64; 2], BilliardError> {
        Ok(if self.dim == 1 {
            [2 * s.take(rng, 1) as i64 - 1, 0]
        } else {
            match s.take(rng, 2) {
                0 => [1, 0],
                1 => [-1, 0],
                2 => [0, 1],
                _ => [0, -1],
            }
        })
    }
}

/// Birkhoff sums of a depth-`m` observable along the doubling map, realised
/// with iid binary digits.
#[derive(Debug, Clone)]
pub struct DyadicWalk {
    pub system: DyadicSystem,
}

impl Walk for DyadicWalk {
    type State = (usize, BitStream);

    fn dim(&self) -> usize {
        1
    }

    fn init(&self, rng: &mut McRng) -> Result<(usize, BitStream), BilliardError> {
        Ok((self.system.sample_window(rng), BitStream::default()))
    }

    #[inline]
    fn step(&self, s: &mut (usize, BitStream), rng: &mut McRng) -> Result<[i64; 2], BilliardError> {
        let bit = s.1.take(rng, 1) == 1;
        Ok([self.system.push_digit(&mut s.0, bit), 0])
    }
}

/// Per-trajectory accumulator that can be merged.
pub trait Observer: Send + Sized {
    /// Called once per trajectory before its first step.
    fn begin(&mut self) {}

    /// Called after step `n` (1-based) with the running sum `s = S_n`.
    fn observe(&mut self, n: usize, s: [i64; 2], increment: [i64; 2]);

    /// Called once per trajectory after its last step.
    fn end(&mut self) {}

    /// Absorbs an observer covering later trajectories.
    fn merge(&mut self, other: Self);
}

/// Ensemble size, length and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub trajectories: u64,
    pub steps: usize,
    pub seed: u64,
}

/// Error from trajectory `index`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("trajectory {index}, step {step}: {source}")]
pub struct EnsembleError {
    pub index: u64,
    pub step: usize,
    #[source]
    pub source: BilliardError,
}

fn run_chunk<W: Walk, O: Observer>(
    walk: &W,
    spec: &EnsembleSpec,
    chunk: u64,
    make: &(impl Fn() -> O + Sync),
) -> Result<O, EnsembleError> {
    let mut obs = make();
    let lo = chunk * CHUNK;
    let hi = (lo + CHUNK).min(spec.trajectories);
    for index in lo..hi {
        let mut rng = trajectory_rng(spec.seed, index);
        let fail = |step, source| EnsembleError { index, step, source };
        let mut state = walk.init(&mut rng).map_err(|e| fail(0, e))?;
        obs.begin();
        let mut s = [0i64; 2];
        for n in 1..=spec.steps {
            let inc = walk.step(&mut state, &mut rng).map_err(|e| fail(n, e))?;
            s = [s[0] + inc[0], s[1] + inc[1]];
            obs.observe(n, s, inc);
        }
        obs.end();
    }
    Ok(obs)
}

/// Runs the ensemble on the current rayon pool. `make` builds an empty
/// observer.
pub fn run_ensemble<W: Walk, O: Observer>(
    walk: &W,
    spec: &EnsembleSpec,
    make: impl Fn() -> O + Sync,
) -> Result<O, EnsembleError> {
    let chunks = spec.trajectories.div_ceil(CHUNK);
    let wave = 4 * rayon::current_num_threads().max(1) as u64;
    let mut total = make();
    let mut start = 0;
    while start < chunks {
        let end = (start + wave).min(chunks);
        let part: Vec<Result<O, EnsembleError>> = (start..end)
            .into_par_iter()
            .map(|c| run_chunk(walk, spec, c, &make))
            .collect();
        for obs in part {
            total.merge(obs?);
        }
        start = end;
    }
    Ok(total)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// One long trajectory of `len` increments after `burn_in` discarded ones.
pub fn increment_stream<W: Walk>(
    walk: &W,
    seed: u64,
    stream: u64,
    burn_in: usize,
    len: usize,
) -> Result<Vec<[i64; 2]>, BilliardError> {
    let mut rng = trajectory_rng(seed, stream);
    let mut state = walk.init(&mut rng)?;
    for _ in 0..burn_in {
        walk.step(&mut state, &mut rng)?;
    }
    (0..len).map(|_| walk.step(&mut state, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Default)]
    struct Sums {
        trajectories: u64,
        end: Vec<[i64; 2]>,
        last: [i64; 2],
    }

    impl Observer for Sums {
        fn observe(&mut self, _n: usize, s: [i64; 2], _inc: [i64; 2]) {
            self.last = s;
        }
        fn end(&mut self) {
            self.trajectories += 1;
            self.end.push(self.last);
        }
        fn merge(&mut self, other: Self) {
            self.trajectories += other.trajectories;
            self.end.extend(other.end);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let spec = EnsembleSpec {
            trajectories: 3 * CHUNK + 17,
            steps: 30,
            seed: 11,
        };
        let walk = BilliardWalk::new(Billiard::reference(), 0);
        let one = with_threads(1, || run_ensemble(&walk, &spec, Sums::default)).unwrap();
        let three = with_threads(3, || run_ensemble(&walk, &spec, Sums::default)).unwrap();
        assert_eq!(one.trajectories, spec.trajectories);
        assert_eq!(one.end, three.end);
    }

    #[test]
    fn trajectory_replays_alone() {
        let spec = EnsembleSpec {
            trajectories: CHUNK + 5,
            steps: 40,
            seed: 3,
        };
        let walk = Ssrw::new(2);
        let all = run_ensemble(&walk, &spec, Sums::default).unwrap();
        let i = CHUNK + 2;
        let stream = increment_stream(&walk, spec.seed, i, 0, spec.steps).unwrap();
        let s = stream.iter().fold([0, 0], |a, d| [a[0] + d[0], a[1] + d[1]]);
        assert_eq!(all.end[i as usize], s);
    }

    #[test]
    fn ssrw_steps_are_unit_and_balanced() {
        let walk = Ssrw::new(2);
        let stream = increment_stream(&walk, 1, 0, 0, 40_000).unwrap();
        let mut counts = [0usize; 4];
        for d in &stream {
            let k = match d {
                [1, 0] => 0,
                [-1, 0] => 1,
                [0, 1] => 2,
                [0, -1] => 3,
                _ => panic!("bad step {d:?}"),
            };
            counts[k] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 400.0, "{counts:?}");
        }
        let walk = Ssrw::new(1);
        let stream = increment_stream(&walk, 1, 0, 0, 1000).unwrap();
        assert!(stream.iter().all(|d| d[1] == 0 && d[0].abs() == 1));
    }

    #[test]
    fn dyadic_walk_uses_system_values() {
        let sys = DyadicSystem::new(2, vec![2, 0, 0, -2]).unwrap();
        let walk = DyadicWalk { system: sys };
        let stream = increment_stream(&walk, 5, 0, 0, 1000).unwrap();
        assert!(stream.iter().all(|d| [2, 0, -2].contains(&d[0]) && d[1] == 0));
        // 2 needs digits 00 and -2 needs 11, so -2 never directly follows 2
        assert!(stream.windows(2).all(|w| !(w[0][0] == 2 && w[1][0] == -2)));
    }

    #[test]
    fn billiard_walk_burn_in_changes_start() {
        let b = Billiard::reference();
        let a = increment_stream(&BilliardWalk::new(b.clone(), 0), 9, 0, 0, 5).unwrap();
        let c = increment_stream(&BilliardWalk::new(b.clone(), 0), 9, 0, 0, 5).unwrap();
        assert_eq!(a, c);
        let d = increment_stream(&BilliardWalk::new(b, 10), 9, 0, 0, 5).unwrap();
        assert_ne!(a, d);
    }
}
