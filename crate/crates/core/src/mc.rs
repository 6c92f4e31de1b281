//! Seeded, partition-deterministic Gaussian sampling.
//!
//! The sample budget is cut into fixed batches of [`BATCH_SIZE`] draws. Batch
//! `b` uses `ChaCha8Rng::seed_from_u64(seed)` switched to stream `b`, and
//! standard normals come from `rand_distr::StandardNormal` (ziggurat) in
//! `f64`. Per-batch partial results are merged in batch order, so estimates
//! depend only on `(seed, samples)` and never on the worker count.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const BATCH_SIZE: u64 = 16_384;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CONVEXITY_ATLAS_THREADS";

/// Sample count and seed of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub samples: u64,
    pub seed: u64,
}

impl Budget {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_samples(self, samples: u64) -> Self {
        Self { samples, ..self }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Validation("sample count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Description of the sampler, recorded in output metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerInfo {
    pub generator: String,
    pub transform: String,
    pub batch_size: u64,
    pub partition: String,
}

pub fn sampler_info() -> SamplerInfo {
    SamplerInfo {
        generator: "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = batch index".into(),
        transform: "rand_distr 0.5 StandardNormal (ziggurat), f64, one draw per coordinate".into(),
        batch_size: BATCH_SIZE,
        partition: "fixed batches of batch_size samples, last batch partial, merged in batch order"
            .into(),
    }
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build worker pool")
    })
}

/// Runs `step` on `budget.samples` standard normal vectors of length `dim`.
///
/// Returns one accumulator per batch, in batch order.
pub(crate) fn run_batches<T, A, I, S>(dim: usize, budget: Budget, init: I, step: S) -> Vec<A>
where
    T: Scalar,
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &[T]) + Sync,
{
    run_batches_on(pool(), dim, budget, init, step)
}

fn run_batches_on<T, A, I, S>(
    pool: &rayon::ThreadPool,
    dim: usize,
    budget: Budget,
    init: I,
    step: S,
) -> Vec<A>
where
    T: Scalar,
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &[T]) + Sync,
{
    let batches = budget.samples.div_ceil(BATCH_SIZE);
    pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
                rng.set_stream(b);
                let len = BATCH_SIZE.min(budget.samples - b * BATCH_SIZE);
                let mut acc = init();
                let mut z = vec![T::zero(); dim];
                for _ in 0..len {
                    for v in z.iter_mut() {
                        *v = T::lit(rng.sample::<f64, _>(StandardNormal));
                    }
                    step(&mut acc, &z);
                }
                acc
            })
            .collect()
    })
}

/// Sum and sum of squares of a per-sample statistic.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments<T> {
    pub sum: T,
    pub sum_sq: T,
}

impl<T: Scalar> Moments<T> {
    #[inline]
    pub fn push(&mut self, x: T) {
        self.sum = self.sum + x;
        self.sum_sq = self.sum_sq + x * x;
    }

    pub fn merge(batches: impl IntoIterator<Item = Self>) -> Self {
        batches.into_iter().fold(Self::default(), |a, b| Self {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
        })
    }

    /// Sample mean and standard error `√((E[x²] − mean²)/N)`.
    pub fn mean_and_error(&self, n: u64) -> (T, T) {
        let nn = T::from_count(n);
        let mean = self.sum / nn;
        let var = (self.sum_sq / nn - mean * mean).max(T::zero());
        (mean, (var / nn).sqrt())
    }
}

/// Mean and standard error of `f(z)` over the sample stream.
pub(crate) fn mean_of<T, F>(dim: usize, budget: Budget, f: F) -> (T, T)
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    let parts = run_batches(dim, budget, Moments::<T>::default, |m, z| m.push(f(z)));
    Moments::merge(parts).mean_and_error(budget.samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let budget = Budget::new(100_003, 11);
        let step = |m: &mut Moments<f64>, z: &[f64]| m.push(z[0] * z[0] + z[1]);
        let reference = Moments::merge(run_batches(2, budget, Moments::default, step));
        for threads in [1, 3] {
            let local = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got = Moments::merge(run_batches_on(&local, 2, budget, Moments::default, step));
            assert_eq!(got.sum, reference.sum);
            assert_eq!(got.sum_sq, reference.sum_sq);
        }
    }

    #[test]
    fn standard_normal_moments() {
        let (mean, se) = mean_of(1, Budget::new(400_000, 1), |z: &[f64]| z[0]);
        assert!(mean.abs() < 4.0 * se);
        let (second, _) = mean_of(1, Budget::new(400_000, 1), |z: &[f64]| z[0] * z[0]);
        assert!((second - 1.0).abs() < 0.01);
    }

    #[test]
    fn partial_last_batch_and_sample_count() {
        let budget = Budget::new(BATCH_SIZE + 5, 0);
        let counts = run_batches(3, budget, || 0u64, |c, _z: &[f64]| *c += 1);
        assert_eq!(counts, vec![BATCH_SIZE, 5]);
    }

    #[test]
    fn different_seeds_give_different_streams() {
        let a = mean_of(1, Budget::new(1000, 1), |z: &[f64]| z[0]);
        let b = mean_of(1, Budget::new(1000, 2), |z: &[f64]| z[0]);
        assert_ne!(a, b);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(Budget::new(0, 1).check().is_err());
    }
}
