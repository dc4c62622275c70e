//! Reproducible random streams and the replicate runner.
//!
//! Replicate `i` draws from ChaCha8 keyed by the master seed, on stream `i`.
//! A replicate's output therefore depends only on `(master_seed, i)`, never on
//! which thread ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Below this many replicates stochastic outputs are flagged as unreliable.
pub const LOW_REPLICATES: usize = 1000;

/// The random stream of replicate `index`.
pub fn replicate_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Runs independent replicates, optionally on a dedicated thread pool.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Runner {
    /// `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl Runner {
    pub fn with_threads(threads: usize) -> Self {
        Runner {
            threads: Some(threads),
        }
    }

    pub fn sequential() -> Self {
        Self::with_threads(1)
    }

    /// `f(i, rng_i, scratch)` for `i in 0..count`, results in index order.
    /// `init` builds per-worker scratch space.
    pub fn map_replicates<T, S, I, F>(
        &self,
        master_seed: u64,
        count: usize,
        init: I,
        f: F,
    ) -> Result<Vec<T>>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(u64, &mut ChaCha8Rng, &mut S) -> T + Sync + Send,
    {
        let job = || {
            (0..count as u64)
                .into_par_iter()
                .map_init(&init, |scratch, i| {
                    let mut rng = replicate_rng(master_seed, i);
                    f(i, &mut rng, scratch)
                })
                .collect::<Vec<T>>()
        };
        match self.threads {
            None => Ok(job()),
            Some(0) => Err(Error::Config("thread count must be >= 1".into())),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }

    /// Replicate values sorted ascending.
    pub fn sorted_replicates<S, I, F>(
        &self,
        master_seed: u64,
        count: usize,
        init: I,
        f: F,
    ) -> Result<Vec<f64>>
    where
        I: Fn() -> S + Sync + Send,
        F: Fn(u64, &mut ChaCha8Rng, &mut S) -> f64 + Sync + Send,
    {
        let mut v = self.map_replicates(master_seed, count, init, f)?;
        v.par_sort_unstable_by(f64::total_cmp);
        Ok(v)
    }

    /// Runs `job` inside this runner's pool, so nested rayon work respects
    /// the thread count.
    pub fn install<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R> {
        match self.threads {
            None => Ok(job()),
            Some(0) => Err(Error::Config("thread count must be >= 1".into())),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = replicate_rng(7, 0).random();
        let b: u64 = replicate_rng(7, 1).random();
        let c: u64 = replicate_rng(7, 0).random();
        let d: u64 = replicate_rng(8, 0).random();
        assert_eq!(a, c);
        assert_ne!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let f = |_i: u64, rng: &mut ChaCha8Rng, _: &mut ()| rng.random::<f64>();
        let one = Runner::sequential()
            .map_replicates(3, 500, || (), f)
            .unwrap();
        let four = Runner::with_threads(4)
            .map_replicates(3, 500, || (), f)
            .unwrap();
        let global = Runner::default().map_replicates(3, 500, || (), f).unwrap();
        assert_eq!(one, four);
        assert_eq!(one, global);
        assert!(Runner::with_threads(0)
            .map_replicates(3, 5, || (), f)
            .is_err());
    }
}
