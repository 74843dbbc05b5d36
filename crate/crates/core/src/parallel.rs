//! Order-preserving fan-out of independent runs.
//!
//! Results are always gathered by index, so output never depends on the
//! number of workers. Without the `parallel` feature every mode runs
//! sequentially.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Worker count; 0 means one per available core.
    Threads(usize),
    #[default]
    Auto,
}

impl Parallelism {
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            0 => Parallelism::Auto,
            1 => Parallelism::Sequential,
            n => Parallelism::Threads(n),
        }
    }
}

/// Per-run seed from a master seed and a run index.
///
/// Counter-based: the index selects a ChaCha stream, so each seed is
/// independent of any other run and of scheduling order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Apply `f` to every item, returning results in input order.
pub fn map_ordered<T, R, F>(items: &[T], parallelism: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let threads = match parallelism {
            Parallelism::Sequential => 1,
            Parallelism::Threads(n) => n,
            Parallelism::Auto => 0,
        };
        if threads != 1 && items.len() > 1 {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build();
            if let Ok(pool) = pool {
                return pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect());
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallelism;
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}
