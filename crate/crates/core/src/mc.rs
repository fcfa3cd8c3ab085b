//! Seed-deterministic Monte Carlo driver.
//!
//! Samples are split into fixed-size chunks; chunk `i` draws from the ChaCha
//! stream `i` of the run seed. Chunk sums are combined in index order, so the
//! result does not depend on how many workers ran the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for McSpec {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 0x5eed, workers: 0 }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMean {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McMean {
    /// Half-width of the 95% normal confidence interval.
    pub fn ci95(&self) -> f64 {
        1.96 * self.std_err
    }
}

pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `f` in `pool` when a worker count is fixed.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    pool.install(f)
}

/// Mean of `sample(rng)` over `spec.samples` draws.
pub fn mean<F>(spec: &McSpec, sample: F) -> McMean
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let n = spec.samples.max(1);
    let chunks = n.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = with_workers(spec.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(spec.seed, c);
                let len = CHUNK.min(n - c * CHUNK);
                let mut s = 0.0;
                let mut s2 = 0.0;
                for _ in 0..len {
                    let v = sample(&mut rng);
                    s += v;
                    s2 += v * v;
                }
                (s, s2)
            })
            .collect()
    });
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = s / n as f64;
    let var = (s2 / n as f64 - m * m).max(0.0) * n as f64 / (n.max(2) - 1) as f64;
    McMean { mean: m, std_err: (var / n as f64).sqrt(), samples: n }
}

/// Uniform direction on the unit sphere in R^n.
pub fn unit_vector<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn independent_of_worker_count() {
        let f = |r: &mut ChaCha8Rng| r.random::<f64>();
        let a = mean(&McSpec { samples: 50_000, seed: 7, workers: 1 }, f);
        let b = mean(&McSpec { samples: 50_000, seed: 7, workers: 4 }, f);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert!((a.mean - 0.5).abs() < 4.0 * a.std_err);
    }
}
