//! Shared Monte-Carlo plumbing: deterministic per-stratum RNG streams and
//! running statistics.
//!
//! Every estimator draws its randomness from ChaCha8 streams keyed by
//! `(seed, stratum)`, and strata are reduced in index order, so results are
//! bit-identical for a fixed seed regardless of how many worker threads run
//! the strata.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct RunningStat {
    pub n: u64,
    pub sum: f64,
    pub sumsq: f64,
}

impl RunningStat {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sumsq += v * v;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }
}

/// Stratified mean over `strata` equal-probability strata with `total`
/// samples split as evenly as possible. `eval(rng, stratum, strata)` draws
/// one sample conditioned on its stratum. Returns `(mean, stderr)`.
pub(crate) fn stratified_mean<F>(seed: u64, total: u64, strata: u32, eval: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng, u32, u32) -> f64 + Sync,
{
    assert!(strata >= 1 && total >= strata as u64);
    let k = strata as u64;
    let stats: Vec<RunningStat> = (0..strata)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s as u64 + 1);
            let n_s = total / k + if (s as u64) < total % k { 1 } else { 0 };
            let mut st = RunningStat::default();
            for _ in 0..n_s {
                st.push(eval(&mut rng, s, strata));
            }
            st
        })
        .collect();
    // ordered reduction: strata have equal probability 1/k
    let kf = k as f64;
    let mut mean = 0.0;
    let mut var = 0.0;
    for st in &stats {
        mean += st.mean() / kf;
        var += st.variance() / (st.n.max(1) as f64) / (kf * kf);
    }
    (mean, var.sqrt())
}
