//! Reproducible uniform sampling of `[-1, 1]^d` and hit counting.
//!
//! Every [`SeedSpec`] names one ChaCha8 stream: the root seed keys the cipher
//! and the stream index selects the nonce. Sample `i` of a stream always
//! occupies the same `d` 64-bit words, so any range of samples can be
//! regenerated by seeking, without replaying what came before. Parallel
//! counting splits the trials into fixed-width segments of the stream; the
//! merged count therefore depends only on `(seed, d, trials)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfn::Dimension;

/// Samples per parallel segment. Fixed so that results never depend on the
/// worker count.
pub const SUBSTREAM_WIDTH: u64 = 1 << 24;

/// Default chunk length for [`count_hits`].
pub const DEFAULT_CHUNK: u64 = 1 << 16;

// ChaCha8 exposes a 64-bit block counter of 16 words each.
const STREAM_WORDS: u128 = 1 << 68;

/// Root seed plus stream index of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub root_seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub fn new(root_seed: u64, stream: u64) -> Self {
        SeedSpec { root_seed, stream }
    }

    pub fn sampler(self, d: Dimension) -> PointSampler {
        PointSampler::new(self, d)
    }
}

/// Tally of one sampling pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitCount {
    pub dimension: Dimension,
    pub trials: u64,
    pub hits: u64,
}

impl HitCount {
    pub fn new(dimension: Dimension, trials: u64, hits: u64) -> Result<Self> {
        if trials == 0 || hits > trials {
            return Err(Error::InvalidHitCount { hits, trials });
        }
        Ok(HitCount {
            dimension,
            trials,
            hits,
        })
    }

    /// Field-wise sum of two tallies of the same dimension.
    pub fn merge(self, other: HitCount) -> Result<HitCount> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch(
                self.dimension.get(),
                other.dimension.get(),
            ));
        }
        Ok(HitCount {
            dimension: self.dimension,
            trials: self.trials + other.trials,
            hits: self.hits + other.hits,
        })
    }

    pub fn fraction(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }
}

/// Generator of uniform points in `[-1, 1]^d`, bound to one [`SeedSpec`].
#[derive(Debug, Clone)]
pub struct PointSampler {
    rng: ChaCha8Rng,
    dimension: Dimension,
}

impl PointSampler {
    pub fn new(seed: SeedSpec, dimension: Dimension) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.root_seed);
        rng.set_stream(seed.stream);
        PointSampler { rng, dimension }
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// Positions the generator at the start of sample `index`.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(words_before(self.dimension, index));
    }

    /// One coordinate: 53 random bits mapped to `[0, 1)` then to `[-1, 1)`.
    #[inline]
    pub fn coordinate(&mut self) -> f64 {
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * unit - 1.0
    }

    /// Fills `point` with the next sample. `point.len()` must equal the
    /// sampler's dimension.
    pub fn sample_point(&mut self, point: &mut [f64]) {
        assert_eq!(point.len(), self.dimension.get() as usize);
        for x in point.iter_mut() {
            *x = self.coordinate();
        }
    }

    /// Squared norm of the next sample, without materializing it.
    #[inline]
    pub fn next_squared_norm(&mut self) -> f64 {
        let mut acc = 0.0;
        for _ in 0..self.dimension.get() {
            let x = self.coordinate();
            acc += x * x;
        }
        acc
    }

    fn count_next(&mut self, n: u64) -> u64 {
        let mut hits = 0;
        for _ in 0..n {
            if self.next_squared_norm() <= 1.0 {
                hits += 1;
            }
        }
        hits
    }
}

fn words_before(d: Dimension, index: u64) -> u128 {
    // Two 32-bit words per coordinate.
    2 * u128::from(d.get()) * u128::from(index)
}

fn check_capacity(d: Dimension, trials: u64) -> Result<()> {
    if words_before(d, trials) > STREAM_WORDS {
        return Err(Error::StreamExhausted {
            dimension: d.get(),
            trials,
        });
    }
    Ok(())
}

/// Sum of squared coordinates.
pub fn squared_norm(point: &[f64]) -> f64 {
    point.iter().map(|x| x * x).sum()
}

/// Counts hits (`squared_norm <= 1`) among samples `start..start + len` of a
/// stream.
pub fn count_range(seed: SeedSpec, d: Dimension, start: u64, len: u64) -> u64 {
    let mut sampler = PointSampler::new(seed, d);
    sampler.seek(start);
    sampler.count_next(len)
}

/// Single-threaded hit count over the first `trials` samples of `seed`'s
/// stream, processed `chunk_size` samples at a time.
pub fn count_hits(seed: SeedSpec, d: Dimension, trials: u64, chunk_size: u64) -> Result<HitCount> {
    if trials == 0 {
        return Err(Error::ZeroCount("trials"));
    }
    if chunk_size == 0 {
        return Err(Error::ZeroCount("chunk_size"));
    }
    check_capacity(d, trials)?;
    let mut hits = 0;
    let mut start = 0;
    while start < trials {
        let len = chunk_size.min(trials - start);
        hits += count_range(seed, d, start, len);
        start += len;
    }
    HitCount::new(d, trials, hits)
}

/// Hit count over the first `trials` samples, fanned out over `workers`
/// threads. Bit-identical to [`count_hits`] for every worker count.
pub fn parallel_count(seed: SeedSpec, d: Dimension, trials: u64, workers: usize) -> Result<HitCount> {
    if workers == 0 {
        return Err(Error::ZeroCount("workers"));
    }
    if workers == 1 {
        return count_hits(seed, d, trials, SUBSTREAM_WIDTH);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to start sampling workers");
    pool.install(|| count_segmented(seed, d, trials))
}

/// Segmented count on the current rayon pool.
pub(crate) fn count_segmented(seed: SeedSpec, d: Dimension, trials: u64) -> Result<HitCount> {
    if trials == 0 {
        return Err(Error::ZeroCount("trials"));
    }
    check_capacity(d, trials)?;
    let segments = trials.div_ceil(SUBSTREAM_WIDTH);
    let hits = (0..segments)
        .into_par_iter()
        .map(|k| {
            let start = k * SUBSTREAM_WIDTH;
            count_range(seed, d, start, SUBSTREAM_WIDTH.min(trials - start))
        })
        .sum();
    HitCount::new(d, trials, hits)
}
