//! Chunked, seeded Monte Carlo driver.
//!
//! A budget of `samples` draws is split into [`CHUNKS`] contiguous chunks.
//! Chunk `c` draws from a ChaCha8 generator seeded with `seed` on stream `c`,
//! so the per-chunk results, and anything merged from them in chunk order,
//! depend only on `(seed, samples)` and never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const CHUNKS: u64 = 16;

pub type Rng = ChaCha8Rng;

/// Generator for a single-stream (non-chunked) computation.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent seed for sub-computation `tag` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `work(rng, n)` on every chunk and returns the chunk results in chunk order.
pub fn run_chunks<T, F>(samples: u64, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, u64) -> T + Sync,
{
    let base = samples / CHUNKS;
    let extra = samples % CHUNKS;
    (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let n = base + u64::from(c < extra);
            let mut rng = stream_rng(seed, c);
            work(&mut rng, n)
        })
        .collect()
}
