//! Seeded, splittable random streams.
//!
//! Every stochastic operation takes an explicit `u64` seed. Parallel loops
//! carve work into fixed-size blocks and give block `i` the ChaCha stream `i`
//! of the master seed, so results never depend on the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Work-block size used by all parallel sampling loops.
pub const BLOCK: usize = 1024;

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer; used to derive child seeds.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in the open interval (0, 1) from a 64-bit word.
pub fn open_unit(word: u64) -> f64 {
    ((word >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Runs `f(block_index, rng, range)` over `total` items split into
/// [`BLOCK`]-sized blocks and collects the per-block results in order.
pub(crate) fn blocks<T, F>(total: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, std::ops::Range<usize>) -> T + Sync + Send,
{
    let nblocks = total.div_ceil(BLOCK);
    let run = |b: usize| {
        let mut rng = substream(seed, b as u64);
        let lo = b * BLOCK;
        f(&mut rng, lo..(lo + BLOCK).min(total))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..nblocks).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..nblocks).map(run).collect()
    }
}

/// `(0..n).map(f)`, in parallel when the feature is on; order is kept.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn substreams_differ_and_repeat() {
        let a: Vec<u64> = (0..4).map(|_| substream(7, 0).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(substream(7, 0).next_u64(), substream(7, 1).next_u64());
    }

    #[test]
    fn open_unit_stays_inside() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }
}
