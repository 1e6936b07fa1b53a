//! Per-realization random streams.
//!
//! Every realization owns independent streams derived from
//! `(seed, realization_index, purpose)`, so results do not depend on the
//! order or thread in which realizations are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Channel = 0,
    Search = 1,
    Baseline = 2,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_seed(seed: u64, realization: u64, stream: Stream) -> u64 {
    let h = splitmix64(seed);
    let h = splitmix64(h ^ realization);
    splitmix64(h ^ stream as u64)
}

pub fn stream_rng(seed: u64, realization: u64, stream: Stream) -> SimRng {
    SimRng::seed_from_u64(stream_seed(seed, realization, stream))
}
