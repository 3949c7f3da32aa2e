//! Seeded random streams.
//!
//! Every consumer draws from a ChaCha8 generator keyed by the user seed and a
//! stream id. Distinct stream ids never overlap, so jobs can run in any order or
//! in parallel and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator identity recorded in calibration files.
pub const GENERATOR_NAME: &str = "chacha8";

pub type StreamRng = ChaCha8Rng;

pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for a (family, major, minor) triple, e.g. (calibration, d, repetition).
pub fn stream_id(family: u8, major: u64, minor: u64) -> u64 {
    (u64::from(family) << 56) | ((major & 0xff_ffff) << 32) | (minor & 0xffff_ffff)
}

pub mod family {
    pub const CALIBRATION: u8 = 1;
    pub const DATASET: u8 = 2;
    pub const BENCH: u8 = 3;
}
