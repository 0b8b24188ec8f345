//! Seeded random streams.
//!
//! Every random quantity is drawn from ChaCha8 keyed by a 64-bit seed, with
//! independent sub-streams selected by the ChaCha stream id. Walk `i` of a
//! batch uses stream `i`; the two halves of a two-sided walk use streams
//! `2 i` and `2 i + 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
