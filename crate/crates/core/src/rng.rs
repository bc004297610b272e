//! Counter-based random streams.
//!
//! Every consumer derives its generator from `(seed, stream)`; ChaCha's stream
//! id keeps the sequences independent without any shared state, so records can
//! be produced in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn substream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
