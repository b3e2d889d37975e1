//! Per-replication random streams.
//!
//! ChaCha is a counter-based generator: the key comes from the master seed
//! and the 64-bit stream id is the replication index, so replication `i`
//! sees the same numbers no matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn replication_stream(master_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
