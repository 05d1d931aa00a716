//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit `&mut R: Rng`. Campaigns
//! derive one ChaCha stream per replication from `(seed, stream_id)`: the
//! seed fixes the key and the stream id selects an independent keystream,
//! so replication `i` produces the same numbers regardless of how the work
//! is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Counter-based generator used throughout the workspace.
pub type StreamRng = ChaCha12Rng;

/// The generator for replication `stream_id` of an experiment seeded with `seed`.
pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Uniform on the open interval (0, 1).
pub(crate) fn open01<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
