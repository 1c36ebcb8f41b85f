//! Deterministic random streams.
//!
//! Splitting rule: every replication `i` of a run with base seed `s` owns
//! two ChaCha12 streams seeded from `s`, with stream id `2 i` for
//! interarrival uniforms and `2 i + 1` for service uniforms. Replications
//! are therefore independent of execution order and worker count, and a
//! coupled pair of queues can share the service stream exactly.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// 53-bit uniform in `[0, 1)` from a raw 64-bit word.
#[inline]
fn u53(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One replication's pair of uniform streams.
pub struct StreamPair {
    arrivals: ChaCha12Rng,
    services: ChaCha12Rng,
}

impl StreamPair {
    /// Streams for replication `replication` of the run seeded `seed`.
    pub fn for_replication(seed: u64, replication: u64) -> Self {
        let mut arrivals = ChaCha12Rng::seed_from_u64(seed);
        arrivals.set_stream(2 * replication);
        let mut services = ChaCha12Rng::seed_from_u64(seed);
        services.set_stream(2 * replication + 1);
        StreamPair { arrivals, services }
    }

    /// Next interarrival uniform in `[0, 1)`.
    pub fn arrival_uniform(&mut self) -> f64 {
        u53(self.arrivals.next_u64())
    }

    /// Next service uniform in `[0, 1)`.
    pub fn service_uniform(&mut self) -> f64 {
        u53(self.services.next_u64())
    }

    /// Exponential interarrival draw with rate `lambda`.
    pub fn interarrival(&mut self, lambda: f64) -> f64 {
        -(-self.arrival_uniform()).ln_1p() / lambda
    }
}
