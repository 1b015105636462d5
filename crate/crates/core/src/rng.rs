//! Seeded, splittable random streams.
//!
//! Every trajectory draws from its own ChaCha stream: the master seed selects
//! the key and the stream id selects the ChaCha stream number, so streams never
//! overlap and results do not depend on how trajectories are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::sync::Mutex;

pub type Stream = ChaCha8Rng;

/// Derives independent streams from one master seed.
#[derive(Debug)]
pub struct StreamFactory {
    seed: u64,
    issued: Mutex<HashSet<u64>>,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            issued: Mutex::new(HashSet::new()),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Returns the stream with the given id.
    ///
    /// Panics if the same id is requested twice from this factory.
    pub fn stream(&self, id: u64) -> Stream {
        let fresh = self
            .issued
            .lock()
            .expect("stream registry poisoned")
            .insert(id);
        assert!(fresh, "random stream {id} requested twice");
        stream(self.seed, id)
    }

    /// Number of distinct streams handed out so far.
    pub fn issued(&self) -> usize {
        self.issued.lock().expect("stream registry poisoned").len()
    }
}

/// Stateless stream derivation, for callers that do their own bookkeeping.
pub fn stream(seed: u64, id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
