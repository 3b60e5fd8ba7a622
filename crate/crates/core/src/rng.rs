//! Counter-based random streams.
//!
//! Every replicate draws from its own ChaCha stream keyed by
//! `(master_seed, stream)`, so results do not depend on how replicates are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SimRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub stream: u64,
}

impl Provenance {
    pub fn new(master_seed: u64, stream: u64) -> Self {
        Self {
            master_seed,
            stream,
        }
    }

    pub fn rng(&self) -> SimRng {
        stream_rng(self.master_seed, self.stream)
    }
}

pub fn stream_rng(master_seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for replicate `replicate` of experiment cell `group`.
pub fn replicate_stream(group: u32, replicate: u32) -> u64 {
    (u64::from(group) << 32) | u64::from(replicate)
}
