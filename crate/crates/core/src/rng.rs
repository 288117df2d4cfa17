//! Counter-style random substreams.
//!
//! Every random quantity is drawn from a ChaCha8 generator whose seed is a
//! hash of `(root, module tag, indices...)`. Two draws never share a stream
//! unless their full key matches, so trials can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Module tags used as the first key component of a substream.
pub mod tag {
    pub const LINKS: u64 = 0x4c49_4e4b;
    pub const FADING: u64 = 0x4641_4445;
    pub const TRIAL: u64 = 0x5452_4941;
    pub const PERTURB: u64 = 0x5045_5254;
    pub const PERIOD: u64 = 0x5045_5244;
    pub const SCENARIO: u64 = 0x5343_454e;
    pub const SOLVER: u64 = 0x534f_4c56;
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Root of a family of substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self { key: splitmix(seed) }
    }

    /// Child stream for one more key component.
    #[inline]
    pub fn at(self, index: u64) -> Self {
        Self {
            key: splitmix(self.key ^ splitmix(index.wrapping_add(0x632b_e59b_d9b4_e019))),
        }
    }

    /// Child stream for a module tag followed by indices.
    pub fn sub(self, tag: u64, indices: &[u64]) -> Self {
        indices.iter().fold(self.at(tag), |s, &i| s.at(i))
    }

    /// The raw 64-bit key; stable across platforms.
    pub fn key(self) -> u64 {
        self.key
    }

    /// Generator seeded from this key.
    pub fn rng(self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut z = self.key;
        for chunk in seed.chunks_exact_mut(8) {
            z = splitmix(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
