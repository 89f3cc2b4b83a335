use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Root of a reproducible family of random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        RngSeed { seed, stream_id }
    }

    /// Generator for one shard of trials.
    ///
    /// The ChaCha key is derived from `(seed, stream_id, purpose)` and the
    /// shard index selects the ChaCha stream, so every shard reads its own
    /// counter range and shards can run in any order.
    pub(crate) fn shard_rng(self, purpose: u64, shard: u64) -> ChaCha8Rng {
        let mut state = self.seed;
        let mut key = [0u8; 32];
        let mut mix = splitmix64(&mut state) ^ self.stream_id;
        mix = splitmix64(&mut mix) ^ purpose;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut mix).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(shard);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
