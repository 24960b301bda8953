use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved per block substream; no simulation block draws anywhere near this many.
const BLOCK_WORDS: u128 = 1 << 40;

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Distinct stream ids select independent ChaCha streams under the same key. Blocks of a
/// stream (see [`RngStream::block`]) are disjoint windows of one ChaCha stream, so any
/// partition of blocks across workers draws exactly the same numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream_id);
        r
    }

    /// Generator positioned at the start of block `index`.
    pub fn block(&self, index: u64) -> ChaCha8Rng {
        let mut r = self.rng();
        r.set_word_pos(index as u128 * BLOCK_WORDS);
        r
    }

    /// A different stream id under the same seed.
    pub fn with_stream(&self, stream_id: u64) -> Self {
        RngStream::new(self.seed, stream_id)
    }
}
