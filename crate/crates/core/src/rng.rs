//! Seeded random sub-streams.
//!
//! A run has one master seed. Every consumer of randomness draws from its own
//! ChaCha stream keyed by `(seed, stream id)`, so the order in which
//! populations or workers are scheduled never changes the numbers any of them
//! sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Named sub-streams of a run's master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Initial weights of population `k` (0..4).
    Init(u8),
    /// Mutation, crossover and parent selection of population `k`.
    Evolve(u8),
    /// t-SNE initialization.
    Embedding,
    /// Anything test- or benchmark-specific.
    Aux(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Init(k) => 0x100 + k as u64,
            Stream::Evolve(k) => 0x200 + k as u64,
            Stream::Embedding => 0x300,
            Stream::Aux(k) => 0x1_0000_0000 + k as u64,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
