//! Seeded substreams for reproducible experiments.
//!
//! Every random draw in a run comes from a ChaCha8 stream addressed by
//! `(seed, owner, purpose)`. ChaCha is a counter-mode generator, so streams
//! with different addresses never overlap, and adding a new consumer of
//! randomness never perturbs the draws seen by existing ones.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is consumed for. Each purpose gets an independent stream
/// per owner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// World-level: initial robot poses and replacement-counter offsets.
    Placement,
    /// World-level: food item placement and respawn.
    Food,
    /// World-level: sampling genome pairs for the polymorphism threshold.
    DiversityEstimate,
    /// Per-robot: mutation, crossover, and initial genome weights.
    Variation,
    /// Per-robot: parent selection draws (random, tournament, crossover coin).
    Selection,
}

impl Purpose {
    fn id(self) -> u64 {
        match self {
            Purpose::Placement => 0,
            Purpose::Food => 1,
            Purpose::DiversityEstimate => 2,
            Purpose::Variation => 3,
            Purpose::Selection => 4,
        }
    }
}

/// Factory for the substreams of one run (one replicate).
#[derive(Debug, Clone, Copy)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream owned by the world itself.
    pub fn world(&self, purpose: Purpose) -> ChaCha8Rng {
        self.stream(0, purpose)
    }

    /// Stream owned by one robot.
    pub fn robot(&self, robot: u32, purpose: Purpose) -> ChaCha8Rng {
        self.stream(u64::from(robot) + 1, purpose)
    }

    fn stream(&self, owner: u64, purpose: Purpose) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream((owner << 8) | purpose.id());
        rng
    }
}

/// SplitMix64 step, used only to expand the 64-bit seed into a ChaCha key.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
