//! Deterministic seed derivation.
//!
//! Every stochastic block draws from its own ChaCha stream whose seed is a
//! SplitMix64 hash of the master seed and a path of indices. Results are
//! therefore independent of how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Random generator used throughout the simulator.
pub type SimRng = ChaCha12Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a master seed together with an index path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &i| splitmix64(acc ^ splitmix64(i)))
}

/// Independent random streams within one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Bits = 1,
    TxLaser = 2,
    LoLaser = 3,
    Amplifier = 4,
    Fading = 5,
    Detector = 6,
}

/// Seed identifying one Monte-Carlo trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrialSeed(pub u64);

impl TrialSeed {
    /// Seed for cell `(scenario, distance)` and trial index under `master`.
    pub fn for_cell(master: u64, scenario: usize, distance: usize, trial: usize) -> Self {
        TrialSeed(derive_seed(master, &[scenario as u64, distance as u64, trial as u64]))
    }

    pub fn rng(self, stream: Stream) -> SimRng {
        SimRng::seed_from_u64(derive_seed(self.0, &[stream as u64]))
    }
}

/// RNG for worker `index` under `master`.
pub fn worker_rng(master: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, &[index]))
}
