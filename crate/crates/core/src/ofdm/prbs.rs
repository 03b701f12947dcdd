//! PRBS-31 bit source (x^31 + x^28 + 1).

use serde::{Deserialize, Serialize};

use crate::rng::derive_seed;

/// Nominal aggregate line rate.
pub const DEFAULT_RATE_BPS: f64 = 200e9;

/// Ordered bits (each 0 or 1) with a nominal rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitStream {
    pub bits: Vec<u8>,
    pub rate_bps: f64,
}

impl BitStream {
    pub fn new(bits: Vec<u8>, rate_bps: f64) -> Self {
        BitStream { bits, rate_bps }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Zero-pads to a multiple of `block` bits.
    pub fn padded_to(&self, block: usize) -> BitStream {
        let mut bits = self.bits.clone();
        let rem = bits.len() % block;
        if rem != 0 {
            bits.resize(bits.len() + block - rem, 0);
        }
        BitStream {
            bits,
            rate_bps: self.rate_bps,
        }
    }
}

/// Linear-feedback shift register for PRBS-31.
#[derive(Clone, Debug)]
pub struct Prbs31 {
    state: u32,
}

impl Prbs31 {
    const MASK: u32 = (1 << 31) - 1;

    /// Starts the sequence at a phase derived from `seed`.
    pub fn new(seed: u64) -> Self {
        let mut state = (derive_seed(seed, &[0x0000_5052_4253_3331]) as u32) & Self::MASK;
        if state == 0 {
            state = 1;
        }
        Prbs31 { state }
    }

    pub fn next_bit(&mut self) -> u8 {
        let fb = ((self.state >> 30) ^ (self.state >> 27)) & 1;
        self.state = ((self.state << 1) | fb) & Self::MASK;
        fb as u8
    }
}

/// `n_bits` of PRBS-31 at the default rate.
pub fn prbs_generate(n_bits: usize, seed: u64) -> BitStream {
    let mut g = Prbs31::new(seed);
    BitStream::new((0..n_bits).map(|_| g.next_bit()).collect(), DEFAULT_RATE_BPS)
}
