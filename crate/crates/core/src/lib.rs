//! Link-level Monte-Carlo simulator for a circular/linear polarization
//! multiplexed coherent-optical OFDM free-space link.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which the sweep driver uses.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod linkbudget;
pub mod metrics;
pub mod num;
pub mod ofdm;
pub mod phy;
pub mod polarization;
pub mod rng;
pub mod sim;
pub mod special;
pub mod turbulence;

pub use error::{Error, Result};
pub use num::Real;

/// `f64` instantiations of the generic types.
pub type SystemConfigF64 = phy::SystemConfig<f64>;
pub type TransceiverF64 = phy::Transceiver<f64>;
pub type ChannelScenarioF64 = channel::ChannelScenario<f64>;
pub type OfdmModemF64 = ofdm::OfdmModem<f64>;
pub type PolarizedFieldF64 = polarization::PolarizedField<f64>;
pub type CpdmFieldF64 = polarization::CpdmField<f64>;

/// `f32` instantiations, for memory-bound experiments.
pub type SystemConfigF32 = phy::SystemConfig<f32>;
pub type TransceiverF32 = phy::Transceiver<f32>;
pub type OfdmModemF32 = ofdm::OfdmModem<f32>;
