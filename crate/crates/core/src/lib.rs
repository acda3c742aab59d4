//! Secrecy-preserving rates for a cognitive secondary pair that relays and jams
//! on behalf of a primary wiretap link.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which the optimizer and experiments use.

pub mod awgn;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod info;
pub mod optimize;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point = channel::Point<f64>;
pub type Geometry = channel::Geometry<f64>;
pub type ChannelGains = channel::ChannelGains<f64>;
pub type StandardizedChannel = channel::StandardizedChannel<f64>;
pub type Scenario = awgn::Scenario<f64>;
pub type SchemeParams = awgn::SchemeParams<f64>;
pub type RateReport = awgn::RateReport<f64>;
pub type MiTerms = awgn::MiTerms<f64>;
pub type OuterBoundParams = bounds::OuterBoundParams<f64>;
pub type JointPmf = info::JointPmf<f64>;
pub type DmcScheme = info::DmcScheme<f64>;
pub type DmcRateReport = info::DmcRateReport<f64>;

/// Single-precision variants for memory-bound batch evaluation.
pub mod f32 {
    use super::{awgn, channel, info};

    pub type ChannelGains = channel::ChannelGains<f32>;
    pub type Scenario = awgn::Scenario<f32>;
    pub type SchemeParams = awgn::SchemeParams<f32>;
    pub type RateReport = awgn::RateReport<f32>;
    pub type JointPmf = info::JointPmf<f32>;
}
