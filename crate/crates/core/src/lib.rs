//! Cooperative spectrum sensing with amplify-and-forward over-the-air
//! fusion.
//!
//! Sensors measure the energy received from a primary user and report it
//! simultaneously over fading links with pre-equalized AF gains, so the
//! reports add up in the air at the base station. The crate provides
//!
//! - link statistics and fading draws ([`channel`]),
//! - signal-level simulation of one observation chance and the reference
//!   detectors ([`phy`]),
//! - Gaussian closed forms for the error probabilities ([`analytic`]),
//! - the optimal threshold and the power allocation solver ([`scheduler`]),
//! - the large-`K` bound and node-count predictors ([`asymptotics`]),
//! - a seeded Monte Carlo engine and the experiment families ([`harness`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod analytic;
pub mod asymptotics;
pub mod channel;
pub mod error;
pub mod harness;
pub mod phy;
mod qfunc;
pub mod rng;
pub mod scalar;
pub mod scheduler;
pub mod table;

pub use error::{Error, Result};
pub use rng::Stream;
pub use scalar::Scalar;

pub type Moments64 = analytic::Moments<f64>;
pub type Moments32 = analytic::Moments<f32>;
pub type PerfPoint64 = analytic::PerfPoint<f64>;
pub type MobilityModel64 = channel::MobilityModel<f64>;
pub type LinkStatistics64 = channel::LinkStatistics<f64>;
pub type LinkStatistics32 = channel::LinkStatistics<f32>;
pub type Scenario64 = phy::Scenario<f64>;
pub type Allocation64 = phy::Allocation<f64>;
pub type AsymptoticModel64 = asymptotics::AsymptoticModel<f64>;
pub type AsymptoticModel32 = asymptotics::AsymptoticModel<f32>;
pub type SolverOptions64 = scheduler::SolverOptions<f64>;
pub type Solution64 = scheduler::Solution<f64>;
pub type McEstimate64 = harness::McEstimate<f64>;
