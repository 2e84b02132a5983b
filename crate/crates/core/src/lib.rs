//! Simulation of an entropy-loaded, multi-rate Nyquist subcarrier-multiplexed
//! intensity-modulation / direct-detection link over dispersive fiber.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsp;
pub mod error;
pub mod harness;
pub mod linksim;
pub mod metrics;
pub mod planner;
pub mod rxchain;
pub mod shaping;

pub use error::{Error, Result};
