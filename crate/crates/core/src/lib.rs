//! Allocation-only core for impedance-controlled charger plug-in and plug-out.
//!
//! The crate is `no_std` (with `alloc`) and contains every piece of the
//! toolkit that is pure computation:
//!
//! - [`geometry`]: rotations, poses and the projected misalignment angles.
//! - [`demo`]: demonstration trace analysis, cohort statistics and gain
//!   derivation.
//! - [`impedance`]: parameter synthesis from design targets, exact
//!   zero-order-hold integration of the second-order impedance law, and the
//!   three-channel force-to-velocity controller.
//! - [`plant`]: a kinematic charger with an invented socket contact model.
//! - [`mission`]: the plug-in/plug-out state machine and its metrics.
//!
//! File formats, configuration and the command line live in the `plugsim`
//! crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod demo;
mod error;
pub mod geometry;
pub mod impedance;
pub mod mission;
pub mod plant;
mod stats;

pub use error::{ContactPhase, Error};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Period of the force/torque sensor stream and of the control loop, seconds.
pub const SAMPLE_PERIOD: f64 = 0.01;
