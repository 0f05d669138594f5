//! File formats, configuration, plotting and command implementations for the
//! `plugsim` binary. All computation lives in [`plugsim_core`].

pub mod commands;
pub mod config;
pub mod demo_io;
mod error;
pub mod params;
pub mod plot;
pub mod trace_io;

pub use error::{Error, Result};

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "PLUGSIM_SEED";

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const FAULT: u8 = 1;
    pub const INVALID: u8 = 2;
}
