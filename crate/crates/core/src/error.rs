use alloc::string::String;
use core::fmt;

/// Contact phase named by segmentation errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactPhase {
    PlugIn,
    PlugOut,
}

impl fmt::Display for ContactPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContactPhase::PlugIn => f.write_str("plug-in"),
            ContactPhase::PlugOut => f.write_str("plug-out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violates a documented precondition.
    InvalidInput(String),
    /// The charger axis points away from the socket (z component ≤ 0).
    PoseOutOfRange { z: f64 },
    /// A demonstration trace failed validation.
    Validation(String),
    /// No contact interval was found for a phase.
    MissingPhase(ContactPhase),
    /// No force-flip / velocity-flip pair could be matched.
    NoResponseEvent,
    /// A gain denominator was zero.
    DegenerateStats(&'static str),
    /// The charger entered the socket with more tilt than it admits.
    Jam { tilt_deg: f64, max_deg: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::PoseOutOfRange { z } => {
                write!(
                    f,
                    "pose out of range: charger axis z component {z} is not positive"
                )
            }
            Error::Validation(msg) => write!(f, "validation failed: {msg}"),
            Error::MissingPhase(phase) => {
                write!(f, "segmentation failed: no {phase} interval found")
            }
            Error::NoResponseEvent => f.write_str("no matched force/velocity direction change"),
            Error::DegenerateStats(what) => write!(f, "degenerate statistics: {what} is zero"),
            Error::Jam { tilt_deg, max_deg } => {
                write!(
                    f,
                    "jam: tilt {tilt_deg:.2} deg exceeds admissible {max_deg:.2} deg"
                )
            }
        }
    }
}

impl core::error::Error for Error {}
