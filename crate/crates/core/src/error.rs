//! Error type shared by the state engine and the layers built on it.

use alloc::string::String;
use core::fmt;

use crate::state::{BasisLabel, Polarization, Register};

/// Errors surfaced by gate application, measurement, and protocol execution.
///
/// The engine is strict by design: configurations the physical model does not
/// define (double occupancy of one polarization, gates applied outside their
/// declared domain) are reported instead of silently patched over.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    /// A photon was added to a mode that already holds one of the same
    /// polarization.
    OccupancyOverflow { polarization: Polarization },
    /// A photon was removed from a mode that does not hold one of that
    /// polarization.
    OccupancyUnderflow { polarization: Polarization },
    /// A gate was applied to a basis label outside its declared domain.
    DomainViolation { gate: String, label: BasisLabel },
    /// A normalized state lost its norm under a gate application.
    NormViolation { norm_sqr: f64 },
    /// A polarization readout required a photon, but the register carried
    /// vacuum (or two photons) with positive weight.
    NoPhoton { register: Register },
    /// The return-leg attack map received a state that is not one of the two
    /// encoded states it is defined on.
    OffAttackPath,
    /// A measurement outcome that has zero probability on every supported
    /// path was produced anyway.
    UnreachableOutcome(&'static str),
    /// A run configuration field is out of range.
    InvalidConfig(&'static str),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::OccupancyOverflow { polarization } => {
                write!(f, "occupancy overflow: second photon of polarization {polarization} in one mode")
            }
            EngineError::OccupancyUnderflow { polarization } => {
                write!(f, "occupancy underflow: no photon of polarization {polarization} to remove")
            }
            EngineError::DomainViolation { gate, label } => {
                write!(f, "gate {gate} applied outside its declared domain (label {label})")
            }
            EngineError::NormViolation { norm_sqr } => {
                write!(f, "gate application broke normalization (norm^2 = {norm_sqr})")
            }
            EngineError::NoPhoton { register } => {
                write!(f, "polarization readout on register {register} found no definite photon")
            }
            EngineError::OffAttackPath => {
                write!(f, "return-leg attack applied to a state that is not on the attack path")
            }
            EngineError::UnreachableOutcome(what) => {
                write!(f, "sampled an outcome that is unreachable on protocol paths: {what}")
            }
            EngineError::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
        }
    }
}

impl core::error::Error for EngineError {}
