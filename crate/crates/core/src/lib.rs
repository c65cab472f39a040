//! Simulation and exact analysis of the ping-pong quantum communication
//! protocol under optical-mode eavesdropping attacks.
//!
//! The crate models the protocol's two photons plus an eavesdropper's two
//! ancilla modes with an exact sparse state-vector engine ([`state`]), builds
//! the attack operators and their closed-form target states ([`attack`]),
//! runs seeded Monte Carlo sessions over a lossy channel ([`protocol`]),
//! derives exact outcome distributions, mutual informations, and
//! loss-masking limits ([`analysis`]), and bundles every model invariant
//! into a machine-checkable suite ([`verify`]).
//!
//! The library is `no_std`-compatible (requires `alloc`): disable the
//! default `std` feature and enable `libm` for targets without a float
//! runtime.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod attack;
pub mod error;
pub mod protocol;
pub mod state;
pub mod verify;

pub use error::EngineError;
