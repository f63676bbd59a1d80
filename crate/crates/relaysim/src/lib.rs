//! Simulation and closed-form analysis of differential amplify-and-forward
//! relay networks over time-varying Rayleigh fading.
//!
//! The crate is organised bottom-up:
//!
//! - [`specialfn`] and [`quadrature`] provide the numerical primitives.
//! - [`channel`] generates correlated fading traces.
//! - [`modem`] maps bits to PSK symbols and unitary codewords.
//! - [`relaylink`] forwards signals through relays under a power budget.
//! - [`detection`] recovers data without channel knowledge.
//! - [`analysis`] evaluates closed-form BER, error floors and power splits.
//! - [`harness`] runs reproducible BER sweeps and writes results.

pub mod analysis;
pub mod channel;
pub mod detection;
pub mod error;
pub mod harness;
pub mod modem;
pub mod quadrature;
pub mod relaylink;
pub mod rng;
pub mod specialfn;

pub use error::{Error, Result};
