//! Simulator for a high-dimensional, time-entangled quantum blockchain.
//!
//! Layers, bottom up:
//! - [`qudit`]: dense statevectors, operators and projective measurement;
//! - [`entangle`]: Bell/cat states, Bell measurement, swapping, superdense coding;
//! - [`chain`]: key generation, identity publication, reconstruction and validation;
//! - [`adversary`]: event scheduler, attacks, detection statistics and oracles;
//! - [`runner`]: configuration, scenario execution and reports.

pub mod adversary;
pub mod chain;
pub mod entangle;
mod error;
pub mod qudit;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};
