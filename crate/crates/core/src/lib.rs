//! Numerics for the two-source swap-steering scenario.
//!
//! * [`scenario`] builds the network: sources, Alice's trusted Bell
//!   measurement, Bob's untrusted POVM and the resulting correlation tables.
//! * [`witness`] evaluates the swap-steering witness and estimates the
//!   local-hidden-state bound.
//! * [`selftest`] extracts the local unitaries that map a maximally violating
//!   strategy onto two maximally entangled pairs and a Bell measurement.
//! * [`randomness`] computes Eve's guessing probability, certifies the two
//!   random bits and searches for Eve strategies on noisy tables.
//! * [`config`], [`report`] and [`run`] implement the command-line front end.

#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod linalg;
pub mod random;
pub mod randomness;
pub mod report;
pub mod run;
pub mod scenario;
pub mod selftest;
pub mod strategy_file;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SubsystemShape, UnitVector, C64};
pub use scenario::{CorrelationTable, Povm, Strategy};

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
