//! Population-protocol simulation under the uniform random pairwise scheduler.
//!
//! The crate is split into four layers:
//!
//! * [`engine`] runs any [`engine::Protocol`] on a population of `n` agents,
//!   drawing one ordered pair per step and counting parallel time as
//!   `steps / n`.
//! * [`protocols`] holds the transition functions: the one-way epidemic,
//!   pairwise elimination, epidemic-based population size estimation and
//!   tuple-based leader election.
//! * [`experiments`] runs seeded replicates, summarizes them, evaluates the
//!   closed-form expectations and writes CSV.
//! * [`cli`] is the command-line front end used by the `popsim` binary.

pub mod cli;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod protocols;

pub use error::{Error, Result};
