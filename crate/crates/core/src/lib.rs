//! Simulation and estimation toolkit for heralded single-photon entanglement
//! between two photon-echo quantum memories.
//!
//! The crate is organised bottom-up:
//!
//! * [`photon_stats`]: truncated Fock-space photon-number statistics
//!   (two-mode squeezed source, binomial loss, autocorrelation, heralding).
//! * [`optics`]: closed forms for the memory beamsplitter ladder, the
//!   cross-correlation model and the two-photon recombination algebra.
//! * [`montecarlo`]: a trial-level simulator of the full setup plus the exact
//!   analytic expectation of the same model.
//! * [`estimators`]: probability tables, cross-correlation and threefold
//!   estimators of `p11`, Bayesian posterior, visibility fits and the
//!   concurrence lower bound.
//! * [`experiment`]: pump-power sweeps, the threefold campaign, fringe scans
//!   and the transmission budget, plus the published measurement tables.
//! * [`cli`]: configuration files, run manifests and the `heraldsim` binary.
//!
//! Monte Carlo trials run on rayon when the `parallel` feature is enabled
//! (the default); the result is bit-identical to the sequential path.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod montecarlo;
pub mod optics;
pub mod parallel;
pub mod photon_stats;

pub use error::{Error, Result};
