//! Monte Carlo simulation and characterization of wavelength-multiplexed
//! entangled photon-pair sources generated by spontaneous four-wave mixing
//! in a single silicon nanowire.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: two-qubit kets, density matrices, projectors, fidelity.
//! - [`channels`]: the 100-GHz ITU grid and the 14 correlated channel pairs.
//! - [`photonics`]: analytic rate, CAR, interferometer and brightness models.
//! - [`engine`]: seeded time-tag generation, coincidence counting, file I/O.
//! - [`analysis`]: CAR, fringe visibility, CHSH, tomography and curve fits.
//! - [`config`], [`reproduce`], [`report`]: presets, figure reproduction runs
//!   and structured output used by the `muxent` binary.
//! - [`selftest`]: quick invariant checks runnable from the binary.

pub mod analysis;
pub mod channels;
pub mod cli;
pub mod config;
pub mod engine;
mod error;
pub mod photonics;
pub mod qstate;
pub mod report;
pub mod reproduce;
pub mod selftest;

pub use error::{Error, Result};
