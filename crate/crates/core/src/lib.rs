//! Compiler and open-quantum-system simulator for phonon-mediated
//! programmable spin networks of atoms trapped along a photonic crystal
//! waveguide.
//!
//! The pipeline runs device figures of merit → collective phonon modes →
//! sideband compilation → spin / spin-phonon dynamics → measurement.

pub mod cli;
pub mod compiler;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod models;
pub mod otoc;
pub mod phonons;
pub mod pipelines;
pub mod units;

#[cfg(test)]
pub(crate) mod test_util;

pub use error::{Error, Result};
