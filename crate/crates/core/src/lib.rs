//! Measurement-assisted preparation of a unit-filled register of atoms in an
//! inhomogeneous optical lattice.
//!
//! All energies are in units of the on-site interaction `U` and all times in
//! units of `1/U` unless stated otherwise.

pub mod analytics;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod oracle;
pub mod register;
pub mod sparse;
pub mod units;

pub use error::{Error, Result};
