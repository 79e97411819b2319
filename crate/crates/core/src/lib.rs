//! Classical-trajectory Monte Carlo simulation of particle transfer between
//! two orthogonally crossed, focused Gaussian-beam dipole traps.
//!
//! The combined potential of two horizontal beams crossing at their foci,
//! offset vertically by a separation `d`, forms a dimple (d = 0), a
//! flat-bottomed well (d = w0), or a double well with a barrier (d > w0).
//! This crate integrates single-particle trajectories in that static
//! landscape, detects passages through the crossing region, and histograms
//! how often a passage moves the particle from one beam to the other as a
//! function of separation and particle energy, including the thermally
//! weighted transfer-efficiency curve.

pub mod cli_io;
pub mod constants;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod events;
pub mod potential;

pub use error::{Error, Result};
