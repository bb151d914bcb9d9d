//! Squeezed-Fock mechanical qubit gravimeter.
//!
//! A Duffing mechanical mode driven by a detuned two-phonon pump is described
//! in its squeezed-Fock basis; the lowest two levels form a qubit whose
//! transition is driven by gravity through the anti-squeezed quadrature.
//! This crate computes the effective model parameters, the coherent and
//! decoherent Fisher information, the optimal readout axis, the validity map
//! of the rotating-wave approximation, and brute-force Fock-space oracles that
//! check the reduced model against the full oscillator.
//!
//! All quantities are SI (rad/s, s, kg, N) unless a field name ends in
//! `_ratio` or `_over_omega`, in which case it is normalized by the trap
//! frequency.

pub mod bloch;
pub mod coherent;
pub mod config;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod params;
pub mod rwa;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
pub use params::{DerivedParams, SensorConfig, HBAR};
