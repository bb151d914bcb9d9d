//! Brute-force Fock-space checks of the reduced qubit model.
//!
//! `fock` builds truncated ladder and squeeze operators, `spectrum` compares
//! the exact rotating-frame spectrum with the effective ladder, and `master`
//! integrates the Lindblad equation of the squeezed mode to measure how well
//! the qubit projection holds. `suite` bundles them into one PASS/FAIL run.

mod fock;
mod master;
mod spectrum;
mod suite;

pub use fock::{build_operators, build_squeeze, FockOperators, Squeeze, SqueezeGenerator};
pub use master::{
    b_space_master_equation, default_time_grid, projection_consistency, MasterRun, ProjectionInputs,
    ProjectionReport, WEAK_DRIVE_LIMIT,
};
pub use spectrum::{spectrum_check, SpectrumReport};
pub use suite::{default_spectrum_dim, run_suite, OracleCheck, OracleSuite, MASTER_LEVELS, WEAK_DRIVE_FRACTION};
