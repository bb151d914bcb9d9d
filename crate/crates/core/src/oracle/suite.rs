use serde::Serialize;

use super::master::{b_space_master_equation, default_time_grid, projection_consistency, ProjectionInputs, ProjectionReport};
use super::spectrum::{spectrum_check, SpectrumReport};
use crate::error::{Error, Result};
use crate::numerics::linspace;
use crate::params::{critical_duffing, pump_from_squeeze, SensorConfig};

/// Fock levels of the b-space master equation.
pub const MASTER_LEVELS: usize = 8;

/// Drive used for the weak-drive projection check, as a fraction of U_b.
pub const WEAK_DRIVE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSuite {
    pub pass: bool,
    pub checks: Vec<OracleCheck>,
    pub spectrum: SpectrumReport,
    pub spectrum_undriven: SpectrumReport,
    pub projection_weak: Option<ProjectionReport>,
    pub projection_strong: Option<ProjectionReport>,
}

/// Truncation used by the spectrum oracle at squeezing r.
pub fn default_spectrum_dim(r: f64) -> usize {
    if r <= 0.5 {
        80
    } else if r <= 1.0 {
        140
    } else {
        200
    }
}

/// Run every oracle at the operating point of `cfg`, in trap units.
///
/// The projection checks need U_b > 0 and are skipped (reported as `None`)
/// when the configuration has no Duffing term.
pub fn run_suite(cfg: &SensorConfig, dim: Option<usize>) -> Result<OracleSuite> {
    cfg.validate()?;
    let r = cfg.squeezing()?;
    let delta = cfg.delta_ratio;
    let a_p = pump_from_squeeze(r) * delta;
    let d = if r == 0.0 { 0.0 } else { cfg.d_frac * critical_duffing(delta, a_p, r)? };
    let dim = dim.unwrap_or_else(|| default_spectrum_dim(r));
    let mut checks = Vec::new();

    let spectrum = spectrum_check(delta, a_p, d, cfg.theta, dim)?;
    checks.push(OracleCheck {
        name: "spectrum_gaps",
        pass: spectrum.pass,
        value: spectrum.rel_errors[0].max(spectrum.rel_errors[1]),
        tolerance: spectrum.tolerance,
    });
    let spectrum_undriven = spectrum_check(delta, a_p, 0.0, cfg.theta, dim)?;
    let bare = ((delta - a_p) * (delta + a_p)).sqrt();
    let err0 = spectrum_undriven
        .gaps_exact
        .iter()
        .map(|g| (g - bare).abs() / bare)
        .fold(0.0, f64::max);
    checks.push(OracleCheck { name: "spectrum_undriven", pass: err0 <= 1e-8, value: err0, tolerance: 1e-8 });

    let gamma0 = if cfg.gamma0_ratio > 0.0 { cfg.gamma0_ratio } else { 1e-3 };
    let times = linspace(0.0, 5.0 / gamma0, 41);
    let run = b_space_master_equation(delta, 0.0, 0.0, gamma0, 0.0, 4, &times, 1)?;
    let decay_err = times
        .iter()
        .zip(&run.populations)
        .map(|(t, p)| (p[1] - (-gamma0 * t).exp()).abs())
        .fold(0.0, f64::max);
    checks.push(OracleCheck { name: "amplitude_damping", pass: decay_err <= 1e-6, value: decay_err, tolerance: 1e-6 });

    let u_b = spectrum.gaps_effective[0] - spectrum.gaps_effective[1];
    let (projection_weak, projection_strong) = if u_b > 0.0 {
        let u_b = 0.5 * u_b;
        let omega_b = spectrum.gaps_effective[0];
        let base = ProjectionInputs {
            omega_b,
            u_b,
            g: WEAK_DRIVE_FRACTION * u_b,
            gamma0: cfg.gamma0_ratio,
            r,
            levels: MASTER_LEVELS,
        };
        let times = default_time_grid(omega_b);
        let weak = projection_consistency(&base, &times)?;
        let strong = projection_consistency(&ProjectionInputs { g: u_b, ..base }, &times)?;
        checks.push(OracleCheck {
            name: "projection_weak_drive",
            pass: weak.pass,
            value: weak.max_deviation,
            tolerance: weak.tolerance,
        });
        checks.push(OracleCheck {
            name: "projection_violation_flagged",
            pass: !strong.pass,
            value: strong.drive_ratio,
            tolerance: super::master::WEAK_DRIVE_LIMIT,
        });
        (Some(weak), Some(strong))
    } else {
        (None, None)
    };
    if checks.iter().any(|c| !c.value.is_finite() && c.name != "projection_violation_flagged") {
        return Err(Error::numerical("oracle", "non-finite oracle metric"));
    }
    Ok(OracleSuite {
        pass: checks.iter().all(|c| c.pass),
        checks,
        spectrum,
        spectrum_undriven,
        projection_weak,
        projection_strong,
    })
}
