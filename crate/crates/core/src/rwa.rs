//! Validity of the rotating-wave approximation for the squeezed-mode
//! Hamiltonian.
//!
//! Three classes of dropped terms are compared against the qubit gap: the
//! quartic b†⁴, the cubic b†³b and the quadratic b†² pieces. Each ratio is
//! linear in D once ω_b(D) is substituted, so the boundary in D is found per
//! condition and the smallest one wins.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{find_root, ToleranceSet};
use crate::params::{critical_duffing, duffing_factor, pump_from_squeeze, qubit_frequency};

pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaReport {
    pub ratio_quartic: f64,
    pub ratio_cubic: f64,
    pub ratio_quadratic: f64,
    pub max_ratio: f64,
    pub epsilon: f64,
    pub valid: bool,
}

/// (numerator strength, denominator factor) of each condition, in the order
/// quartic, cubic, quadratic: ratio_k = D·s_k / (c_k·ω_b).
pub(crate) fn condition_terms(r: f64) -> [(f64, f64); 3] {
    let (s2, c2) = ((2.0 * r).sinh(), (2.0 * r).cosh());
    [
        (s2 * s2, 16.0),
        ((4.0 * r).sinh(), 4.0),
        (s2 * (3.0 * c2 - 2.0), 4.0),
    ]
}

pub fn rwa_ratios(d: f64, r: f64, omega_b: f64, epsilon: f64) -> Result<RwaReport> {
    if !(omega_b > 0.0) {
        return Err(Error::domain(
            "rwa_ratios",
            format!("qubit gap closed (omega_b = {omega_b:e})"),
        ));
    }
    if !(d >= 0.0 && r >= 0.0) {
        return Err(Error::domain("rwa_ratios", "D and r must be non-negative"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::domain("rwa_ratios", "epsilon must be positive"));
    }
    let [q, c, l] = condition_terms(r).map(|(s, k)| d * s / (k * omega_b));
    let max_ratio = q.max(c).max(l);
    Ok(RwaReport {
        ratio_quartic: q,
        ratio_cubic: c,
        ratio_quadratic: l,
        max_ratio,
        epsilon,
        valid: q < epsilon && c < epsilon && l < epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStatus {
    /// At least one condition binds inside (0, D_crit).
    Binding,
    /// No condition binds; D_RWA is reported as D_crit.
    NeverBinding,
    /// r = 0: all dropped terms vanish and D is unbounded.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaBoundary {
    pub d_rwa: f64,
    pub d_crit: f64,
    /// Per-condition roots (quartic, cubic, quadratic); D_crit where a
    /// condition never binds.
    pub per_condition: [f64; 3],
    pub status: BoundaryStatus,
}

impl RwaBoundary {
    /// D_RWA/D_crit, infinite when unbounded.
    pub fn fraction(&self) -> f64 {
        match self.status {
            BoundaryStatus::Unbounded => f64::INFINITY,
            _ => self.d_rwa / self.d_crit,
        }
    }
}

/// Largest D for which all three conditions hold, with ω_b = ω_b(D).
pub fn rwa_boundary(r: f64, epsilon: f64, delta: f64, a_p: f64) -> Result<RwaBoundary> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("rwa_boundary", "epsilon must be positive"));
    }
    if !(r >= 0.0) {
        return Err(Error::domain("rwa_boundary", "r must be non-negative"));
    }
    let d_crit = critical_duffing(delta, a_p, r)?;
    if r == 0.0 {
        return Ok(RwaBoundary {
            d_rwa: f64::INFINITY,
            d_crit,
            per_condition: [f64::INFINITY; 3],
            status: BoundaryStatus::Unbounded,
        });
    }
    let tol = ToleranceSet::new(1e-15, 1e-300, 10_000)?;
    let mut per_condition = [d_crit; 3];
    for (slot, (s, k)) in per_condition.iter_mut().zip(condition_terms(r)) {
        if s == 0.0 || !epsilon.is_finite() {
            continue;
        }
        // ratio_k(D) < ε  ⇔  D·s_k − ε·c_k·ω_b(D) < 0
        let g = |d: f64| d * s - epsilon * k * qubit_frequency(delta, a_p, d, r).unwrap_or(f64::NAN);
        if g(d_crit) <= 0.0 {
            continue;
        }
        *slot = find_root(g, 0.0, d_crit, &tol)?.x;
    }
    let d_rwa = per_condition.iter().copied().fold(d_crit, f64::min);
    Ok(RwaBoundary {
        d_rwa,
        d_crit,
        per_condition,
        status: if d_rwa < d_crit {
            BoundaryStatus::Binding
        } else {
            BoundaryStatus::NeverBinding
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaCell {
    pub r: f64,
    pub d_frac: f64,
    pub max_ratio: f64,
    pub valid: bool,
    pub omega_b_over_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RwaMap {
    pub epsilon: f64,
    pub delta_ratio: f64,
    /// Row-major over (r, d_frac).
    pub cells: Vec<RwaCell>,
    /// (r, D_RWA/D_crit, status) per r.
    pub boundary: Vec<(f64, f64, BoundaryStatus)>,
}

/// Classify a (r, D/D_crit) grid in units of the trap frequency.
pub fn classify_grid(r_grid: &[f64], dfrac_grid: &[f64], epsilon: f64, delta_ratio: f64) -> Result<RwaMap> {
    if !(delta_ratio > 0.0) {
        return Err(Error::domain("classify_grid", "delta_ratio must be positive"));
    }
    if dfrac_grid.iter().any(|d| !(0.0..1.0).contains(d)) {
        return Err(Error::domain("classify_grid", "d_frac values must lie in [0, 1)"));
    }
    let delta = delta_ratio;
    let cells = r_grid
        .par_iter()
        .flat_map_iter(|&r| {
            dfrac_grid.iter().map(move |&f| {
                let a_p = pump_from_squeeze(r) * delta;
                let bare = ((delta - a_p) * (delta + a_p)).sqrt();
                let d = if r == 0.0 { 0.0 } else { f * bare / duffing_factor(r) };
                let omega_b = qubit_frequency(delta, a_p, d, r)?;
                let rep = rwa_ratios(d, r, omega_b, epsilon)?;
                Ok(RwaCell {
                    r,
                    d_frac: f,
                    max_ratio: rep.max_ratio,
                    valid: rep.valid,
                    omega_b_over_omega: omega_b,
                })
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let boundary = r_grid
        .par_iter()
        .map(|&r| {
            let b = rwa_boundary(r, epsilon, delta, pump_from_squeeze(r) * delta)?;
            Ok((r, b.fraction(), b.status))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RwaMap {
        epsilon,
        delta_ratio,
        cells,
        boundary,
    })
}
