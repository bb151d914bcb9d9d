//! Small dense kernels shared by the physics modules: matrix exponential,
//! an adaptive Runge-Kutta integrator, bracketing root finding and
//! golden-section minimization.

mod expm;
mod ode;
mod roots;

pub use expm::{expm, expm_complex, expm_small};
pub use ode::{dormand_prince_fixed, ode_integrate, ode_integrate_span, OdeStats};
pub use roots::{find_root, minimize_scalar, Minimum, Root};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSet {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl ToleranceSet {
    pub fn new(rel_tol: f64, abs_tol: f64, max_iter: usize) -> Result<Self> {
        let tol = ToleranceSet {
            rel_tol,
            abs_tol,
            max_iter,
        };
        tol.check()?;
        Ok(tol)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::domain("ToleranceSet", "rel_tol must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::domain("ToleranceSet", "abs_tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("ToleranceSet", "max_iter must be nonzero"));
        }
        Ok(())
    }
}

impl Default for ToleranceSet {
    fn default() -> Self {
        ToleranceSet {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_iter: 200_000,
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// `n` logarithmically spaced points on `[lo, hi]`; both bounds must be positive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => x.exp(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_endpoints() {
        let g = linspace(0.0, 1.4, 141);
        assert_eq!(g.len(), 141);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[140], 1.4);
        assert!((g[100] - 1.0).abs() < 1e-15);

        let l = logspace(1e-4, 1.0, 5);
        assert_eq!(l[0], 1e-4);
        assert_eq!(l[4], 1.0);
        assert!((l[2] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceSet::new(0.0, 1e-12, 10).is_err());
        assert!(ToleranceSet::new(1e-8, -1.0, 10).is_err());
        assert!(ToleranceSet::new(1e-8, 1e-12, 0).is_err());
        assert!(ToleranceSet::new(1e-8, 1e-12, 10).is_ok());
    }
}
