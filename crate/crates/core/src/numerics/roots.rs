use super::ToleranceSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Bisection on a sign-changing bracket.
///
/// Stops once the bracket half-width is below `abs_tol + rel_tol * |x|`, or
/// the function value is exactly zero.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: &ToleranceSet) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    tol.check()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain("find_root", format!("invalid bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(Root { x: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, iterations: 0 });
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::domain(
            "find_root",
            format!("no sign change on [{lo}, {hi}] (f = {fa:e}, {fb:e})"),
        ));
    }
    for it in 1..=tol.max_iter {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 || 0.5 * (b - a) <= tol.abs_tol + tol.rel_tol * mid.abs() {
            return Ok(Root { x: mid, residual: fm.abs(), iterations: it });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Err(Error::numerical("find_root", "iteration budget exhausted"))
}

/// Golden-section search for the minimum of a unimodal function on `[lo, hi]`.
pub fn minimize_scalar<F>(mut f: F, lo: f64, hi: f64, tol: &ToleranceSet) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    tol.check()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(
            "minimize_scalar",
            format!("invalid bracket [{lo}, {hi}]"),
        ));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for it in 1..=tol.max_iter {
        if (b - a) <= tol.abs_tol + tol.rel_tol * (0.5 * (a + b)).abs() {
            let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
            return Ok(Minimum { x, value, iterations: it });
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Err(Error::numerical("minimize_scalar", "iteration budget exhausted"))
}
