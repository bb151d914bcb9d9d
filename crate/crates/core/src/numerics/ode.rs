use nalgebra::DVector;

use super::ToleranceSet;
use crate::error::{Error, Result};

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights (same as the last row of A: first-same-as-last).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrate `dy/dt = f(t, y)` from 0 to `t` with `y(0) = y0`.
pub fn ode_integrate<F>(f: F, y0: &DVector<f64>, t: f64, tol: &ToleranceSet) -> Result<DVector<f64>>
where
    F: FnMut(f64, &DVector<f64>) -> DVector<f64>,
{
    ode_integrate_span(f, y0, 0.0, t, tol).map(|(y, _)| y)
}

/// Adaptive Dormand-Prince 5(4) integration over `[t0, t1]`.
///
/// The local error estimate is measured in the mixed norm
/// `rms(err_i / (abs_tol + rel_tol * max(|y_i|, |y_new_i|)))` and a step is
/// accepted when that norm is at most one.
pub fn ode_integrate_span<F>(
    mut f: F,
    y0: &DVector<f64>,
    t0: f64,
    t1: f64,
    tol: &ToleranceSet,
) -> Result<(DVector<f64>, OdeStats)>
where
    F: FnMut(f64, &DVector<f64>) -> DVector<f64>,
{
    tol.check()?;
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::domain("ode_integrate", "need finite t0 <= t1"));
    }
    let mut stats = OdeStats::default();
    let mut y = y0.clone();
    if t1 == t0 {
        return Ok((y, stats));
    }

    let span = t1 - t0;
    let dim = y.len().max(1) as f64;
    let err_norm = |y: &DVector<f64>, y_new: &DVector<f64>, err: &DVector<f64>| -> f64 {
        let s: f64 = err
            .iter()
            .zip(y.iter().zip(y_new.iter()))
            .map(|(e, (a, b))| {
                let sc = tol.abs_tol + tol.rel_tol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum();
        (s / dim).sqrt()
    };

    let mut t = t0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let mut h = initial_step(&y, &k1, tol, span);
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);

    while t < t1 {
        if stats.accepted + stats.rejected >= tol.max_iter {
            return Err(Error::numerical(
                "ode_integrate",
                format!("step budget of {} exhausted at t={t:e}", tol.max_iter),
            ));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(span) {
            return Err(Error::numerical(
                "ode_integrate",
                format!("step size underflow at t={t:e}"),
            ));
        }

        k.clear();
        k.push(k1.clone());
        for stage in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[stage][j];
                if a != 0.0 {
                    ys.axpy(h * a, kj, 1.0);
                }
            }
            k.push(f(t + C[stage] * h, &ys));
            stats.evaluations += 1;
        }

        let mut y_new = y.clone();
        let mut err = DVector::zeros(y.len());
        for (i, ki) in k.iter().enumerate() {
            if B5[i] != 0.0 {
                y_new.axpy(h * B5[i], ki, 1.0);
            }
            err.axpy(h * (B5[i] - B4[i]), ki, 1.0);
        }
        let e = err_norm(&y, &y_new, &err);
        if !e.is_finite() {
            return Err(Error::numerical("ode_integrate", "non-finite error estimate"));
        }

        if e <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k.pop().expect("seven stages");
            stats.accepted += 1;
            let grow = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            stats.rejected += 1;
            h *= (0.9 * e.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok((y, stats))
}

fn initial_step(y: &DVector<f64>, dy: &DVector<f64>, tol: &ToleranceSet, span: f64) -> f64 {
    let sc = |v: f64| tol.abs_tol + tol.rel_tol * v.abs();
    let d0 = y.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>().sqrt();
    let d1 = dy
        .iter()
        .zip(y.iter())
        .map(|(d, v)| (d / sc(*v)).powi(2))
        .sum::<f64>()
        .sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    h.min(span)
}

/// Fixed-step fifth-order Dormand-Prince, used for convergence-order checks.
pub fn dormand_prince_fixed<F>(mut f: F, y0: &DVector<f64>, t: f64, steps: usize) -> DVector<f64>
where
    F: FnMut(f64, &DVector<f64>) -> DVector<f64>,
{
    let h = t / steps as f64;
    let mut y = y0.clone();
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
    for step in 0..steps {
        let ts = step as f64 * h;
        k.clear();
        k.push(f(ts, &y));
        for stage in 1..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                ys.axpy(h * A[stage][j], kj, 1.0);
            }
            k.push(f(ts + C[stage] * h, &ys));
        }
        for (i, ki) in k.iter().enumerate() {
            y.axpy(h * B5[i], ki, 1.0);
        }
    }
    y
}
