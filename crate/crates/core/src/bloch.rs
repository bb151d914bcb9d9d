//! Damped squeezed-qubit dynamics in Bloch form.
//!
//! The projected jump operator gives the affine flow v̇ = A v + b with
//! anisotropic rates (Γ_x, Γ_y, Γ_z). The sensitivity u = ∂_Ω v obeys
//! u̇ = A u + A_Ω v, and both are propagated together through one matrix
//! exponential of the 7×7 homogeneous embedding acting on (v, u, 1).

use nalgebra::{DMatrix, Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{expm_small, find_root, linspace, logspace, minimize_scalar, ToleranceSet};
use crate::params::{decoherence_rates, DerivedParams};

/// Below this, 1 − |v|² is treated as a pure state.
const PURE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSystem {
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub omega: f64,
    pub omega_b: f64,
    pub gamma0: f64,
    pub rates: [f64; 3],
}

pub fn drift_matrix(omega_b: f64, omega: f64, gamma0: f64, r: f64) -> Result<DriftSystem> {
    if !(omega_b.is_finite() && omega.is_finite() && r.is_finite()) {
        return Err(Error::domain("drift_matrix", "parameters must be finite"));
    }
    if !(gamma0 >= 0.0 && gamma0.is_finite()) {
        return Err(Error::domain("drift_matrix", "gamma0 must be non-negative"));
    }
    let gx = 0.5 * gamma0 * (-2.0 * r).exp();
    let gy = 0.5 * gamma0 * (2.0 * r).exp();
    let gz = gamma0 * (2.0 * r).cosh();
    #[rustfmt::skip]
    let a = Matrix3::new(
        -gx,      omega_b, 0.0,
        -omega_b, -gy,     omega,
        0.0,      -omega,  -gz,
    );
    Ok(DriftSystem {
        a,
        b: Vector3::new(0.0, 0.0, -gamma0),
        omega,
        omega_b,
        gamma0,
        rates: [gx, gy, gz],
    })
}

impl DriftSystem {
    /// Drift system at the configured operating point Ω = Ω_g.
    pub fn from_params(p: &DerivedParams) -> Result<Self> {
        decoherence_rates(p.gamma0, p.r, p.omega_b)?;
        drift_matrix(p.omega_b, p.omega_g, p.gamma0, p.r)
    }

    /// ∂_Ω A.
    pub fn a_omega() -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        m[(1, 2)] = 1.0;
        m[(2, 1)] = -1.0;
        m
    }

    fn generator(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(7, 7);
        let a_om = Self::a_omega();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self.a[(i, j)];
                m[(3 + i, 3 + j)] = self.a[(i, j)];
                m[(3 + i, j)] = a_om[(i, j)];
            }
            m[(i, 6)] = self.b[i];
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochState {
    pub v: [f64; 3],
    pub u: [f64; 3],
}

impl BlochState {
    fn vv(&self) -> Vector3<f64> {
        Vector3::from(self.v)
    }
    fn uu(&self) -> Vector3<f64> {
        Vector3::from(self.u)
    }
}

/// Solves A v = −b. Fails when γ₀ = 0 (no unique fixed point).
pub fn steady_state(d: &DriftSystem) -> Result<Vector3<f64>> {
    if d.gamma0 == 0.0 {
        return Err(Error::domain("steady_state", "no unique steady state without damping"));
    }
    let lu = d.a.lu();
    let v = lu
        .solve(&(-d.b))
        .ok_or_else(|| Error::numerical("steady_state", "drift matrix is singular"))?;
    let res = (d.a * v + d.b).norm();
    if res > 1e-12 * d.b.norm() {
        return Err(Error::numerical(
            "steady_state",
            format!("residual {res:e} exceeds tolerance"),
        ));
    }
    Ok(v)
}

fn expm3(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let e = expm_small(&DMatrix::from_column_slice(3, 3, m.as_slice()))?;
    Ok(Matrix3::from_column_slice(e.as_slice()))
}

/// v(t) = v_ss + e^{At}(v₀ − v_ss); homogeneous flow when γ₀ = 0.
pub fn propagate(d: &DriftSystem, v0: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("propagate", "t must be finite and non-negative"));
    }
    let e = expm3(&(d.a * t))?;
    if d.gamma0 == 0.0 {
        return Ok(e * v0);
    }
    let vss = steady_state(d)?;
    Ok(vss + e * (v0 - vss))
}

/// (v, u) at time t from v(0) = (0, 0, −1), u(0) = 0.
pub fn propagate_with_sensitivity(d: &DriftSystem, t: f64) -> Result<BlochState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(
            "propagate_with_sensitivity",
            "t must be finite and non-negative",
        ));
    }
    let e = expm_small(&(d.generator() * t))?;
    // Initial augmented state (0,0,−1, 0,0,0, 1).
    let col = |i: usize| e[(i, 6)] - e[(i, 2)];
    Ok(BlochState {
        v: [col(0), col(1), col(2)],
        u: [col(3), col(4), col(5)],
    })
}

/// Time derivatives (v̇, u̇) of a state.
fn rates_of(d: &DriftSystem, s: &BlochState) -> (Vector3<f64>, Vector3<f64>) {
    let (v, u) = (s.vv(), s.uu());
    (d.a * v + d.b, d.a * u + DriftSystem::a_omega() * v)
}

/// κ²[u·u + (v·u)²/(1 − v·v)].
pub fn qfi_mixed(s: &BlochState, kappa_g: f64) -> Result<f64> {
    let (v, u) = (s.vv(), s.uu());
    let q = 1.0 - v.norm_squared();
    if q < -1e-9 {
        return Err(Error::numerical(
            "qfi_mixed",
            format!("Bloch vector outside the unit ball (|v|² = {})", 1.0 - q),
        ));
    }
    let k2 = kappa_g * kappa_g;
    if q < PURE_GUARD {
        // d|v|²/dΩ = 0 for pure states, so the mixed term cancels analytically.
        return Ok(k2 * u.norm_squared());
    }
    let w = v.dot(&u);
    Ok(k2 * (u.norm_squared() + w * w / q))
}

/// dF_Q/dt along the flow, from the equations of motion.
fn qfi_mixed_rate(d: &DriftSystem, s: &BlochState, kappa_g: f64) -> f64 {
    let (v, u) = (s.vv(), s.uu());
    let (vd, ud) = rates_of(d, s);
    let q = 1.0 - v.norm_squared();
    let k2 = kappa_g * kappa_g;
    if q < PURE_GUARD {
        return k2 * 2.0 * u.dot(&ud);
    }
    let w = v.dot(&u);
    let wd = vd.dot(&u) + v.dot(&ud);
    k2 * (2.0 * u.dot(&ud) + 2.0 * w * wd / q + 2.0 * w * w * v.dot(&vd) / (q * q))
}

/// κ²(n·u)²/(1 − (n·v)²) for a projective measurement along unit `n`.
pub fn cfi_axis(s: &BlochState, n: &Vector3<f64>, kappa_g: f64) -> Result<f64> {
    let nn = n.norm();
    if (nn - 1.0).abs() > 1e-9 {
        return Err(Error::domain("cfi_axis", format!("axis must be a unit vector (|n| = {nn})")));
    }
    let (nv, nu) = (n.dot(&s.vv()), n.dot(&s.uu()));
    let den = 1.0 - nv * nv;
    if den <= PURE_GUARD {
        if nu == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::domain(
            "cfi_axis",
            "state is an eigenstate of the measured axis; CFI is a 0/0 limit",
        ));
    }
    Ok(kappa_g * kappa_g * nu * nu / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReadoutAxis {
    pub n: [f64; 3],
    pub theta_opt: f64,
    pub phi_opt: f64,
}

/// Measurement axis along the SLD direction ℓ = u + (v·u)v/(1 − |v|²).
pub fn sld_axis(s: &BlochState) -> Result<ReadoutAxis> {
    let (v, u) = (s.vv(), s.uu());
    let q = 1.0 - v.norm_squared();
    let l = if q < PURE_GUARD { u } else { u + v * (v.dot(&u) / q) };
    let norm = l.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::domain("sld_axis", "no information: SLD direction undefined"));
    }
    let n = l / norm;
    Ok(ReadoutAxis {
        n: [n.x, n.y, n.z],
        theta_opt: n.z.clamp(-1.0, 1.0).acos(),
        phi_opt: n.y.atan2(n.x),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherentOptimum {
    pub t_opt: f64,
    /// min √(t/F_Q) [m s⁻² √s].
    pub dg_sqrt_t: f64,
    pub f_q: f64,
}

/// Hybrid logarithmic + linear grid over (0, t_max].
pub fn time_grid(t_max: f64, points: usize) -> Vec<f64> {
    let half = points.div_ceil(2).max(2);
    let mut g = logspace(t_max * 1e-6, t_max, half);
    g.extend(linspace(0.0, t_max, half + 1).into_iter().skip(1));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn state_and_qfi(d: &DriftSystem, kappa_g: f64, t: f64) -> Result<(BlochState, f64)> {
    let s = propagate_with_sensitivity(d, t)?;
    let f = qfi_mixed(&s, kappa_g)?;
    Ok((s, f))
}

/// Global minimizer of √(t/F_Q(t)) on (0, t_max].
///
/// A hybrid grid of `points` samples locates the basin; the stationarity
/// condition F − t·dF/dt = 0 is then bisected inside the bracketing cells.
pub fn optimal_time_decoherent_with(
    d: &DriftSystem,
    kappa_g: f64,
    t_max: f64,
    points: usize,
) -> Result<DecoherentOptimum> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain("optimal_time_decoherent", "t_max must be positive"));
    }
    let grid = time_grid(t_max, points.max(2000));
    let fs = grid
        .par_iter()
        .map(|&t| state_and_qfi(d, kappa_g, t).map(|x| x.1))
        .collect::<Result<Vec<_>>>()?;
    let obj = |t: f64, f: f64| if f > 0.0 { (t / f).sqrt() } else { f64::INFINITY };
    let (imin, best) = grid
        .iter()
        .zip(&fs)
        .map(|(&t, &f)| obj(t, f))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    if !best.is_finite() {
        return Err(Error::numerical(
            "optimal_time_decoherent",
            "Fisher information vanishes on the whole grid",
        ));
    }
    let lo = grid[imin.saturating_sub(1)];
    let hi = grid[(imin + 1).min(grid.len() - 1)];
    let tol = ToleranceSet::new(1e-15, 1e-300, 10_000)?;
    let stationarity = |t: f64| match propagate_with_sensitivity(d, t) {
        Ok(s) => {
            let f = qfi_mixed(&s, kappa_g).unwrap_or(f64::NAN);
            f - t * qfi_mixed_rate(d, &s, kappa_g)
        }
        Err(_) => f64::NAN,
    };
    let t_opt = {
        let mid = grid[imin];
        let (gl, gm, gh) = (stationarity(lo), stationarity(mid), stationarity(hi));
        // h = t/F decreases while F − tF' < 0 and increases after.
        if lo > 0.0 && gl < 0.0 && gm >= 0.0 {
            find_root(stationarity, lo, mid, &tol)?.x
        } else if gm < 0.0 && gh >= 0.0 {
            find_root(stationarity, mid, hi, &tol)?.x
        } else {
            let gtol = ToleranceSet::new(1e-9, 1e-300, 10_000)?;
            let m = minimize_scalar(
                |t| state_and_qfi(d, kappa_g, t).map(|x| obj(t, x.1)).unwrap_or(f64::INFINITY),
                lo.max(f64::MIN_POSITIVE),
                hi,
                &gtol,
            )?;
            m.x
        }
    };
    let (_, f_q) = state_and_qfi(d, kappa_g, t_opt)?;
    let value = obj(t_opt, f_q);
    let (t_opt, f_q, value) = if value <= best {
        (t_opt, f_q, value)
    } else {
        (grid[imin], fs[imin], best)
    };
    Ok(DecoherentOptimum {
        t_opt,
        dg_sqrt_t: value,
        f_q,
    })
}

pub fn optimal_time_decoherent(d: &DriftSystem, kappa_g: f64, t_max: f64) -> Result<DecoherentOptimum> {
    optimal_time_decoherent_with(d, kappa_g, t_max, 2000)
}

/// First local maximum of F_Q(t) on (0, t_max], refined on dF_Q/dt = 0.
pub fn first_qfi_peak(d: &DriftSystem, kappa_g: f64, t_max: f64, points: usize) -> Result<(f64, f64)> {
    let grid = linspace(0.0, t_max, points.max(3));
    let fs = grid
        .par_iter()
        .map(|&t| state_and_qfi(d, kappa_g, t).map(|x| x.1))
        .collect::<Result<Vec<_>>>()?;
    let i = (1..grid.len() - 1)
        .find(|&i| fs[i] >= fs[i - 1] && fs[i] > fs[i + 1])
        .ok_or_else(|| Error::numerical("first_qfi_peak", "no interior maximum on the grid"))?;
    let rate = |t: f64| {
        propagate_with_sensitivity(d, t)
            .map(|s| qfi_mixed_rate(d, &s, kappa_g))
            .unwrap_or(f64::NAN)
    };
    let tol = ToleranceSet::new(1e-15, 1e-300, 10_000)?;
    let t = find_root(rate, grid[i - 1], grid[i + 1], &tol)?.x;
    Ok((t, state_and_qfi(d, kappa_g, t)?.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossover {
    /// None when Ξ < 1 on the whole range.
    pub r_star: Option<f64>,
    pub residual: f64,
}

/// Ξ(r) = Γ_y/ω_b with ω_b = (1 − d_frac)·δ·sech 2r, in trap units.
pub fn xi_of_r(gamma0_ratio: f64, delta_ratio: f64, d_frac: f64, r: f64) -> f64 {
    0.5 * gamma0_ratio * (2.0 * r).exp() * (2.0 * r).cosh() / ((1.0 - d_frac) * delta_ratio)
}

/// Root of Ξ(r) = 1 on [0, r_max].
pub fn crossover_squeezing(gamma0_ratio: f64, delta_ratio: f64, d_frac: f64, r_max: f64) -> Result<Crossover> {
    if !(gamma0_ratio >= 0.0 && delta_ratio > 0.0 && (0.0..1.0).contains(&d_frac) && r_max > 0.0) {
        return Err(Error::domain("crossover_squeezing", "invalid parameters"));
    }
    let xi = |r: f64| xi_of_r(gamma0_ratio, delta_ratio, d_frac, r);
    if gamma0_ratio == 0.0 {
        return Ok(Crossover { r_star: None, residual: f64::NAN });
    }
    let samples: Vec<f64> = linspace(0.0, r_max, 201).into_iter().map(xi).collect();
    if samples.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::numerical("crossover_squeezing", "Xi(r) is not increasing on the range"));
    }
    if samples[0] >= 1.0 {
        return Ok(Crossover { r_star: Some(0.0), residual: samples[0] - 1.0 });
    }
    if samples[samples.len() - 1] < 1.0 {
        return Ok(Crossover { r_star: None, residual: f64::NAN });
    }
    let tol = ToleranceSet::new(1e-15, 1e-300, 10_000)?;
    let root = find_root(|r| xi(r) - 1.0, 0.0, r_max, &tol)?;
    Ok(Crossover {
        r_star: Some(root.x),
        residual: (xi(root.x) - 1.0).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochSample {
    pub t: f64,
    pub v: [f64; 3],
    pub u: [f64; 3],
    pub f_q: f64,
    /// NaN where the z readout is a 0/0 limit.
    pub f_c_z: f64,
    pub f_c_opt: f64,
    pub theta_opt: f64,
    pub phi_opt: f64,
}

pub fn time_series(d: &DriftSystem, kappa_g: f64, times: &[f64]) -> Result<Vec<BlochSample>> {
    times
        .par_iter()
        .map(|&t| {
            let (s, f_q) = state_and_qfi(d, kappa_g, t)?;
            let f_c_z = cfi_axis(&s, &Vector3::z(), kappa_g).unwrap_or(f64::NAN);
            let (f_c_opt, theta_opt, phi_opt) = match sld_axis(&s) {
                Ok(ax) => (
                    cfi_axis(&s, &Vector3::from(ax.n), kappa_g).unwrap_or(f64::NAN),
                    ax.theta_opt,
                    ax.phi_opt,
                ),
                Err(_) => (0.0, f64::NAN, f64::NAN),
            };
            Ok(BlochSample { t, v: s.v, u: s.u, f_q, f_c_z, f_c_opt, theta_opt, phi_opt })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{self, RabiParams};
    use crate::numerics::{ode_integrate, ToleranceSet};
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn drift_layout() {
        let d = drift_matrix(1.0, 0.3, 0.02, 0.7).unwrap();
        assert_eq!(d.a[(0, 1)], 1.0);
        assert_eq!(d.a[(1, 0)], -1.0);
        assert_eq!(d.a[(1, 2)], 0.3);
        assert_eq!(d.a[(2, 1)], -0.3);
        assert_eq!(d.b, Vector3::new(0.0, 0.0, -0.02));
        assert!((d.a.trace() + 2.0 * 0.02 * 1.4f64.cosh()).abs() < 1e-15);
        let a_om = DriftSystem::a_omega();
        assert_eq!(a_om.iter().filter(|x| **x != 0.0).count(), 2);

        let free = drift_matrix(1.0, 0.3, 0.0, 0.7).unwrap();
        assert_eq!(free.a + free.a.transpose(), Matrix3::zeros());
        assert_eq!(free.b, Vector3::zeros());
        let r0 = drift_matrix(1.0, 0.0, 0.2, 0.0).unwrap();
        assert_eq!(r0.rates, [0.1, 0.1, 0.2]);
    }

    #[test]
    fn steady_state_examples() {
        for r in [0.0, 0.4, 1.0] {
            let d = drift_matrix(0.8, 0.0, 0.05, r).unwrap();
            let v = steady_state(&d).unwrap();
            assert!((v - Vector3::new(0.0, 0.0, -1.0 / (2.0 * r).cosh())).norm() < 1e-15);
        }
        let d = drift_matrix(0.8, 0.3, 0.05, 0.5).unwrap();
        let v = steady_state(&d).unwrap();
        assert!((d.a * v + d.b).norm() <= 1e-12 * d.b.norm());
        assert!(steady_state(&drift_matrix(1.0, 0.1, 0.0, 0.3).unwrap()).is_err());
    }

    #[test]
    fn propagation_examples() {
        let d = drift_matrix(1.3, 0.2, 0.01, 0.4).unwrap();
        let v0 = Vector3::new(0.1, 0.2, -0.5);
        assert!((propagate(&d, &v0, 0.0).unwrap() - v0).norm() < 1e-15);

        let free = drift_matrix(1.3, 0.0, 0.0, 0.4).unwrap();
        let t = 0.77;
        let v = propagate(&free, &Vector3::x(), t).unwrap();
        assert!((v - Vector3::new((1.3 * t).cos(), -(1.3 * t).sin(), 0.0)).norm() < 1e-14);

        let slowest = d.rates.iter().copied().fold(f64::INFINITY, f64::min);
        let v = propagate(&d, &v0, 50.0 / slowest).unwrap();
        assert!((v - steady_state(&d).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn sensitivity_zero_at_start() {
        let d = drift_matrix(1.0, 0.2, 0.01, 0.5).unwrap();
        let s = propagate_with_sensitivity(&d, 0.0).unwrap();
        assert_eq!(s.u, [0.0; 3]);
        assert_eq!(s.v, [0.0, 0.0, -1.0]);
    }

    #[test]
    fn augmented_flow_matches_ode() {
        let d = drift_matrix(1.0, 0.25, 0.03, 0.8).unwrap();
        let tol = ToleranceSet::new(1e-13, 1e-15, 1_000_000).unwrap();
        let a_om = DriftSystem::a_omega();
        let f = |_: f64, y: &DVector<f64>| {
            let v = Vector3::new(y[0], y[1], y[2]);
            let u = Vector3::new(y[3], y[4], y[5]);
            let (vd, ud) = (d.a * v + d.b, d.a * u + a_om * v);
            DVector::from_vec(vec![vd.x, vd.y, vd.z, ud.x, ud.y, ud.z])
        };
        let y0 = DVector::from_vec(vec![0.0, 0.0, -1.0, 0.0, 0.0, 0.0]);
        for t in [0.5, 4.0, 20.0] {
            let y = ode_integrate(f, &y0, t, &tol).unwrap();
            let s = propagate_with_sensitivity(&d, t).unwrap();
            for i in 0..3 {
                assert!((s.v[i] - y[i]).abs() < 1e-9);
                assert!((s.u[i] - y[3 + i]).abs() < 1e-9 * (1.0 + y[3 + i].abs()));
            }
        }
    }

    #[test]
    fn sensitivity_matches_finite_difference() {
        let (wb, om, g0, r, t) = (1.0, 0.15, 0.02, 0.6, 3.7);
        let h = 1e-6 * wb;
        let s = propagate_with_sensitivity(&drift_matrix(wb, om, g0, r).unwrap(), t).unwrap();
        let vp = propagate_with_sensitivity(&drift_matrix(wb, om + h, g0, r).unwrap(), t).unwrap();
        let vm = propagate_with_sensitivity(&drift_matrix(wb, om - h, g0, r).unwrap(), t).unwrap();
        let scale = s.u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for i in 0..3 {
            let fd = (vp.v[i] - vm.v[i]) / (2.0 * h);
            assert!((fd - s.u[i]).abs() <= 1e-6 * scale, "{i}: {fd} vs {}", s.u[i]);
        }
    }

    #[test]
    fn coherent_cross_checks() {
        let (wb, om) = (1.0, 1e-3);
        let d = drift_matrix(wb, om, 0.0, 0.9).unwrap();
        let p = RabiParams::new(wb, om).unwrap();
        for t in [0.3, 1.7, 2.9, 5.0] {
            let s = propagate_with_sensitivity(&d, t).unwrap();
            let q = qfi_mixed(&s, 2.0).unwrap();
            assert!(rel(q, coherent::qfi_exact(&p, 2.0, t)) < 1e-8);
            let c = cfi_axis(&s, &Vector3::z(), 2.0).unwrap();
            assert!(rel(c, coherent::cfi_population_exact(&p, 2.0, t)) < 1e-8);
            // u_z = ∂_Ω(2P₁ − 1)
            assert!(rel(s.u[2], 2.0 * coherent::population_slope(&p, t)) < 1e-8);
        }
    }

    #[test]
    fn qfi_and_axis_examples() {
        let zero = BlochState { v: [0.1, 0.2, 0.3], u: [0.0; 3] };
        assert_eq!(qfi_mixed(&zero, 3.0).unwrap(), 0.0);
        let orth = BlochState { v: [0.5, 0.0, 0.0], u: [0.0, 0.3, 0.4] };
        assert!((qfi_mixed(&orth, 2.0).unwrap() - 4.0 * 0.25).abs() < 1e-15);
        assert_eq!(cfi_axis(&orth, &Vector3::x(), 2.0).unwrap(), 0.0);
        let ax = sld_axis(&orth).unwrap();
        assert!((Vector3::from(ax.n) - Vector3::new(0.0, 0.6, 0.8)).norm() < 1e-15);
        let up = BlochState { v: [0.0; 3], u: [0.0, 0.0, 2.0] };
        assert_eq!(sld_axis(&up).unwrap().theta_opt, 0.0);
        assert!(sld_axis(&zero).is_err());
        let outside = BlochState { v: [1.1, 0.0, 0.0], u: [0.0, 1.0, 0.0] };
        assert!(qfi_mixed(&outside, 1.0).is_err());
    }

    #[test]
    fn coherent_limit_of_optimum() {
        // With γ₀ = 0 and Ω = 0, √(t/F) ∝ √x/|sin(x/2)| is minimal at tan(x/2) = x.
        let wb = 0.8;
        let d = drift_matrix(wb, 0.0, 0.0, 0.5).unwrap();
        let opt = optimal_time_decoherent(&d, 1.0, 6.0 * PI / wb).unwrap();
        let x_star = 2.331_122_370_414_423;
        assert!(rel(opt.t_opt * wb, x_star) < 1e-9, "{}", opt.t_opt * wb);
        let expected = (x_star / wb * wb * wb / (4.0 * (0.5 * x_star).sin().powi(2))).sqrt();
        assert!(rel(opt.dg_sqrt_t, expected) < 1e-9);
    }

    #[test]
    fn optimum_grid_insensitive() {
        let d = drift_matrix(0.01, 0.0, 5e-3 * 0.4, 1.0).unwrap();
        let t_max = 6.0 * PI / 0.01;
        let a = optimal_time_decoherent_with(&d, 1.0, t_max, 2000).unwrap();
        let b = optimal_time_decoherent_with(&d, 1.0, t_max, 4000).unwrap();
        assert!(rel(a.t_opt, b.t_opt) <= 1e-6);
        assert!(a.t_opt < PI / 0.01);
    }

    #[test]
    fn crossover_examples() {
        assert_eq!(crossover_squeezing(0.0, 0.05, 0.2, 3.0).unwrap().r_star, None);
        let rs: Vec<f64> = [1e-4, 1e-3, 5e-3]
            .iter()
            .map(|&g| {
                let c = crossover_squeezing(g, 0.05, 0.2, 3.0).unwrap();
                assert!(c.residual <= 1e-10);
                c.r_star.unwrap()
            })
            .collect();
        assert!(rs[0] > rs[1] && rs[1] > rs[2]);
        // e^{2r} cosh 2r = K  ⇔  r = ln(2K − 1)/4
        for (r, g) in rs.iter().zip([1e-4, 1e-3, 5e-3]) {
            let k = 2.0 * 0.8 * 0.05 / g;
            assert!(rel(*r, (2.0 * k - 1.0f64).ln() / 4.0) < 1e-12, "{rs:?}");
        }
        assert_eq!(crossover_squeezing(1e-9, 0.05, 0.2, 1.0).unwrap().r_star, None);
    }

    #[test]
    fn series_rows() {
        let d = drift_matrix(1.0, 0.0, 0.01, 0.5).unwrap();
        let rows = time_series(&d, 1.0, &linspace(0.0, 5.0, 11)).unwrap();
        assert_eq!(rows.len(), 11);
        assert!(rows[0].theta_opt.is_nan());
        for r in &rows[1..] {
            assert!(rel(r.f_c_opt, r.f_q) < 1e-8);
        }
    }

    #[test]
    fn peak_suppression() {
        let wb = 0.010_632_1;
        let peaks: Vec<(f64, f64)> = [0.0, 1e-4, 1e-3, 5e-3]
            .iter()
            .map(|&g| {
                let d = drift_matrix(wb, 0.0, g, 1.0).unwrap();
                first_qfi_peak(&d, 1.0, 6.0 * PI / wb, 2000).unwrap()
            })
            .collect();
        assert!(rel(peaks[0].0, PI / wb) < 1e-10);
        for w in peaks.windows(2) {
            assert!(w[1].1 < w[0].1 && w[1].0 <= w[0].0, "{peaks:?}");
        }
    }

    #[test]
    fn saturation_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let mut v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let len = rng.random_range(0.0..0.999);
            v *= len / v.norm();
            let u = Vector3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let s = BlochState { v: v.into(), u: u.into() };
            let ax = sld_axis(&s).unwrap();
            let n = Vector3::from(ax.n);
            assert!((n.norm() - 1.0).abs() < 1e-12);
            let q = qfi_mixed(&s, 1.5).unwrap();
            assert!(rel(cfi_axis(&s, &n, 1.5).unwrap(), q) < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, rng_seed: proptest::test_runner::RngSeed::Fixed(5), ..ProptestConfig::default() })]

        #[test]
        fn bloch_vector_stays_in_ball(wb in 0.1f64..2.0, om in -1.0f64..1.0, g in 0.0f64..0.2, r in 0.0f64..1.5, t in 0.0f64..40.0) {
            let d = drift_matrix(wb, om, g, r).unwrap();
            let s = propagate_with_sensitivity(&d, t).unwrap();
            prop_assert!(Vector3::from(s.v).norm() <= 1.0 + 1e-9);
        }

        #[test]
        fn cfi_never_exceeds_qfi(wb in 0.1f64..2.0, om in -1.0f64..1.0, g in 1e-4f64..0.2, r in 0.0f64..1.5, t in 0.01f64..40.0,
                                 nx in -1.0f64..1.0, ny in -1.0f64..1.0, nz in -1.0f64..1.0) {
            let n = Vector3::new(nx, ny, nz);
            prop_assume!(n.norm() > 1e-3);
            let n = n / n.norm();
            let s = propagate_with_sensitivity(&drift_matrix(wb, om, g, r).unwrap(), t).unwrap();
            let q = qfi_mixed(&s, 1.0).unwrap();
            if let Ok(c) = cfi_axis(&s, &n, 1.0) {
                prop_assert!(c <= q * (1.0 + 1e-10) + 1e-10);
            }
        }
    }
}
