use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use super::fock::build_operators;
use crate::bloch::{drift_matrix, propagate_with_sensitivity};
use crate::error::{Error, Result};
use crate::numerics::{linspace, ode_integrate_span, ToleranceSet};

type CMat = DMatrix<Complex64>;

/// Largest G/(2U_b) accepted as the weak-drive regime.
pub const WEAK_DRIVE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct MasterRun {
    pub times: Vec<f64>,
    /// Diagonal of ρ at each time.
    pub populations: Vec<Vec<f64>>,
    /// Bloch vector of the {0, 1} block (unnormalized).
    pub bloch: Vec<[f64; 3]>,
    /// Population in levels >= 2.
    pub leakage: Vec<f64>,
    pub max_trace_deviation: f64,
    pub max_hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let x = a[(i, j)];
            if x == c(0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Lindblad evolution of the squeezed mode truncated to `levels` b-phonon
/// states, with H = ω_b n − U_b n(n − 1) + G(b + b†) and jump
/// √γ₀ (cosh r·b + sinh r·b†). Starts in Fock level `initial_level`.
#[allow(clippy::too_many_arguments)]
pub fn b_space_master_equation(
    omega_b: f64,
    u_b: f64,
    g: f64,
    gamma0: f64,
    r: f64,
    levels: usize,
    times: &[f64],
    initial_level: usize,
) -> Result<MasterRun> {
    if levels < 4 {
        return Err(Error::domain("b_space_master_equation", "need at least 4 levels"));
    }
    if initial_level >= levels {
        return Err(Error::domain("b_space_master_equation", "initial level outside truncation"));
    }
    if !(gamma0 >= 0.0) || times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain(
            "b_space_master_equation",
            "need gamma0 >= 0 and a non-decreasing, non-negative time grid",
        ));
    }
    let n = levels;
    let ops = build_operators(n)?;
    let b = &ops.a;
    let bd = &ops.a_dag;
    let num = &ops.n_op;
    let id = CMat::identity(n, n);
    let h = num.map(|x| x * omega_b) - (num * (num - &id)).map(|x| x * u_b) + (b + bd).map(|x| x * g);
    let l = b.map(|x| x * r.cosh()) + bd.map(|x| x * r.sinh());
    let ll = l.adjoint() * &l;

    // Column-major vec: vec(AρB) = (Bᵀ ⊗ A) vec(ρ).
    let i_c = c(0.0) + Complex64::i();
    let sup = (kron(&id, &h) - kron(&h.transpose(), &id)).map(|x| -i_c * x)
        + (kron(&l.conjugate(), &l) - kron(&id, &ll).map(|x| x * 0.5) - kron(&ll.transpose(), &id).map(|x| x * 0.5))
            .map(|x| x * gamma0);
    let m = n * n;
    let mut real = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let z = sup[(i, j)];
            real[(i, j)] = z.re;
            real[(i, m + j)] = -z.im;
            real[(m + i, j)] = z.im;
            real[(m + i, m + j)] = z.re;
        }
    }

    let mut y = DVector::zeros(2 * m);
    y[initial_level * n + initial_level] = 1.0;
    let tol = ToleranceSet::new(1e-11, 1e-13, 2_000_000)?;
    let mut run = MasterRun {
        times: times.to_vec(),
        populations: Vec::with_capacity(times.len()),
        bloch: Vec::with_capacity(times.len()),
        leakage: Vec::with_capacity(times.len()),
        max_trace_deviation: 0.0,
        max_hermiticity_deviation: 0.0,
        min_eigenvalue: f64::INFINITY,
    };
    let mut t_prev = 0.0;
    for &t in times {
        if t > t_prev {
            y = ode_integrate_span(|_, y| &real * y, &y, t_prev, t, &tol)?.0;
            t_prev = t;
        }
        let rho = CMat::from_fn(n, n, |i, j| Complex64::new(y[j * n + i], y[m + j * n + i]));
        let trace: f64 = (0..n).map(|i| rho[(i, i)].re).sum();
        let trace_dev = (trace - 1.0).abs();
        if trace_dev > 1e-8 {
            return Err(Error::numerical(
                "b_space_master_equation",
                format!("trace deviation {trace_dev:e} at t = {t:e}"),
            ));
        }
        run.max_trace_deviation = run.max_trace_deviation.max(trace_dev);
        run.max_hermiticity_deviation = run.max_hermiticity_deviation.max((&rho - rho.adjoint()).camax());
        let herm = (&rho + rho.adjoint()).map(|x| x * 0.5);
        let emin = herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        run.min_eigenvalue = run.min_eigenvalue.min(emin);
        let pops: Vec<f64> = (0..n).map(|i| rho[(i, i)].re).collect();
        run.leakage.push(pops[2..].iter().sum());
        run.populations.push(pops);
        let r01 = rho[(0, 1)];
        run.bloch.push([2.0 * r01.re, -2.0 * r01.im, rho[(1, 1)].re - rho[(0, 0)].re]);
    }
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionInputs {
    pub omega_b: f64,
    pub u_b: f64,
    pub g: f64,
    pub gamma0: f64,
    pub r: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub inputs: ProjectionInputs,
    pub max_deviation: f64,
    pub max_leakage: f64,
    /// max(1e-3, 10·leakage).
    pub tolerance: f64,
    /// G/(2U_b).
    pub drive_ratio: f64,
    pub weak_drive: bool,
    pub leakage_curve: Vec<f64>,
    pub times: Vec<f64>,
    pub pass: bool,
}

/// 201 points over one bare qubit period 2π/ω_b.
pub fn default_time_grid(omega_b: f64) -> Vec<f64> {
    linspace(0.0, 2.0 * std::f64::consts::PI / omega_b, 201)
}

/// Compare the b-space master equation with the projected Bloch model
/// (Ω = 2G) on the same time grid.
///
/// PASS requires the weak-drive precondition G ≤ 0.1·2U_b and a maximal
/// component-wise Bloch deviation within max(1e-3, 10·leakage).
pub fn projection_consistency(p: &ProjectionInputs, times: &[f64]) -> Result<ProjectionReport> {
    let run = b_space_master_equation(p.omega_b, p.u_b, p.g, p.gamma0, p.r, p.levels, times, 0)?;
    let drift = drift_matrix(p.omega_b, 2.0 * p.g, p.gamma0, p.r)?;
    let mut max_dev = 0.0f64;
    for (t, v_me) in times.iter().zip(&run.bloch) {
        let v = propagate_with_sensitivity(&drift, *t)?.v;
        let diff = Vector3::from(v) - Vector3::from(*v_me);
        max_dev = max_dev.max(diff.amax());
    }
    let max_leakage = run.leakage.iter().copied().fold(0.0, f64::max);
    let tolerance = (10.0 * max_leakage).max(1e-3);
    let drive_ratio = if p.u_b > 0.0 { p.g.abs() / (2.0 * p.u_b) } else { f64::INFINITY };
    let weak_drive = drive_ratio <= WEAK_DRIVE_LIMIT;
    Ok(ProjectionReport {
        inputs: *p,
        max_deviation: max_dev,
        max_leakage,
        tolerance,
        drive_ratio,
        weak_drive,
        leakage_curve: run.leakage,
        times: times.to_vec(),
        pass: weak_drive && max_dev <= tolerance,
    })
}
