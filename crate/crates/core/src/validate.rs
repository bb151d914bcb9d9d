//! Deterministic invariant battery over every module.
//!
//! Each check draws its samples from a fixed-seed generator, so a failure
//! reproduces exactly. `worst` is the largest violation metric seen and
//! passes when it is within `tolerance`.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bloch::{
    cfi_axis, drift_matrix, propagate, propagate_with_sensitivity, qfi_mixed, sld_axis, steady_state, BlochState,
};
use crate::coherent::{cfi_population_exact, evolve_pure, qfi_exact, qfi_weak, RabiParams};
use crate::error::Result;
use crate::oracle::{b_space_master_equation, build_squeeze};
use crate::params::{critical_duffing, pump_from_squeeze, qubit_frequency, squeeze_from_pump, SensorConfig};
use crate::numerics::linspace;
use crate::rwa::{rwa_boundary, rwa_ratios};

const SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

fn check(name: &'static str, samples: usize, worst: f64, tolerance: f64) -> Check {
    Check { name, samples, worst, tolerance, pass: worst <= tolerance }
}

fn random_config(rng: &mut ChaCha8Rng) -> SensorConfig {
    SensorConfig {
        m: 10f64.powf(rng.random_range(-12.0..-6.0)),
        omega: 10f64.powf(rng.random_range(2.0..5.0)),
        delta_ratio: rng.random_range(0.01..0.2),
        r: rng.random_range(0.05..1.5),
        d_frac: rng.random_range(0.0..0.9),
        gamma0_ratio: 10f64.powf(rng.random_range(-6.0..-2.0)),
        ..SensorConfig::default()
    }
}

fn params_checks(rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> Result<()> {
    let n = 300;
    let (mut pump, mut gxy, mut gz, mut gap, mut closes, mut rt) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let cfg = random_config(rng);
        let p = cfg.derive()?;
        pump = pump.max(rel(p.delta * (2.0 * p.r).tanh(), p.a_p));
        gxy = gxy.max(rel(p.gamma_x * p.gamma_y, (0.5 * p.gamma0).powi(2)));
        gz = gz.max(rel(p.gamma_z, p.gamma_x + p.gamma_y));
        gap = gap.max(if p.omega_b > 0.0 { 0.0 } else { 1.0 });
        let dc = critical_duffing(p.delta, p.a_p, p.r)?;
        closes = closes.max(qubit_frequency(p.delta, p.a_p, dc, p.r)?.abs() / p.delta);
        let x = rng.random_range(0.0..0.999);
        rt = rt.max(rel(pump_from_squeeze(squeeze_from_pump(x)?), x));
    }
    out.push(check("params_pump_relation", n, pump, 1e-14));
    out.push(check("params_rate_product", n, gxy, 1e-14));
    out.push(check("params_rate_sum", n, gz, 1e-14));
    out.push(check("params_gap_open", n, gap, 0.0));
    out.push(check("params_critical_duffing_closes_gap", n, closes, 1e-12));
    out.push(check("params_pump_roundtrip", n, rt, 1e-14));
    Ok(())
}

fn coherent_checks(rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> Result<()> {
    let n = 300;
    let (mut norm, mut opt, mut weak) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let wb = 10f64.powf(rng.random_range(-1.0..2.0));
        let p = RabiParams::new(wb, wb * rng.random_range(1e-6..1e-3))?;
        let t = rng.random_range(0.05..20.0) / wb;
        norm = norm.max((evolve_pure(&p, t).norm_sqr() - 1.0).abs());
        let (fq, fc) = (qfi_exact(&p, 1.0, t), cfi_population_exact(&p, 1.0, t));
        if fq > 1e-12 * 4.0 / (wb * wb) {
            // CFI ≤ QFI and the population readout is optimal for weak forces
            opt = opt.max(if fc > fq * (1.0 + 1e-12) { fc / fq - 1.0 } else { 1.0 - fc / fq });
        }
        let (m, om, r) = (1e-9, 2.0 * std::f64::consts::PI * 1e3, rng.random_range(0.0..1.5));
        let wb_phys = om * rng.random_range(0.005..0.05);
        let kappa = crate::params::gravity_coupling(m, om, r, 0.0)?.kappa_g;
        let pw = RabiParams::new(wb_phys, 1e-6 * wb_phys)?;
        let tp = std::f64::consts::PI / wb_phys;
        weak = weak.max(rel(qfi_exact(&pw, kappa, tp), qfi_weak(m, om, r, wb_phys, tp)));
    }
    out.push(check("coherent_normalization", n, norm, 1e-14));
    out.push(check("coherent_population_readout_optimal", n, opt, 1e-4));
    out.push(check("coherent_weak_force_limit", n, weak, 1e-5));
    Ok(())
}

fn random_state(rng: &mut ChaCha8Rng) -> BlochState {
    let dir = |rng: &mut ChaCha8Rng| {
        let v: Vector3<f64> = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        v / v.norm().max(1e-12)
    };
    let v = dir(rng) * rng.random_range(0.0..0.999);
    let u = dir(rng) * 10f64.powf(rng.random_range(-2.0..2.0));
    BlochState { v: [v.x, v.y, v.z], u: [u.x, u.y, u.z] }
}

fn bloch_checks(rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> Result<()> {
    let n = 300;
    let (mut ball, mut bound, mut sat) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let d = drift_matrix(
            rng.random_range(0.1..2.0),
            rng.random_range(0.0..0.5),
            rng.random_range(0.0..0.3),
            rng.random_range(0.0..1.5),
        )?;
        let s = propagate_with_sensitivity(&d, rng.random_range(0.0..40.0))?;
        ball = ball.max(Vector3::from(s.v).norm() - 1.0);

        let s = random_state(rng);
        let fq = qfi_mixed(&s, 1.0)?;
        let nvec = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        let fc = cfi_axis(&s, &nvec, 1.0)?;
        bound = bound.max(fc / fq - 1.0);
        let ax = sld_axis(&s)?;
        sat = sat.max(rel(cfi_axis(&s, &Vector3::from(ax.n), 1.0)?, fq));
    }
    out.push(check("bloch_stays_in_ball", n, ball.max(0.0), 1e-12));
    out.push(check("bloch_cfi_below_qfi", n, bound.max(0.0), 1e-10));
    out.push(check("bloch_sld_saturates_qfi", n, sat, 1e-8));

    let (mut coh, mut count) = (0.0f64, 0);
    for _ in 0..20 {
        let wb = rng.random_range(0.2..2.0);
        let om = wb * rng.random_range(1e-4..0.3);
        let d = drift_matrix(wb, om, 0.0, rng.random_range(0.0..1.5))?;
        let p = RabiParams::new(wb, om)?;
        for t in linspace(0.1, 10.0 * std::f64::consts::PI / wb, 10) {
            coh = coh.max(rel(qfi_mixed(&propagate_with_sensitivity(&d, t)?, 1.0)?, qfi_exact(&p, 1.0, t)));
            count += 1;
        }
    }
    out.push(check("bloch_coherent_limit", count, coh, 1e-8));

    let mut ss = 0.0f64;
    for r in [0.0, 0.5, 1.0] {
        let d = drift_matrix(0.7, 0.0, 0.1, r)?;
        let expect = Vector3::new(0.0, 0.0, -1.0 / (2.0 * r).cosh());
        ss = ss.max((steady_state(&d)? - expect).norm());
        let slowest = d.rates.iter().copied().fold(f64::INFINITY, f64::min);
        let v = propagate(&d, &Vector3::new(0.3, -0.2, 0.5), 80.0 / slowest)?;
        ss = ss.max((v - expect).norm());
    }
    out.push(check("bloch_steady_state", 3, ss, 1e-10));
    Ok(())
}

fn rwa_checks(rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> Result<()> {
    let n = 100;
    let (mut edge, mut mono) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let (r, eps, delta) = (rng.random_range(0.05..2.0), rng.random_range(0.01..0.3), rng.random_range(0.01..0.2));
        let a_p = pump_from_squeeze(r) * delta;
        let b = rwa_boundary(r, eps, delta, a_p)?;
        if b.d_rwa < b.d_crit {
            let wb = qubit_frequency(delta, a_p, b.d_rwa, r)?;
            edge = edge.max((rwa_ratios(b.d_rwa, r, wb, eps)?.max_ratio - eps).abs());
        }
        let mut prev = 0.0;
        for f in linspace(0.0, 0.95, 20) {
            let d = f * b.d_crit;
            let m = rwa_ratios(d, r, qubit_frequency(delta, a_p, d, r)?, eps)?.max_ratio;
            mono = mono.max(prev - m);
            prev = m;
        }
    }
    out.push(check("rwa_boundary_hits_epsilon", n, edge, 1e-6));
    out.push(check("rwa_ratio_monotone_in_d", n, mono.max(0.0), 0.0));
    Ok(())
}

fn oracle_checks(rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> Result<()> {
    let (mut bog, mut uni) = (0.0f64, 0.0f64);
    for r in [0.25, 0.5] {
        let sq = build_squeeze(r, rng.random_range(0.0..std::f64::consts::TAU), 60)?;
        bog = bog.max(sq.bogoliubov_residual);
        uni = uni.max(sq.unitarity_residual);
    }
    out.push(check("oracle_squeeze_bogoliubov", 2, bog, 1e-6));
    out.push(check("oracle_squeeze_unitary", 2, uni, 1e-8));

    let t = linspace(0.0, 30.0, 16);
    let run = b_space_master_equation(1.0, 0.15, 0.02, 0.05, 0.8, 6, &t, 0)?;
    let phys = run
        .max_trace_deviation
        .max(run.max_hermiticity_deviation)
        .max(-run.min_eigenvalue);
    out.push(check("oracle_master_physical", t.len(), phys.max(0.0), 1e-8));
    Ok(())
}

/// Run the full battery. Numerical errors inside a check propagate.
pub fn run_all() -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = Vec::new();
    params_checks(&mut rng, &mut checks)?;
    coherent_checks(&mut rng, &mut checks)?;
    bloch_checks(&mut rng, &mut checks)?;
    rwa_checks(&mut rng, &mut checks)?;
    oracle_checks(&mut rng, &mut checks)?;
    Ok(ValidationReport { seed: SEED, pass: checks.iter().all(|c| c.pass), checks })
}
