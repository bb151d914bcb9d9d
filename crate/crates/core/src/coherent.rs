//! Closed-form coherent Rabi dynamics of the squeezed qubit and its Fisher
//! information about g.
//!
//! The qubit starts in |0⟩ and evolves under ω_b σ_z/2 + Ω σ_x/2, with
//! Ω = Ω_g depending on g through `kappa_g = ∂_g Ω`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::HBAR;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiParams {
    pub omega_b: f64,
    /// Drive Ω [rad/s].
    pub omega: f64,
    /// Generalized Rabi frequency √(ω_b² + Ω²).
    pub omega_r: f64,
}

impl RabiParams {
    pub fn new(omega_b: f64, omega: f64) -> Result<Self> {
        if !(omega_b.is_finite() && omega.is_finite()) {
            return Err(Error::domain("RabiParams", "frequencies must be finite"));
        }
        Ok(RabiParams {
            omega_b,
            omega,
            omega_r: omega_b.hypot(omega),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl QubitState {
    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    /// Bloch vector with x = 2 Re(α*β), y = 2 Im(α*β), z = |β|² − |α|².
    pub fn bloch(&self) -> [f64; 3] {
        let c = self.alpha.conj() * self.beta;
        [2.0 * c.re, 2.0 * c.im, self.beta.norm_sqr() - self.alpha.norm_sqr()]
    }
}

pub fn evolve_pure(p: &RabiParams, t: f64) -> QubitState {
    if p.omega_r == 0.0 {
        return QubitState {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        };
    }
    let (s, c) = (0.5 * p.omega_r * t).sin_cos();
    QubitState {
        alpha: Complex64::new(c, p.omega_b / p.omega_r * s),
        beta: Complex64::new(0.0, -p.omega / p.omega_r * s),
    }
}

/// P₁ = (Ω²/ω_R²) sin²(ω_R t/2).
pub fn excited_population(p: &RabiParams, t: f64) -> f64 {
    if p.omega_r == 0.0 {
        return 0.0;
    }
    let s = (0.5 * p.omega_r * t).sin();
    (p.omega / p.omega_r).powi(2) * s * s
}

/// Exact pure-state QFI about g.
pub fn qfi_exact(p: &RabiParams, kappa_g: f64, t: f64) -> f64 {
    let wr = p.omega_r;
    if wr == 0.0 {
        return 0.0;
    }
    let (o2, wb2) = (p.omega * p.omega, p.omega_b * p.omega_b);
    let sh = (0.5 * wr * t).sin();
    let sf = (wr * t).sin();
    let num = o2 * o2 * wr * wr * t * t + 2.0 * o2 * wb2 * wr * t * sf + 4.0 * wb2 * wr * wr * sh * sh
        - o2 * wb2 * sf * sf;
    kappa_g * kappa_g * num / wr.powi(6)
}

/// ∂_Ω P₁.
pub fn population_slope(p: &RabiParams, t: f64) -> f64 {
    let wr = p.omega_r;
    if wr == 0.0 {
        return 0.0;
    }
    let sh = (0.5 * wr * t).sin();
    2.0 * p.omega * p.omega_b.powi(2) * sh * sh / wr.powi(4)
        + p.omega.powi(3) * t * (wr * t).sin() / (2.0 * wr.powi(3))
}

/// CFI of the binary |0⟩/|1⟩ measurement.
///
/// At Ω = 0 the analytic limit 4κ² sin²(ω_b t/2)/ω_b² is returned. Other
/// points where P₁(1 − P₁) vanishes are evaluated as the average over
/// t ± 1e-9/ω_R.
pub fn cfi_population_exact(p: &RabiParams, kappa_g: f64, t: f64) -> f64 {
    if t == 0.0 || p.omega_r == 0.0 {
        return 0.0;
    }
    if p.omega == 0.0 {
        let s = (0.5 * p.omega_b * t).sin();
        return kappa_g * kappa_g * 4.0 * s * s / (p.omega_b * p.omega_b);
    }
    let raw = |t: f64| {
        let p1 = excited_population(p, t);
        let var = p1 * (1.0 - p1);
        let dp = population_slope(p, t);
        if var > 0.0 {
            Some(kappa_g * kappa_g * dp * dp / var)
        } else if dp == 0.0 {
            Some(0.0)
        } else {
            None
        }
    };
    match raw(t) {
        Some(v) if v.is_finite() => v,
        _ => {
            let h = 1e-9 / p.omega_r;
            let lo = raw((t - h).max(0.0)).unwrap_or(0.0);
            let hi = raw(t + h).unwrap_or(0.0);
            0.5 * (lo + hi)
        }
    }
}

/// Weak-force QFI (8m e^{2r}/ħωω_b²) sin²(ω_b t/2).
pub fn qfi_weak(m: f64, omega: f64, r: f64, omega_b: f64, t: f64) -> f64 {
    let s = (0.5 * omega_b * t).sin();
    8.0 * m * (2.0 * r).exp() / (HBAR * omega * omega_b * omega_b) * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentSensitivity {
    pub t_opt: f64,
    /// √T δg [m s⁻² √s].
    pub dg_sqrt_t: f64,
}

pub fn sensitivity_coherent(m: f64, omega: f64, r: f64, omega_b: f64) -> Result<CoherentSensitivity> {
    if !(m > 0.0 && omega > 0.0 && omega_b > 0.0) {
        return Err(Error::domain(
            "sensitivity_coherent",
            "m, omega and omega_b must be positive",
        ));
    }
    Ok(CoherentSensitivity {
        t_opt: std::f64::consts::PI / omega_b,
        dg_sqrt_t: (std::f64::consts::PI * HBAR * omega * omega_b / (8.0 * m * (2.0 * r).exp())).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Benchmarks {
    pub mq: f64,
    pub mcq: f64,
}

/// MQ √(πħω²/8m) and MCQ = MQ/√(2N).
pub fn benchmarks(m: f64, omega: f64, n: f64) -> Result<Benchmarks> {
    if !(m > 0.0 && omega > 0.0 && n > 0.0) {
        return Err(Error::domain("benchmarks", "m, omega and N must be positive"));
    }
    let mq = (std::f64::consts::PI * HBAR * omega * omega / (8.0 * m)).sqrt();
    Ok(Benchmarks {
        mq,
        mcq: mq / (2.0 * n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentSample {
    pub t: f64,
    pub p1: f64,
    pub f_q: f64,
    pub f_c: f64,
}

pub fn time_series(p: &RabiParams, kappa_g: f64, times: &[f64]) -> Vec<CoherentSample> {
    times
        .iter()
        .map(|&t| CoherentSample {
            t,
            p1: excited_population(p, t),
            f_q: qfi_exact(p, kappa_g, t),
            f_c: cfi_population_exact(p, kappa_g, t),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{find_root, ToleranceSet};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    // 4[⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²] with |∂ψ⟩ from a Richardson-extrapolated central difference.
    fn qfi_from_state(p: &RabiParams, kappa: f64, t: f64) -> f64 {
        let h = 1e-4 * p.omega_b.max(p.omega.abs());
        let psi = |o: f64| {
            let s = evolve_pure(&RabiParams::new(p.omega_b, o).unwrap(), t);
            [s.alpha, s.beta]
        };
        let cd = |h: f64| {
            let (a, b) = (psi(p.omega + h), psi(p.omega - h));
            [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
        };
        let (d1, d2) = (cd(h), cd(0.5 * h));
        let d = [(4.0 * d2[0] - d1[0]) / 3.0, (4.0 * d2[1] - d1[1]) / 3.0];
        let s = psi(p.omega);
        let dd = d[0].norm_sqr() + d[1].norm_sqr();
        let ov = s[0].conj() * d[0] + s[1].conj() * d[1];
        4.0 * kappa * kappa * (dd - ov.norm_sqr())
    }

    fn cfi_from_population(p: &RabiParams, kappa: f64, t: f64) -> f64 {
        let h = 1e-4 * p.omega_b.max(p.omega.abs());
        let p1 = |o: f64| excited_population(&RabiParams::new(p.omega_b, o).unwrap(), t);
        let cd = |h: f64| (p1(p.omega + h) - p1(p.omega - h)) / (2.0 * h);
        let dp = (4.0 * cd(0.5 * h) - cd(h)) / 3.0;
        let q = p1(p.omega);
        kappa * kappa * dp * dp / (q * (1.0 - q))
    }

    #[test]
    fn evolution_examples() {
        let p = RabiParams::new(1.0, 0.3).unwrap();
        let s0 = evolve_pure(&p, 0.0);
        assert_eq!((s0.alpha, s0.beta), (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));

        let free = RabiParams::new(2.0, 0.0).unwrap();
        let s = evolve_pure(&free, PI / 2.0);
        assert!((s.alpha - Complex64::i()).norm() < 1e-15);
        assert_eq!(excited_population(&free, 0.7), 0.0);

        let s = evolve_pure(&p, 2.0 * PI / p.omega_r);
        assert!((s.alpha + 1.0).norm() < 1e-14 && s.beta.norm() < 1e-14);

        let z = RabiParams::new(0.0, 0.0).unwrap();
        assert_eq!(evolve_pure(&z, 3.0).alpha, Complex64::new(1.0, 0.0));
        assert_eq!(qfi_exact(&z, 1.0, 3.0), 0.0);
    }

    #[test]
    fn half_population_point() {
        let p = RabiParams::new(1.0, 1.0).unwrap();
        assert!((excited_population(&p, PI / p.omega_r) - 0.5).abs() < 1e-15);
        assert_eq!(excited_population(&p, 0.0), 0.0);
    }

    #[test]
    fn qfi_zero_drive_limit() {
        let p = RabiParams::new(1.3, 0.0).unwrap();
        for t in [0.0f64, 0.4, 2.0, 7.5] {
            let expected = 4.0 * (0.5 * 1.3 * t).sin().powi(2) / (1.3 * 1.3);
            assert!((qfi_exact(&p, 1.0, t) - expected).abs() < 1e-14);
            assert!((cfi_population_exact(&p, 1.0, t) - expected).abs() < 1e-14);
        }
        assert_eq!(cfi_population_exact(&RabiParams::new(1.0, 0.4).unwrap(), 1.0, 0.0), 0.0);
    }

    #[test]
    fn degenerate_population_points_are_finite() {
        let p = RabiParams::new(1.0, 0.5).unwrap();
        let t = 2.0 * PI / p.omega_r;
        let v = cfi_population_exact(&p, 1.0, t);
        assert!(v.is_finite() && v >= 0.0);
        assert!(v <= qfi_exact(&p, 1.0, t) * (1.0 + 1e-3) + 1e-12);
        // P₁ = 1 on resonance
        let res = RabiParams::new(0.0, 1.0).unwrap();
        assert!(cfi_population_exact(&res, 1.0, PI).is_finite());
    }

    #[test]
    fn weak_peak_and_sensitivity() {
        let (m, w, r) = (1e-9, 2.0 * PI * 1e3, 1.0);
        let wb = 0.010_632_1 * w;
        let peak = qfi_weak(m, w, r, wb, PI / wb);
        assert!((peak - 8.0 * m * 1f64.exp().powi(2) / (HBAR * w * wb * wb)).abs() < 1e-10 * peak);
        assert!((peak / 1.999_06e19 - 1.0).abs() < 1e-4);
        assert_eq!(qfi_weak(m, w, r, wb, 0.0), 0.0);

        let s = sensitivity_coherent(m, w, r, wb).unwrap();
        assert!((s.t_opt - 0.047_027_4).abs() < 1e-6);
        assert!((s.dg_sqrt_t - 4.850_23e-11).abs() < 1e-15);
        assert!((s.dg_sqrt_t - (s.t_opt / peak).sqrt()).abs() < 1e-12 * s.dg_sqrt_t);
        let s2 = sensitivity_coherent(2.0 * m, w, r, wb).unwrap();
        assert!((s.dg_sqrt_t / s2.dg_sqrt_t - 2f64.sqrt()).abs() < 1e-14);

        let b = benchmarks(m, w, 10.0).unwrap();
        assert!((b.mq - 1.278_64e-9).abs() < 1e-13);
        assert!((b.mcq - b.mq / 20f64.sqrt()).abs() < 1e-25);
        assert_eq!(benchmarks(m, w, 0.5).unwrap().mcq, b.mq);
        let s0 = sensitivity_coherent(m, w, 0.0, w).unwrap();
        assert!((s0.dg_sqrt_t - b.mq).abs() < 1e-15 * b.mq);
    }

    #[test]
    fn weak_peaks_at_odd_multiples() {
        // Grid scan for local maxima, then bisection on the analytic slope.
        let wb = 0.7;
        let f = |t: f64| qfi_weak(1e-9, 1.0, 0.5, wb, t);
        let slope = |t: f64| (wb * t).sin();
        let tol = ToleranceSet::new(1e-13, 1e-14, 10_000).unwrap();
        let grid = crate::numerics::linspace(0.0, 7.0 * PI / wb, 2001);
        let peaks: Vec<f64> = grid
            .windows(3)
            .filter(|w| f(w[1]) >= f(w[0]) && f(w[1]) > f(w[2]))
            .map(|w| find_root(slope, w[0], w[2], &tol).unwrap().x)
            .collect();
        assert_eq!(peaks.len(), 3);
        for (l, t) in peaks.iter().enumerate() {
            let target = (2 * l + 1) as f64 * PI / wb;
            assert!((t - target).abs() <= 1e-9 * target, "l={l}: {t}");
        }
    }

    #[test]
    fn weak_limit_converges_quadratically() {
        let wb = 1.0;
        let t = 2.2;
        let err = |o: f64| {
            let e = qfi_exact(&RabiParams::new(wb, o).unwrap(), 1.0, t);
            let w = 4.0 * (0.5 * wb * t).sin().powi(2) / (wb * wb);
            (e / w - 1.0).abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!((e1 / e2 - 4.0).abs() < 0.05, "ratio {}", e1 / e2);
    }

    #[test]
    fn time_series_rows() {
        let p = RabiParams::new(1.0, 0.01).unwrap();
        let rows = time_series(&p, 2.0, &[0.0, 1.0, 3.0]);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].f_q, qfi_exact(&p, 2.0, 1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 200, rng_seed: proptest::test_runner::RngSeed::Fixed(11), ..ProptestConfig::default() })]

        #[test]
        fn normalization(wb in 0.0f64..3.0, o in -2.0f64..2.0, t in 0.0f64..50.0) {
            let s = evolve_pure(&RabiParams::new(wb, o).unwrap(), t);
            prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn population_matches_amplitude(wb in 0.0f64..3.0, o in -2.0f64..2.0, t in 0.0f64..50.0) {
            let p = RabiParams::new(wb, o).unwrap();
            let q = excited_population(&p, t);
            prop_assert!((q - evolve_pure(&p, t).beta.norm_sqr()).abs() <= 1e-14);
            prop_assert!(q >= 0.0 && q <= (o / p.omega_r).powi(2) + 1e-15);
        }

        #[test]
        fn qfi_matches_state_derivative(wb in 0.2f64..2.0, o in 0.05f64..1.5, t in 0.1f64..20.0) {
            let p = RabiParams::new(wb, o).unwrap();
            let exact = qfi_exact(&p, 1.0, t);
            let fd = qfi_from_state(&p, 1.0, t);
            prop_assert!((exact - fd).abs() <= 1e-6 * exact.max(1e-3), "{} vs {}", exact, fd);
        }

        #[test]
        fn cfi_matches_population_derivative(wb in 0.2f64..2.0, o in 0.05f64..1.5, t in 0.1f64..20.0) {
            let p = RabiParams::new(wb, o).unwrap();
            let q = excited_population(&p, t);
            prop_assume!(q > 1e-3 && q < 1.0 - 1e-3);
            let exact = cfi_population_exact(&p, 1.0, t);
            let fd = cfi_from_population(&p, 1.0, t);
            prop_assert!((exact - fd).abs() <= 1e-6 * exact.max(1e-3), "{} vs {}", exact, fd);
        }

        #[test]
        fn cfi_bounded_by_qfi(wb in 0.1f64..2.0, o in 0.0f64..2.0, t in 0.0f64..30.0) {
            let p = RabiParams::new(wb, o).unwrap();
            let scale = 1.0 / (wb * wb);
            prop_assert!(cfi_population_exact(&p, 1.0, t) * scale <= qfi_exact(&p, 1.0, t) * scale + 1e-10);
        }
    }
}
