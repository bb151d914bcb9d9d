//! Physical inputs and the derived effective-model quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Raw physical inputs. Ratios are relative to the trap frequency `omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    /// Mass [kg].
    pub m: f64,
    /// Trap angular frequency [rad/s].
    pub omega: f64,
    /// Detuning δ/ω.
    pub delta_ratio: f64,
    /// Squeezing parameter. Ignored when `pump_ratio` is set.
    pub r: f64,
    /// Alternative squeezing input A_p/δ = tanh 2r.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_ratio: Option<f64>,
    /// Duffing strength as a fraction of its critical value.
    pub d_frac: f64,
    /// Bare damping γ₀/ω.
    pub gamma0_ratio: f64,
    /// Pump phase [rad].
    pub theta: f64,
    /// Residual force mg − F [N].
    pub force_offset: f64,
    /// Gravitational acceleration [m/s²].
    pub g_nominal: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            m: 1e-9,
            omega: 2.0 * std::f64::consts::PI * 1e3,
            delta_ratio: 0.05,
            r: 1.0,
            pump_ratio: None,
            d_frac: 0.2,
            gamma0_ratio: 0.0,
            theta: std::f64::consts::PI,
            force_offset: 0.0,
            g_nominal: 9.81,
        }
    }
}

impl SensorConfig {
    /// Squeezing parameter actually used, taking `pump_ratio` into account.
    pub fn squeezing(&self) -> Result<f64> {
        match self.pump_ratio {
            Some(p) => squeeze_from_pump(p).map_err(|e| Error::config("pump_ratio", e.to_string())),
            None => Ok(self.r),
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite and > 0, got {v}")))
            }
        }
        fn finite(field: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite, got {v}")))
            }
        }
        positive("m", self.m)?;
        positive("omega", self.omega)?;
        positive("delta_ratio", self.delta_ratio)?;
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::config("r", format!("must be >= 0, got {}", self.r)));
        }
        if let Some(p) = self.pump_ratio {
            if !(p.is_finite() && (0.0..1.0).contains(&p)) {
                return Err(Error::config("pump_ratio", format!("must lie in [0, 1), got {p}")));
            }
        }
        if !(self.d_frac.is_finite() && (0.0..1.0).contains(&self.d_frac)) {
            return Err(Error::config(
                "d_frac",
                format!("must lie in [0, 1), got {}", self.d_frac),
            ));
        }
        if !(self.gamma0_ratio.is_finite() && self.gamma0_ratio >= 0.0) {
            return Err(Error::config(
                "gamma0_ratio",
                format!("must be >= 0, got {}", self.gamma0_ratio),
            ));
        }
        finite("theta", self.theta)?;
        finite("force_offset", self.force_offset)?;
        finite("g_nominal", self.g_nominal)?;
        if self.squeezing()? == 0.0 && self.d_frac > 0.0 {
            return Err(Error::config(
                "d_frac",
                "D_crit is unbounded at r = 0; use d_frac = 0 or raw parameters",
            ));
        }
        Ok(())
    }

    /// Validate and compute every effective quantity.
    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        let r = self.squeezing()?;
        let delta = self.delta_ratio * self.omega;
        let a_p = pump_from_squeeze(r) * delta;
        let (d, d_crit) = if r == 0.0 {
            (0.0, f64::INFINITY)
        } else {
            let d_crit = critical_duffing(delta, a_p, r)?;
            (self.d_frac * d_crit, d_crit)
        };
        let omega_b = qubit_frequency(delta, a_p, d, r)?;
        DerivedParams::assemble(
            self.m,
            self.omega,
            r,
            delta,
            a_p,
            d,
            d_crit,
            omega_b,
            self.gamma0_ratio * self.omega,
            self.force_offset,
        )
    }
}

/// All derived quantities in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedParams {
    pub m: f64,
    pub omega: f64,
    pub r: f64,
    pub a_p: f64,
    pub delta: f64,
    pub omega_b: f64,
    pub omega_b_over_omega: f64,
    pub u_b: f64,
    pub d: f64,
    /// `f64::INFINITY` at r = 0 (serialized as null).
    pub d_crit: f64,
    pub x0: f64,
    pub omega_g: f64,
    pub kappa_g: f64,
    pub gamma0: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub gamma_eff: f64,
    pub xi: f64,
}

impl DerivedParams {
    /// Raw mode: δ, A_p and D in rad/s, no reference to D_crit.
    #[allow(clippy::too_many_arguments)]
    pub fn from_raw(
        m: f64,
        omega: f64,
        delta: f64,
        a_p: f64,
        d: f64,
        gamma0: f64,
        force_offset: f64,
    ) -> Result<Self> {
        if !(m > 0.0 && omega > 0.0 && delta > 0.0) || !(m.is_finite() && omega.is_finite()) {
            return Err(Error::domain("from_raw", "m, omega and delta must be positive"));
        }
        if !(a_p >= 0.0 && d >= 0.0 && gamma0 >= 0.0) {
            return Err(Error::domain("from_raw", "A_p, D and gamma0 must be non-negative"));
        }
        if a_p >= delta {
            return Err(Error::domain("from_raw", "need A_p < delta for real squeezing"));
        }
        let r = squeeze_from_pump(a_p / delta)?;
        let d_crit = if r == 0.0 {
            f64::INFINITY
        } else {
            critical_duffing(delta, a_p, r)?
        };
        let omega_b = qubit_frequency(delta, a_p, d, r)?;
        Self::assemble(m, omega, r, delta, a_p, d, d_crit, omega_b, gamma0, force_offset)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        m: f64,
        omega: f64,
        r: f64,
        delta: f64,
        a_p: f64,
        d: f64,
        d_crit: f64,
        omega_b: f64,
        gamma0: f64,
        force_offset: f64,
    ) -> Result<Self> {
        if !(omega_b > 0.0) {
            return Err(Error::domain(
                "qubit_frequency",
                format!("qubit gap closed (omega_b = {omega_b:e})"),
            ));
        }
        let g = gravity_coupling(m, omega, r, force_offset)?;
        let rates = decoherence_rates(gamma0, r, omega_b)?;
        Ok(DerivedParams {
            m,
            omega,
            r,
            a_p,
            delta,
            omega_b,
            omega_b_over_omega: omega_b / omega,
            u_b: anharmonicity(d, r),
            d,
            d_crit,
            x0: g.x0,
            omega_g: g.omega_g,
            kappa_g: g.kappa_g,
            gamma0,
            gamma_x: rates.gamma_x,
            gamma_y: rates.gamma_y,
            gamma_z: rates.gamma_z,
            gamma_eff: rates.gamma_eff,
            xi: rates.xi,
        })
    }
}

/// r = atanh(A_p/δ)/2.
pub fn squeeze_from_pump(pump_ratio: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&pump_ratio) {
        return Err(Error::domain(
            "squeeze_from_pump",
            format!("pump ratio must lie in [0, 1), got {pump_ratio}"),
        ));
    }
    Ok(0.5 * pump_ratio.atanh())
}

/// A_p/δ = tanh 2r.
pub fn pump_from_squeeze(r: f64) -> f64 {
    (2.0 * r).tanh()
}

/// Duffing renormalization factor 8 cosh²r sinh²r + 4 sinh⁴r.
pub(crate) fn duffing_factor(r: f64) -> f64 {
    let (s, c) = (r.sinh(), r.cosh());
    8.0 * c * c * s * s + 4.0 * s.powi(4)
}

/// ω_b = √(δ² − A_p²) − D(8c²s² + 4s⁴). May be non-positive.
pub fn qubit_frequency(delta: f64, a_p: f64, d: f64, r: f64) -> Result<f64> {
    if !(delta >= a_p && a_p >= 0.0) {
        return Err(Error::domain(
            "qubit_frequency",
            format!("need delta >= A_p >= 0 (delta={delta:e}, A_p={a_p:e})"),
        ));
    }
    if !(d >= 0.0) {
        return Err(Error::domain("qubit_frequency", "D must be non-negative"));
    }
    Ok(bare_gap(delta, a_p) - d * duffing_factor(r))
}

fn bare_gap(delta: f64, a_p: f64) -> f64 {
    ((delta - a_p) * (delta + a_p)).sqrt()
}

/// U_b = (D/4)(3 cosh 4r + 1).
pub fn anharmonicity(d: f64, r: f64) -> f64 {
    0.25 * d * (3.0 * (4.0 * r).cosh() + 1.0)
}

/// D at which ω_b vanishes; `f64::INFINITY` at r = 0.
pub fn critical_duffing(delta: f64, a_p: f64, r: f64) -> Result<f64> {
    if !(delta > a_p && a_p >= 0.0) {
        return Err(Error::domain(
            "critical_duffing",
            format!("need delta > A_p >= 0 (delta={delta:e}, A_p={a_p:e})"),
        ));
    }
    if r < 0.0 {
        return Err(Error::domain("critical_duffing", "r must be non-negative"));
    }
    let f = duffing_factor(r);
    if f == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(bare_gap(delta, a_p) / f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GravityCoupling {
    /// Zero-point amplitude [m].
    pub x0: f64,
    /// Ω_g [rad/s].
    pub omega_g: f64,
    /// ∂_g Ω_g [rad/s per m/s²].
    pub kappa_g: f64,
}

pub fn gravity_coupling(m: f64, omega: f64, r: f64, force_offset: f64) -> Result<GravityCoupling> {
    if !(m > 0.0 && omega > 0.0) {
        return Err(Error::domain("gravity_coupling", "m and omega must be positive"));
    }
    let x0 = (HBAR / (2.0 * m * omega)).sqrt();
    let er = r.exp();
    Ok(GravityCoupling {
        x0,
        omega_g: 2.0 * er * force_offset * x0 / HBAR,
        kappa_g: 2.0 * m * x0 * er / HBAR,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceRates {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub gamma_eff: f64,
    pub xi: f64,
}

pub fn decoherence_rates(gamma0: f64, r: f64, omega_b: f64) -> Result<DecoherenceRates> {
    if !(gamma0 >= 0.0) {
        return Err(Error::domain("decoherence_rates", "gamma0 must be non-negative"));
    }
    if !(omega_b > 0.0) {
        return Err(Error::domain(
            "decoherence_rates",
            format!("Xi undefined for omega_b = {omega_b:e}"),
        ));
    }
    let gamma_x = 0.5 * gamma0 * (-2.0 * r).exp();
    let gamma_y = 0.5 * gamma0 * (2.0 * r).exp();
    Ok(DecoherenceRates {
        gamma_x,
        gamma_y,
        gamma_z: gamma0 * (2.0 * r).cosh(),
        gamma_eff: gamma_y,
        xi: gamma_y / omega_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn squeeze_examples() {
        assert_eq!(squeeze_from_pump(0.0).unwrap(), 0.0);
        assert!((squeeze_from_pump(2f64.tanh()).unwrap() - 1.0).abs() < 1e-14);
        assert!((squeeze_from_pump(0.5).unwrap() - 0.274_653_072_167_027).abs() < 1e-14);
        assert!(squeeze_from_pump(1.0).is_err());
        assert!(squeeze_from_pump(-0.1).is_err());
    }

    #[test]
    fn reference_operating_point() {
        let p = SensorConfig::default().derive().unwrap();
        let w = p.omega;
        assert!(rel(p.omega_b / w, 0.010_632_1) < 1e-5);
        assert!(rel(p.d_crit / w, 3.9160e-4) < 1e-4);
        assert!(rel(p.d / w, 7.832e-5) < 1e-4);
        assert!(rel(p.u_b / w, 1.623_67e-3) < 1e-5);
        assert!(rel(p.kappa_g.powi(2), 2.2303e22) < 1e-4);
        assert!((duffing_factor(1.0) - 33.937).abs() < 1e-3);
        assert!(rel(p.a_p, p.delta * 2f64.tanh()) < 1e-15);
        // Derived mode keeps (1 - d_frac) of the bare gap.
        assert!(rel(p.omega_b, 0.8 * (p.delta / 2f64.cosh())) < 1e-12);
    }

    #[test]
    fn qubit_frequency_examples() {
        let delta = 0.05;
        assert_eq!(qubit_frequency(delta, 0.0, 3.0, 0.0).unwrap(), delta);
        let a_p = delta * 0.7;
        let dc = critical_duffing(delta, a_p, 0.3).unwrap();
        assert!(qubit_frequency(delta, a_p, dc, 0.3).unwrap().abs() < 1e-17);
        assert!(qubit_frequency(delta, 2.0 * delta, 0.0, 0.0).is_err());
        assert_eq!(critical_duffing(delta, 0.0, 0.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn anharmonicity_examples() {
        assert_eq!(anharmonicity(2.5, 0.0), 2.5);
        assert_eq!(anharmonicity(0.0, 1.3), 0.0);
        assert!(rel(anharmonicity(7.832e-5, 1.0), 1.6237e-3) < 1e-4);
    }

    #[test]
    fn gravity_coupling_examples() {
        let w = 2.0 * std::f64::consts::PI * 1e3;
        let g1 = gravity_coupling(1e-9, w, 1.0, 0.0).unwrap();
        assert_eq!(g1.omega_g, 0.0);
        let g0 = gravity_coupling(1e-9, w, 0.0, 0.0).unwrap();
        assert!(rel(g1.kappa_g / g0.kappa_g, std::f64::consts::E) < 1e-15);
        let expected = 2.0 * 1e-9 * 1f64.exp().powi(2) / (HBAR * w);
        assert!(rel(g1.kappa_g.powi(2), expected) < 1e-12);
        let g = gravity_coupling(1e-9, w, 1.0, 1e-20).unwrap();
        assert!(rel(g.omega_g, 2.0 * 1f64.exp() * 1e-20 * g.x0 / HBAR) < 1e-15);
    }

    #[test]
    fn decoherence_examples() {
        let r0 = decoherence_rates(2.0, 0.0, 4.0).unwrap();
        assert_eq!((r0.gamma_x, r0.gamma_y, r0.gamma_z, r0.gamma_eff), (1.0, 1.0, 2.0, 1.0));
        assert_eq!(r0.xi, 0.25);
        let r1 = decoherence_rates(1e-4, 1.0, 0.010_632_1).unwrap();
        assert!((r1.xi - 0.034_749).abs() < 1e-5);
        assert!(decoherence_rates(1e-4, 1.0, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = SensorConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SensorConfig { r: -1.0, ..ok.clone() },
            SensorConfig { m: 0.0, ..ok.clone() },
            SensorConfig { d_frac: 1.0, ..ok.clone() },
            SensorConfig { gamma0_ratio: -1e-3, ..ok.clone() },
            SensorConfig { pump_ratio: Some(1.0), ..ok.clone() },
            SensorConfig { r: 0.0, ..ok.clone() },
        ] {
            assert!(bad.validate().unwrap_err().is_config(), "{bad:?}");
        }
        let r0 = SensorConfig { r: 0.0, d_frac: 0.0, ..ok.clone() }.derive().unwrap();
        assert_eq!(r0.d_crit, f64::INFINITY);
        assert_eq!(r0.omega_b, r0.delta);
        let via_pump = SensorConfig { pump_ratio: Some(2f64.tanh()), r: 0.0, ..ok }
            .derive()
            .unwrap();
        assert!((via_pump.r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn raw_mode_allows_duffing_at_zero_squeezing() {
        let p = DerivedParams::from_raw(1e-9, 1.0, 0.05, 0.0, 1e-3, 0.0, 0.0).unwrap();
        assert_eq!(p.omega_b, 0.05);
        assert_eq!(p.u_b, 1e-3);
        assert!(DerivedParams::from_raw(1e-9, 1.0, 0.05, 0.06, 0.0, 0.0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 256, rng_seed: proptest::test_runner::RngSeed::Fixed(7), ..ProptestConfig::default() })]

        #[test]
        fn pump_round_trip(x in 0.0f64..0.999) {
            let back = pump_from_squeeze(squeeze_from_pump(x).unwrap());
            prop_assert!((back - x).abs() <= 1e-13);
        }

        #[test]
        fn rate_identities(g in 0.0f64..1.0, r in 0.0f64..3.0) {
            let d = decoherence_rates(g, r, 1.0).unwrap();
            prop_assert!((d.gamma_z - d.gamma_x - d.gamma_y).abs() <= 1e-14 * d.gamma_z.max(1e-300));
            prop_assert!((d.gamma_x * d.gamma_y - 0.25 * g * g).abs() <= 1e-14 * (g * g).max(1e-300));
        }

        #[test]
        fn kappa_identity(m in 1e-12f64..1e-6, w in 1.0f64..1e5, r in 0.0f64..2.0) {
            let k = gravity_coupling(m, w, r, 0.0).unwrap().kappa_g;
            let expected = 2.0 * m * (2.0 * r).exp() / (HBAR * w);
            prop_assert!(((k * k) - expected).abs() <= 1e-12 * expected);
        }

        #[test]
        fn omega_b_monotone(r in 0.05f64..1.5, d1 in 0.0f64..0.99, step in 1e-3f64..0.5) {
            let cfg = |r: f64, d: f64| SensorConfig { r, d_frac: d, ..SensorConfig::default() };
            let d2 = (d1 + step).min(0.999);
            prop_assume!(d2 > d1);
            let a = cfg(r, d1).derive().unwrap().omega_b;
            let b = cfg(r, d2).derive().unwrap().omega_b;
            prop_assert!(b < a);
            let c = cfg(r + step, d1).derive().unwrap().omega_b;
            prop_assert!(c < a);
        }

        #[test]
        fn anharmonicity_increasing(d in 1e-6f64..1.0, r in 0.0f64..2.0, step in 1e-3f64..1.0) {
            prop_assert!(anharmonicity(d, r + step) > anharmonicity(d, r));
        }
    }
}
