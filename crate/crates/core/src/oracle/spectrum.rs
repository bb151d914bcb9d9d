use num_complex::Complex64;
use serde::Serialize;

use super::fock::{build_operators, build_squeeze, tail_weight, SqueezeGenerator};
use crate::error::{Error, Result};
use crate::params::{anharmonicity, qubit_frequency, squeeze_from_pump};
use crate::rwa::{rwa_ratios, DEFAULT_EPSILON};

/// Squeezed-Fock columns with more than this weight in the top 20% of the
/// truncated space are considered unresolved.
const TAIL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub delta: f64,
    pub a_p: f64,
    pub d: f64,
    pub r: f64,
    pub theta: f64,
    pub dim: usize,
    /// Squeezed-Fock levels kept in the dense solve.
    pub kept_levels: usize,
    pub generator: SqueezeGenerator,
    /// Exact (E₁ − E₀, E₂ − E₁).
    pub gaps_exact: [f64; 2],
    /// Effective (ω_b, ω_b − 2U_b).
    pub gaps_effective: [f64; 2],
    pub rel_errors: [f64; 2],
    pub max_ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Exact spectrum of the rotating-frame Hamiltonian against the effective
/// ladder E_n = ω_b n − U_b n(n − 1).
///
/// The quartic term makes H_rot unbounded below, so the lowest eigenvalues of
/// a truncated matrix belong to the truncation edge. The comparison is made
/// inside the well of the effective ladder instead: H_rot is transformed
/// exactly into the squeezed-Fock basis S|n⟩ and restricted to levels up to
/// the ladder maximum that the truncation still resolves. Eigenstates are
/// matched to |0⟩, |1⟩, |2⟩ by overlap. Gaps are in the units of the inputs.
pub fn spectrum_check(delta: f64, a_p: f64, d: f64, theta: f64, dim: usize) -> Result<SpectrumReport> {
    if !(delta > 0.0 && a_p >= 0.0 && a_p < delta && d >= 0.0) {
        return Err(Error::domain("spectrum_check", "need delta > A_p >= 0 and D >= 0"));
    }
    let r = squeeze_from_pump(a_p / delta)?;
    let omega_b = qubit_frequency(delta, a_p, d, r)?;
    if !(omega_b > 0.0) {
        return Err(Error::domain("spectrum_check", "qubit gap closed"));
    }
    let u_b = anharmonicity(d, r);

    let ops = build_operators(dim)?;
    let sq = build_squeeze(r, theta, dim)?;
    let resolved = (0..dim)
        .find(|&n| tail_weight(&sq.s, n, 0.2) > TAIL_LIMIT)
        .unwrap_or(dim);
    if resolved < 3 {
        return Err(Error::numerical(
            "spectrum_check",
            format!("dim {dim}: ground-state support reaches the top 20% of levels"),
        ));
    }
    let ladder = |n: usize| omega_b * n as f64 - u_b * (n * n.saturating_sub(1)) as f64;
    let top = if u_b > 0.0 {
        (0..resolved)
            .max_by(|&i, &j| ladder(i).total_cmp(&ladder(j)))
            .unwrap_or(0)
    } else {
        resolved - 1
    };
    let k = (top + 1).min(resolved);
    if k < 3 {
        return Err(Error::numerical(
            "spectrum_check",
            format!("effective well holds only {k} levels"),
        ));
    }

    let c = |x: f64| Complex64::new(x, 0.0);
    let a2 = &ops.a * &ops.a;
    let ad2 = &ops.a_dag * &ops.a_dag;
    let h = ops.n_op.map(|x| x * delta) - (&ad2 * &a2).map(|x| x * d)
        + (a2.map(|x| x * Complex64::from_polar(1.0, -theta))
            + ad2.map(|x| x * Complex64::from_polar(1.0, theta)))
        .map(|x| x * c(0.5 * a_p));
    let basis = sq.s.columns(0, k).into_owned();
    let hb = basis.adjoint() * h * &basis;
    let hb = (&hb + hb.adjoint()).map(|x| x * 0.5);
    let eig = hb.symmetric_eigen();

    let mut used = Vec::with_capacity(3);
    let mut energies = [0.0; 3];
    for (level, e) in energies.iter_mut().enumerate() {
        let j = (0..k)
            .filter(|j| !used.contains(j))
            .max_by(|&i, &j| {
                eig.eigenvectors[(level, i)]
                    .norm_sqr()
                    .total_cmp(&eig.eigenvectors[(level, j)].norm_sqr())
            })
            .expect("k >= 3");
        used.push(j);
        *e = eig.eigenvalues[j];
    }
    let gaps_exact = [energies[1] - energies[0], energies[2] - energies[1]];
    let gaps_effective = [omega_b, omega_b - 2.0 * u_b];
    let rel_errors = [
        (gaps_exact[0] - gaps_effective[0]).abs() / gaps_effective[0].abs(),
        (gaps_exact[1] - gaps_effective[1]).abs() / gaps_effective[1].abs(),
    ];
    let max_ratio = rwa_ratios(d, r, omega_b, DEFAULT_EPSILON)?.max_ratio;
    let tolerance = if max_ratio > 0.0 { 5.0 * max_ratio } else { 1e-8 };
    Ok(SpectrumReport {
        delta,
        a_p,
        d,
        r,
        theta,
        dim,
        kept_levels: k,
        generator: sq.generator,
        gaps_exact,
        gaps_effective,
        rel_errors,
        max_ratio,
        tolerance,
        pass: rel_errors.iter().all(|e| *e <= tolerance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{critical_duffing, pump_from_squeeze};
    use std::f64::consts::PI;

    #[test]
    fn harmonic_oscillator() {
        let rep = spectrum_check(0.05, 0.0, 0.0, PI, 40).unwrap();
        assert!((rep.gaps_exact[0] - 0.05).abs() < 1e-14);
        assert!((rep.gaps_exact[1] - 0.05).abs() < 1e-14);
        assert!(rep.pass);
    }

    #[test]
    fn pure_squeezing_is_diagonalized() {
        let a_p = 0.05 * pump_from_squeeze(0.5);
        let rep = spectrum_check(0.05, a_p, 0.0, PI, 80).unwrap();
        let bare = (0.05f64 * 0.05 - a_p * a_p).sqrt();
        for g in rep.gaps_exact {
            assert!((g - bare).abs() < 1e-8 * bare, "{g} vs {bare}");
        }
    }

    #[test]
    fn errors_shrink_with_duffing() {
        let (delta, r) = (0.05, 0.5);
        let a_p = delta * pump_from_squeeze(r);
        let dc = critical_duffing(delta, a_p, r).unwrap();
        let errs: Vec<f64> = [0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|f| {
                let rep = spectrum_check(delta, a_p, f * dc, PI, 80).unwrap();
                rep.rel_errors[0].max(rep.rel_errors[1])
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn too_small_truncation() {
        assert!(spectrum_check(0.05, 0.05 * pump_from_squeeze(1.0), 0.0, PI, 30).is_err());
    }
}
