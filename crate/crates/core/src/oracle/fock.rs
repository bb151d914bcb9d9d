use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::expm_complex;

type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone)]
pub struct FockOperators {
    pub dim: usize,
    pub a: CMat,
    pub a_dag: CMat,
    pub n_op: CMat,
}

pub fn build_operators(dim: usize) -> Result<FockOperators> {
    if dim < 2 {
        return Err(Error::domain("build_operators", "need at least two levels"));
    }
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    let n_op = CMat::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| Complex64::new(i as f64, 0.0)));
    Ok(FockOperators { dim, a, a_dag, n_op })
}

/// Which generator produced a squeeze matrix obeying S a S† = cosh r·a + e^{iθ} sinh r·a†.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeGenerator {
    /// (ξ* a² + ξ a†²)/2 as written.
    AsWritten,
    /// (ξ* a² − ξ a†²)/2.
    FlippedCreation,
    /// (−ξ* a² + ξ a†²)/2.
    FlippedAnnihilation,
}

#[derive(Debug, Clone)]
pub struct Squeeze {
    pub s: CMat,
    pub generator: SqueezeGenerator,
    /// Max deviation of S a − (cosh r·a + e^{iθ} sinh r·a†) S on squeezed-Fock
    /// columns n <= 2, rows below dim/2.
    pub bogoliubov_residual: f64,
    /// Max deviation of S†S from identity on the same block.
    pub unitarity_residual: f64,
}

/// Minimum truncation for squeezing r.
pub fn min_squeeze_dim(r: f64) -> usize {
    20 + (20.0 * r.sinh().powi(2)).ceil() as usize
}

/// Squeeze matrix for ξ = r e^{iθ}, checked against the Bogoliubov relation.
///
/// The generator as written is Hermitian; candidates are tried in order and
/// the first one meeting the 1e-6 residual is kept.
///
/// The relation is tested as S a = T S on the lowest squeezed-Fock columns:
/// S a S† on a low block sums over every column of S, including the ones
/// corrupted by the truncation edge, and fails for any realistic `dim`.
pub fn build_squeeze(r: f64, theta: f64, dim: usize) -> Result<Squeeze> {
    if !(r >= 0.0 && r.is_finite() && theta.is_finite()) {
        return Err(Error::domain("build_squeeze", "need finite r >= 0 and theta"));
    }
    let need = min_squeeze_dim(r);
    if dim < need {
        return Err(Error::domain(
            "build_squeeze",
            format!("dim {dim} too small for r = {r}; need at least {need}"),
        ));
    }
    let ops = build_operators(dim)?;
    let xi = Complex64::from_polar(r, theta);
    let a2 = &ops.a * &ops.a;
    let ad2 = &ops.a_dag * &ops.a_dag;
    let half = Complex64::new(0.5, 0.0);
    let target = ops.a.map(|x| x * r.cosh()) + ops.a_dag.map(|x| x * Complex64::from_polar(r.sinh(), theta));
    let block = dim / 2;

    let mut best: Option<Squeeze> = None;
    for (generator, sa, sc) in [
        (SqueezeGenerator::AsWritten, 1.0, 1.0),
        (SqueezeGenerator::FlippedCreation, 1.0, -1.0),
        (SqueezeGenerator::FlippedAnnihilation, -1.0, 1.0),
    ] {
        let g = (a2.map(|x| x * xi.conj() * sa) + ad2.map(|x| x * xi * sc)).map(|x| x * half);
        let s = expm_complex(&g)?;
        let lhs = &s * &ops.a;
        let rhs = &target * &s;
        let bog = max_abs_diff(&lhs.columns(0, 3).into_owned(), &rhs.columns(0, 3).into_owned(), block, 3);
        let sts = s.adjoint() * &s;
        let uni = max_abs_diff(&sts, &CMat::identity(dim, dim), block, block);
        let cand = Squeeze { s, generator, bogoliubov_residual: bog, unitarity_residual: uni };
        if bog <= 1e-6 {
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|b| bog < b.bogoliubov_residual) {
            best = Some(cand);
        }
    }
    let best = best.expect("three candidates");
    if best.bogoliubov_residual > 1e-4 {
        return Err(Error::numerical(
            "build_squeeze",
            format!(
                "Bogoliubov residual {:e} with dim {dim}; truncation too small",
                best.bogoliubov_residual
            ),
        ));
    }
    Ok(best)
}

fn max_abs_diff(a: &CMat, b: &CMat, rows: usize, cols: usize) -> f64 {
    let mut m = 0.0f64;
    for j in 0..cols {
        for i in 0..rows {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// Weight of column `n` of `s` in the top fraction of the Fock levels.
pub(crate) fn tail_weight(s: &CMat, n: usize, top_fraction: f64) -> f64 {
    let dim = s.nrows();
    let start = ((1.0 - top_fraction) * dim as f64).floor() as usize;
    (start..dim).map(|i| s[(i, n)].norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_matrices() {
        let two = build_operators(2).unwrap();
        assert_eq!(two.a[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(two.a.iter().filter(|x| x.norm() != 0.0).count(), 1);

        let ops = build_operators(12).unwrap();
        assert_eq!(ops.a_dag, ops.a.adjoint());
        let n = &ops.a_dag * &ops.a;
        assert!((n - &ops.n_op).camax() < 1e-14);
        let comm = &ops.a * &ops.a_dag - &ops.a_dag * &ops.a;
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j && i < 11 { 1.0 } else if i == j { -11.0 } else { 0.0 };
                assert!((comm[(i, j)].re - expect).abs() < 1e-12, "({i},{j})");
            }
        }
        assert!(build_operators(1).is_err());
    }

    #[test]
    fn identity_at_zero_squeezing() {
        let sq = build_squeeze(0.0, std::f64::consts::PI, 24).unwrap();
        assert!((sq.s - CMat::identity(24, 24)).camax() < 1e-15);
    }

    #[test]
    fn generator_flip_is_recorded() {
        let sq = build_squeeze(0.5, std::f64::consts::PI, 40).unwrap();
        assert_ne!(sq.generator, SqueezeGenerator::AsWritten);
        assert!(sq.bogoliubov_residual <= 1e-6);
        assert!(sq.unitarity_residual <= 1e-8);
    }

    #[test]
    fn squeezed_vacuum_phonons() {
        for (r, dim) in [(0.25, 80), (0.5, 80), (1.0, 80), (1.5, 200)] {
            let sq = build_squeeze(r, 0.7, dim).unwrap();
            let col = sq.s.column(0);
            let mean: f64 = (0..dim).map(|i| i as f64 * col[i].norm_sqr()).sum();
            assert!((mean - r.sinh().powi(2)).abs() < 1e-6, "r={r}: {mean}");
        }
    }

    #[test]
    fn truncation_guard() {
        assert!(build_squeeze(1.0, 0.0, 30).is_err());
        assert_eq!(min_squeeze_dim(0.0), 20);
    }
}
