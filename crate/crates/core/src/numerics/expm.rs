use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

// Diagonal Padé(6,6) coefficients of exp: c_k = (12-k)! 6! / (12! k! (6-k)!).
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15_840.0,
    1.0 / 665_280.0,
];

// Scaled 1-norm bound; keeps the Padé(6,6) truncation error below f64 epsilon.
const SCALED_NORM: f64 = 0.25;

/// Matrix exponential of a real matrix (scaling and squaring, Padé(6,6)).
///
/// Intended for the 3×3 drift matrix and the 7×7 augmented sensitivity
/// system, but valid for any square size.
pub fn expm_small(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    expm(m)
}

/// Complex counterpart of [`expm_small`], used for Fock-space generators.
pub fn expm_complex(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    expm(m)
}

pub fn expm<T>(m: &DMatrix<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::domain("expm", "matrix must be square"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("expm", "matrix has non-finite entries"));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let norm = one_norm(m);
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scale = T::from_real(2f64.powi(-squarings));
    let a = m * scale;

    let ident = DMatrix::<T>::identity(n, n);
    let mut num = ident.clone() * T::from_real(PADE6[0]);
    let mut den = num.clone();
    let mut power = ident;
    for (k, &c) in PADE6.iter().enumerate().skip(1) {
        power = &power * &a;
        let term = &power * T::from_real(c);
        num += &term;
        if k % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }

    let mut result = den
        .lu()
        .solve(&num)
        .ok_or_else(|| Error::numerical("expm", "singular Padé denominator"))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

fn one_norm<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
{
    m.column_iter()
        .map(|col| col.iter().map(|x| x.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}
