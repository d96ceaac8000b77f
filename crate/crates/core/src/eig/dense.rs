//! Direct route for small pencils: Cholesky reduction of `Ch` to a standard
//! eigenproblem, solved densely for the pencil and for its transpose.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// All eigenpairs `(λ, x)` of `B x = λ C x` for symmetric positive definite `C`,
/// plus those of the transposed pencil `Bᵀ z = μ C z`.
pub(crate) struct DenseSpectrum {
    pub right: Vec<(Complex64, Vec<Complex64>)>,
    pub transposed: Vec<(Complex64, Vec<Complex64>)>,
}

pub(crate) fn dense_spectrum(b: &CsrMatrix, c: &CsrMatrix) -> Result<DenseSpectrum> {
    let n = b.nrows();
    let cd = c.to_dense();
    let llt = cd
        .llt(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("mass matrix is not positive definite: {e:?}")))?;
    let l = llt.L().to_owned();
    let bd = b.to_dense();

    // M = L⁻¹ B L⁻ᵀ, formed as two triangular solves.
    let mut y = bd.clone();
    l.solve_lower_triangular_in_place(y.as_mut());
    let mut mt = y.transpose().to_owned();
    l.solve_lower_triangular_in_place(mt.as_mut());
    let m = mt.transpose().to_owned();

    let back = |w: Vec<Complex64>| -> Vec<Complex64> {
        // x = L⁻ᵀ w, real and imaginary parts separately.
        let mut re = Mat::<f64>::from_fn(n, 2, |i, j| if j == 0 { w[i].re } else { w[i].im });
        l.transpose().solve_upper_triangular_in_place(re.as_mut());
        (0..n).map(|i| Complex64::new(re[(i, 0)], re[(i, 1)])).collect()
    };

    let spectrum = |a: &Mat<f64>| -> Result<Vec<(Complex64, Vec<Complex64>)>> {
        let evd = a.eigen().map_err(|e| Error::LinearAlgebra(format!("dense eigensolver failed: {e:?}")))?;
        let s = evd.S();
        let u = evd.U();
        Ok((0..n)
            .map(|j| {
                let w: Vec<Complex64> = (0..n).map(|i| u[(i, j)]).collect();
                (s[j], back(w))
            })
            .collect())
    };
    let right = spectrum(&m)?;
    let transposed = spectrum(&mt)?;
    Ok(DenseSpectrum { right, transposed })
}
