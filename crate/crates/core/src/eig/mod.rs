//! Right and left eigenpairs of the pencil `Bh x = λ Ch x`.
//!
//! Small systems use a dense reduction; larger ones use shift-and-invert
//! Arnoldi on `(Bh − σCh)⁻¹Ch` and on its transpose, sharing one sparse LU
//! factorisation.

mod arnoldi;
mod dense;

use faer::linalg::solvers::SolveCore;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, MatMut};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dot_conj, norm2, CsrMatrix};
use crate::vem::GlobalSystem;

/// Relative eigenvalue distance within which a left vector is matched to a right one.
pub const PAIRING_TOL: f64 = 1e-6;

/// One eigenvalue with its primal (right) and dual (left) coefficient vectors.
///
/// `left` holds the coefficients of the discrete dual eigenfunction, so
/// `Bhᵀ left = conj(λ) Ch left` and `leftᴴ Ch right = 1` after normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: Complex64,
    /// Eigenvalue of the dual problem, `conj(λ)` up to solver accuracy.
    pub dual_lambda: Complex64,
    pub right: Vec<Complex64>,
    pub left: Vec<Complex64>,
    /// `‖Bh·right − λ·Ch·right‖₂ / ‖Ch·right‖₂`.
    pub residual_right: f64,
    /// `‖Bhᵀ·left − conj(λ)·Ch·left‖₂ / ‖Ch·left‖₂`.
    pub residual_left: f64,
    /// Set when no left eigenvalue lay within [`PAIRING_TOL`] of `λ`.
    pub pairing_warning: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub k: usize,
    pub shift: Complex64,
    pub tol: f64,
    /// Maximum number of Arnoldi restarts.
    pub max_iterations: usize,
    pub dense_threshold: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { k: 1, shift: Complex64::new(0.0, 0.0), tol: 1e-10, max_iterations: 300, dense_threshold: 500, seed: 0x5eed }
    }
}

impl SolveOptions {
    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("number of eigenpairs must be at least 1".into()));
        }
        if self.k > n {
            return Err(Error::InvalidArgument(format!("{} eigenpairs requested but only {n} free dofs", self.k)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

pub fn solve_pairs(system: &GlobalSystem, opts: &SolveOptions) -> Result<Vec<EigenPair>> {
    solve_pencil(&system.bh, &system.ch, opts)
}

/// The `k` eigenpairs of `B x = λ C x` nearest `opts.shift`, sorted by
/// `|λ − σ|`, then real part, then imaginary part, biorthonormalised.
pub fn solve_pencil(b: &CsrMatrix, c: &CsrMatrix, opts: &SolveOptions) -> Result<Vec<EigenPair>> {
    let n = b.nrows();
    opts.validate(n)?;
    let (mut right, mut transposed) = if n <= opts.dense_threshold {
        let spectrum = dense::dense_spectrum(b, c)?;
        (spectrum.right, spectrum.transposed)
    } else {
        iterative(b, c, opts)?
    };
    sort_by_shift(&mut right, opts.shift);
    sort_by_shift(&mut transposed, opts.shift);
    right.truncate(opts.k);

    let mut pairs = Vec::with_capacity(opts.k);
    for (lambda, x) in right {
        let (j, dist) = transposed
            .iter()
            .enumerate()
            .map(|(j, (mu, _))| (j, (lambda - mu).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("transposed spectrum is not empty");
        let (mu, z) = &transposed[j];
        let left: Vec<Complex64> = z.iter().map(|v| v.conj()).collect();
        pairs.push(EigenPair {
            lambda,
            dual_lambda: mu.conj(),
            right: x,
            left,
            residual_right: f64::NAN,
            residual_left: f64::NAN,
            pairing_warning: dist > PAIRING_TOL * lambda.norm(),
        });
    }
    let mut pairs = normalize_biorthogonal(pairs, c)?;
    for p in &mut pairs {
        p.residual_right = pencil_residual(b, c, p.lambda, &p.right, false);
        p.residual_left = pencil_residual(b, c, p.lambda.conj(), &p.left, true);
    }
    Ok(pairs)
}

/// Normalises each pair so that `rightᴴ C right = 1`, the largest-modulus
/// entry of `right` is real positive, and `leftᴴ C right = 1`.
pub fn normalize_biorthogonal(pairs: Vec<EigenPair>, c: &CsrMatrix) -> Result<Vec<EigenPair>> {
    pairs
        .into_iter()
        .map(|mut p| {
            let cr = c.matvec_complex(&p.right);
            let norm = dot_conj(&p.right, &cr).re.sqrt();
            if !(norm > 0.0) {
                return Err(Error::DefectivePair(0.0));
            }
            let max = p.right.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let pivot = p.right.iter().find(|v| v.norm() >= (1.0 - 1e-10) * max).copied().unwrap();
            let scale = pivot.conj() / (pivot.norm() * norm);
            p.right.iter_mut().for_each(|v| *v *= scale);

            let cr = c.matvec_complex(&p.right);
            let gram = dot_conj(&p.left, &cr);
            let left_norm = dot_conj(&p.left, &c.matvec_complex(&p.left)).re.sqrt();
            if !(gram.norm() >= 1e-12 * left_norm) {
                return Err(Error::DefectivePair(gram.norm() / left_norm));
            }
            let inv = gram.conj().inv();
            p.left.iter_mut().for_each(|v| *v *= inv);
            Ok(p)
        })
        .collect()
}

/// Relative residual of `B x = λ C x` (or `Bᵀ x = λ C x`).
pub fn pencil_residual(b: &CsrMatrix, c: &CsrMatrix, lambda: Complex64, x: &[Complex64], transpose: bool) -> f64 {
    let bx = if transpose { b.transpose_matvec_complex(x) } else { b.matvec_complex(x) };
    let cx = c.matvec_complex(x);
    let r: Vec<Complex64> = bx.iter().zip(&cx).map(|(&u, &v)| u - lambda * v).collect();
    norm2(&r) / norm2(&cx)
}

fn sort_by_shift(list: &mut [(Complex64, Vec<Complex64>)], shift: Complex64) {
    list.sort_by(|a, b| {
        let (da, db) = ((a.0 - shift).norm(), (b.0 - shift).norm());
        let scale = a.0.norm().max(b.0.norm());
        if (da - db).abs() > 1e-10 * da.max(db) {
            da.total_cmp(&db)
        } else if (a.0.re - b.0.re).abs() > 1e-10 * scale {
            a.0.re.total_cmp(&b.0.re)
        } else {
            a.0.im.total_cmp(&b.0.im)
        }
    });
}

fn iterative(
    b: &CsrMatrix,
    c: &CsrMatrix,
    opts: &SolveOptions,
) -> Result<(Vec<(Complex64, Vec<Complex64>)>, Vec<(Complex64, Vec<Complex64>)>)> {
    let n = b.nrows();
    let sigma = opts.shift;
    let mut triplets: Vec<Triplet<usize, usize, Complex64>> =
        b.triplets().map(|(i, j, v)| Triplet::new(i, j, Complex64::new(v, 0.0))).collect();
    triplets.extend(c.triplets().map(|(i, j, v)| Triplet::new(i, j, -sigma * v)));
    let shifted = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::LinearAlgebra(format!("sparse matrix construction failed: {e:?}")))?;
    let lu = shifted
        .sp_lu()
        .map_err(|e| Error::LinearAlgebra(format!("sparse LU of Bh - σCh failed (shift on an eigenvalue?): {e:?}")))?;

    // One extra pair so a complex-conjugate couple straddling the cut is
    // found by both runs.
    let nev = (opts.k + 1).min(n.saturating_sub(2)).max(opts.k);
    let ncv = (2 * nev + 1).max(nev + 20).min(n);
    let run = |transpose: bool| -> Result<Vec<(Complex64, Vec<Complex64>)>> {
        let op = |x: &[Complex64], y: &mut [Complex64]| {
            let cx = c.matvec_complex(x);
            y.copy_from_slice(&cx);
            let rhs = MatMut::from_column_major_slice_mut(y, n, 1);
            if transpose {
                lu.solve_transpose_in_place_with_conj(Conj::No, rhs);
            } else {
                lu.solve_in_place_with_conj(Conj::No, rhs);
            }
        };
        let accept = |theta: Complex64, y: &[Complex64]| {
            let lambda = sigma + theta.inv();
            let r = pencil_residual(b, c, lambda, y, transpose);
            (r, r <= opts.tol)
        };
        let aopts = arnoldi::ArnoldiOptions {
            nev,
            ncv,
            max_restarts: opts.max_iterations,
            seed: opts.seed,
            stream: transpose as u64,
        };
        let ritz = arnoldi::iram(n, op, accept, &aopts)?;
        Ok(ritz.values.into_iter().map(|t| sigma + t.inv()).zip(ritz.vectors).collect())
    };
    Ok((run(false)?, run(true)?))
}

#[cfg(test)]
mod tests;
