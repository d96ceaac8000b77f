//! Implicitly restarted Arnoldi iteration for the eigenvalues of largest
//! modulus of a complex linear operator, with exact shifts.

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot_conj, norm2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) struct ArnoldiOptions {
    pub nev: usize,
    pub ncv: usize,
    pub max_restarts: usize,
    pub seed: u64,
    pub stream: u64,
}

/// Converged Ritz pairs, largest modulus first.
pub(crate) struct RitzPairs {
    pub values: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Runs the restarted iteration until `accept` reports every wanted Ritz pair
/// converged. `accept(θ, y)` returns the residual measure of a candidate and
/// whether it passes.
pub(crate) fn iram<Op, Acc>(n: usize, mut op: Op, mut accept: Acc, opts: &ArnoldiOptions) -> Result<RitzPairs>
where
    Op: FnMut(&[Complex64], &mut [Complex64]),
    Acc: FnMut(Complex64, &[Complex64]) -> (f64, bool),
{
    let k = opts.nev;
    let m = opts.ncv.min(n);
    if k == 0 || k >= m && m < n {
        return Err(Error::InvalidArgument(format!("Arnoldi needs 0 < nev < ncv (nev {k}, ncv {m})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(opts.stream);

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![ZERO; m]; m + 1];
    let mut v0 = random_vector(n, &mut rng);
    let nrm = norm2(&v0);
    v0.iter_mut().for_each(|x| *x /= nrm);
    basis.push(v0);

    let mut residuals = vec![f64::INFINITY; k];
    let mut start = 0;
    for restart in 0..=opts.max_restarts {
        // Extend the factorisation to length m.
        for j in start..m {
            let mut w = vec![ZERO; n];
            op(&basis[j], &mut w);
            let wn0 = norm2(&w);
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, c) in coeffs.into_iter().enumerate() {
                h[i][j] += c;
            }
            let mut beta = norm2(&w);
            if beta <= 1e-12 * wn0.max(f64::MIN_POSITIVE) {
                // Invariant subspace: continue with a fresh direction.
                beta = 0.0;
                let mut r = random_vector(n, &mut rng);
                orthogonalize(&basis, &mut r);
                let rn = norm2(&r);
                w = r.into_iter().map(|x| x / rn).collect();
            } else {
                w.iter_mut().for_each(|x| *x /= beta);
            }
            h[j + 1][j] = Complex64::new(beta, 0.0);
            if basis.len() == j + 1 {
                basis.push(w);
            } else {
                basis[j + 1] = w;
            }
        }

        // Ritz values of the m×m Hessenberg block, largest modulus first.
        let hm = Mat::<Complex64>::from_fn(m, m, |i, j| h[i][j]);
        let evd = hm.eigen().map_err(|e| Error::LinearAlgebra(format!("Hessenberg eigensolve failed: {e:?}")))?;
        let mut ritz: Vec<(Complex64, Vec<Complex64>)> = (0..m)
            .map(|j| (evd.S()[j], (0..m).map(|i| evd.U()[(i, j)]).collect()))
            .collect();
        ritz.sort_by(|a, b| b.0.norm().total_cmp(&a.0.norm()));

        let beta_m = h[m][m - 1].re;
        let mut all = true;
        let mut nconv = 0;
        let mut vectors = Vec::with_capacity(k);
        for (i, (theta, s)) in ritz.iter().take(k).enumerate() {
            let estimate = beta_m * s[m - 1].norm() / s.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            // Only pay for a full residual once the cheap estimate is small.
            if estimate <= 1e-6 * theta.norm() || restart == opts.max_restarts {
                let y = combine(&basis[..m], s);
                let (res, ok) = accept(*theta, &y);
                residuals[i] = res;
                if ok {
                    nconv += 1;
                    vectors.push(y);
                    continue;
                }
            } else {
                residuals[i] = f64::INFINITY;
            }
            all = false;
        }
        if all {
            return Ok(RitzPairs {
                values: ritz.iter().take(k).map(|r| r.0).collect(),
                vectors,
            });
        }
        if restart == opts.max_restarts || m == n {
            break;
        }

        // Exact shifts: the unwanted Ritz values, keeping a few extra vectors
        // once some pairs have converged to avoid stagnation.
        let keep = (k + nconv.min((m - k) / 2)).max(k);
        let shifts: Vec<Complex64> = ritz[keep..].iter().map(|r| r.0).collect();
        let mut q = identity(m);
        let mut hm: Vec<Vec<Complex64>> = h[..m].iter().map(|row| row.clone()).collect();
        for &mu in &shifts {
            shifted_qr_step(&mut hm, &mut q, mu);
        }

        // V ← V Q[:, :keep], f ← v_keep h_keep + f σ.
        let new_basis: Vec<Vec<Complex64>> = (0..=keep)
            .map(|j| {
                let col: Vec<Complex64> = (0..m).map(|i| q[i][j]).collect();
                combine(&basis[..m], &col)
            })
            .collect();
        let sigma = q[m - 1][keep - 1];
        let mut f: Vec<Complex64> = new_basis[keep]
            .iter()
            .zip(&basis[m])
            .map(|(&v, &fm)| v * hm[keep][keep - 1] + fm * (h[m][m - 1] * sigma))
            .collect();
        basis.truncate(0);
        basis.extend(new_basis.into_iter().take(keep));
        orthogonalize(&basis, &mut f);
        let beta = norm2(&f);
        for row in h.iter_mut() {
            row.iter_mut().for_each(|x| *x = ZERO);
        }
        for i in 0..keep {
            for j in 0..keep {
                h[i][j] = hm[i][j];
            }
        }
        if beta > 0.0 {
            f.iter_mut().for_each(|x| *x /= beta);
        } else {
            f = random_vector(n, &mut rng);
            orthogonalize(&basis, &mut f);
            let rn = norm2(&f);
            f.iter_mut().for_each(|x| *x /= rn);
        }
        h[keep][keep - 1] = Complex64::new(beta, 0.0);
        basis.push(f);
        start = keep;
    }
    Err(Error::NotConverged { iterations: opts.max_restarts, residuals })
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn identity(m: usize) -> Vec<Vec<Complex64>> {
    (0..m)
        .map(|i| (0..m).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { ZERO }).collect())
        .collect()
}

/// `Σ_j c_j v_j`.
fn combine(basis: &[Vec<Complex64>], c: &[Complex64]) -> Vec<Complex64> {
    let n = basis[0].len();
    let mut out = vec![ZERO; n];
    for (v, &cj) in basis.iter().zip(c) {
        if cj != ZERO {
            out.iter_mut().zip(v).for_each(|(o, &x)| *o += x * cj);
        }
    }
    out
}

/// Classical Gram–Schmidt with one reorthogonalisation pass; returns the
/// accumulated projection coefficients.
fn orthogonalize(basis: &[Vec<Complex64>], w: &mut [Complex64]) -> Vec<Complex64> {
    let mut total = vec![ZERO; basis.len()];
    for _ in 0..2 {
        let coeffs: Vec<Complex64> = basis.iter().map(|v| dot_conj(v, w)).collect();
        for (v, &c) in basis.iter().zip(&coeffs) {
            w.iter_mut().zip(v).for_each(|(x, &y)| *x -= y * c);
        }
        total.iter_mut().zip(&coeffs).for_each(|(t, &c)| *t += c);
    }
    total
}

/// One explicit QR step `H - μI = QR`, `H ← RQ + μI`, accumulating `Q` into `q`.
fn shifted_qr_step(h: &mut [Vec<Complex64>], q: &mut [Vec<Complex64>], mu: Complex64) {
    let m = h.len();
    for i in 0..m {
        h[i][i] -= mu;
    }
    let mut rotations = Vec::with_capacity(m - 1);
    for j in 0..m - 1 {
        let (a, b) = (h[j][j], h[j + 1][j]);
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (Complex64::new(1.0, 0.0), ZERO) } else { (a / r, b / r) };
        for col in 0..m {
            let (x, y) = (h[j][col], h[j + 1][col]);
            h[j][col] = c.conj() * x + s.conj() * y;
            h[j + 1][col] = -s * x + c * y;
        }
        rotations.push((c, s));
    }
    for (j, &(c, s)) in rotations.iter().enumerate() {
        for row in h.iter_mut() {
            let (x, y) = (row[j], row[j + 1]);
            row[j] = x * c + y * s;
            row[j + 1] = -x * s.conj() + y * c.conj();
        }
        for row in q.iter_mut() {
            let (x, y) = (row[j], row[j + 1]);
            row[j] = x * c + y * s;
            row[j + 1] = -x * s.conj() + y * c.conj();
        }
    }
    for i in 0..m {
        h[i][i] += mu;
        for j in 0..i.saturating_sub(1) {
            h[i][j] = ZERO;
        }
    }
}
