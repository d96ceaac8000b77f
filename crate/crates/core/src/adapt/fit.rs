use crate::error::{Error, Result};

/// Least-squares slope of `log(error)` against `log(N)`.
pub fn fit_rate(ns: &[f64], errors: &[f64]) -> Result<f64> {
    if ns.len() != errors.len() {
        return Err(Error::InvalidArgument(format!("{} sizes but {} errors", ns.len(), errors.len())));
    }
    if ns.len() < 3 {
        return Err(Error::InvalidArgument(format!("rate fit needs at least 3 points, got {}", ns.len())));
    }
    if let Some(bad) = ns.iter().chain(errors).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!("rate fit needs positive finite data, got {bad}")));
    }
    let x: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let (_, slope) = linear_ls(&x, &y).ok_or_else(|| Error::IllConditionedFit("all sizes are equal".into()))?;
    Ok(slope)
}

/// Fit of `λ(N) = lambda_ref + coefficient · N^(−exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub lambda_ref: f64,
    pub coefficient: f64,
    pub exponent: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
}

const MAX_EXPONENT: f64 = 5.0;
const MIN_EXPONENT: f64 = 1e-3;

/// Nonlinear least-squares extrapolation of an eigenvalue sequence. For a
/// fixed exponent the model is linear in `(lambda_ref, coefficient)`, so only
/// the exponent is searched (grid scan, then golden-section refinement).
pub fn extrapolate_reference(ns: &[f64], lambdas: &[f64]) -> Result<Extrapolation> {
    if ns.len() != lambdas.len() {
        return Err(Error::InvalidArgument(format!("{} sizes but {} eigenvalues", ns.len(), lambdas.len())));
    }
    if ns.len() < 4 {
        return Err(Error::InvalidArgument(format!("extrapolation needs at least 4 points, got {}", ns.len())));
    }
    if ns.iter().chain(lambdas).any(|v| !v.is_finite()) || ns.iter().any(|&n| n <= 0.0) {
        return Err(Error::InvalidArgument("extrapolation needs positive sizes and finite eigenvalues".into()));
    }
    let (nmin, nmax) = ns.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &n| (lo.min(n), hi.max(n)));
    if nmax / nmin < 1.5 {
        return Err(Error::IllConditionedFit(format!("sizes span only a factor {:.3}", nmax / nmin)));
    }
    // Normalising N keeps N^(−t) well scaled for every t.
    let x: Vec<f64> = ns.iter().map(|n| (n / nmin).ln()).collect();
    let rss = |t: f64| -> Option<(f64, f64, f64)> {
        let z: Vec<f64> = x.iter().map(|v| (-t * v).exp()).collect();
        let (a, c) = linear_ls(&z, lambdas)?;
        let r: f64 = z.iter().zip(lambdas).map(|(zi, l)| (a + c * zi - l).powi(2)).sum();
        Some((r, a, c))
    };

    let grid = 400;
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..=grid {
        let t = MIN_EXPONENT + (MAX_EXPONENT - MIN_EXPONENT) * i as f64 / grid as f64;
        if let Some((r, _, _)) = rss(t) {
            if r < best.0 {
                best = (r, i);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::IllConditionedFit("no exponent gives a solvable linear fit".into()));
    }
    let step = (MAX_EXPONENT - MIN_EXPONENT) / grid as f64;
    let t_of = |i: usize| MIN_EXPONENT + step * i as f64;
    let (mut lo, mut hi) = (t_of(best.1.saturating_sub(1)), t_of((best.1 + 1).min(grid)));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let f = |t: f64| rss(t).map_or(f64::INFINITY, |v| v.0);
    let (mut t1, mut t2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut f1, mut f2) = (f(t1), f(t2));
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - phi * (hi - lo);
            f1 = f(t1);
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + phi * (hi - lo);
            f2 = f(t2);
        }
    }
    let t = 0.5 * (lo + hi);
    let (r, a, c) = rss(t).ok_or_else(|| Error::IllConditionedFit("degenerate design at the optimum".into()))?;
    if t <= MIN_EXPONENT + step || t >= MAX_EXPONENT - step {
        return Err(Error::IllConditionedFit(format!(
            "best exponent {t:.4} lies on the search boundary (λ_ref {a}, C {c}, rss {r:e})"
        )));
    }
    // Convert the coefficient back to unnormalised N.
    let coefficient = c * nmin.powf(t);
    Ok(Extrapolation { lambda_ref: a, coefficient, exponent: t, rms: (r / ns.len() as f64).sqrt() })
}

/// Intercept and slope of the least-squares line through `(x, y)`.
fn linear_ls(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if sxx <= 1e-24 * scale * scale * n {
        return None;
    }
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sizes() -> Vec<f64> {
        (0..8).map(|i| 500.0 * 2f64.powi(i)).collect()
    }

    #[test]
    fn synthetic_rates() {
        let ns = sizes();
        for (p, c) in [(1.0, 3.0), (2.0 / 3.0, 0.2)] {
            let e: Vec<f64> = ns.iter().map(|n| c * n.powf(-p)).collect();
            assert!((fit_rate(&ns, &e).unwrap() + p).abs() < 1e-12);
        }
        assert!(fit_rate(&ns[..2], &[1.0, 0.5]).is_err());
        assert!(fit_rate(&[1.0, 2.0, 3.0], &[1.0, 0.0, 0.5]).is_err());
    }

    #[test]
    fn exact_model_recovery() {
        let ns = sizes();
        let l: Vec<f64> = ns.iter().map(|n| 10.0 + 3.0 / n).collect();
        let x = extrapolate_reference(&ns, &l).unwrap();
        assert!((x.lambda_ref - 10.0).abs() < 1e-8, "{x:?}");
        assert!((x.exponent - 1.0).abs() < 1e-4);
        assert!((x.coefficient - 3.0).abs() < 1e-3);
    }

    #[test]
    fn noisy_model_recovery() {
        let ns = sizes();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l: Vec<f64> = ns.iter().map(|n| 10.0 + 3.0 / n + rng.random_range(-1e-6..1e-6)).collect();
        let x = extrapolate_reference(&ns, &l).unwrap();
        assert!((x.lambda_ref - 10.0).abs() < 1e-4, "{x:?}");
    }

    #[test]
    fn increasing_sequence_has_negative_coefficient() {
        let ns = sizes();
        let l: Vec<f64> = ns.iter().map(|n| 19.6 - 40.0 * n.powf(-0.9)).collect();
        let x = extrapolate_reference(&ns, &l).unwrap();
        assert!(x.coefficient < 0.0);
        assert!((x.lambda_ref - 19.6).abs() < 1e-8);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(extrapolate_reference(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(matches!(
            extrapolate_reference(&[100.0, 101.0, 102.0, 103.0], &[1.0, 0.9, 0.8, 0.7]),
            Err(Error::IllConditionedFit(_))
        ));
    }
}
