//! Per-step study tables.

use std::io::{self, Write};
use std::path::Path;

use super::write_atomic;
use crate::adapt::{EstimatorTotals, StudyResult};
use crate::error::{Error, Result};

pub const PRIMAL_COLUMNS: [&str; 7] = ["N", "lambda_h", "R2", "Theta2", "J2", "eta2", "eff"];
pub const DUAL_COLUMNS: [&str; 5] = ["R*2", "Theta*2", "J*2", "eta*2", "eff*"];

/// Five significant digits in scientific notation with a signed two-digit
/// exponent, e.g. `2.3515e-02`. NaN is written as `nan`.
pub fn sci5(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn totals(out: &mut Vec<String>, t: &EstimatorTotals, eff: f64) {
    out.extend([t.r2, t.theta2, t.j2, t.eta2, eff].map(sci5));
}

/// Writes the header and one row per step. `lambda_h` is the real part.
pub fn write_csv<W: Write>(mut w: W, result: &StudyResult, include_dual: bool) -> io::Result<()> {
    let mut header: Vec<&str> = PRIMAL_COLUMNS.to_vec();
    if include_dual {
        header.extend(DUAL_COLUMNS);
    }
    writeln!(w, "{}", header.join(","))?;
    for row in &result.rows {
        let mut fields = vec![row.n_dofs.to_string(), sci5(row.lambda.re)];
        totals(&mut fields, &row.primal, row.eff);
        if include_dual {
            totals(&mut fields, &row.dual, row.eff_dual);
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn export_csv(path: &Path, result: &StudyResult, include_dual: bool) -> Result<()> {
    if result.rows.is_empty() {
        return Err(Error::InvalidArgument("study has no steps to export".into()));
    }
    write_atomic(path, |w| write_csv(w, result, include_dual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_digit_format() {
        assert_eq!(sci5(2.3515e-2), "2.3515e-02");
        assert_eq!(sci5(11.890), "1.1890e+01");
        assert_eq!(sci5(-6.1617), "-6.1617e+00");
        assert_eq!(sci5(0.0), "0.0000e+00");
        assert_eq!(sci5(1.23456e-120), "1.2346e-120");
        assert_eq!(sci5(f64::NAN), "nan");
    }

    #[test]
    fn reparses_to_five_digits() {
        for x in [7.04e-4, 31615.0, 1.0 / 3.0, -2.0f64.sqrt(), 9.99995e7] {
            let back: f64 = sci5(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-5 * x.abs(), "{x} {back}");
        }
    }
}
