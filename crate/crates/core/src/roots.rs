//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Illinois-modified regula falsi on a sign-changing bracket.
///
/// Stops when `|f| <= f_tol` or the bracket shrinks to `x_tol`.
pub fn illinois(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    f_tol: f64,
    x_tol: f64,
) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::RootNotBracketed(format!(
            "f({a}) = {fa:e} and f({b}) = {fb:e} share a sign"
        )));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc.abs() <= f_tol || (b - a).abs() <= x_tol {
            return Ok(c);
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let r = illinois(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((r - 2.0_f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(illinois(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 0.0).is_err());
    }
}
