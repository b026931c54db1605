//! Adaptive Dormand-Prince 5(4) integrator for a complex scalar ODE.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

/// Stepper that remembers its last accepted step size between calls.
pub struct DormandPrince<F> {
    rhs: F,
    tol: Tolerance,
    h: f64,
    pub steps: usize,
}

impl<F: Fn(f64, Complex64) -> Complex64> DormandPrince<F> {
    pub fn new(rhs: F, tol: Tolerance, initial_step: f64) -> Self {
        Self {
            rhs,
            tol,
            h: initial_step.abs(),
            steps: 0,
        }
    }

    /// Advances `y(x0)` to `x1` (either direction).
    pub fn advance(&mut self, x0: f64, y0: Complex64, x1: f64) -> Result<Complex64> {
        let dir = (x1 - x0).signum();
        let mut x = x0;
        let mut y = y0;
        let mut k1 = (self.rhs)(x, y);
        while (x1 - x) * dir > 0.0 {
            let remaining = (x1 - x).abs();
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            let hs = h * dir;
            let mut k = [Complex64::new(0.0, 0.0); 7];
            k[0] = k1;
            for s in 1..7 {
                let mut acc = y;
                for j in 0..s {
                    acc += k[j] * (hs * A[s][j]);
                }
                k[s] = (self.rhs)(x + C[s] * hs, acc);
            }
            let mut y5 = y;
            let mut err = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                y5 += k[s] * (hs * B5[s]);
                err += k[s] * (hs * (B5[s] - B4[s]));
            }
            let finite = y5.re.is_finite() && y5.im.is_finite();
            let scale = self.tol.abs + self.tol.rel * y.norm().max(y5.norm());
            let ratio = if finite { err.norm() / scale } else { f64::INFINITY };
            if ratio <= 1.0 {
                x = if clipped { x1 } else { x + hs };
                y = y5;
                k1 = k[6];
                self.steps += 1;
                let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).min(5.0) };
                self.h = if clipped { self.h.max(h * grow) } else { h * grow };
            } else {
                let shrink = if finite { (0.9 * ratio.powf(-0.2)).max(0.1) } else { 0.1 };
                self.h = h * shrink;
                if self.h < 1e-14 * x.abs().max(1e-3) {
                    return Err(Error::StiffnessFailure { x });
                }
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_complex_exponential() {
        let tol = Tolerance { rel: 1e-12, abs: 1e-14 };
        let mut dp = DormandPrince::new(|_, y: Complex64| Complex64::i() * y, tol, 0.1);
        let y = dp.advance(0.0, Complex64::new(1.0, 0.0), 10.0).unwrap();
        let exact = Complex64::new(10f64.cos(), 10f64.sin());
        assert!((y - exact).norm() < 1e-10);
        let back = dp.advance(10.0, y, 0.0).unwrap();
        assert!((back - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }
}
