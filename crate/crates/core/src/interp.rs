//! Shape-preserving piecewise cubic (Fritsch-Carlson / PCHIP) interpolation.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    /// Requires strictly increasing `xs` and at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidInput("interpolation needs at least two matching samples".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("abscissae must be strictly increasing".into()));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes = vec![d[0], d[0]];
        } else {
            for k in 1..n - 1 {
                if d[k - 1] * d[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
                }
            }
            slopes[0] = end_slope(h[0], h[1], d[0], d[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Value at `x`, extrapolating the end cubics outside the sample range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let k = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            j if j >= n => n - 2,
            j => j - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
    }

    /// Smallest `x` in the sample range with `eval(x) = y`, for increasing data.
    pub fn invert(&self, y: f64) -> Option<f64> {
        let k = self.ys.windows(2).position(|w| w[0] <= y && y <= w[1])?;
        let (mut a, mut b) = (self.xs[k], self.xs[k + 1]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.eval(m) < y {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 1e-15 * (1.0 + m.abs()) {
                break;
            }
        }
        Some(0.5 * (a + b))
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_samples_and_lines() {
        let p = Pchip::new(vec![0.0, 1.0, 3.0, 4.0], vec![1.0, 3.0, 7.0, 9.0]).unwrap();
        for x in [0.0, 0.5, 2.0, 3.7, 4.0] {
            assert!((p.eval(x) - (1.0 + 2.0 * x)).abs() < 1e-12);
        }
        assert!((p.invert(5.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(p.invert(10.0).is_none());
    }

    #[test]
    fn rejects_bad_abscissae() {
        assert!(Pchip::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Pchip::new(vec![0.0], vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn no_overshoot_on_monotone_data(steps in proptest::collection::vec((0.01f64..3.0, 0.0f64..5.0), 3..12), t in 0.0f64..1.0) {
            let mut xs = vec![0.0];
            let mut ys = vec![0.0];
            for (dx, dy) in &steps {
                xs.push(xs.last().unwrap() + dx);
                ys.push(ys.last().unwrap() + dy);
            }
            let p = Pchip::new(xs.clone(), ys.clone()).unwrap();
            for k in 0..xs.len() - 1 {
                let x = xs[k] + t * (xs[k + 1] - xs[k]);
                let v = p.eval(x);
                prop_assert!(v >= ys[k] - 1e-12 && v <= ys[k + 1] + 1e-12);
            }
        }
    }
}
