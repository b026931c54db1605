//! Truncated Taylor series arithmetic.
//!
//! A [`Taylor`] holds the coefficients `c_k` of `f(x0 + h) = sum_k c_k h^k`
//! up to a fixed order. Arithmetic propagates exactly (up to rounding), so
//! high-order derivatives come out without finite-difference noise.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::NumAssign;

/// Coefficient field of a [`Taylor`] series.
pub trait Coeff: Copy + NumAssign + Neg<Output = Self> + std::fmt::Debug {
    fn from_real(x: f64) -> Self;
    fn sqrt(self) -> Self;
}

impl Coeff for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

impl Coeff for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Taylor<T> {
    coeffs: Vec<T>,
}

impl<T: Coeff> Taylor<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a Taylor series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(value: T, len: usize) -> Self {
        let mut coeffs = vec![T::zero(); len.max(1)];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The independent variable `x0 + h`.
    pub fn variable(x0: T, len: usize) -> Self {
        let mut s = Self::constant(x0, len);
        if s.coeffs.len() > 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn truncate(mut self, len: usize) -> Self {
        self.coeffs.truncate(len.max(1));
        self
    }

    /// k-th derivative at the expansion point.
    pub fn derivative_at(&self, k: usize) -> T {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        self.coeffs.get(k).copied().unwrap_or_else(T::zero) * T::from_real(fact)
    }

    /// Series of the derivative; one coefficient shorter.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(T::zero(), 1);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, &c)| c * T::from_real((k + 1) as f64))
            .collect();
        Self { coeffs }
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn shift(&self, offset: T) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += offset;
        out
    }

    pub fn recip(&self) -> Self {
        let a = &self.coeffs;
        let inv0 = T::one() / a[0];
        let mut r = Vec::with_capacity(a.len());
        r.push(inv0);
        for k in 1..a.len() {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += a[j] * r[k - j];
            }
            r.push(-acc * inv0);
        }
        Self { coeffs: r }
    }

    pub fn sqrt(&self) -> Self {
        let a = &self.coeffs;
        let s0 = a[0].sqrt();
        let two_s0 = s0 + s0;
        let mut s = Vec::with_capacity(a.len());
        s.push(s0);
        for k in 1..a.len() {
            let mut acc = a[k];
            for j in 1..k {
                acc -= s[j] * s[k - j];
            }
            s.push(acc / two_s0);
        }
        Self { coeffs: s }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::constant(T::one(), self.len());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Evaluates the truncated polynomial at offset `h`.
    pub fn eval(&self, h: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * h + c)
    }

    /// Horner evaluation of a real polynomial `sum c_k x^k` on a series argument.
    pub fn polynomial(coeffs: &[f64], arg: &Self) -> Self {
        let mut acc = Self::constant(T::zero(), arg.len());
        for &c in coeffs.iter().rev() {
            acc = (&acc * arg).shift(T::from_real(c));
        }
        acc
    }
}

impl Taylor<f64> {
    pub fn to_complex(&self) -> Taylor<Complex64> {
        Taylor {
            coeffs: self.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }
}

fn zip_len<T>(a: &Taylor<T>, b: &Taylor<T>) -> usize {
    a.coeffs.len().min(b.coeffs.len())
}

impl<T: Coeff> Add for &Taylor<T> {
    type Output = Taylor<T>;
    fn add(self, rhs: Self) -> Taylor<T> {
        let n = zip_len(self, rhs);
        Taylor {
            coeffs: (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

impl<T: Coeff> Sub for &Taylor<T> {
    type Output = Taylor<T>;
    fn sub(self, rhs: Self) -> Taylor<T> {
        let n = zip_len(self, rhs);
        Taylor {
            coeffs: (0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

impl<T: Coeff> Mul for &Taylor<T> {
    type Output = Taylor<T>;
    fn mul(self, rhs: Self) -> Taylor<T> {
        let n = zip_len(self, rhs);
        let coeffs = (0..n)
            .map(|k| {
                let mut acc = T::zero();
                for j in 0..=k {
                    acc += self.coeffs[j] * rhs.coeffs[k - j];
                }
                acc
            })
            .collect();
        Taylor { coeffs }
    }
}

impl<T: Coeff> Neg for &Taylor<T> {
    type Output = Taylor<T>;
    fn neg(self) -> Taylor<T> {
        Taylor {
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}
