//! Potential definitions, the local momentum `p^2(x, E)` and its Taylor jets,
//! and turning-point location.
//!
//! Units are atomic (`hbar = 1`). For every polynomial kind the momentum is
//! `p^2 = 2 m (E - V)`. The Lennard-Jones kind uses the scaled form
//! `p^2 = B (E - (x^-12 - 2 x^-6))`, where the strength `B` absorbs mass and
//! length scales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taylor::Taylor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `V = k x^2 / 2`, params `[k]`.
    Harmonic,
    /// `V = a x^2 + b x^4`, params `[a, b]`.
    QuarticAnharmonic,
    /// `v = x^-12 - 2 x^-6` on `(0, inf)`, no params; uses `strength`.
    LennardJones126,
    /// `V = v0`, params `[v0]`.
    Constant,
    /// `V = sum c_k x^k`, params `[c0, c1, ...]`.
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default = "default_strength")]
    pub strength: f64,
}

fn default_mass() -> f64 {
    1.0
}

fn default_strength() -> f64 {
    1.0e4
}

/// Classical turning points bounding the allowed region, `t1 < t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPair {
    pub t1: f64,
    pub t2: f64,
}

impl TurningPair {
    pub fn width(&self) -> f64 {
        self.t2 - self.t1
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.t1 && x < self.t2
    }
}

impl PotentialSpec {
    pub fn harmonic(k: f64) -> Self {
        Self::with_params(PotentialKind::Harmonic, vec![k])
    }

    pub fn quartic_anharmonic(a: f64, b: f64) -> Self {
        Self::with_params(PotentialKind::QuarticAnharmonic, vec![a, b])
    }

    pub fn lennard_jones(strength: f64) -> Self {
        Self {
            kind: PotentialKind::LennardJones126,
            params: Vec::new(),
            mass: 1.0,
            strength,
        }
    }

    pub fn constant(v0: f64) -> Self {
        Self::with_params(PotentialKind::Constant, vec![v0])
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::with_params(PotentialKind::Polynomial, coeffs)
    }

    fn with_params(kind: PotentialKind, params: Vec<f64>) -> Self {
        Self {
            kind,
            params,
            mass: 1.0,
            strength: default_strength(),
        }
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad("mass must be positive");
        }
        if self.params.iter().any(|c| !c.is_finite()) {
            return bad("coefficients must be finite");
        }
        match self.kind {
            PotentialKind::Harmonic => {
                if self.params.len() != 1 || self.params[0] <= 0.0 {
                    return bad("harmonic takes one positive spring constant");
                }
            }
            PotentialKind::QuarticAnharmonic => {
                if self.params.len() != 2 || self.params[1] <= 0.0 {
                    return bad("quartic_anharmonic takes [a, b] with b > 0");
                }
            }
            PotentialKind::LennardJones126 => {
                if !(self.strength > 0.0 && self.strength.is_finite()) {
                    return bad("lennard_jones_12_6 needs a positive strength");
                }
                if !self.params.is_empty() {
                    return bad("lennard_jones_12_6 takes no coefficients");
                }
            }
            PotentialKind::Constant => {
                if self.params.len() != 1 {
                    return bad("constant takes one value");
                }
            }
            PotentialKind::Polynomial => {
                let degree = self.params.len().saturating_sub(1);
                if degree < 2 || !degree.is_multiple_of(2) {
                    return bad("polynomial must have even degree >= 2");
                }
                if *self.params.last().unwrap() <= 0.0 {
                    return bad("polynomial leading coefficient must be positive");
                }
            }
        }
        Ok(())
    }

    /// Domain endpoints `(s1, s2)`.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            PotentialKind::LennardJones126 => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn is_radial(&self) -> bool {
        self.kind == PotentialKind::LennardJones126
    }

    /// Whether `V -> +inf` at both domain ends.
    pub fn is_confining(&self) -> bool {
        !matches!(
            self.kind,
            PotentialKind::LennardJones126 | PotentialKind::Constant
        )
    }

    /// Dissociation energy, for wells with a continuum above them.
    pub fn threshold(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::LennardJones126 => Some(0.0),
            _ => None,
        }
    }

    /// Factor `g` in `p^2 = g (E - V)`.
    pub fn coupling(&self) -> f64 {
        match self.kind {
            PotentialKind::LennardJones126 => self.strength,
            _ => 2.0 * self.mass,
        }
    }

    /// Power-series coefficients of `V` for the polynomial kinds.
    pub fn polynomial_coeffs(&self) -> Option<Vec<f64>> {
        let p = &self.params;
        match self.kind {
            PotentialKind::Harmonic => Some(vec![0.0, 0.0, 0.5 * p[0]]),
            PotentialKind::QuarticAnharmonic => Some(vec![0.0, 0.0, p[0], 0.0, p[1]]),
            PotentialKind::Constant => Some(vec![p[0]]),
            PotentialKind::Polynomial => Some(p.clone()),
            PotentialKind::LennardJones126 => None,
        }
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        let (s1, s2) = self.domain();
        if x.is_finite() && x > s1 && x < s2 {
            Ok(())
        } else {
            Err(Error::DomainViolation { x })
        }
    }

    /// Potential value `V(x)`; for Lennard-Jones, the scaled `x^-12 - 2 x^-6`.
    pub fn evaluate_v(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.v_unchecked(x))
    }

    pub(crate) fn v_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            PotentialKind::LennardJones126 => {
                let r6 = x.powi(-6);
                r6 * r6 - 2.0 * r6
            }
            _ => {
                let c = self.polynomial_coeffs().unwrap();
                c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
            }
        }
    }

    /// `p^2(x, E)`; negative in classically forbidden regions.
    pub fn local_momentum_sq(&self, energy: f64, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.p2(energy, x))
    }

    pub(crate) fn p2(&self, energy: f64, x: f64) -> f64 {
        self.coupling() * (energy - self.v_unchecked(x))
    }

    /// Taylor coefficients `c_0..c_order` of `p^2(x + h, E)` in `h`.
    pub fn momentum_sq_jet(&self, energy: f64, x: f64, order: usize) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        Ok(self.p2_jet(energy, x, order + 1).into_coeffs())
    }

    pub(crate) fn p2_jet(&self, energy: f64, x: f64, len: usize) -> Taylor<f64> {
        let arg = Taylor::variable(x, len);
        let v = match self.kind {
            PotentialKind::LennardJones126 => {
                let r6 = arg.recip().powi(6);
                &(&r6 * &r6) - &r6.scale(2.0)
            }
            _ => Taylor::polynomial(&self.polynomial_coeffs().unwrap(), &arg),
        };
        (-&v).shift(energy).scale(self.coupling())
    }

    /// `(p^2, d p^2 / dx)` at `x`.
    pub(crate) fn p2_with_slope(&self, energy: f64, x: f64) -> (f64, f64) {
        match self.kind {
            PotentialKind::LennardJones126 => {
                let r = 1.0 / x;
                let r6 = r.powi(6);
                let v = r6 * r6 - 2.0 * r6;
                let dv = (-12.0 * r6 * r6 + 12.0 * r6) * r;
                let g = self.strength;
                (g * (energy - v), -g * dv)
            }
            _ => {
                let c = self.polynomial_coeffs().unwrap();
                let (mut v, mut dv) = (0.0, 0.0);
                for &ck in c.iter().rev() {
                    dv = dv * x + v;
                    v = v * x + ck;
                }
                let g = self.coupling();
                (g * (energy - v), -g * dv)
            }
        }
    }

    /// Location and value of the potential minimum.
    pub fn well_minimum(&self) -> (f64, f64) {
        match self.kind {
            PotentialKind::LennardJones126 => (1.0, -1.0),
            PotentialKind::Constant => (0.0, self.params[0]),
            _ => {
                let samples = scan_points(self, 0.0, 1.0e3);
                let (mut best, mut best_v) = (samples[0], self.v_unchecked(samples[0]));
                let mut best_i = 0;
                for (i, &x) in samples.iter().enumerate() {
                    let v = self.v_unchecked(x);
                    if v < best_v {
                        best = x;
                        best_v = v;
                        best_i = i;
                    }
                }
                let lo = samples[best_i.saturating_sub(1)];
                let hi = samples[(best_i + 1).min(samples.len() - 1)];
                let x = golden_min(|x| self.v_unchecked(x), lo, hi);
                let v = self.v_unchecked(x);
                if v < best_v {
                    (x, v)
                } else {
                    (best, best_v)
                }
            }
        }
    }

    /// Locates the two turning points of a single well at energy `E`.
    pub fn find_turning_points(&self, energy: f64) -> Result<TurningPair> {
        self.validate()?;
        if !energy.is_finite() {
            return Err(Error::InvalidInput(format!("energy {energy} is not finite")));
        }
        if !self.is_confining() && self.threshold().is_none_or(|t| energy >= t) {
            return Err(Error::NoClassicalRegion { energy });
        }
        let (x0, _) = self.well_minimum();
        if self.p2(energy, x0) <= 0.0 {
            return Err(Error::NoClassicalRegion { energy });
        }
        let left = self
            .expand_until_forbidden(energy, x0, -1.0)
            .ok_or(Error::NoClassicalRegion { energy })?;
        let right = self
            .expand_until_forbidden(energy, x0, 1.0)
            .ok_or(Error::NoClassicalRegion { energy })?;

        const SAMPLES: usize = 8192;
        let xs: Vec<f64> = if self.is_radial() {
            let (a, b) = (left.ln(), right.ln());
            (0..=SAMPLES)
                .map(|i| (a + (b - a) * i as f64 / SAMPLES as f64).exp())
                .collect()
        } else {
            (0..=SAMPLES)
                .map(|i| left + (right - left) * i as f64 / SAMPLES as f64)
                .collect()
        };
        // keep the minimum itself so narrow wells near the floor are not skipped
        let mut xs = xs;
        let at = xs.partition_point(|&x| x < x0);
        xs.insert(at, x0);
        let mut brackets = Vec::new();
        let mut prev = self.p2(energy, xs[0]);
        for w in xs.windows(2) {
            let cur = self.p2(energy, w[1]);
            if (prev > 0.0) != (cur > 0.0) {
                brackets.push((w[0], w[1]));
            }
            prev = cur;
        }
        match brackets.len() {
            2 => {
                let t1 = self.bisect_root(energy, brackets[0]);
                let t2 = self.bisect_root(energy, brackets[1]);
                Ok(TurningPair { t1, t2 })
            }
            0 | 1 => Err(Error::NoClassicalRegion { energy }),
            crossings => Err(Error::MultiWell { energy, crossings }),
        }
    }

    fn expand_until_forbidden(&self, energy: f64, x0: f64, dir: f64) -> Option<f64> {
        if self.is_radial() && dir < 0.0 {
            let mut x = x0;
            for _ in 0..200 {
                x *= 0.5;
                if self.p2(energy, x) < 0.0 {
                    return Some(x);
                }
            }
            return None;
        }
        let mut step = 1.0e-3 * (1.0 + x0.abs());
        let mut found = None;
        for _ in 0..200 {
            let x = x0 + dir * step;
            if self.p2(energy, x) < 0.0 {
                found = Some(x);
                break;
            }
            step *= 2.0;
        }
        let first = found?;
        if !self.is_confining() {
            return Some(first);
        }
        // Go well past the first forbidden point so that further wells show up
        // as extra sign changes in the scan.
        let (_, v_min) = self.well_minimum();
        let wall = 100.0 * ((energy - v_min).abs() + 1.0);
        let mut x = first;
        for _ in 0..200 {
            if self.v_unchecked(x) - energy > wall {
                return Some(x);
            }
            step *= 2.0;
            x = x0 + dir * step;
        }
        Some(x)
    }

    fn bisect_root(&self, energy: f64, (mut a, mut b): (f64, f64)) -> f64 {
        let fa = self.p2(energy, a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a.min(b) || m >= a.max(b) || (b - a).abs() <= 1e-15 * m.abs().max(1e-300) {
                break;
            }
            let fm = self.p2(energy, m);
            if fm == 0.0 {
                return m;
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        if self.p2(energy, a).abs() <= self.p2(energy, b).abs() {
            a
        } else {
            b
        }
    }
}

/// Coarse sampling points spanning many scales around `center`.
fn scan_points(spec: &PotentialSpec, center: f64, reach: f64) -> Vec<f64> {
    let mut pts = vec![center];
    let mut r = 1.0e-3;
    while r <= reach {
        pts.push(center + r);
        if !spec.is_radial() {
            pts.push(center - r);
        }
        r *= 1.1;
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::harmonic(1.0)
    }

    fn anharmonic() -> PotentialSpec {
        PotentialSpec::quartic_anharmonic(1.0, 2.0)
    }

    #[test]
    fn evaluate_v_examples() {
        assert_relative_eq!(harmonic().evaluate_v(1.0).unwrap(), 0.5);
        assert_relative_eq!(PotentialSpec::lennard_jones(1e4).evaluate_v(1.0).unwrap(), -1.0);
        assert_relative_eq!(anharmonic().evaluate_v(1.0).unwrap(), 3.0);
    }

    #[test]
    fn lennard_jones_rejects_nonpositive_coordinates() {
        let lj = PotentialSpec::lennard_jones(1e4);
        assert_eq!(lj.evaluate_v(0.0), Err(Error::DomainViolation { x: 0.0 }));
        assert!(lj.local_momentum_sq(-0.5, -1.0).is_err());
    }

    #[test]
    fn local_momentum_examples() {
        assert_relative_eq!(harmonic().local_momentum_sq(0.5, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            PotentialSpec::lennard_jones(1e4).local_momentum_sq(0.0, 1.0).unwrap(),
            1e4
        );
        assert_relative_eq!(PotentialSpec::constant(0.0).local_momentum_sq(2.0, 17.3).unwrap(), 4.0);
    }

    #[test]
    fn jet_examples() {
        let j = harmonic().momentum_sq_jet(0.5, 0.0, 2).unwrap();
        assert_eq!(j, vec![1.0, 0.0, -1.0]);
        let j = anharmonic().momentum_sq_jet(5.0, 0.0, 4).unwrap();
        assert_eq!(j, vec![10.0, 0.0, -2.0, 0.0, -4.0]);
        let j = PotentialSpec::lennard_jones(1e4).momentum_sq_jet(0.0, 1.0, 1).unwrap();
        assert_relative_eq!(j[0], 1e4, max_relative = 1e-14);
        assert!(j[1].abs() < 1e-10);
    }

    #[test]
    fn lennard_jones_jet_matches_binomial_series() {
        // (x+h)^-n = x^-n sum_k binom(-n, k) (h/x)^k
        let binom = |n: f64, k: usize| -> f64 {
            (0..k).fold(1.0, |acc, j| acc * (-n - j as f64) / (j + 1) as f64)
        };
        let (x, e, b) = (1.3, -0.2, 1e4);
        let jet = PotentialSpec::lennard_jones(b).momentum_sq_jet(e, x, 8).unwrap();
        for (k, c) in jet.iter().enumerate() {
            let v = binom(12.0, k) * x.powi(-12 - k as i32) - 2.0 * binom(6.0, k) * x.powi(-6 - k as i32);
            let expect = if k == 0 { b * (e - v) } else { -b * v };
            assert_relative_eq!(*c, expect, max_relative = 1e-12, epsilon = 1e-9);
        }
    }

    #[test]
    fn validation_rules() {
        assert!(PotentialSpec::lennard_jones(0.0).validate().is_err());
        assert!(harmonic().with_mass(0.0).validate().is_err());
        assert!(PotentialSpec::polynomial(vec![0.0, 0.0, -1.0]).validate().is_err());
        assert!(PotentialSpec::polynomial(vec![0.0, 1.0, 0.0, 1.0]).validate().is_err());
        assert!(PotentialSpec::polynomial(vec![0.0, 0.0, 1.0]).validate().is_ok());
    }

    #[test]
    fn turning_point_examples() {
        let tp = harmonic().find_turning_points(0.5).unwrap();
        assert_relative_eq!(tp.t1, -1.0, epsilon = 1e-12);
        assert_relative_eq!(tp.t2, 1.0, epsilon = 1e-12);

        // x*^2 = (-1 + sqrt(41)) / 4
        let xs = ((-1.0 + 41.0_f64.sqrt()) / 4.0).sqrt();
        let tp = anharmonic().find_turning_points(5.0).unwrap();
        assert_relative_eq!(tp.t2, xs, max_relative = 1e-12);
        assert_relative_eq!(tp.t1, -xs, max_relative = 1e-12);

        // u = x^-6 solves u^2 - 2u + 0.5 = 0
        let u_in = 1.0 + 0.5_f64.sqrt();
        let u_out = 1.0 - 0.5_f64.sqrt();
        let tp = PotentialSpec::lennard_jones(1e4).find_turning_points(-0.5).unwrap();
        assert_relative_eq!(tp.t1, u_in.powf(-1.0 / 6.0), max_relative = 1e-12);
        assert_relative_eq!(tp.t2, u_out.powf(-1.0 / 6.0), max_relative = 1e-12);
        assert!(tp.t1 < 1.0 && 1.0 < tp.t2);
    }

    #[test]
    fn turning_point_errors() {
        assert_eq!(
            harmonic().find_turning_points(-1.0),
            Err(Error::NoClassicalRegion { energy: -1.0 })
        );
        assert!(matches!(
            PotentialSpec::lennard_jones(1e4).find_turning_points(0.1),
            Err(Error::NoClassicalRegion { .. })
        ));
        // double well x^4 - 2x^2 below the barrier
        let dw = PotentialSpec::polynomial(vec![0.0, 0.0, -2.0, 0.0, 1.0]);
        assert!(matches!(
            dw.find_turning_points(-0.5),
            Err(Error::MultiWell { crossings: 4, .. })
        ));
    }

    proptest! {
        #[test]
        fn jet_value_agrees_with_direct_evaluation(x in -3.0f64..3.0, e in 0.0f64..50.0) {
            for spec in [harmonic(), anharmonic(), PotentialSpec::polynomial(vec![0.3, -0.2, 1.0, 0.1, 0.5])] {
                let direct = spec.local_momentum_sq(e, x).unwrap();
                let jet = spec.momentum_sq_jet(e, x, 3).unwrap();
                prop_assert!((jet[0] - direct).abs() <= 1e-14 * direct.abs().max(1.0));
            }
        }

        #[test]
        fn lj_jet_value_agrees(x in 0.7f64..20.0, e in -1.0f64..0.0) {
            let spec = PotentialSpec::lennard_jones(1e4);
            let direct = spec.local_momentum_sq(e, x).unwrap();
            let jet = spec.momentum_sq_jet(e, x, 2).unwrap();
            prop_assert!((jet[0] - direct).abs() <= 1e-14 * direct.abs().max(1.0) * 10.0);
        }

        #[test]
        fn turning_points_are_roots(e in 0.2f64..200.0) {
            for spec in [harmonic(), anharmonic()] {
                let tp = spec.find_turning_points(e).unwrap();
                let mid = spec.p2(e, 0.5 * (tp.t1 + tp.t2)).abs().max(1.0);
                prop_assert!(spec.p2(e, tp.t1).abs() < 1e-10 * mid);
                prop_assert!(spec.p2(e, tp.t2).abs() < 1e-10 * mid);
                prop_assert!((tp.t1 + tp.t2).abs() < 1e-12 * tp.t2.abs().max(1.0));
            }
        }
    }
}
