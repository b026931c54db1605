//! Leading-order WKB (classical action and its quantization) and the local
//! high-order semiclassical series of the Riccati variable `M`.
//!
//! With a bookkeeping `hbar`, `hbar M' = i (p^2 - M^2)` gives
//!
//! ```text
//! M_0 = p,    M_n = (i M'_{n-1} - sum_{k=1}^{n-1} M_k M_{n-k}) / (2 M_0),  n >= 1
//! ```
//!
//! Each `M_n` is carried as a Taylor jet around the expansion point, so every
//! derivative is exact; one order of the jet is spent per recursion step.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{PotentialSpec, TurningPair};
use crate::quad;
use crate::roots;
use crate::taylor::Taylor;

/// Maslov index of a two-turning-point well.
pub const MASLOV_INDEX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionResult {
    /// `S(t2) - S(t1) = int_{t1}^{t2} p dx`.
    pub s_diff: f64,
    pub turning: TurningPair,
    pub quadrature_error_estimate: f64,
}

/// Classical action between the turning points.
///
/// Both endpoint square-root singularities are removed by the substitution
/// `x = t_i +- u^2` on each half of the well.
pub fn action_integral(spec: &PotentialSpec, energy: f64) -> Result<ActionResult> {
    let turning = spec.find_turning_points(energy)?;
    let TurningPair { t1, t2 } = turning;
    let mid = 0.5 * (t1 + t2);
    let p = |x: f64| spec.p2(energy, x).max(0.0).sqrt();
    let left = quad::integrate(|u| 2.0 * u * p(t1 + u * u), 0.0, (mid - t1).sqrt(), 0.0, 1e-13);
    let right = quad::integrate(|u| 2.0 * u * p(t2 - u * u), 0.0, (t2 - mid).sqrt(), 0.0, 1e-13);
    Ok(ActionResult {
        s_diff: left.value + right.value,
        turning,
        quadrature_error_estimate: left.error + right.error,
    })
}

/// Leading-order quantized energies `S(E) = (n + mu/4) pi` for `n = 0..=n_max`.
///
/// For wells with a dissociation threshold the list stops at the last level
/// the action supports, so it may be shorter than `n_max + 1`.
pub fn wkb_levels(spec: &PotentialSpec, n_max: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let (_, v_min) = spec.well_minimum();
    let action = |e: f64| action_integral(spec, e).map(|a| a.s_diff);
    let scale = spec.threshold().map_or(1.0, |t| t - v_min);
    let floor = v_min + 1e-12 * scale.abs().max(1.0);

    let ceiling = match spec.threshold() {
        Some(t) => Some((t - 1e-14 * scale, action(t - 1e-14 * scale)?)),
        None => None,
    };

    let mut levels = Vec::with_capacity(n_max + 1);
    let mut lo = floor;
    for n in 0..=n_max {
        let target = (n as f64 + MASLOV_INDEX / 4.0) * PI;
        let hi = match ceiling {
            Some((e_top, s_top)) => {
                if s_top < target {
                    break;
                }
                e_top
            }
            None => {
                let mut hi = lo + 1.0;
                while action(hi)? < target {
                    hi = v_min + 2.0 * (hi - v_min);
                }
                hi
            }
        };
        let e = roots::illinois(|e| Ok(action(e)? - target), lo, hi, 1e-11, 0.0)?;
        levels.push(e);
        lo = e;
    }
    Ok(levels)
}

/// Local semiclassical series of `M` at `x_b`, with optimal truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub x_b: f64,
    /// `M_0(x_b) .. M_N(x_b)`.
    pub terms: Vec<Complex64>,
    /// `M_n'(x_b)` where the jet still carries a first derivative.
    pub slopes: Vec<Complex64>,
    pub partial_sums: Vec<Complex64>,
    pub optimal_order: usize,
    pub boundary_value: Complex64,
    pub order_cap: usize,
}

pub fn riccati_series_at(
    spec: &PotentialSpec,
    energy: f64,
    x_b: f64,
    order_cap: usize,
) -> Result<SeriesReport> {
    if order_cap < 2 {
        return Err(Error::InvalidInput("order_cap must be at least 2".into()));
    }
    spec.check_domain(x_b)?;
    let p2 = spec.p2(energy, x_b);
    if p2 <= 0.0 {
        return Err(Error::OutsideClassicalRegion { x: x_b });
    }
    if p2.sqrt() < 1e-6 {
        return Err(Error::TooCloseToTurningPoint { x: x_b, momentum: p2.sqrt() });
    }

    // One spare order so that M_N keeps a slope.
    let len = order_cap + 2;
    let jet = spec.p2_jet(energy, x_b, len).to_complex();
    let i = Complex64::i();
    let m0 = jet.sqrt();
    let inv_two_m0 = m0.scale(Complex64::new(2.0, 0.0)).recip();

    let mut m: Vec<Taylor<Complex64>> = vec![m0];
    for n in 1..=order_cap {
        let keep = len - n;
        let mut acc = m[n - 1].derivative().scale(i);
        for k in 1..n {
            acc = &acc - &(&m[k] * &m[n - k]);
        }
        let next = (&acc * &inv_two_m0).truncate(keep);
        m.push(next);
    }

    let terms: Vec<Complex64> = m.iter().map(|s| s.value()).collect();
    let slopes: Vec<Complex64> = m
        .iter()
        .filter(|s| s.len() > 1)
        .map(|s| s.coeffs()[1])
        .collect();
    let partial_sums = terms
        .iter()
        .scan(Complex64::new(0.0, 0.0), |acc, &t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let mut report = SeriesReport {
        x_b,
        terms,
        slopes,
        partial_sums,
        optimal_order: order_cap,
        boundary_value: Complex64::new(0.0, 0.0),
        order_cap,
    };
    let (n_star, bv) = optimal_truncation(&report);
    report.optimal_order = n_star;
    report.boundary_value = bv;
    if bv.re <= 0.0 {
        return Err(Error::NonPositiveBoundary { re: bv.re, im: bv.im });
    }
    Ok(report)
}

/// Terms below this fraction of `|M_0|` count as vanishing (e.g. odd orders at
/// a symmetry point) and do not end the decreasing run.
const VANISHING: f64 = 1e-14;

/// Index of the smallest term before the first strict rise in magnitude, and
/// the partial sum through it.
pub fn optimal_truncation(report: &SeriesReport) -> (usize, Complex64) {
    let terms = &report.terms;
    let floor = VANISHING * terms[0].norm();
    let live: Vec<usize> = (0..terms.len()).filter(|&k| terms[k].norm() > floor).collect();
    let cap = report.order_cap.min(terms.len() - 1);
    let mut n_star = cap;
    for w in live.windows(2) {
        if terms[w[1]].norm() > terms[w[0]].norm() {
            n_star = w[0];
            break;
        }
    }
    let sum = terms[..=n_star].iter().sum();
    (n_star, sum)
}

impl SeriesReport {
    /// Residual `|d/dx M^(N) - i (p^2 - (M^(N))^2)|` of the partial sum at `x_b`.
    pub fn partial_sum_residual(&self, spec: &PotentialSpec, energy: f64, order: usize) -> f64 {
        assert!(order < self.slopes.len(), "slope unavailable at order {order}");
        let m: Complex64 = self.terms[..=order].iter().sum();
        let dm: Complex64 = self.slopes[..=order].iter().sum();
        let p2 = spec.p2(energy, self.x_b);
        (dm - Complex64::i() * (p2 - m * m)).norm()
    }

    /// First term after `n` that does not vanish.
    pub fn next_live_term(&self, n: usize) -> Option<Complex64> {
        let floor = VANISHING * self.terms[0].norm();
        self.terms[n + 1..].iter().copied().find(|t| t.norm() > floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::harmonic(1.0)
    }

    fn anharmonic() -> PotentialSpec {
        PotentialSpec::quartic_anharmonic(1.0, 2.0)
    }

    #[test]
    fn harmonic_action_is_pi_e() {
        let a = action_integral(&harmonic(), 0.5).unwrap();
        assert_relative_eq!(a.s_diff, PI / 2.0, max_relative = 1e-12);
        assert!(a.quadrature_error_estimate < 1e-10 * a.s_diff);
        let a = action_integral(&harmonic(), 2.5).unwrap();
        assert_relative_eq!(a.s_diff, 2.5 * PI, max_relative = 1e-12);
    }

    #[test]
    fn harmonic_wkb_levels_are_exact() {
        let levels = wkb_levels(&harmonic(), 3).unwrap();
        for (n, e) in levels.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-9, "n={n} e={e}");
        }
    }

    #[test]
    fn lennard_jones_wkb_list_is_bounded_by_threshold() {
        let lj = PotentialSpec::lennard_jones(1e4);
        let levels = wkb_levels(&lj, 40).unwrap();
        assert!(levels.len() < 41);
        assert!(levels.iter().all(|&e| e < 0.0));
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn harmonic_series_low_orders() {
        let r = riccati_series_at(&harmonic(), 0.5, 0.0, 6).unwrap();
        assert_relative_eq!(r.terms[0].re, 1.0);
        assert_eq!(r.terms[1].norm(), 0.0);
        assert_relative_eq!(r.terms[2].re, 0.25, max_relative = 1e-15);
        assert!(r.terms[2].im.abs() < 1e-16);
    }

    #[test]
    fn constant_momentum_has_no_corrections() {
        let r = riccati_series_at(&PotentialSpec::constant(0.0), 2.0, 0.0, 6).unwrap();
        assert!(r.terms[1..].iter().all(|t| t.norm() == 0.0));
        assert_eq!(r.optimal_order, 6);
        assert_relative_eq!(r.boundary_value.re, 2.0);
        assert_eq!(r.boundary_value.im, 0.0);
    }

    #[test]
    fn odd_terms_vanish_at_symmetry_points() {
        for (spec, e) in [(harmonic(), 2.5), (anharmonic(), 5.0)] {
            let r = riccati_series_at(&spec, e, 0.0, 12).unwrap();
            for (k, t) in r.terms.iter().enumerate().skip(1).step_by(2) {
                assert!(t.norm() < 1e-14 * r.terms[0].norm(), "order {k}: {t}");
            }
        }
    }

    #[test]
    fn optimal_truncation_stops_before_first_rise() {
        let r = riccati_series_at(&anharmonic(), 5.0, 0.0, 16).unwrap();
        let n = r.optimal_order;
        assert!(n <= 16);
        if n < 16 {
            let next = r.next_live_term(n).unwrap();
            assert!(next.norm() >= r.terms[n].norm());
        }
        assert!(r.boundary_value.re > 0.0);
    }

    #[test]
    fn lennard_jones_truncation_within_cap() {
        let lj = PotentialSpec::lennard_jones(1e4);
        let r = riccati_series_at(&lj, -3e-6, 1.2, 12).unwrap();
        assert!(r.optimal_order <= 12);
        assert!(r.boundary_value.re > 0.0);
    }

    #[test]
    fn partial_sum_residual_tracks_next_term() {
        for (spec, e, x) in [(harmonic(), 10.5, 0.3), (anharmonic(), 40.0, 0.2)] {
            let r = riccati_series_at(&spec, e, x, 10).unwrap();
            for n in 2..6 {
                let res = r.partial_sum_residual(&spec, e, n);
                let scale = r.terms[0].norm() * r.terms[n + 1].norm();
                assert!(res < 10.0 * scale + 1e-12, "n={n} res={res:e} scale={scale:e}");
            }
        }
    }

    #[test]
    fn rejects_forbidden_expansion_points() {
        assert!(matches!(
            riccati_series_at(&harmonic(), 0.5, 2.0, 6),
            Err(Error::OutsideClassicalRegion { .. })
        ));
        assert!(riccati_series_at(&harmonic(), 0.5, 0.0, 1).is_err());
    }
}
