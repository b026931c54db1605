//! Reference spectra from a discretized Schrodinger operator.
//!
//! `psi'' = F psi` with `F = g (V - E)` on a uniform grid with Dirichlet walls
//! becomes the symmetric tridiagonal system `tridiag(-1, U_i(E), -1) phi = 0`.
//! Second-order differences use `U = 2 + h^2 F` and `phi = psi`; Numerov uses
//! `U = (2 + 10 h^2 F / 12) / (1 - h^2 F / 12)` and
//! `phi = (1 - h^2 F / 12) psi`. Every `U_i` decreases with `E`, so the number
//! of negative pivots of the matrix counts the levels below `E`, and
//! bisection on that count isolates each level. Two resolutions are combined
//! by Richardson extrapolation.
//!
//! Radial wells use `x = e^s`, `psi = e^{s/2} chi`, turning the problem into
//! `chi'' = (1/4 + e^{2s} g (V - E)) chi` on a uniform `s` grid.
//!
//! Nothing here shares code with the phase solver beyond evaluating `V`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::wkb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SecondOrderFd,
    NumerovFd,
}

impl Scheme {
    fn order(self) -> i32 {
        match self {
            Scheme::SecondOrderFd => 2,
            Scheme::NumerovFd => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub x_min: f64,
    pub x_max: f64,
    /// Interior nodes of the coarse grid; the fine grid has twice as many.
    pub node_count: usize,
    pub scheme: Scheme,
    pub coordinate: Coordinate,
    /// Largest accepted extrapolation correction, relative to `E - V_min`.
    pub tolerance: f64,
}

/// Forbidden-region exponent kept on either side of the outermost level.
pub const ORACLE_DECAY_BUDGET: f64 = 30.0;

impl OracleConfig {
    /// Box and resolution adequate for levels `0..=n_max`.
    ///
    /// Confining wells get a linear box whose walls sit `ORACLE_DECAY_BUDGET`
    /// decay lengths beyond the turning points of an energy safely above
    /// level `n_max`. Radial wells get a logarithmic box on `[0.6, 2000]`,
    /// which also holds the near-threshold levels of strong wells.
    pub fn for_spec(spec: &PotentialSpec, n_max: usize) -> Result<Self> {
        spec.validate()?;
        if spec.is_radial() {
            return Ok(Self {
                x_min: 0.6,
                x_max: 2000.0,
                node_count: 12_000,
                scheme: Scheme::NumerovFd,
                coordinate: Coordinate::Logarithmic,
                tolerance: 1e-8,
            });
        }
        if !spec.is_confining() {
            return Err(Error::NotApplicable(
                "automatic oracle boxes need a confining or radial well".into(),
            ));
        }
        let (_, v_min) = spec.well_minimum();
        let top = *wkb::wkb_levels(spec, n_max + 1)?.last().unwrap();
        let e_max = v_min + 1.5 * (top - v_min) + 1.0;
        let turning = spec.find_turning_points(e_max)?;
        let step = turning.width() / 400.0;
        let edge = |start: f64, dir: f64| {
            let mut x = start;
            let mut decay = 0.0;
            while decay < ORACLE_DECAY_BUDGET {
                let k0 = (-spec.p2(e_max, x)).max(0.0).sqrt();
                x += dir * step;
                let k1 = (-spec.p2(e_max, x)).max(0.0).sqrt();
                decay += 0.5 * step * (k0 + k1);
            }
            x
        };
        Ok(Self {
            x_min: edge(turning.t1, -1.0),
            x_max: edge(turning.t2, 1.0),
            node_count: 8000,
            scheme: Scheme::NumerovFd,
            coordinate: Coordinate::Linear,
            tolerance: 1e-8,
        })
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self, spec: &PotentialSpec) -> Result<()> {
        if self.node_count < 1000 {
            return Err(Error::InvalidInput("oracle node_count must be at least 1000".into()));
        }
        if !(self.x_min < self.x_max) || !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput("oracle box must satisfy x_min < x_max".into()));
        }
        spec.check_domain(self.x_min)?;
        spec.check_domain(self.x_max)?;
        if self.coordinate == Coordinate::Logarithmic && self.x_min <= 0.0 {
            return Err(Error::InvalidInput("logarithmic oracle grids need x_min > 0".into()));
        }
        Ok(())
    }
}

/// Extrapolated levels with per-level uncertainty and the raw resolutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleLevels {
    pub energies: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub config: OracleConfig,
}

/// One resolution of the discretized operator.
struct Discretization {
    scheme: Scheme,
    log: bool,
    h: f64,
    /// Physical coordinate per interior node.
    xs: Vec<f64>,
    /// `g V(x)` per node, scaled by `e^{2s}` and shifted by `1/4` in the log map.
    base: Vec<f64>,
    /// Coefficient of `-E` in `F`: `g`, or `g e^{2s}` in the log map.
    weight: Vec<f64>,
}

impl Discretization {
    fn new(spec: &PotentialSpec, cfg: &OracleConfig, interior: usize) -> Self {
        let log = cfg.coordinate == Coordinate::Logarithmic;
        let (a, b) = if log {
            (cfg.x_min.ln(), cfg.x_max.ln())
        } else {
            (cfg.x_min, cfg.x_max)
        };
        let h = (b - a) / (interior + 1) as f64;
        let g = spec.coupling();
        let mut xs = Vec::with_capacity(interior);
        let mut base = Vec::with_capacity(interior);
        let mut weight = Vec::with_capacity(interior);
        for i in 1..=interior {
            let s = a + h * i as f64;
            if log {
                let x = s.exp();
                let w = g * x * x;
                xs.push(x);
                base.push(0.25 + w * spec.v_unchecked(x));
                weight.push(w);
            } else {
                xs.push(s);
                base.push(g * spec.v_unchecked(s));
                weight.push(g);
            }
        }
        Self {
            scheme: cfg.scheme,
            log,
            h,
            xs,
            base,
            weight,
        }
    }

    fn len(&self) -> usize {
        self.xs.len()
    }

    fn diagonal(&self, energy: f64) -> Vec<f64> {
        let h2 = self.h * self.h;
        self.base
            .iter()
            .zip(&self.weight)
            .map(|(&b, &w)| {
                let f = b - w * energy;
                match self.scheme {
                    Scheme::SecondOrderFd => 2.0 + h2 * f,
                    Scheme::NumerovFd => numerov_diagonal(h2 * f),
                }
            })
            .collect()
    }

    /// Number of levels below `energy`.
    fn count_below(&self, energy: f64) -> usize {
        let diag = self.diagonal(energy);
        let mut count = 0;
        let mut pivot = 1.0f64;
        for (i, &d) in diag.iter().enumerate() {
            pivot = if i == 0 { d } else { d - 1.0 / pivot };
            if pivot == 0.0 {
                pivot = f64::EPSILON * d.abs().max(1.0);
            }
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Energy of level `n` by bisection on the pivot count.
    fn level(&self, n: usize, v_min: f64) -> Result<f64> {
        let mut lo = v_min - 1.0;
        let mut width = 1.0;
        while self.count_below(lo) > n {
            lo -= width;
            width *= 2.0;
        }
        let mut hi = v_min + 1.0;
        width = 1.0;
        while self.count_below(hi) <= n {
            hi += width;
            width *= 2.0;
            if !hi.is_finite() || width > 1e12 {
                return Err(Error::NotApplicable(format!("level {n} not bound in the oracle box")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Normalized eigenvector at an eigenvalue of this resolution.
    fn eigenvector(&self, energy: f64) -> Result<Vec<f64>> {
        let diag = self.diagonal(energy);
        let n = self.len();
        let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..3 {
            y = solve_tridiagonal(&diag, &y);
            let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            y.iter_mut().for_each(|v| *v /= scale);
        }
        let h2 = self.h * self.h;
        let mut psi: Vec<f64> = match self.scheme {
            Scheme::SecondOrderFd => y,
            Scheme::NumerovFd => y
                .iter()
                .zip(self.base.iter().zip(&self.weight))
                .map(|(v, (&b, &w))| v / numerov_weight(h2 * (b - w * energy)))
                .collect(),
        };
        if self.log {
            // back to psi(x) = e^{s/2} chi(s)
            psi.iter_mut().zip(&self.xs).for_each(|(v, x)| *v *= x.sqrt());
        }
        let norm = self.weighted_dot(&psi, &psi).sqrt();
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let first = psi.iter().find(|v| v.abs() > 1e-3 * peak).copied().unwrap_or(1.0);
        let sign = if first < 0.0 { -1.0 } else { 1.0 };
        psi.iter_mut().for_each(|v| *v *= sign / norm);
        Ok(psi)
    }

    /// Discrete `int a b dx` (walls contribute zero).
    fn weighted_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.log {
            a.iter().zip(b).zip(&self.xs).map(|((u, v), x)| u * v * x).sum::<f64>() * self.h
        } else {
            a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>() * self.h
        }
    }
}

/// Numerov weight `1 - t/12` with `t = h^2 F`, frozen at `t = 6`.
fn numerov_weight(t: f64) -> f64 {
    1.0 - t.min(NUMEROV_KNEE) / 12.0
}

/// Beyond `t = 6` the weight would approach zero, which only happens deep in
/// a forbidden region (e.g. the far end of a logarithmic box at low trial
/// energies). There `U` continues linearly with its slope at the knee, which
/// keeps it increasing in `t` and so keeps the pivot count valid.
const NUMEROV_KNEE: f64 = 6.0;

fn numerov_diagonal(t: f64) -> f64 {
    if t <= NUMEROV_KNEE {
        (2.0 + 10.0 * t / 12.0) / (1.0 - t / 12.0)
    } else {
        14.0 + 4.0 * (t - NUMEROV_KNEE)
    }
}

/// Gaussian elimination with partial pivoting for `tridiag(-1, diag, -1) y = rhs`
/// (the LAPACK `gtsv` elimination order).
fn solve_tridiagonal(diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut dl = vec![-1.0f64; n];
    let mut du = vec![-1.0; n];
    let mut b = rhs.to_vec();
    let guard = |v: f64| if v == 0.0 { f64::EPSILON } else { v };
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let fact = dl[i] / guard(d[i]);
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                // dl now holds the second superdiagonal
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = temp;
            let t = b[i];
            b[i] = b[i + 1];
            b[i + 1] = t - fact * b[i + 1];
        }
    }
    b[n - 1] /= guard(d[n - 1]);
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / guard(d[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / guard(d[i]);
    }
    b
}

/// Lowest `n_max + 1` levels, extrapolated from `node_count` and
/// `2 node_count + 1` interior nodes (the fine grid halves the step).
pub fn oracle_levels(spec: &PotentialSpec, cfg: &OracleConfig, n_max: usize) -> Result<OracleLevels> {
    spec.validate()?;
    cfg.validate(spec)?;
    let (_, v_min) = spec.well_minimum();
    let coarse_d = Discretization::new(spec, cfg, cfg.node_count);
    let fine_d = Discretization::new(spec, cfg, 2 * cfg.node_count + 1);
    let factor = 2f64.powi(cfg.scheme.order()) - 1.0;
    let rows: Vec<Result<(f64, f64, f64, f64)>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let coarse = coarse_d.level(n, v_min)?;
            let fine = fine_d.level(n, v_min)?;
            let correction = (fine - coarse) / factor;
            let value = fine + correction;
            let scale = (value - v_min).abs().max(f64::MIN_POSITIVE);
            if correction.abs() > cfg.tolerance * scale {
                return Err(Error::OracleUnconverged { level: n, coarse, fine });
            }
            Ok((value, correction.abs(), coarse, fine))
        })
        .collect();
    let mut out = OracleLevels {
        energies: Vec::new(),
        uncertainties: Vec::new(),
        coarse: Vec::new(),
        fine: Vec::new(),
        config: cfg.clone(),
    };
    for row in rows {
        let (e, u, c, f) = row?;
        out.energies.push(e);
        out.uncertainties.push(u);
        out.coarse.push(c);
        out.fine.push(f);
    }
    Ok(out)
}

/// Number of discrete levels below `energy` on the fine grid.
pub fn oracle_count_below(spec: &PotentialSpec, cfg: &OracleConfig, energy: f64) -> Result<usize> {
    cfg.validate(spec)?;
    Ok(Discretization::new(spec, cfg, 2 * cfg.node_count + 1).count_below(energy))
}

/// Normalized discrete eigenfunction of level `n` on the fine grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEigenfunction {
    pub energy: f64,
    pub nodes: Vec<f64>,
    pub psi: Vec<f64>,
}

impl OracleEigenfunction {
    /// Trapezoid-rule overlap with another function sampled on the same nodes.
    pub fn overlap(&self, other: &[f64]) -> f64 {
        trapezoid(&self.nodes, |k| self.psi[k] * other[k])
    }
}

pub(crate) fn trapezoid(x: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (0..x.len().saturating_sub(1))
        .map(|k| 0.5 * (x[k + 1] - x[k]) * (f(k) + f(k + 1)))
        .sum()
}

pub fn oracle_eigenfunction(spec: &PotentialSpec, cfg: &OracleConfig, n: usize) -> Result<OracleEigenfunction> {
    spec.validate()?;
    cfg.validate(spec)?;
    let (_, v_min) = spec.well_minimum();
    let d = Discretization::new(spec, cfg, 2 * cfg.node_count + 1);
    let energy = d.level(n, v_min)?;
    let psi = d.eigenvector(energy)?;
    Ok(OracleEigenfunction {
        energy,
        nodes: d.xs,
        psi,
    })
}

/// Gram matrix of the first `count` discrete eigenfunctions (fine grid).
pub fn oracle_gram(spec: &PotentialSpec, cfg: &OracleConfig, count: usize) -> Result<Vec<Vec<f64>>> {
    cfg.validate(spec)?;
    let (_, v_min) = spec.well_minimum();
    let d = Discretization::new(spec, cfg, 2 * cfg.node_count + 1);
    let vecs = (0..count)
        .map(|n| d.level(n, v_min).and_then(|e| d.eigenvector(e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(vecs
        .iter()
        .map(|a| vecs.iter().map(|b| d.weighted_dot(a, b)).collect())
        .collect())
}

#[cfg(test)]
mod tests;
