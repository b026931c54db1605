//! Quantization `sigma(s2, E) = (n + 1) pi` over scanned energies.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::oracle::{oracle_levels, OracleConfig};
use crate::phase::{solve_phase, PhaseSolution, SolverConfig};
use crate::potential::PotentialSpec;
use crate::roots;
use crate::wkb::{self, action_integral};

/// Phase residual at which a level counts as converged.
pub const LEVEL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanFailure {
    pub energy: f64,
    pub message: String,
}

/// Sampled total phase with a shape-preserving interpolant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCurve {
    pub energies: Vec<f64>,
    pub total_phases: Vec<f64>,
    pub iterations: Vec<usize>,
    pub failures: Vec<ScanFailure>,
    #[serde(skip)]
    pub interpolant: Option<Pchip>,
}

impl PhaseCurve {
    pub fn is_monotone(&self) -> bool {
        self.total_phases.windows(2).all(|w| w[1] > w[0])
    }

    /// Total phase from the interpolant.
    pub fn phase_at(&self, energy: f64) -> Option<f64> {
        self.interpolant.as_ref().map(|p| p.eval(energy))
    }

    /// Multiples `(n + 1) pi` inside the sampled range.
    pub fn levels_spanned(&self) -> std::ops::Range<usize> {
        let (Some(lo), Some(hi)) = (self.total_phases.first(), self.total_phases.last()) else {
            return 0..0;
        };
        let first = (lo / PI).ceil().max(1.0) as usize - 1;
        let end = (hi / PI).floor().max(0.0) as usize;
        first..end.max(first)
    }
}

/// Solves the phase at every energy; failures are recorded, not fatal.
pub fn scan_total_phase(spec: &PotentialSpec, energies: &[f64], cfg: &SolverConfig) -> Result<PhaseCurve> {
    spec.validate()?;
    cfg.validate()?;
    if energies.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("scan energies must be strictly increasing".into()));
    }
    let results: Vec<Result<PhaseSolution>> = energies.par_iter().map(|&e| solve_phase(spec, e, cfg)).collect();
    let mut curve = PhaseCurve {
        energies: Vec::new(),
        total_phases: Vec::new(),
        iterations: Vec::new(),
        failures: Vec::new(),
        interpolant: None,
    };
    for (&e, r) in energies.iter().zip(results) {
        match r {
            Ok(sol) => {
                curve.energies.push(e);
                curve.total_phases.push(sol.total_phase);
                curve.iterations.push(sol.iterations);
            }
            Err(err) => curve.failures.push(ScanFailure {
                energy: e,
                message: err.to_string(),
            }),
        }
    }
    if curve.energies.len() >= 2 {
        curve.interpolant = Some(Pchip::new(curve.energies.clone(), curve.total_phases.clone())?);
    }
    Ok(curve)
}

/// Scan energies for levels `0..=n_max`: `per_level` samples per unit of
/// `pi` in the classical action, plus one just above the well floor. Wells
/// with a threshold (where `n_max = None` means every bound level) also get
/// geometric samples `t - 10^-k` of the well depth.
pub fn default_energy_grid(spec: &PotentialSpec, n_max: Option<usize>, per_level: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let per_level = per_level.max(1);
    let (_, v_min) = spec.well_minimum();
    let action = |e: f64| action_integral(spec, e).map(|a| a.s_diff);
    let mut targets = vec![PI / 16.0];
    let mut grid = Vec::new();
    match spec.threshold() {
        Some(t) => {
            let depth = t - v_min;
            let top = t - 1e-10 * depth;
            let s_top = action(top)?;
            let last = match n_max {
                Some(n) => ((n as f64 + 2.0) * PI).min(s_top),
                None => s_top,
            };
            let count = (last / PI * per_level as f64).ceil() as usize;
            targets.extend((1..count).map(|k| k as f64 * PI / per_level as f64));
            for s in targets {
                if s < s_top {
                    grid.push(invert_action(spec, s, v_min, top)?);
                }
            }
            if n_max.is_none() || last >= s_top {
                grid.extend((2..=10).map(|k| t - depth * 10f64.powi(-k)));
            }
        }
        None => {
            let n = n_max.ok_or_else(|| Error::InvalidInput("confining wells need n_max".into()))?;
            let count = (n + 2) * per_level;
            targets.extend((1..=count).map(|k| k as f64 * PI / per_level as f64));
            let mut hi = v_min + 1.0;
            while action(hi)? < *targets.last().unwrap() {
                hi = v_min + 2.0 * (hi - v_min);
            }
            for s in targets {
                grid.push(invert_action(spec, s, v_min, hi)?);
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    Ok(grid)
}

fn invert_action(spec: &PotentialSpec, target: f64, v_min: f64, hi: f64) -> Result<f64> {
    let scale = (hi - v_min).abs();
    let lo = v_min + 1e-12 * scale.max(1.0);
    roots::illinois(|e| Ok(action_integral(spec, e)?.s_diff - target), lo, hi, 1e-10, 1e-14 * scale)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub n: usize,
    pub e_quantum: f64,
    pub e_wkb: Option<f64>,
    pub e_oracle: Option<f64>,
    pub oracle_uncertainty: Option<f64>,
    /// `|sigma(s2, E) - (n + 1) pi|` at `e_quantum`.
    pub residual: f64,
    pub iterations: usize,
}

impl LevelRow {
    pub fn relative_error_vs_oracle(&self) -> Option<f64> {
        self.e_oracle.map(|o| ((self.e_quantum - o) / o).abs())
    }

    pub fn wkb_relative_error(&self) -> Option<f64> {
        Some(((self.e_wkb? - self.e_oracle?) / self.e_oracle?).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelTable {
    pub rows: Vec<LevelRow>,
    /// Levels skipped and other notices from the solve.
    pub notices: Vec<String>,
}

impl LevelTable {
    pub fn energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.e_quantum).collect()
    }

    /// Spacing to the nearest neighbouring level, per row.
    pub fn local_spacing(&self) -> Vec<f64> {
        let e = self.energies();
        (0..e.len())
            .map(|k| {
                let below = if k > 0 { e[k] - e[k - 1] } else { f64::INFINITY };
                let above = if k + 1 < e.len() { e[k + 1] - e[k] } else { f64::INFINITY };
                below.min(above)
            })
            .collect()
    }

    /// `|E_quantum - E_oracle|` over the local level spacing, per row.
    pub fn error_over_spacing(&self) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .zip(self.local_spacing())
            .map(|(r, s)| r.e_oracle.map(|o| (r.e_quantum - o).abs() / s))
            .collect()
    }
}

/// Levels whose multiple of `pi` lies inside the curve, each refined with
/// full phase solves to `LEVEL_TOLERANCE`.
pub fn solve_levels(curve: &PhaseCurve, spec: &PotentialSpec, cfg: &SolverConfig) -> Result<LevelTable> {
    let interp = curve
        .interpolant
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("phase curve needs at least two samples".into()))?;
    let mut table = LevelTable {
        rows: Vec::new(),
        notices: Vec::new(),
    };
    if !curve.is_monotone() {
        table.notices.push("sampled total phase is not strictly increasing".into());
    }
    let range = curve.levels_spanned();
    if range.start > 0 {
        table
            .notices
            .push(format!("levels 0..{} lie below the scanned range", range.start));
    }
    let rows: Vec<Result<LevelRow>> = range
        .clone()
        .into_par_iter()
        .map(|n| refine_level(n, curve, interp, spec, cfg))
        .collect();
    for (n, row) in range.zip(rows) {
        match row {
            Ok(r) => table.rows.push(r),
            Err(e) => table.notices.push(format!("level {n} skipped: {e}")),
        }
    }
    Ok(table)
}

fn refine_level(n: usize, curve: &PhaseCurve, interp: &Pchip, spec: &PotentialSpec, cfg: &SolverConfig) -> Result<LevelRow> {
    let target = (n as f64 + 1.0) * PI;
    let k = curve
        .total_phases
        .windows(2)
        .position(|w| w[0] <= target && target <= w[1])
        .ok_or_else(|| Error::RootNotBracketed(format!("level {n} outside the scanned phases")))?;
    let (mut a, mut b) = (curve.energies[k], curve.energies[k + 1]);
    let f = |e: f64| solve_phase(spec, e, cfg).map(|s| s.total_phase - target);
    // narrow the bracket with the interpolated guess
    if let Some(guess) = interp.invert(target) {
        if guess > a && guess < b {
            let fg = f(guess)?;
            if fg.abs() <= 0.1 * LEVEL_TOLERANCE {
                return finish_row(n, guess, spec, cfg);
            }
            let width = b - a;
            let step = 1e-4 * width;
            if fg < 0.0 {
                a = guess;
                let probe = (guess + step).min(b);
                if probe < b && f(probe)? > 0.0 {
                    b = probe;
                }
            } else {
                b = guess;
                let probe = (guess - step).max(a);
                if probe > a && f(probe)? < 0.0 {
                    a = probe;
                }
            }
        }
    }
    let e = roots::illinois(f, a, b, 0.1 * LEVEL_TOLERANCE, 0.0)?;
    finish_row(n, e, spec, cfg)
}

fn finish_row(n: usize, energy: f64, spec: &PotentialSpec, cfg: &SolverConfig) -> Result<LevelRow> {
    let sol = solve_phase(spec, energy, cfg)?;
    Ok(LevelRow {
        n,
        e_quantum: energy,
        e_wkb: None,
        e_oracle: None,
        oracle_uncertainty: None,
        residual: (sol.total_phase - (n as f64 + 1.0) * PI).abs(),
        iterations: sol.iterations,
    })
}

/// Levels `0..=n_max` (all bound levels for a threshold well when `None`)
/// from the default scan grid.
pub fn quantize_levels(spec: &PotentialSpec, n_max: Option<usize>, cfg: &SolverConfig, per_level: usize) -> Result<LevelTable> {
    let grid = default_energy_grid(spec, n_max, per_level)?;
    let curve = scan_total_phase(spec, &grid, cfg)?;
    let mut table = solve_levels(&curve, spec, cfg)?;
    for f in &curve.failures {
        table.notices.push(format!("scan failed at E = {}: {}", f.energy, f.message));
    }
    if let Some(n) = n_max {
        table.rows.retain(|r| r.n <= n);
    }
    Ok(table)
}

/// Number of bound levels of a well with a dissociation threshold:
/// `floor(sigma(s2, E) / pi)` just below the threshold.
pub fn count_bound_states(spec: &PotentialSpec, cfg: &SolverConfig) -> Result<usize> {
    spec.validate()?;
    let Some(t) = spec.threshold() else {
        return Err(Error::NotApplicable(
            "confining potentials have no dissociation threshold".into(),
        ));
    };
    let (_, v_min) = spec.well_minimum();
    let depth = t - v_min;
    let mut last_err = None;
    let mut closest = f64::NAN;
    for k in [9, 8, 7, 6, 5] {
        let e = t - depth * 10f64.powi(-k);
        match solve_phase(spec, e, cfg) {
            Ok(sol) => return Ok((sol.total_phase / PI).floor() as usize),
            Err(err) => {
                closest = e;
                last_err = Some(err);
            }
        }
    }
    Err(Error::ThresholdFailure {
        closest,
        reason: last_err.map(|e| e.to_string()).unwrap_or_default(),
    })
}

/// Level table with the leading-order WKB and oracle columns filled in.
pub fn compare_methods(
    spec: &PotentialSpec,
    n_max: Option<usize>,
    cfg: &SolverConfig,
    oracle_cfg: Option<&OracleConfig>,
) -> Result<LevelTable> {
    let mut table = quantize_levels(spec, n_max, cfg, 4)?;
    attach_wkb(&mut table, spec)?;
    let top = table.rows.last().map_or(0, |r| r.n);
    let owned;
    let ocfg = match oracle_cfg {
        Some(c) => c,
        None => {
            owned = OracleConfig::for_spec(spec, top)?;
            &owned
        }
    };
    attach_oracle(&mut table, spec, ocfg)?;
    Ok(table)
}

pub fn attach_wkb(table: &mut LevelTable, spec: &PotentialSpec) -> Result<()> {
    let top = table.rows.last().map_or(0, |r| r.n);
    let levels = wkb::wkb_levels(spec, top)?;
    for row in &mut table.rows {
        row.e_wkb = levels.get(row.n).copied();
    }
    Ok(())
}

pub fn attach_oracle(table: &mut LevelTable, spec: &PotentialSpec, cfg: &OracleConfig) -> Result<()> {
    let top = table.rows.last().map_or(0, |r| r.n);
    let oracle = oracle_levels(spec, cfg, top)?;
    for row in &mut table.rows {
        row.e_oracle = oracle.energies.get(row.n).copied();
        row.oracle_uncertainty = oracle.uncertainties.get(row.n).copied();
    }
    Ok(())
}
