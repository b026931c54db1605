use std::f64::consts::PI;
use std::path::Path;

use qphase::oracle::OracleLevels;
use qphase::quantize::{attach_oracle, attach_wkb, LevelTable, LEVEL_TOLERANCE};
use qphase::{
    oracle_count_below, oracle_levels, quantize_levels, scan_total_phase, solve_phase, wavefunction, PotentialSpec,
};

use crate::config::{Compare, RunConfig};
use crate::error::CliError;
use crate::table::{fmt_sig, Cell, Table};

/// A rendered table plus a failure that should still set the exit code.
pub struct Outcome {
    pub table: Table,
    pub failure: Option<CliError>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, failure: None }
    }
}

fn level_table(cfg: &RunConfig, spec: &PotentialSpec) -> Result<LevelTable, CliError> {
    if cfg.n_max.is_none() && spec.threshold().is_none() {
        return Err(CliError::Config("confining wells need --n-max".into()));
    }
    Ok(quantize_levels(spec, cfg.n_max, &cfg.solver(), cfg.scan_density.unwrap_or(4))?)
}

fn missing_levels(cfg: &RunConfig, table: &LevelTable) -> Option<CliError> {
    let skipped: Vec<&String> = table.notices.iter().filter(|n| n.contains("skipped")).collect();
    let short = cfg.n_max.is_some_and(|n| table.rows.len() < n + 1);
    if skipped.is_empty() && !short {
        return None;
    }
    Some(CliError::Solver(format!(
        "{} level(s) found; {}",
        table.rows.len(),
        skipped.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; ")
    )))
}

pub fn levels(cfg: &RunConfig, compare: Option<Compare>, spacing: bool) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    let mut levels = level_table(cfg, &spec)?;
    let wkb = compare.is_some_and(Compare::wkb);
    let oracle = compare.is_some_and(Compare::oracle);
    if wkb {
        attach_wkb(&mut levels, &spec)?;
    }
    if oracle {
        match &cfg.reference {
            Some(path) => attach_reference(&mut levels, path)?,
            None => {
                let top = levels.rows.last().map_or(0, |r| r.n);
                attach_oracle(&mut levels, &spec, &cfg.oracle_config(&spec, top)?)?;
            }
        }
    }
    let mut columns = vec!["n", "E_quantum", "residual", "iterations"];
    if wkb {
        columns.extend(["E_wkb", "wkb_rel_error"]);
    }
    if oracle {
        columns.extend(["E_oracle", "oracle_uncertainty", "rel_error"]);
    }
    if spacing {
        columns.push("error_over_spacing");
    }
    let mut table = Table::new(if spacing { "compare" } else { "levels" }, &columns);
    table.info("level_tolerance", fmt_sig(LEVEL_TOLERANCE));
    table.info("levels_found", levels.rows.len());
    if let Some(t) = spec.threshold() {
        table.info("threshold", fmt_sig(t));
    }
    let ratios = levels.error_over_spacing();
    for (row, ratio) in levels.rows.iter().zip(ratios) {
        let mut cells = vec![
            Cell::Int(row.n as i64),
            Cell::Float(row.e_quantum),
            Cell::Float(row.residual),
            Cell::Int(row.iterations as i64),
        ];
        if wkb {
            cells.extend([Cell::opt(row.e_wkb), Cell::opt(wkb_error(row.e_wkb, row.e_quantum))]);
        }
        if oracle {
            cells.extend([
                Cell::opt(row.e_oracle),
                Cell::opt(row.oracle_uncertainty),
                Cell::opt(row.relative_error_vs_oracle()),
            ]);
        }
        if spacing {
            cells.push(Cell::opt(ratio));
        }
        table.push(cells);
    }
    table.notices = levels.notices.clone();
    let failure = missing_levels(cfg, &levels);
    Ok(Outcome { table, failure })
}

fn wkb_error(wkb: Option<f64>, exact: f64) -> Option<f64> {
    wkb.map(|w| ((w - exact) / exact).abs())
}

/// Oracle columns from a file written by the `oracle` subcommand.
fn attach_reference(levels: &mut LevelTable, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let bad = |m: &str| CliError::Config(format!("{}: {m}", path.display()));
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty reference file"))?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or_else(|| bad(&format!("no {name} column")));
    let (cn, ce, cu) = (col("n")?, col("E_oracle")?, col("uncertainty")?);
    let mut reference = std::collections::BTreeMap::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let parse = |k: usize| cells.get(k).and_then(|c| c.parse::<f64>().ok());
        let n = cells.get(cn).and_then(|c| c.parse::<usize>().ok()).ok_or_else(|| bad("bad level index"))?;
        reference.insert(n, (parse(ce), parse(cu)));
    }
    for row in &mut levels.rows {
        if let Some(&(e, u)) = reference.get(&row.n) {
            row.e_oracle = e;
            row.oracle_uncertainty = u;
        }
    }
    Ok(())
}

pub fn phase(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    let solver = cfg.solver();
    let energy = match (cfg.e, cfg.level) {
        (Some(e), None) => e,
        (None, Some(n)) => {
            let table = quantize_levels(&spec, Some(n), &solver, cfg.scan_density.unwrap_or(4))?;
            table
                .rows
                .iter()
                .find(|r| r.n == n)
                .map(|r| r.e_quantum)
                .ok_or_else(|| CliError::Solver(format!("level {n} not found: {}", table.notices.join("; "))))?
        }
        _ => return Err(CliError::Config("phase needs exactly one of --e and --level".into())),
    };
    let sol = solve_phase(&spec, energy, &solver)?;
    let nearest = (sol.total_phase / PI).round().max(1.0);
    let eigen = (sol.total_phase - nearest * PI).abs() < 1e3 * LEVEL_TOLERANCE;
    let wf = wavefunction(&sol, eigen);
    let psi = wf.normalized.as_ref().unwrap_or(&wf.psi);
    let p2 = sol.grid.p2();
    let turning = sol.grid.turning;
    let action = classical_action(&sol.grid.nodes, p2, turning.map(|t| (t.t1, t.t2)));

    let mut table = Table::new("phase", &["x", "sigma", "dsigma", "alpha", "psi", "p2", "S", "p"]);
    table.info("energy", fmt_sig(energy));
    table.info("total_phase", fmt_sig(sol.total_phase));
    table.info("total_phase_over_pi", fmt_sig(sol.phase_over_pi()));
    if let Some(t) = turning {
        table.info("t1", fmt_sig(t.t1));
        table.info("t2", fmt_sig(t.t2));
    }
    table.info("x_b", fmt_sig(sol.x_b()));
    table.info("truncation_order", sol.truncation_order);
    table.info("boundary_value", format!("{} {:+}i", fmt_sig(sol.boundary_value.re), fmt_sig(sol.boundary_value.im)));
    table.info("iterations", sol.iterations);
    table.info("final_update_norm", fmt_sig(sol.final_update_norm));
    table.info("riccati_residual", fmt_sig(sol.riccati_residual));
    table.info("discretization_error", fmt_sig(sol.discretization_error));
    table.info(
        "psi",
        if eigen {
            "normalized eigenfunction (first antinode positive)"
        } else {
            "unnormalized alpha sin(sigma); E is not an eigenvalue"
        },
    );
    table.info("S", "classical action int_t1^x p dx + pi/4, between the turning points only");
    let stride = cfg.stride.unwrap_or(1);
    let last = sol.grid.len() - 1;
    for k in (0..=last).filter(|k| k % stride == 0 || *k == last) {
        let inside = action[k].is_some();
        table.push(vec![
            Cell::Float(sol.grid.nodes[k]),
            Cell::Float(sol.sigma[k]),
            Cell::Float(sol.m[k].re),
            Cell::Float(sol.alpha[k]),
            Cell::Float(psi[k]),
            Cell::Float(p2[k]),
            Cell::opt(action[k]),
            Cell::opt(inside.then(|| p2[k].max(0.0).sqrt())),
        ]);
    }
    Ok(table.into())
}

/// `S(x) = pi/4 + int_{t1}^x p dx` on the nodes inside `(t1, t2)`. The
/// first partial interval uses the square-root behaviour of `p` at `t1`.
fn classical_action(nodes: &[f64], p2: &[f64], turning: Option<(f64, f64)>) -> Vec<Option<f64>> {
    let mut out = vec![None; nodes.len()];
    let Some((t1, t2)) = turning else {
        return out;
    };
    let p = |k: usize| p2[k].max(0.0).sqrt();
    let mut acc: Option<(usize, f64)> = None;
    for k in 0..nodes.len() {
        let x = nodes[k];
        if x <= t1 || x >= t2 {
            continue;
        }
        let s = match acc {
            None => PI / 4.0 + 2.0 / 3.0 * p(k) * (x - t1),
            Some((j, s)) => s + 0.5 * (x - nodes[j]) * (p(j) + p(k)),
        };
        acc = Some((k, s));
        out[k] = Some(s);
    }
    out
}

pub fn scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    let (Some(lo), Some(hi)) = (cfg.e_min, cfg.e_max) else {
        return Err(CliError::Config("scan needs --e-min and --e-max".into()));
    };
    let samples = cfg.samples.unwrap_or(101);
    if !(hi > lo) || samples < 2 {
        return Err(CliError::Config("scan needs e_min < e_max and at least two samples".into()));
    }
    let energies: Vec<f64> = (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .collect();
    let curve = scan_total_phase(&spec, &energies, &cfg.solver())?;
    let mut table = Table::new("scan", &["E", "total_phase", "total_phase_over_pi", "iterations"]);
    table.info("samples_requested", samples);
    table.info("samples_solved", curve.energies.len());
    table.info("monotone", curve.is_monotone());
    for ((e, s), it) in curve.energies.iter().zip(&curve.total_phases).zip(&curve.iterations) {
        table.push(vec![Cell::Float(*e), Cell::Float(*s), Cell::Float(s / PI), Cell::Int(*it as i64)]);
    }
    table.notices = curve
        .failures
        .iter()
        .map(|f| format!("no solution at E = {}: {}", fmt_sig(f.energy), f.message))
        .collect();
    let failure = curve
        .energies
        .is_empty()
        .then(|| CliError::Solver("no scan energy could be solved".into()));
    Ok(Outcome { table, failure })
}

pub fn oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    let n_max = match cfg.n_max {
        Some(n) => n,
        None if spec.threshold().is_some() => {
            let probe = cfg.oracle_config(&spec, 0)?;
            let t = spec.threshold().unwrap_or(0.0);
            oracle_count_below(&spec, &probe, t)?
                .checked_sub(1)
                .ok_or_else(|| CliError::Solver("the well has no bound level".into()))?
        }
        None => return Err(CliError::Config("oracle needs --n-max for confining wells".into())),
    };
    let ocfg = cfg.oracle_config(&spec, n_max)?;
    let levels: OracleLevels = oracle_levels(&spec, &ocfg, n_max)?;
    let mut table = Table::new("oracle", &["n", "E_oracle", "uncertainty", "E_coarse", "E_fine"]);
    table.info("box", format!("[{}, {}]", fmt_sig(ocfg.x_min), fmt_sig(ocfg.x_max)));
    table.info("nodes", ocfg.node_count);
    table.info("scheme", format!("{:?}", ocfg.scheme));
    table.info("coordinate", format!("{:?}", ocfg.coordinate));
    table.info("tolerance", fmt_sig(ocfg.tolerance));
    for n in 0..levels.energies.len() {
        table.push(vec![
            Cell::Int(n as i64),
            Cell::Float(levels.energies[n]),
            Cell::Float(levels.uncertainties[n]),
            Cell::Float(levels.coarse[n]),
            Cell::Float(levels.fine[n]),
        ]);
    }
    Ok(table.into())
}
