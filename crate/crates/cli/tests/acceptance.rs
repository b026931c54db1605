//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use qphase::phase::{count_sign_changes, milne_residual, schwarzian_residual};
use qphase::presets::{self, ANHARMONIC_LEVELS, ANHARMONIC_PROBE_ENERGY, LENNARD_JONES_LEVELS};
use qphase::quantize::{attach_oracle, attach_wkb, LevelTable};
use qphase::{
    count_bound_states, oracle_count_below, quantize_levels, riccati_series_at, roots, solve_phase,
    wavefunction, ExpansionPoint, OracleConfig, PhaseMethod, PotentialSpec, SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "[{}] criterion {id} {name}: {} ({:.1} s, limit {} s)",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

/// Root of `sigma(s2, E) = (n + 1) pi` near `guess`.
fn level_near(spec: &PotentialSpec, n: usize, guess: f64, width: f64, cfg: &SolverConfig) -> f64 {
    let target = (n as f64 + 1.0) * PI;
    let f = |e: f64| solve_phase(spec, e, cfg).map(|s| s.total_phase - target);
    let (mut a, mut b) = (guess - width, guess + width);
    let mut w = width;
    for _ in 0..20 {
        if f(a).unwrap() < 0.0 && f(b).unwrap() > 0.0 {
            break;
        }
        w *= 2.0;
        a = guess - w;
        b = guess + w;
    }
    roots::illinois(f, a, b, 1e-11, 0.0).unwrap()
}

fn table_with_oracle(spec: &PotentialSpec, n_max: Option<usize>) -> LevelTable {
    let cfg = SolverConfig::default();
    let mut t = quantize_levels(spec, n_max, &cfg, 4).unwrap();
    attach_wkb(&mut t, spec).unwrap();
    let top = t.rows.last().unwrap().n;
    attach_oracle(&mut t, spec, &OracleConfig::for_spec(spec, top).unwrap()).unwrap();
    t
}

fn main() {
    let mut results = Vec::new();
    let harmonic = presets::harmonic();
    let anharmonic = presets::anharmonic();
    let lj = presets::lennard_jones();
    let cfg = SolverConfig::default();

    results.push(check(1, "harmonic exactness", secs(10), || {
        let t = quantize_levels(&harmonic, Some(9), &cfg, 4).unwrap();
        let de = t
            .rows
            .iter()
            .map(|r| (r.e_quantum - (r.n as f64 + 0.5)).abs())
            .fold(0.0, f64::max);
        let ds = (0..10)
            .map(|n| {
                let s = solve_phase(&harmonic, n as f64 + 0.5, &cfg).unwrap().total_phase;
                (s - (n as f64 + 1.0) * PI).abs()
            })
            .fold(0.0, f64::max);
        Outcome {
            pass: t.rows.len() == 10 && de < 1e-9 && ds < 1e-9,
            detail: format!("{} levels, max |dE| = {de:.2e}, max |sigma - (n+1)pi| = {ds:.2e}", t.rows.len()),
        }
    }));

    // shared by criteria 2, 4, 5
    let anh_table = table_with_oracle(&anharmonic, Some(ANHARMONIC_LEVELS - 1));

    results.push(check(2, "anharmonic benchmark vs oracle", secs(300), || {
        let t = table_with_oracle(&anharmonic, Some(ANHARMONIC_LEVELS - 1));
        let rel = t.rows.iter().filter_map(|r| r.relative_error_vs_oracle()).fold(0.0, f64::max);
        let unc = t
            .rows
            .iter()
            .map(|r| r.oracle_uncertainty.unwrap() / r.e_oracle.unwrap().abs())
            .fold(0.0, f64::max);
        Outcome {
            pass: t.rows.len() == ANHARMONIC_LEVELS && rel < 1e-6 && unc <= 1e-8,
            detail: format!(
                "{} levels, max rel error {rel:.2e}, max oracle rel uncertainty {unc:.2e}",
                t.rows.len()
            ),
        }
    }));

    let mut lj_table = None;
    results.push(check(3, "Lennard-Jones benchmark", secs(600), || {
        let count = count_bound_states(&lj, &cfg).unwrap();
        let t = table_with_oracle(&lj, None);
        let ocfg = OracleConfig::for_spec(&lj, LENNARD_JONES_LEVELS - 1).unwrap();
        let oracle_count = oracle_count_below(&lj, &ocfg, 0.0).unwrap();
        let depth = 1.0;
        let low = t
            .rows
            .iter()
            .filter(|r| r.n < LENNARD_JONES_LEVELS - 1)
            .map(|r| (r.e_quantum - r.e_oracle.unwrap()).abs() / depth)
            .fold(0.0, f64::max);
        let top = t.rows.last().unwrap();
        let top_err = (top.e_quantum - top.e_oracle.unwrap()).abs();
        let top_unc = top.oracle_uncertainty.unwrap();
        let pass = count == LENNARD_JONES_LEVELS
            && oracle_count == LENNARD_JONES_LEVELS
            && t.rows.len() == LENNARD_JONES_LEVELS
            && low < 1e-6
            && top_err <= top_unc
            && ocfg.x_max >= 40.0;
        let detail = format!(
            "count {count} (oracle {oracle_count}), {} rows, max |dE|/depth n<23 = {low:.2e}, top |dE| = {top_err:.2e} vs oracle uncertainty {top_unc:.2e}, box to x = {}",
            t.rows.len(),
            ocfg.x_max
        );
        lj_table = Some(t);
        Outcome { pass, detail }
    }));
    let lj_table = lj_table.unwrap();

    results.push(check(4, "WKB failure", secs(60), || {
        let g = &anh_table.rows[0];
        let anh = (g.e_wkb.unwrap() - g.e_quantum).abs() / g.e_quantum;
        let top = lj_table.rows.last().unwrap();
        let (wkb, exact) = (top.e_wkb.unwrap(), top.e_quantum);
        let lj_rel = ((wkb - exact) / exact).abs();
        Outcome {
            pass: anh > 0.10 && wkb < exact && (0.25..=0.55).contains(&lj_rel),
            detail: format!(
                "anharmonic ground {:.5} vs {:.5} ({:.1}%), LJ top {wkb:.4e} vs {exact:.4e} ({:.1}% too low)",
                g.e_wkb.unwrap(),
                g.e_quantum,
                100.0 * anh,
                100.0 * lj_rel
            ),
        }
    }));

    results.push(check(5, "E = 5 ordering and unit pinning", secs(60), || {
        let e = anh_table.energies();
        let below = e.iter().filter(|&&x| x < ANHARMONIC_PROBE_ENERGY).count();
        let trials = presets::pinning_experiment().unwrap();
        let pinned = trials.iter().filter(|t| t.consistent).map(|t| t.mass).collect::<Vec<_>>();
        Outcome {
            pass: below == 2 && e[1] < 5.0 && 5.0 < e[2] && pinned == [anharmonic.mass],
            detail: format!(
                "E_1 = {:.6} < 5 < E_2 = {:.6}; conventions consistent with the ordering: m = {pinned:?}",
                e[1], e[2]
            ),
        }
    }));

    results.push(check(6, "QLM quadratic convergence", secs(60), || {
        let cold = SolverConfig {
            richardson: false,
            ..cfg.clone()
        };
        let cases = [
            ("anharmonic E=5", &anharmonic, ANHARMONIC_PROBE_ENERGY),
            ("anharmonic n=35", &anharmonic, anh_table.rows[35].e_quantum),
            ("LJ n=11", &lj, lj_table.rows[11].e_quantum),
            ("LJ n=23", &lj, lj_table.rows[23].e_quantum),
        ];
        let mut pass = true;
        let mut parts = Vec::new();
        for (label, spec, e) in cases {
            let sol = solve_phase(spec, e, &cold).unwrap();
            let h = &sol.update_history;
            let scale = 1.0 + sol.m.iter().map(|m| m.norm()).fold(0.0, f64::max);
            // contraction above the rounding floor
            let c = (2..h.len().saturating_sub(1))
                .filter(|&q| h[q + 1] > 1e3 * f64::EPSILON * scale)
                .map(|q| h[q + 1] / (h[q] * h[q]))
                .fold(0.0, f64::max);
            let ok = sol.iterations <= 8 && sol.final_update_norm < 1e-12 * scale && c < 10.0;
            pass &= ok;
            let hist: Vec<String> = h.iter().map(|v| format!("{v:.0e}")).collect();
            parts.push(format!(
                "{label}: {} it [{}], final/scale {:.1e}, C = {c:.2}",
                sol.iterations,
                hist.join(" "),
                sol.final_update_norm / scale
            ));
        }
        Outcome {
            pass,
            detail: parts.join("; "),
        }
    }));

    results.push(check(7, "invariance suite", secs(600), || {
        let probes = [
            (&anharmonic, 0usize, anh_table.rows[0].e_quantum, 1e-6),
            (&anharmonic, 10, anh_table.rows[10].e_quantum, 1e-6),
            (&anharmonic, 35, anh_table.rows[35].e_quantum, 1e-6),
            (&lj, 0, lj_table.rows[0].e_quantum, 1e-7),
            (&lj, 11, lj_table.rows[11].e_quantum, 1e-7),
            (&lj, 23, lj_table.rows[23].e_quantum, 1e-9),
        ];
        let tol = |e: f64| 1e-8 * e.abs().max(1.0);
        let mut worst = [0.0f64; 4];
        let mut pass = true;
        for (spec, n, e_ref, width) in probes {
            let mut dev = |k: usize, c: &SolverConfig| {
                let e = level_near(spec, n, e_ref, width, c);
                let d = (e - e_ref).abs();
                worst[k] = worst[k].max(d / tol(e_ref));
                pass &= d < tol(e_ref);
            };
            // (a) expansion point moved by 20% of the well width
            for f in [-0.2, 0.2] {
                dev(0, &SolverConfig {
                    expansion_point: ExpansionPoint::WidthFraction(f),
                    ..cfg.clone()
                });
            }
            // (b) truncation orders 6..=N*
            let sol = solve_phase(spec, e_ref, &cfg).unwrap();
            let star = riccati_series_at(spec, e_ref, sol.x_b(), cfg.order_cap).unwrap().optimal_order;
            let low = if star >= 6 { 6 } else { 2 };
            for order in low..=star {
                dev(1, &SolverConfig {
                    truncation_order: Some(order),
                    ..cfg.clone()
                });
            }
            // (d) direct integration
            dev(3, &SolverConfig {
                method: PhaseMethod::DirectRiccati,
                ..cfg.clone()
            });
        }
        // (c) four times the scan density
        for (spec, n_max, base) in [
            (&anharmonic, Some(ANHARMONIC_LEVELS - 1), &anh_table),
            (&lj, None, &lj_table),
        ] {
            let dense = quantize_levels(spec, n_max, &cfg, 16).unwrap();
            pass &= dense.rows.len() == base.rows.len();
            for (a, b) in dense.rows.iter().zip(&base.rows) {
                let d = (a.e_quantum - b.e_quantum).abs();
                worst[2] = worst[2].max(d / tol(b.e_quantum));
                pass &= d < tol(b.e_quantum);
            }
        }
        Outcome {
            pass,
            detail: format!(
                "worst |dE|/tol: x_b {:.2e}, order {:.2e}, scan density {:.2e}, direct {:.2e}",
                worst[0], worst[1], worst[2], worst[3]
            ),
        }
    }));

    results.push(check(8, "structural identities", secs(120), || {
        let cases = [
            (&harmonic, 0usize, 0.5),
            (&harmonic, 4, 4.5),
            (&anharmonic, 0, anh_table.rows[0].e_quantum),
            (&anharmonic, 2, anh_table.rows[2].e_quantum),
            (&anharmonic, 20, anh_table.rows[20].e_quantum),
            (&lj, 0, lj_table.rows[0].e_quantum),
            (&lj, 11, lj_table.rows[11].e_quantum),
            (&lj, 23, lj_table.rows[23].e_quantum),
        ];
        let mut pass = true;
        let mut worst = [0.0f64; 3];
        let mut nodes_ok = true;
        for (spec, n, e) in cases {
            let sol = solve_phase(spec, e, &cfg).unwrap();
            pass &= sol.m.iter().all(|m| m.re > 0.0);
            let sup = sol.m.iter().map(|m| m.norm()).fold(0.0, f64::max);
            worst[0] = worst[0].max(sol.riccati_residual / (1e-8 * (1.0 + sup * sup)));
            let (milne, scale) = milne_residual(&sol);
            worst[1] = worst[1].max(milne / (1e-6 * scale));
            let k2 = sol.grid.p2().iter().fold(0.0f64, |m, &v| m.max(v));
            worst[2] = worst[2].max(schwarzian_residual(&sol, spec, e) / (1e-6 * k2));
            let psi = wavefunction(&sol, true).normalized.unwrap();
            nodes_ok &= count_sign_changes(&psi) == n;
        }
        pass &= nodes_ok && worst.iter().all(|&w| w < 1.0);
        Outcome {
            pass,
            detail: format!(
                "Re M > 0 on all nodes; residual/bound: Riccati {:.2e}, Milne {:.2e}, Schwarzian {:.2e}; node counts {}",
                worst[0],
                worst[1],
                worst[2],
                if nodes_ok { "exact" } else { "wrong" }
            ),
        }
    }));

    results.push(check(9, "figure datasets", secs(300), || figure_data(&anh_table, &lj_table)));

    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

fn run_cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_qphase")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(text: &str) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(|c| c.parse().ok()).collect()).collect())
}

fn col(data: &(Vec<String>, Vec<Vec<Option<f64>>>), name: &str) -> Vec<Option<f64>> {
    let k = data.0.iter().position(|h| h == name).unwrap();
    data.1.iter().map(|r| r[k]).collect()
}

fn header_value(text: &str, key: &str) -> f64 {
    let p = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(&p)).unwrap().parse().unwrap()
}

/// Integers crossed by a monotone staircase.
fn crossings(ratios: &[f64]) -> usize {
    ratios.windows(2).filter(|w| w[1].floor() > w[0].floor()).count()
}

fn figure_data(anh_table: &LevelTable, lj_table: &LevelTable) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // phase profile against the classical action between the turning points
    let text = run_cli(&["phase", "--potential", "anharmonic", "--e", "5"]);
    let d = rows(&text);
    let (sigma, s) = (col(&d, "sigma"), col(&d, "S"));
    let inside: Vec<(f64, f64)> = sigma.iter().zip(&s).filter_map(|(a, b)| Some((a.unwrap(), (*b)?))).collect();
    let gap = inside.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sig: Vec<f64> = sigma.iter().flatten().copied().collect();
    let ratio = header_value(&text, "total_phase_over_pi");
    let fig1 = (inside[0].1 - PI / 4.0).abs() < 0.05
        && gap < 0.5
        && sig.windows(2).all(|w| w[1] >= w[0])
        && ratio > 2.0
        && ratio < 3.0;
    pass &= fig1;
    notes.push(format!("phase E=5: S(t1) = {:.3}, max |sigma - S| = {gap:.3}, sigma/pi = {ratio:.4}", inside[0].1));

    // anharmonic staircase over the first 20 levels (E_19 = 94.09)
    let text = run_cli(&["scan", "--potential", "anharmonic", "--e-min", "0", "--e-max", "100", "--samples", "1001"]);
    let d = rows(&text);
    let e: Vec<f64> = col(&d, "E").into_iter().flatten().collect();
    let r: Vec<f64> = col(&d, "total_phase_over_pi").into_iter().flatten().collect();
    let steps = crossings(&r);
    // each crossing of n + 1 sits on the quantized level n
    let offset = (0..r.len() - 1)
        .filter(|&k| r[k + 1].floor() > r[k].floor())
        .map(|k| {
            let n = r[k + 1].floor() as usize - 1;
            let t = (r[k + 1].floor() - r[k]) / (r[k + 1] - r[k]);
            let at = e[k] + t * (e[k + 1] - e[k]);
            (at - anh_table.rows[n].e_quantum).abs()
        })
        .fold(0.0, f64::max);
    let fig2 = r.windows(2).all(|w| w[1] > w[0]) && steps == 20 && offset < 1e-3;
    pass &= fig2;
    notes.push(format!(
        "staircase E in [0, 100]: {steps} integer crossings, max |crossing - E_n| = {offset:.1e}"
    ));

    // top Lennard-Jones state in the forbidden region
    let top = lj_table.rows.last().unwrap().e_quantum.to_string();
    let text = run_cli(&["phase", "--potential", "lj", "--e", &top]);
    let d = rows(&text);
    let t2 = header_value(&text, "t2");
    let total = header_value(&text, "total_phase");
    let (x, sigma, dsigma) = (col(&d, "x"), col(&d, "sigma"), col(&d, "dsigma"));
    let k = x.iter().position(|x| x.unwrap() > t2).unwrap();
    let beyond = total - sigma[k].unwrap();
    let positive = dsigma.iter().all(|v| v.unwrap() > 0.0);
    let fig3 = (9.0..10.0).contains(&t2) && positive && beyond > 0.1 * PI;
    pass &= fig3;
    notes.push(format!(
        "LJ top: t2 = {t2:.3}, phase gained beyond t2 = {:.3} pi, Re M > 0 everywhere",
        beyond / PI
    ));

    // Lennard-Jones staircase
    let text = run_cli(&["scan", "--potential", "lj", "--e-min", "-0.999", "--e-max", "-1e-9", "--samples", "400"]);
    let d = rows(&text);
    let r: Vec<f64> = col(&d, "total_phase_over_pi").into_iter().flatten().collect();
    let last = *r.last().unwrap();
    let fig4 = r.windows(2).all(|w| w[1] > w[0]) && last > 24.0 && last < 25.0;
    pass &= fig4;
    notes.push(format!("LJ scan: sigma/pi rises to {last:.4} below threshold"));

    Outcome {
        pass,
        detail: notes.join("; "),
    }
}
