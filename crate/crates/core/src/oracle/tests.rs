use std::f64::consts::PI;

use super::*;

fn harmonic() -> PotentialSpec {
    PotentialSpec::harmonic(1.0)
}

fn anharmonic() -> PotentialSpec {
    PotentialSpec::quartic_anharmonic(1.0, 2.0)
}

fn sign_changes(v: &[f64]) -> usize {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut prev = 0.0f64;
    let mut count = 0;
    for &x in v.iter().filter(|x| x.abs() > 1e-10 * peak) {
        if prev != 0.0 && (x > 0.0) != (prev > 0.0) {
            count += 1;
        }
        prev = x;
    }
    count
}

#[test]
fn harmonic_spectrum() {
    let spec = harmonic();
    let cfg = OracleConfig::for_spec(&spec, 4).unwrap();
    let levels = oracle_levels(&spec, &cfg, 4).unwrap();
    for (n, e) in levels.energies.iter().enumerate() {
        assert!((e - (n as f64 + 0.5)).abs() < 1e-8, "n={n}: {e}");
        assert!(levels.uncertainties[n] <= 1e-8 * e);
    }
}

#[test]
fn particle_in_a_box() {
    let spec = PotentialSpec::constant(0.0);
    let l = 2.0;
    let cfg = OracleConfig {
        x_min: 0.0,
        x_max: l,
        node_count: 2000,
        scheme: Scheme::NumerovFd,
        coordinate: Coordinate::Linear,
        tolerance: 1e-8,
    };
    let levels = oracle_levels(&spec, &cfg, 2).unwrap();
    for (k, e) in levels.energies.iter().enumerate() {
        let n = (k + 1) as f64;
        let exact = PI * PI * n * n / (2.0 * l * l);
        assert!((e - exact).abs() < 1e-9 * exact, "n={n}: {e} vs {exact}");
    }
}

#[test]
fn schemes_agree_on_the_quartic_well() {
    let spec = anharmonic();
    let numerov = OracleConfig::for_spec(&spec, 9).unwrap();
    let fd = OracleConfig {
        tolerance: 1e-4,
        ..numerov.clone().with_scheme(Scheme::SecondOrderFd)
    };
    let a = oracle_levels(&spec, &numerov, 9).unwrap();
    let b = oracle_levels(&spec, &fd, 9).unwrap();
    for n in 0..=9 {
        let (ea, eb) = (a.energies[n], b.energies[n]);
        assert!((ea - eb).abs() < 1e-8 * ea, "n={n}: {ea} vs {eb}");
        assert!((ea - eb).abs() <= a.uncertainties[n] + b.uncertainties[n]);
    }
}

#[test]
fn ground_state_is_gaussian() {
    let spec = harmonic();
    let cfg = OracleConfig::for_spec(&spec, 1).unwrap();
    let f = oracle_eigenfunction(&spec, &cfg, 0).unwrap();
    let gauss: Vec<f64> = f.nodes.iter().map(|x| (-0.5 * x * x).exp() / PI.powf(0.25)).collect();
    assert!(f.overlap(&gauss) > 1.0 - 1e-8);
    assert!(f.psi.iter().all(|&p| p > -1e-12));
}

#[test]
fn first_excited_state_is_odd() {
    let spec = harmonic();
    let cfg = OracleConfig::for_spec(&spec, 1).unwrap();
    let f = oracle_eigenfunction(&spec, &cfg, 1).unwrap();
    let even: Vec<f64> = f.nodes.iter().map(|x| (-x * x).exp() * (1.0 + x * x)).collect();
    assert!(f.overlap(&even).abs() < 1e-8);
    // first antinode positive
    let first = f.psi.iter().find(|p| p.abs() > 1e-3).unwrap();
    assert!(*first > 0.0);
}

#[test]
fn quartic_second_excited_state_has_two_nodes() {
    let spec = anharmonic();
    let cfg = OracleConfig::for_spec(&spec, 2).unwrap();
    let f = oracle_eigenfunction(&spec, &cfg, 2).unwrap();
    assert_eq!(sign_changes(&f.psi), 2);
}

#[test]
fn eigenvectors_are_orthonormal() {
    let spec = anharmonic();
    let cfg = OracleConfig::for_spec(&spec, 9).unwrap();
    let gram = oracle_gram(&spec, &cfg, 10).unwrap();
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((g - target).abs() < 1e-8, "G[{i}][{j}] = {g}");
        }
    }
}

#[test]
fn logarithmic_grid_counts_lennard_jones_levels() {
    let spec = PotentialSpec::lennard_jones(1e4);
    let cfg = OracleConfig::for_spec(&spec, 23).unwrap();
    assert!(cfg.x_max >= 40.0);
    assert_eq!(oracle_count_below(&spec, &cfg, 0.0).unwrap(), 24);
}

#[test]
fn config_guards() {
    let spec = harmonic();
    let mut cfg = OracleConfig::for_spec(&spec, 2).unwrap();
    cfg.node_count = 10;
    assert!(oracle_levels(&spec, &cfg, 2).is_err());
    let lj = PotentialSpec::lennard_jones(1e4);
    let bad = OracleConfig {
        x_min: -1.0,
        ..OracleConfig::for_spec(&lj, 2).unwrap()
    };
    assert!(oracle_levels(&lj, &bad, 2).is_err());
}

#[test]
fn unconverged_extrapolation_is_reported() {
    let spec = anharmonic();
    let cfg = OracleConfig {
        node_count: 1000,
        tolerance: 1e-14,
        ..OracleConfig::for_spec(&spec, 3).unwrap().with_scheme(Scheme::SecondOrderFd)
    };
    assert!(matches!(
        oracle_levels(&spec, &cfg, 3),
        Err(Error::OracleUnconverged { .. })
    ));
}

#[test]
fn tridiagonal_solver_handles_pivoting() {
    // diagonal with a zero forces a row swap
    let diag = [0.0, 2.0, 3.0, 1.5];
    let x = [1.0, -2.0, 0.5, 4.0];
    let mut rhs = vec![0.0; 4];
    for i in 0..4 {
        rhs[i] = diag[i] * x[i];
        if i > 0 {
            rhs[i] -= x[i - 1];
        }
        if i < 3 {
            rhs[i] -= x[i + 1];
        }
    }
    let y = solve_tridiagonal(&diag, &rhs);
    for i in 0..4 {
        assert!((y[i] - x[i]).abs() < 1e-12, "{y:?}");
    }
}
