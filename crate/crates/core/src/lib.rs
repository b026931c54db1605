//! Exact bound-state energies and wavefunctions of one-dimensional
//! potentials from the quantum phase `sigma(x, E)`.
//!
//! Levels satisfy `sigma(s2, E) = (n + 1) pi`, with `sigma' = Re M` and
//! `M' = i (p^2 - M^2)` solved by quasilinearization from a semiclassical
//! boundary value.
// `!(a < b)` guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diff;
pub mod error;
pub mod interp;
pub mod ode;
pub mod oracle;
pub mod phase;
pub mod potential;
pub mod presets;
pub mod quad;
pub mod quantize;
pub mod roots;
pub mod taylor;
pub mod wkb;

pub use num_complex::Complex64;

/// Library version, echoed into output metadata by front ends.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use oracle::{oracle_count_below, oracle_eigenfunction, oracle_levels, Coordinate, OracleConfig, OracleLevels, Scheme};
pub use phase::{
    build_grid, solve_phase, wavefunction, DensityPolicy, ExpansionPoint, Grid, PhaseMethod, PhaseSolution,
    SolverConfig, TrialShape,
};
pub use potential::{PotentialKind, PotentialSpec, TurningPair};
pub use quantize::{
    compare_methods, count_bound_states, default_energy_grid, quantize_levels, scan_total_phase, solve_levels, LevelRow,
    LevelTable, PhaseCurve,
};
pub use wkb::{riccati_series_at, wkb_levels, SeriesReport};
