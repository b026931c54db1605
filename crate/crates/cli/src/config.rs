//! Run configuration: a TOML document mirroring the command-line flags.
//!
//! Every key is optional in the file; flags override the file, and the
//! resolved values are echoed back into each output header so a run can be
//! repeated from its own output (`--config previous.csv` reads the echoed
//! block).

use std::path::{Path, PathBuf};

use qphase::{OracleConfig, PotentialSpec, Scheme, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_BEGIN: &str = "# --- config ---";
pub const CONFIG_END: &str = "# --- end config ---";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PotentialName {
    Harmonic,
    Anharmonic,
    Lj,
    Constant,
    Poly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    Wkb,
    Oracle,
    All,
}

impl Compare {
    pub fn wkb(self) -> bool {
        matches!(self, Compare::Wkb | Compare::All)
    }

    pub fn oracle(self) -> bool {
        matches!(self, Compare::Oracle | Compare::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Numerov,
    Fd2,
}

/// Overrides for the finite-difference reference solver.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOverrides {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub nodes: Option<usize>,
    pub scheme: Option<SchemeName>,
    pub tolerance: Option<f64>,
}

/// File schema. Keys match the long flag names with `-` replaced by `_`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialName>,
    pub coeffs: Option<Vec<f64>>,
    pub mass: Option<f64>,
    pub strength: Option<f64>,
    pub e: Option<f64>,
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub samples: Option<usize>,
    pub n_max: Option<usize>,
    pub level: Option<usize>,
    pub order_cap: Option<usize>,
    pub decay_budget: Option<f64>,
    pub xb: Option<f64>,
    pub scan_density: Option<usize>,
    pub stride: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub compare: Option<Compare>,
    pub reference: Option<PathBuf>,
    pub workers: Option<usize>,
    pub solver: Option<SolverConfig>,
    pub oracle: Option<OracleOverrides>,
}

/// Scan samples per `pi` of classical action when locating levels.
pub const DEFAULT_SCAN_DENSITY: usize = 4;

impl RunConfig {
    /// Reads a TOML file, or the echoed block of a previous output file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let body = match extract_echoed(&text) {
            Some(block) => block,
            None => text,
        };
        toml::from_str(&body).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            potential, coeffs, mass, strength, e, e_min, e_max, samples, n_max, level, order_cap, decay_budget,
            xb, scan_density, stride, format, out, compare, reference, workers, solver, oracle
        )
    }

    /// Fills defaults and folds the scalar solver flags into `solver`.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let potential = self
            .potential
            .ok_or_else(|| CliError::Config("--potential is required".into()))?;
        self.potential = Some(potential);
        if self.coeffs.is_none() {
            self.coeffs = match potential {
                PotentialName::Harmonic => Some(vec![1.0]),
                PotentialName::Anharmonic => Some(vec![1.0, 2.0]),
                PotentialName::Constant => Some(vec![0.0]),
                PotentialName::Lj => None,
                PotentialName::Poly => return Err(CliError::Config("--potential poly needs --coeffs".into())),
            };
        }
        self.mass.get_or_insert(1.0);
        if potential == PotentialName::Lj {
            self.strength.get_or_insert(1e4);
        }
        self.scan_density.get_or_insert(DEFAULT_SCAN_DENSITY);
        self.format.get_or_insert(Format::Csv);
        let mut solver = self.solver.take().unwrap_or_default();
        if let Some(n) = self.order_cap {
            solver.order_cap = n;
        }
        if let Some(d) = self.decay_budget {
            solver.grid.decay_budget = d;
        }
        if let Some(x) = self.xb {
            solver.expansion_point = qphase::ExpansionPoint::At(x);
        }
        self.order_cap = Some(solver.order_cap);
        self.decay_budget = Some(solver.grid.decay_budget);
        solver.validate()?;
        self.solver = Some(solver);
        if self.scan_density == Some(0) || self.stride == Some(0) || self.samples == Some(0) {
            return Err(CliError::Config("counts must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        self.spec()?.validate()?;
        Ok(self)
    }

    pub fn spec(&self) -> Result<PotentialSpec, CliError> {
        let coeffs = self.coeffs.clone().unwrap_or_default();
        let need = |n: usize| {
            if coeffs.len() == n {
                Ok(())
            } else {
                Err(CliError::Config(format!("expected {n} coefficient(s), got {}", coeffs.len())))
            }
        };
        let spec = match self.potential {
            Some(PotentialName::Harmonic) => {
                need(1)?;
                PotentialSpec::harmonic(coeffs[0])
            }
            Some(PotentialName::Anharmonic) => {
                need(2)?;
                PotentialSpec::quartic_anharmonic(coeffs[0], coeffs[1])
            }
            Some(PotentialName::Constant) => {
                need(1)?;
                PotentialSpec::constant(coeffs[0])
            }
            Some(PotentialName::Poly) => PotentialSpec::polynomial(coeffs),
            Some(PotentialName::Lj) => PotentialSpec::lennard_jones(self.strength.unwrap_or(1e4)),
            None => return Err(CliError::Config("--potential is required".into())),
        };
        Ok(spec.with_mass(self.mass.unwrap_or(1.0)))
    }

    pub fn solver(&self) -> SolverConfig {
        self.solver.clone().unwrap_or_default()
    }

    /// Reference-solver settings: the automatic box unless overridden.
    pub fn oracle_config(&self, spec: &PotentialSpec, n_max: usize) -> Result<OracleConfig, CliError> {
        let o = self.oracle.clone().unwrap_or_default();
        let mut cfg = match (o.x_min, o.x_max) {
            (Some(x_min), Some(x_max)) => OracleConfig {
                x_min,
                x_max,
                node_count: 8000,
                scheme: Scheme::NumerovFd,
                coordinate: if spec.is_radial() {
                    qphase::Coordinate::Logarithmic
                } else {
                    qphase::Coordinate::Linear
                },
                tolerance: 1e-8,
            },
            (None, None) => OracleConfig::for_spec(spec, n_max)?,
            _ => return Err(CliError::Config("the oracle box needs both x_min and x_max".into())),
        };
        if let Some(n) = o.nodes {
            cfg.node_count = n;
        }
        if let Some(s) = o.scheme {
            cfg.scheme = match s {
                SchemeName::Numerov => Scheme::NumerovFd,
                SchemeName::Fd2 => Scheme::SecondOrderFd,
            };
        }
        if let Some(t) = o.tolerance {
            cfg.tolerance = t;
        }
        cfg.validate(spec)?;
        Ok(cfg)
    }

    /// TOML text of the configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }
}

fn extract_echoed(text: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| l.trim_end() != CONFIG_BEGIN);
    lines.next()?;
    let mut body = String::new();
    for line in lines {
        if line.trim_end() == CONFIG_END {
            return Some(body);
        }
        let stripped = line.strip_prefix("# ").or_else(|| line.strip_prefix('#'))?;
        body.push_str(stripped);
        body.push('\n');
    }
    None
}
