//! `qphase`: bound-state levels, phase profiles, energy scans and reference
//! spectra of one-dimensional wells.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Compare, Format, OracleOverrides, PotentialName, RunConfig, SchemeName};
use error::CliError;

#[derive(Parser)]
#[command(name = "qphase", version, about = "Exact quantization through the quantum phase")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Quantized levels `n = 0..=n_max` (every bound level for Lennard-Jones).
    Levels,
    /// Per-node phase, amplitude and wavefunction at one energy.
    Phase,
    /// Total phase over an energy range.
    Scan,
    /// Reference levels from the finite-difference solver.
    Oracle,
    /// Levels with WKB and reference columns.
    Compare,
}

#[derive(Args)]
struct Flags {
    /// TOML run configuration, or a previous output file (its echoed block).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    potential: Option<PotentialName>,
    /// Potential coefficients: harmonic `k`, anharmonic `a,b`, constant `v0`, poly `c0,c1,...`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// Lennard-Jones coupling `B` in `p^2 = B (E - v)`.
    #[arg(long, global = true)]
    strength: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    e: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    e_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    e_max: Option<f64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Phase profile at quantized level `n` instead of `--e`.
    #[arg(long, global = true)]
    level: Option<usize>,
    #[arg(long, global = true)]
    order_cap: Option<usize>,
    #[arg(long, global = true)]
    decay_budget: Option<f64>,
    /// Expansion point for the boundary value.
    #[arg(long, global = true, allow_hyphen_values = true)]
    xb: Option<f64>,
    /// Scan samples per `pi` of classical action when locating levels.
    #[arg(long, global = true)]
    scan_density: Option<usize>,
    /// Keep every k-th node of a phase profile.
    #[arg(long, global = true)]
    stride: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    compare: Option<Compare>,
    /// Reference levels written by `oracle`, used for the oracle columns.
    #[arg(long, global = true)]
    reference: Option<PathBuf>,
    #[arg(long, global = true, env = "QPHASE_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    box_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    box_max: Option<f64>,
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeName>,
}

impl Flags {
    fn into_config(self) -> (Option<PathBuf>, RunConfig) {
        let oracle = (self.box_min.is_some() || self.box_max.is_some() || self.nodes.is_some() || self.scheme.is_some())
            .then_some(OracleOverrides {
                x_min: self.box_min,
                x_max: self.box_max,
                nodes: self.nodes,
                scheme: self.scheme,
                tolerance: None,
            });
        let cfg = RunConfig {
            potential: self.potential,
            coeffs: self.coeffs,
            mass: self.mass,
            strength: self.strength,
            e: self.e,
            e_min: self.e_min,
            e_max: self.e_max,
            samples: self.samples,
            n_max: self.n_max,
            level: self.level,
            order_cap: self.order_cap,
            decay_budget: self.decay_budget,
            xb: self.xb,
            scan_density: self.scan_density,
            stride: self.stride,
            format: self.format,
            out: self.out,
            compare: self.compare,
            reference: self.reference,
            workers: self.workers,
            solver: None,
            oracle,
        };
        (self.config, cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (path, flags) = cli.flags.into_config();
    let base = match path {
        Some(p) => RunConfig::load(&p)?,
        None => RunConfig::default(),
    };
    let cfg = merge_oracle(base, flags).resolve()?;
    if let Some(w) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    }
    if cfg.potential == Some(PotentialName::Constant) && !matches!(cli.command, Command::Oracle) {
        return Err(CliError::Config("a constant potential (box) has no well; use `oracle`".into()));
    }
    let outcome = match cli.command {
        Command::Levels => commands::levels(&cfg, cfg.compare, false)?,
        Command::Compare => commands::levels(&cfg, Some(cfg.compare.unwrap_or(Compare::All)), true)?,
        Command::Phase => commands::phase(&cfg)?,
        Command::Scan => commands::scan(&cfg)?,
        Command::Oracle => commands::oracle(&cfg)?,
    };
    match &cfg.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            outcome.table.write(&cfg, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            outcome.table.write(&cfg, &mut lock)?;
        }
    }
    for n in &outcome.table.notices {
        eprintln!("notice: {n}");
    }
    outcome.failure.map_or(Ok(()), Err)
}

/// Flag-level oracle overrides merge field by field with the file's.
fn merge_oracle(base: RunConfig, mut flags: RunConfig) -> RunConfig {
    if let (Some(b), Some(f)) = (&base.oracle, &flags.oracle) {
        flags.oracle = Some(OracleOverrides {
            x_min: f.x_min.or(b.x_min),
            x_max: f.x_max.or(b.x_max),
            nodes: f.nodes.or(b.nodes),
            scheme: f.scheme.or(b.scheme),
            tolerance: f.tolerance.or(b.tolerance),
        });
    }
    base.overlay(flags)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qphase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
