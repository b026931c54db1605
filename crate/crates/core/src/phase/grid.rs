use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{PotentialSpec, TurningPair};

/// Local resolution rules for the computational grid.
///
/// The step at `x` is the smallest of: `max_step`; a wavelength fraction
/// `2 pi / (points_per_wavelength p)` in allowed regions or a decay-length
/// fraction `1 / (points_per_decay_length |p|)` in forbidden ones; and
/// `L / points_per_scale` where `L = max(|p / p'|, |d p^2/dx|^{-1/3})` is the
/// local variation length of the momentum, floored by the Airy length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityPolicy {
    pub points_per_wavelength: f64,
    pub points_per_decay_length: f64,
    pub points_per_scale: f64,
    pub max_step: f64,
    /// Forbidden-region exponent `int |p| dx` kept beyond each turning point.
    pub decay_budget: f64,
    pub node_cap: usize,
}

impl Default for DensityPolicy {
    fn default() -> Self {
        Self {
            points_per_wavelength: 240.0,
            points_per_decay_length: 80.0,
            points_per_scale: 240.0,
            max_step: 0.125,
            decay_budget: 30.0,
            node_cap: 2_000_000,
        }
    }
}

impl DensityPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_wavelength < 20.0 || self.points_per_decay_length < 20.0 {
            return Err(Error::InvalidInput(
                "grid density must be at least 20 points per wavelength and decay length".into(),
            ));
        }
        if !(self.points_per_scale > 0.0 && self.max_step > 0.0 && self.decay_budget > 0.0) {
            return Err(Error::InvalidInput("grid scales must be positive".into()));
        }
        Ok(())
    }

    /// Same policy with every density multiplied by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        Self {
            points_per_wavelength: self.points_per_wavelength * factor,
            points_per_decay_length: self.points_per_decay_length * factor,
            points_per_scale: self.points_per_scale * factor,
            max_step: self.max_step / factor,
            ..self.clone()
        }
    }

    pub(crate) fn step_at(&self, spec: &PotentialSpec, energy: f64, x: f64) -> f64 {
        let (p2, dp2) = spec.p2_with_slope(energy, x);
        let mut h = self.max_step;
        if p2 > 0.0 {
            h = h.min(2.0 * PI / (self.points_per_wavelength * p2.sqrt()));
        } else if p2 < 0.0 {
            h = h.min(1.0 / (self.points_per_decay_length * (-p2).sqrt()));
        }
        if dp2 != 0.0 {
            let scale = (2.0 * p2.abs() / dp2.abs()).max(dp2.abs().powf(-1.0 / 3.0));
            h = h.min(scale / self.points_per_scale);
        }
        h
    }
}

/// Strictly increasing nodes with `p^2` cached at nodes and step midpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub x_b_index: usize,
    pub energy: f64,
    pub turning: Option<TurningPair>,
    pub policy: DensityPolicy,
    pub(crate) p2: Vec<f64>,
    pub(crate) p2_mid: Vec<f64>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_b(&self) -> f64 {
        self.nodes[self.x_b_index]
    }

    pub fn x_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn p2(&self) -> &[f64] {
        &self.p2
    }

    fn from_nodes(
        spec: &PotentialSpec,
        energy: f64,
        nodes: Vec<f64>,
        x_b_index: usize,
        turning: Option<TurningPair>,
        policy: DensityPolicy,
    ) -> Self {
        let p2 = nodes.iter().map(|&x| spec.p2(energy, x)).collect();
        let p2_mid = nodes
            .windows(2)
            .map(|w| spec.p2(energy, 0.5 * (w[0] + w[1])))
            .collect();
        Self {
            nodes,
            x_b_index,
            energy,
            turning,
            policy,
            p2,
            p2_mid,
        }
    }

    /// Grid with every interval split in two; `x_b` keeps its node.
    pub fn halved(&self, spec: &PotentialSpec) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len());
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.x_max());
        Self::from_nodes(
            spec,
            self.energy,
            nodes,
            2 * self.x_b_index,
            self.turning,
            self.policy.clone(),
        )
    }
}

/// Grid spanning the well plus `decay_budget` worth of each forbidden tail.
pub fn build_grid(
    spec: &PotentialSpec,
    energy: f64,
    x_b: f64,
    policy: &DensityPolicy,
) -> Result<Grid> {
    policy.validate()?;
    let turning = spec.find_turning_points(energy)?;
    if !turning.contains(x_b) {
        return Err(Error::OutsideClassicalRegion { x: x_b });
    }
    let budget = policy.decay_budget * (1.0 + 1e-3);
    let right = march(spec, energy, x_b, 1.0, policy, |x| x > turning.t2, turning.t2, budget)?;
    let left = march(spec, energy, x_b, -1.0, policy, |x| x < turning.t1, turning.t1, budget)?;
    assemble(spec, energy, left, x_b, right, Some(turning), policy)
}

/// Grid on an explicit interval `[a, b]` containing `x_b`, using the same
/// density rules (for potentials without turning points, e.g. a box).
pub fn build_grid_on(
    spec: &PotentialSpec,
    energy: f64,
    (a, b): (f64, f64),
    x_b: f64,
    policy: &DensityPolicy,
) -> Result<Grid> {
    policy.validate()?;
    spec.check_domain(a)?;
    spec.check_domain(b)?;
    if !(a < x_b && x_b < b) {
        return Err(Error::InvalidInput(format!("x_b = {x_b} not inside ({a}, {b})")));
    }
    let right = march_to(spec, energy, x_b, b, policy)?;
    let left = march_to(spec, energy, x_b, a, policy)?;
    let turning = spec.find_turning_points(energy).ok();
    assemble(spec, energy, left, x_b, right, turning, policy)
}

fn assemble(
    spec: &PotentialSpec,
    energy: f64,
    left: Vec<f64>,
    x_b: f64,
    right: Vec<f64>,
    turning: Option<TurningPair>,
    policy: &DensityPolicy,
) -> Result<Grid> {
    let total = left.len() + right.len() + 1;
    if total > policy.node_cap {
        return Err(Error::ResolutionOverflow {
            cap: policy.node_cap,
            reached: *right.last().unwrap_or(&x_b),
        });
    }
    let mut nodes = Vec::with_capacity(total);
    nodes.extend(left.iter().rev());
    let x_b_index = nodes.len();
    nodes.push(x_b);
    nodes.extend(right);
    Ok(Grid::from_nodes(spec, energy, nodes, x_b_index, turning, policy.clone()))
}

#[allow(clippy::too_many_arguments)]
fn march(
    spec: &PotentialSpec,
    energy: f64,
    start: f64,
    dir: f64,
    policy: &DensityPolicy,
    beyond: impl Fn(f64) -> bool,
    turning_point: f64,
    budget: f64,
) -> Result<Vec<f64>> {
    let (s1, _) = spec.domain();
    let mut out = Vec::new();
    let mut x = start;
    let mut decay = 0.0;
    let mut kappa_prev = 0.0;
    let mut passed = false;
    while decay < budget {
        let mut h = policy.step_at(spec, energy, x);
        if dir < 0.0 && x - h <= s1 {
            h = 0.5 * (x - s1);
        }
        let next = x + dir * h;
        if next == x {
            return Err(Error::ResolutionOverflow { cap: policy.node_cap, reached: x });
        }
        let p2 = spec.p2(energy, next);
        let kappa = (-p2).max(0.0).sqrt();
        if beyond(next) {
            if passed {
                decay += 0.5 * h * (kappa + kappa_prev);
            } else {
                // kappa ~ sqrt(distance) just past the turning point
                decay += 2.0 / 3.0 * kappa * (next - turning_point).abs();
                passed = true;
            }
        }
        kappa_prev = kappa;
        out.push(next);
        x = next;
        if out.len() > policy.node_cap {
            return Err(Error::ResolutionOverflow { cap: policy.node_cap, reached: x });
        }
    }
    // one more node past the budget
    let h = policy.step_at(spec, energy, x).min(if dir < 0.0 { 0.5 * (x - s1) } else { f64::MAX });
    out.push(x + dir * h);
    Ok(out)
}

fn march_to(
    spec: &PotentialSpec,
    energy: f64,
    start: f64,
    end: f64,
    policy: &DensityPolicy,
) -> Result<Vec<f64>> {
    let dir = (end - start).signum();
    let mut out = Vec::new();
    let mut x = start;
    loop {
        let h = policy.step_at(spec, energy, x);
        let remaining = (end - x).abs();
        if remaining <= h * (1.0 + 1e-9) {
            // split the remainder evenly so the last step is not a sliver
            let pieces = (remaining / h).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                out.push(if k == pieces { end } else { x + dir * remaining * k as f64 / pieces as f64 });
            }
            return Ok(out);
        }
        x += dir * h;
        out.push(x);
        if out.len() > policy.node_cap {
            return Err(Error::ResolutionOverflow { cap: policy.node_cap, reached: x });
        }
    }
}
