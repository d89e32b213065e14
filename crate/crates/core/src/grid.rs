//! Radial momentum grids and deterministic radial integration.

use serde::{Deserialize, Serialize};

use crate::domain::Dim;
use crate::error::{invalid, QuenchError, Result};
use crate::quad::{CompensatedSum, GL2, GL4};

pub const MIN_NODES: usize = 64;

/// Node placement family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Spacing {
    /// One panel on `[0, k_min]`, geometric panels up to `k_mid`, then
    /// uniform panels up to the cutoff. Four Gauss points per panel.
    LogUniform { k_min: f64, k_mid: f64 },
    /// One panel on `[0, k_min]` then geometric panels all the way to the
    /// cutoff. Suited to very large cutoffs with power-law integrands.
    Log { k_min: f64 },
    /// Equal-width panels with two Gauss points each (exact for cubics).
    /// Keeps the node spacing fixed, which time evolution needs.
    Uniform,
    /// Equal-width two-point panels on `[0, k_mid]`, then two-point panels
    /// growing by the factor `1 + growth` up to the cutoff. The uniform part
    /// receives whatever panels the geometric part leaves over.
    UniformLog { k_mid: f64, growth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridProfile {
    pub nodes: usize,
    pub spacing: Spacing,
    /// Assumed large-k decay power `p` of integrands (`f ~ k^-p`). When set,
    /// the analytic tail beyond the cutoff is added by `radial_integrate`.
    #[serde(default)]
    pub tail_power: Option<f64>,
}

impl GridProfile {
    /// The default profile for masses `m0`, `m`.
    pub fn log_uniform(nodes: usize, m0: f64, m: f64) -> Self {
        let k_min = 1e-4 * m0.min(m + 1e-6);
        let k_mid = 10.0 * m0.max(m);
        GridProfile { nodes, spacing: Spacing::LogUniform { k_min, k_mid }, tail_power: None }
    }

    pub fn log(nodes: usize, m0: f64, m: f64) -> Self {
        GridProfile { nodes, spacing: Spacing::Log { k_min: 1e-4 * m0.min(m + 1e-6) }, tail_power: None }
    }

    pub fn uniform(nodes: usize) -> Self {
        GridProfile { nodes, spacing: Spacing::Uniform, tail_power: None }
    }

    pub fn uniform_log(nodes: usize, k_mid: f64, growth: f64) -> Self {
        GridProfile { nodes, spacing: Spacing::UniformLog { k_mid, growth }, tail_power: None }
    }

    pub fn with_tail(mut self, power: f64) -> Self {
        self.tail_power = Some(power);
        self
    }
}

/// Quadrature nodes `k_i` and weights `w_i` for `∫ d^d k / (2 pi)^d` of a
/// radial function truncated at `cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    d: Dim,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cutoff: f64,
    profile: GridProfile,
}

impl MomentumGrid {
    pub fn dim(&self) -> Dim {
        self.d
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn tail_power(&self) -> Option<f64> {
        self.profile.tail_power
    }

    pub fn profile(&self) -> &GridProfile {
        &self.profile
    }

    /// The grid built from the same profile with twice the nodes.
    pub fn refined(&self) -> Result<MomentumGrid> {
        let profile = GridProfile { nodes: 2 * self.profile.nodes, ..self.profile };
        build_grid(self.d, self.cutoff, &profile)
    }

    /// Same grid with the tail correction switched off.
    pub fn without_tail(&self) -> Self {
        let mut grid = self.clone();
        grid.profile.tail_power = None;
        grid
    }

    /// Largest gap between consecutive nodes.
    pub fn max_spacing(&self) -> f64 {
        let first = self.nodes.first().copied().unwrap_or(0.0);
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(first, f64::max)
    }
}

fn push_panel(rule: &[(f64, f64)], a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for &(x, w) in rule {
        nodes.push(c + h * x);
        weights.push(h * w);
    }
}

fn geometric_edges(lo: f64, hi: f64, panels: usize) -> impl Iterator<Item = (f64, f64)> {
    let ratio = (hi / lo).powf(1.0 / panels as f64);
    (0..panels).map(move |i| {
        let a = lo * ratio.powi(i as i32);
        let b = if i + 1 == panels { hi } else { lo * ratio.powi(i as i32 + 1) };
        (a, b)
    })
}

fn uniform_edges(lo: f64, hi: f64, panels: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = (hi - lo) / panels as f64;
    (0..panels).map(move |i| {
        let b = if i + 1 == panels { hi } else { lo + h * (i + 1) as f64 };
        (lo + h * i as f64, b)
    })
}

/// Build a radial grid on `[0, cutoff]`. The node count is rounded up to a
/// whole number of panels.
pub fn build_grid(d: Dim, cutoff: f64, profile: &GridProfile) -> Result<MomentumGrid> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(invalid("cutoff", format!("must be finite and > 0, got {cutoff}")));
    }
    if profile.nodes < MIN_NODES {
        return Err(invalid("nodes", format!("at least {MIN_NODES} grid nodes required, got {}", profile.nodes)));
    }
    if let Some(p) = profile.tail_power {
        if !(p > d.get() as f64) {
            return Err(invalid("tail_power", format!("decay power {p} does not make the d = {d} tail integrable")));
        }
    }
    let mut nodes = Vec::with_capacity(profile.nodes + 4);
    let mut weights = Vec::with_capacity(profile.nodes + 4);
    match profile.spacing {
        Spacing::Uniform => {
            let panels = profile.nodes.div_ceil(GL2.len());
            for (a, b) in uniform_edges(0.0, cutoff, panels) {
                push_panel(&GL2, a, b, &mut nodes, &mut weights);
            }
        }
        Spacing::UniformLog { k_mid, growth } => {
            if !(growth > 0.0 && growth.is_finite()) {
                return Err(invalid("growth", format!("must be finite and > 0, got {growth}")));
            }
            if !(k_mid > 0.0) {
                return Err(invalid("k_mid", format!("must be > 0, got {k_mid}")));
            }
            let panels = profile.nodes.div_ceil(GL2.len());
            let k_mid = k_mid.min(cutoff);
            let n_log = if k_mid < cutoff { ((cutoff / k_mid).ln() / growth.ln_1p()).ceil() as usize } else { 0 };
            if n_log + 1 > panels {
                return Err(invalid("nodes", format!("{} nodes leave no uniform panels after {n_log} geometric ones", profile.nodes)));
            }
            for (a, b) in uniform_edges(0.0, k_mid, panels - n_log) {
                push_panel(&GL2, a, b, &mut nodes, &mut weights);
            }
            if n_log > 0 {
                for (a, b) in geometric_edges(k_mid, cutoff, n_log) {
                    push_panel(&GL2, a, b, &mut nodes, &mut weights);
                }
            }
        }
        Spacing::Log { k_min } | Spacing::LogUniform { k_min, .. } => {
            if !(k_min > 0.0 && k_min < cutoff) {
                return Err(invalid("k_min", format!("must lie in (0, cutoff), got {k_min}")));
            }
            let panels = profile.nodes.div_ceil(GL4.len());
            push_panel(&GL4, 0.0, k_min, &mut nodes, &mut weights);
            let rest = panels - 1;
            let k_mid = match profile.spacing {
                Spacing::LogUniform { k_mid, .. } => k_mid.clamp(k_min, cutoff),
                _ => cutoff,
            };
            let (n_log, n_uni) = if k_mid >= cutoff { (rest, 0) } else { (rest / 2, rest - rest / 2) };
            for (a, b) in geometric_edges(k_min, k_mid, n_log) {
                push_panel(&GL4, a, b, &mut nodes, &mut weights);
            }
            for (a, b) in uniform_edges(k_mid, cutoff, n_uni) {
                push_panel(&GL4, a, b, &mut nodes, &mut weights);
            }
        }
    }
    let factor = d.angular_factor();
    for (w, &k) in weights.iter_mut().zip(&nodes) {
        *w *= factor * d.radial_measure(k);
    }
    debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    Ok(MomentumGrid { d, nodes, weights, cutoff, profile: *profile })
}

/// `Σ w_i f(k_i)` in ascending node order with compensated summation, plus
/// the analytic power-law tail when the grid carries a tail power.
pub fn radial_integrate<F: Fn(f64) -> f64>(grid: &MomentumGrid, f: F) -> Result<f64> {
    let mut sum = CompensatedSum::new();
    let mut last = 0.0;
    for (index, (&k, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let v = f(k);
        if !v.is_finite() {
            return Err(QuenchError::NonFinite { index, k });
        }
        sum.add(w * v);
        last = v;
    }
    if let Some(p) = grid.profile.tail_power {
        let k_last = *grid.nodes.last().expect("grid is never empty");
        let amplitude = last * k_last.powf(p);
        let dd = grid.d.get() as f64;
        sum.add(grid.d.angular_factor() * amplitude * grid.cutoff.powf(dd - p) / (p - dd));
    }
    Ok(sum.value())
}

/// Integrate a family of per-node values already evaluated on the grid.
pub fn weighted_sum(grid: &MomentumGrid, values: &[f64]) -> f64 {
    let mut sum = CompensatedSum::new();
    for (&w, &v) in grid.weights.iter().zip(values) {
        sum.add(w * v);
    }
    sum.value()
}
