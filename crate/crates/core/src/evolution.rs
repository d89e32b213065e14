//! Time evolution of the Hartree-Fock effective mass after the quench: the
//! exact per-mode oscillator system with momentum-integrated feedback, the
//! quasi-adiabatic baseline, the conserved energy, asymptote fits and the
//! comparison with the stationary gap equation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{omega, Dim, QuenchSpec};
use crate::error::{domain, invalid, QuenchError, Result};
use crate::grid::{build_grid, radial_integrate, GridProfile, MomentumGrid};
use crate::mass_gap::{
    initial_effective_mass, initial_effective_mass_on_grid, solve_m_star, solve_m_star_on_grid, GapBranch,
    GapSolveResult, GAP_RESIDUAL_TOL,
};
use crate::quad::{integrate, integrate_half_line, CompensatedSum, QuadTolerance};
use crate::roots::{brent, expand_upward};

/// Upper bound on `dt * omega_max`.
pub const DT_BOUND: f64 = 0.3;
/// Default `dt * omega_max`.
pub const DEFAULT_DT_FACTOR: f64 = 0.1;
pub const ENERGY_DRIFT_TOL: f64 = 1e-4;

// fourth-order Yoshida composition
const CBRT2: f64 = 1.259_921_049_894_873_2;
const Y1: f64 = 1.0 / (2.0 - CBRT2);
const Y0: f64 = -CBRT2 / (2.0 - CBRT2);
const DRIFT: [f64; 4] = [0.5 * Y1, 0.5 * (Y0 + Y1), 0.5 * (Y0 + Y1), 0.5 * Y1];
const KICK: [f64; 3] = [Y1, Y0, Y1];

/// Real basis solutions of `x'' + w_k(t)^2 x = 0` for one mode, `a` with
/// `(1, 0)` and `b` with `(0, 1)` initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    pub k: f64,
    pub a: f64,
    pub a_dot: f64,
    pub b: f64,
    pub b_dot: f64,
}

impl ModeState {
    pub fn initial(k: f64) -> Self {
        ModeState { k, a: 1.0, a_dot: 0.0, b: 0.0, b_dot: 1.0 }
    }

    pub fn wronskian(&self) -> f64 {
        self.a * self.b_dot - self.a_dot * self.b
    }
}

/// Advance every mode by one fourth-order symplectic step of
/// `x'' = -(k^2 + m_eff_sq) x`. Negative `k^2 + m_eff_sq` is allowed.
pub fn step_modes(states: &mut [ModeState], m_eff_sq: f64, dt: f64) -> Result<()> {
    for (index, s) in states.iter_mut().enumerate() {
        let w2 = s.k * s.k + m_eff_sq;
        for stage in 0..3 {
            let h = DRIFT[stage] * dt;
            s.a += h * s.a_dot;
            s.b += h * s.b_dot;
            let g = KICK[stage] * dt * w2;
            s.a_dot -= g * s.a;
            s.b_dot -= g * s.b;
        }
        let h = DRIFT[3] * dt;
        s.a += h * s.a_dot;
        s.b += h * s.b_dot;
        if !(s.a.is_finite() && s.b.is_finite() && s.a_dot.is_finite() && s.b_dot.is_finite()) {
            return Err(QuenchError::NonFinite { index, k: s.k });
        }
    }
    Ok(())
}

/// `<phi_k^2(t)> = a^2 / (2 w0k) + b^2 w0k / 2` for the pre-quench vacuum.
pub fn mode_correlator(state: &ModeState, omega0k: f64) -> f64 {
    0.5 * state.a * state.a / omega0k + 0.5 * omega0k * state.b * state.b
}

/// `<pi_k^2 / 2 + w^2 phi_k^2 / 2>` for the pre-quench vacuum.
pub fn mode_energy(state: &ModeState, omega0k: f64, omega_sq: f64) -> f64 {
    let p2 = 0.5 * state.a_dot * state.a_dot / omega0k + 0.5 * omega0k * state.b_dot * state.b_dot;
    0.5 * p2 + 0.5 * omega_sq * mode_correlator(state, omega0k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// `m_eff^2` recomputed from the current positions at every kick of the
    /// splitting, which keeps the whole system symplectic.
    #[default]
    StageCoupled,
    /// `m_eff^2` frozen over each step at its value at the start of the step.
    Lagged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_max: f64,
    pub coupling: CouplingMode,
    pub grid: MomentumGrid,
    pub record_stride: usize,
    /// Grid indices whose `(a, b)` are recorded at every sample.
    pub probe_modes: Vec<usize>,
}

/// `sqrt(Λ^2 + |m_eff^2(0+)| + m0^2)`, the frequency that sets the step.
pub fn omega_max(spec: &QuenchSpec, grid: &MomentumGrid, m_eff_sq_0: f64) -> f64 {
    let c = grid.cutoff();
    (c * c + m_eff_sq_0.abs() + spec.m0 * spec.m0).sqrt()
}

/// Grid for evolution up to `t_max`: uniform panels narrow enough that the
/// discrete mode sum does not recur before `1.5 t_max`, on `[0, 10 max(m0, m)]`,
/// then 2% geometric panels up to the cutoff.
pub fn evolution_grid(spec: &QuenchSpec, t_max: f64) -> Result<MomentumGrid> {
    spec.validate()?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max", format!("must be finite and > 0, got {t_max}")));
    }
    let cutoff = spec.effective_cutoff()?;
    let growth: f64 = 0.02;
    let k_mid = (10.0 * spec.m0.max(spec.m)).min(cutoff);
    let width = PI / (1.5 * t_max);
    let n_uni = (k_mid / width).ceil() as usize;
    let n_log = if k_mid < cutoff { ((cutoff / k_mid).ln() / growth.ln_1p()).ceil() as usize } else { 0 };
    let nodes = (2 * (n_uni + n_log)).max(crate::grid::MIN_NODES);
    build_grid(spec.d, cutoff, &GridProfile::uniform_log(nodes, k_mid, growth))
}

impl EvolutionConfig {
    pub fn new(grid: MomentumGrid, dt: f64, t_max: f64) -> Self {
        EvolutionConfig { dt, t_max, coupling: CouplingMode::default(), grid, record_stride: 1, probe_modes: Vec::new() }
    }

    /// Evolution grid, default step, and samples every ~0.02 time units.
    pub fn auto(spec: &QuenchSpec, t_max: f64) -> Result<Self> {
        let grid = evolution_grid(spec, t_max)?;
        let m0_sq = initial_effective_mass_on_grid(spec, &grid)?.m_eff_sq_0;
        let dt = DEFAULT_DT_FACTOR / omega_max(spec, &grid, m0_sq);
        let stride = ((0.02 / dt).round() as usize).max(1);
        Ok(EvolutionConfig { record_stride: stride, ..EvolutionConfig::new(grid, dt, t_max) })
    }

    pub fn with_coupling(mut self, coupling: CouplingMode) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_probes(mut self, probes: Vec<usize>) -> Self {
        self.probe_modes = probes;
        self
    }

    /// Grid index closest to momentum `k`.
    pub fn mode_near(&self, k: f64) -> usize {
        let nodes = self.grid.nodes();
        let i = nodes.partition_point(|&x| x < k).min(nodes.len() - 1);
        if i > 0 && (k - nodes[i - 1]).abs() < (nodes[i] - k).abs() {
            i - 1
        } else {
            i
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize
    }

    pub fn validate(&self, spec: &QuenchSpec, m_eff_sq_0: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be finite and > 0, got {}", self.dt)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", format!("must be finite and > 0, got {}", self.t_max)));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride", "must be >= 1"));
        }
        if self.grid.dim() != spec.d {
            return Err(invalid("grid", "grid and spec dimensions differ"));
        }
        if self.grid.tail_power().is_some() {
            return Err(invalid("grid", "evolution grids carry no tail correction"));
        }
        if let Some(&i) = self.probe_modes.iter().find(|&&i| i >= self.grid.len()) {
            return Err(invalid("probe_modes", format!("index {i} outside the grid")));
        }
        let w = omega_max(spec, &self.grid, m_eff_sq_0);
        if !(self.dt * w < DT_BOUND) {
            return Err(invalid(
                "dt",
                format!("dt * omega_max = {:.3} exceeds {DT_BOUND}; need dt < {:.3e}", self.dt * w, DT_BOUND / w),
            ));
        }
        let scale = spec.m.max(m_star_estimate(spec));
        if scale > 0.0 && !(self.t_max > 20.0 / scale) {
            return Err(invalid(
                "t_max",
                format!("t_max = {} too short to reach the asymptote; need > {:.3}", self.t_max, 20.0 / scale),
            ));
        }
        Ok(())
    }
}

fn m_star_estimate(spec: &QuenchSpec) -> f64 {
    solve_m_star(spec).map(|r| r.m_star).unwrap_or(spec.m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTrace {
    pub index: usize,
    pub k: f64,
    pub omega0k: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMassTrace {
    pub times: Vec<f64>,
    pub m_eff_sq: Vec<f64>,
    /// `m_eff^2(t) - m^2`.
    pub sigma: Vec<f64>,
    /// `h(t) - λ C(t)^2 / 8` with vacuum subtraction; empty for the
    /// quasi-adiabatic trace.
    pub energy: Vec<f64>,
    /// `Σ_k (<phi_k^2(t)> - 1/(2 w_k))`.
    pub c_of_t: Vec<f64>,
    pub max_wronskian_deviation: f64,
    pub probes: Vec<ProbeTrace>,
    pub dt: f64,
}

impl EffectiveMassTrace {
    pub fn m_eff_sq_0(&self) -> f64 {
        self.m_eff_sq[0]
    }

    /// First sample time after which `m_eff^2` stays positive.
    pub fn positive_from(&self) -> Option<f64> {
        match self.m_eff_sq.iter().rposition(|&v| v <= 0.0) {
            None => self.times.first().copied(),
            Some(i) => self.times.get(i + 1).copied(),
        }
    }
}

/// Exact free flow over one sub-step under the post-quench `w_k`, applied as
/// drift `tau`, kick `g`, drift `tau` with `tau = tan(w h / 2) / w` and
/// `g = w sin(w h)`. Each shear is exactly unimodular, so rounding does not
/// pump energy into the stiff modes the way a rounded rotation matrix does.
struct Rotation {
    tau: Vec<f64>,
    g: Vec<f64>,
}

impl Rotation {
    fn new(wk: &[f64], h: f64) -> Self {
        let tau = wk.iter().map(|&w| if w * h.abs() < 1e-8 { 0.5 * h } else { (0.5 * w * h).tan() / w }).collect();
        let g = wk.iter().map(|&w| w * (w * h).sin()).collect();
        Rotation { tau, g }
    }
}

/// Structure-of-arrays mode ensemble. Sub-steps alternate the exact flow of
/// the post-quench free Hamiltonian with kicks by `m_eff^2 - m^2`.
struct Ensemble {
    k2: Vec<f64>,
    /// `w_i / (2 w0)` and `w_i w0 / 2`.
    ca: Vec<f64>,
    cb: Vec<f64>,
    /// `w_i w_k / 2` with the post-quench `w_k`.
    e_vac: Vec<f64>,
    c_vac: f64,
    a: Vec<f64>,
    ad: Vec<f64>,
    b: Vec<f64>,
    bd: Vec<f64>,
    m_sq: f64,
    half_lambda: f64,
    /// Flows over `DRIFT[0] dt`, `DRIFT[1] dt` and `(DRIFT[3] + DRIFT[0]) dt`.
    rot: [Rotation; 3],
}

impl Ensemble {
    fn new(spec: &QuenchSpec, grid: &MomentumGrid, dt: f64) -> Self {
        let n = grid.len();
        let mut k2 = Vec::with_capacity(n);
        let mut ca = Vec::with_capacity(n);
        let mut cb = Vec::with_capacity(n);
        let mut e_vac = Vec::with_capacity(n);
        let mut wk = Vec::with_capacity(n);
        let mut c_vac = CompensatedSum::new();
        for (&k, &w) in grid.nodes().iter().zip(grid.weights()) {
            let w0 = omega(k, spec.m0);
            let wp = omega(k, spec.m);
            k2.push(k * k);
            ca.push(0.5 * w / w0);
            cb.push(0.5 * w * w0);
            e_vac.push(0.5 * w * wp);
            wk.push(wp);
            c_vac.add(0.5 * w / wp);
        }
        let rot = [
            Rotation::new(&wk, DRIFT[0] * dt),
            Rotation::new(&wk, DRIFT[1] * dt),
            Rotation::new(&wk, (DRIFT[3] + DRIFT[0]) * dt),
        ];
        Ensemble {
            k2,
            ca,
            cb,
            e_vac,
            c_vac: c_vac.value(),
            a: vec![1.0; n],
            ad: vec![0.0; n],
            b: vec![0.0; n],
            bd: vec![1.0; n],
            m_sq: spec.m * spec.m,
            half_lambda: 0.5 * spec.lambda,
            rot,
        }
    }

    fn mass(&self, c_reg: f64) -> f64 {
        self.m_sq + self.half_lambda * c_reg
    }

    fn c_reg(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for i in 0..self.a.len() {
            s.add(self.ca[i] * self.a[i] * self.a[i] + self.cb[i] * self.b[i] * self.b[i]);
        }
        s.value() - self.c_vac
    }

    /// Kick by `hk * delta` (skipped when `hk == 0`), then free flow `j`.
    /// Returns the plain-sum `C_reg` after the flow.
    fn kick_flow_acc(&mut self, hk: f64, delta: f64, j: usize) -> f64 {
        let g = hk * delta;
        let Rotation { tau, g: shear } = &self.rot[j];
        let mut acc = 0.0;
        for i in 0..self.a.len() {
            let (t, q) = (tau[i], shear[i]);
            let mut ad = self.ad[i] - g * self.a[i];
            let mut bd = self.bd[i] - g * self.b[i];
            let mut a = self.a[i] + t * ad;
            let mut b = self.b[i] + t * bd;
            ad -= q * a;
            bd -= q * b;
            a += t * ad;
            b += t * bd;
            self.a[i] = a;
            self.b[i] = b;
            self.ad[i] = ad;
            self.bd[i] = bd;
            acc += self.ca[i] * a * a + self.cb[i] * b * b;
        }
        acc - self.c_vac
    }

    /// Conserved energy `Σ [<pi^2>/2 + (k^2+m^2)<phi^2>/2 - w_k/2] + λ C_reg^2 / 8`.
    fn energy(&self, c_reg: f64) -> f64 {
        let mut s = CompensatedSum::new();
        for i in 0..self.a.len() {
            let kin = self.ca[i] * self.ad[i] * self.ad[i] + self.cb[i] * self.bd[i] * self.bd[i];
            let pot = self.ca[i] * self.a[i] * self.a[i] + self.cb[i] * self.b[i] * self.b[i];
            s.add(0.5 * kin + 0.5 * (self.k2[i] + self.m_sq) * pot - self.e_vac[i]);
        }
        s.value() + 0.25 * self.half_lambda * c_reg * c_reg
    }

    fn wronskian_deviation(&self) -> f64 {
        (0..self.a.len())
            .map(|i| (self.a[i] * self.bd[i] - self.ad[i] * self.b[i] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn first_non_finite(&self) -> usize {
        (0..self.a.len())
            .find(|&i| !(self.a[i].is_finite() && self.b[i].is_finite() && self.ad[i].is_finite() && self.bd[i].is_finite()))
            .unwrap_or(0)
    }
}

struct Recorder {
    trace: EffectiveMassTrace,
    m_sq: f64,
}

impl Recorder {
    fn new(config: &EvolutionConfig, spec: &QuenchSpec) -> Self {
        let probes = config
            .probe_modes
            .iter()
            .map(|&i| {
                let k = config.grid.nodes()[i];
                ProbeTrace { index: i, k, omega0k: omega(k, spec.m0), a: Vec::new(), b: Vec::new() }
            })
            .collect();
        let cap = config.steps() / config.record_stride + 2;
        Recorder {
            trace: EffectiveMassTrace {
                times: Vec::with_capacity(cap),
                m_eff_sq: Vec::with_capacity(cap),
                sigma: Vec::with_capacity(cap),
                energy: Vec::with_capacity(cap),
                c_of_t: Vec::with_capacity(cap),
                max_wronskian_deviation: 0.0,
                probes,
                dt: config.dt,
            },
            m_sq: spec.m * spec.m,
        }
    }

    fn record(&mut self, t: f64, ens: &Ensemble) -> Result<()> {
        let c = ens.c_reg();
        let m2 = ens.mass(c);
        if !m2.is_finite() {
            return Err(QuenchError::Blowup { mode: ens.first_non_finite(), time: t });
        }
        let tr = &mut self.trace;
        tr.times.push(t);
        tr.m_eff_sq.push(m2);
        tr.sigma.push(m2 - self.m_sq);
        tr.c_of_t.push(c);
        tr.energy.push(ens.energy(c));
        tr.max_wronskian_deviation = tr.max_wronskian_deviation.max(ens.wronskian_deviation());
        for p in &mut tr.probes {
            p.a.push(ens.a[p.index]);
            p.b.push(ens.b[p.index]);
        }
        Ok(())
    }
}

fn check_mass(m: f64, t: f64, ens: &Ensemble) -> Result<f64> {
    if m.is_finite() && m.abs() < 1e150 {
        Ok(m)
    } else {
        Err(QuenchError::Blowup { mode: ens.first_non_finite(), time: t })
    }
}

/// Exact Hartree-Fock evolution: each mode's `(a, b)` basis is advanced under
/// `w_k^2(t) = k^2 + m_eff^2(t)` with
/// `m_eff^2(t) = m^2 + (λ/2) Σ_k (<phi_k^2(t)> - 1/(2 w_k))` on the grid.
pub fn self_consistent_evolve(spec: &QuenchSpec, config: &EvolutionConfig) -> Result<EffectiveMassTrace> {
    spec.validate()?;
    let m_eff_sq_0 = initial_effective_mass_on_grid(spec, &config.grid)?.m_eff_sq_0;
    config.validate(spec, m_eff_sq_0)?;
    let dt = config.dt;
    let steps = config.steps();
    let stride = config.record_stride;
    let mut ens = Ensemble::new(spec, &config.grid, dt);
    let mut rec = Recorder::new(config, spec);
    rec.record(0.0, &ens)?;
    // flow 0: DRIFT[0], flow 1: DRIFT[1] = DRIFT[2], flow 2: DRIFT[3] + DRIFT[0]
    match config.coupling {
        CouplingMode::StageCoupled => {
            let mut c = ens.kick_flow_acc(0.0, 0.0, 0);
            for n in 0..steps {
                let t = n as f64 * dt;
                let d1 = check_mass(ens.mass(c), t, &ens)? - ens.m_sq;
                c = ens.kick_flow_acc(KICK[0] * dt, d1, 1);
                let d2 = check_mass(ens.mass(c), t, &ens)? - ens.m_sq;
                c = ens.kick_flow_acc(KICK[1] * dt, d2, 1);
                let d3 = check_mass(ens.mass(c), t, &ens)? - ens.m_sq;
                let last = n + 1 == steps;
                if last || (n + 1) % stride == 0 {
                    ens.kick_flow_acc(KICK[2] * dt, d3, 0);
                    rec.record((n + 1) as f64 * dt, &ens)?;
                    if !last {
                        c = ens.kick_flow_acc(0.0, 0.0, 0);
                    }
                } else {
                    c = ens.kick_flow_acc(KICK[2] * dt, d3, 2);
                }
            }
        }
        CouplingMode::Lagged => {
            let mut c = ens.c_reg();
            for n in 0..steps {
                let t = n as f64 * dt;
                let delta = check_mass(ens.mass(c), t, &ens)? - ens.m_sq;
                ens.kick_flow_acc(0.0, 0.0, 0);
                ens.kick_flow_acc(KICK[0] * dt, delta, 1);
                ens.kick_flow_acc(KICK[1] * dt, delta, 1);
                c = ens.kick_flow_acc(KICK[2] * dt, delta, 0);
                if n + 1 == steps || (n + 1) % stride == 0 {
                    rec.record((n + 1) as f64 * dt, &ens)?;
                }
            }
        }
    }
    let trace = rec.trace;
    let report = conserved_energy(&trace);
    if report.max_relative_drift > ENERGY_DRIFT_TOL {
        log::warn!(
            "energy drift {:.2e} exceeds {ENERGY_DRIFT_TOL:e}; try dt = {:.3e}",
            report.max_relative_drift,
            0.5 * dt
        );
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub initial: f64,
    pub max_abs_drift: f64,
    pub max_relative_drift: f64,
}

/// Drift of the recorded conserved quantity relative to its initial value.
pub fn conserved_energy(trace: &EffectiveMassTrace) -> EnergyReport {
    let initial = trace.energy.first().copied().unwrap_or(0.0);
    let max_abs_drift = trace.energy.iter().map(|e| (e - initial).abs()).fold(0.0, f64::max);
    let max_relative_drift = if initial != 0.0 { max_abs_drift / initial.abs() } else { max_abs_drift };
    EnergyReport { initial, max_abs_drift, max_relative_drift }
}

/// Largest residual of `Ω''/(2Ω) - (3/4)(Ω'/Ω)^2 + Ω^2 - w^2(t)` with
/// `Ω(t) = Ω(0) / (a^2 + Ω(0)^2 b^2)` reconstructed from a probe, by central
/// differences over interior samples. Needs `k^2 + m_eff^2(0+) > 0`.
pub fn omega_equation_residual(trace: &EffectiveMassTrace, probe: &ProbeTrace) -> Result<f64> {
    let n = probe.a.len();
    if n < 3 || n != trace.times.len() {
        return Err(invalid("probe", "needs at least three samples aligned with the trace"));
    }
    let w0_sq = probe.k * probe.k + trace.m_eff_sq[0];
    if !(w0_sq > 0.0) {
        return Err(domain("omega_equation_residual", "mode starts unstable; Ω(0) is imaginary"));
    }
    let big0 = w0_sq.sqrt();
    let big: Vec<f64> = probe.a.iter().zip(&probe.b).map(|(a, b)| big0 / (a * a + big0 * big0 * b * b)).collect();
    let mut worst: f64 = 0.0;
    for i in 1..n - 1 {
        let h1 = trace.times[i] - trace.times[i - 1];
        let h2 = trace.times[i + 1] - trace.times[i];
        if (h1 - h2).abs() > 1e-9 * h1 {
            continue;
        }
        let d1 = (big[i + 1] - big[i - 1]) / (2.0 * h1);
        let d2 = (big[i + 1] - 2.0 * big[i] + big[i - 1]) / (h1 * h1);
        let om = big[i];
        let w2 = probe.k * probe.k + trace.m_eff_sq[i];
        let r = d2 / (2.0 * om) - 0.75 * (d1 / om).powi(2) + om * om - w2;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

struct QaModes {
    w0: Vec<f64>,
    w_init: Vec<f64>,
    /// `(w(0) - w0)^2 / (4 w0 w(0))` and `(w(0)^2 - w0^2) / (4 w0 w(0))`.
    shift: Vec<f64>,
    osc: Vec<f64>,
    k2: Vec<f64>,
    wk: Vec<f64>,
    weights: Vec<f64>,
}

impl QaModes {
    fn new(spec: &QuenchSpec, grid: &MomentumGrid, m_eff_sq_0: f64) -> Self {
        let mut q = QaModes {
            w0: Vec::new(),
            w_init: Vec::new(),
            shift: Vec::new(),
            osc: Vec::new(),
            k2: Vec::new(),
            wk: Vec::new(),
            weights: grid.weights().to_vec(),
        };
        for &k in grid.nodes() {
            let w0 = omega(k, spec.m0);
            let wi = (k * k + m_eff_sq_0).sqrt();
            let diff = (m_eff_sq_0 - spec.m0 * spec.m0) / (wi + w0);
            q.w0.push(w0);
            q.w_init.push(wi);
            q.shift.push(diff * diff / (4.0 * w0 * wi));
            q.osc.push((wi - w0) * (wi + w0) / (4.0 * w0 * wi));
            q.k2.push(k * k);
            q.wk.push(omega(k, spec.m));
        }
        q
    }

    /// `Σ_k [<phi_k^2>_qa - 1/(2 w_k)]` for current frequencies and phases.
    fn c_reg(&self, wt: &[f64], phase: &[f64]) -> f64 {
        let mut s = CompensatedSum::new();
        for i in 0..wt.len() {
            let w = wt[i];
            let wk = self.wk[i];
            // (A - 1/2)/w + B cos(2θ)/w + 1/(2w) - 1/(2 w_k)
            let vac = (wk - w) * (wk + w) / (2.0 * w * wk * (w + wk));
            s.add(self.weights[i] * ((self.shift[i] + self.osc[i] * (2.0 * phase[i]).cos()) / w + vac));
        }
        s.value()
    }
}

/// Quasi-adiabatic evolution: `<phi_k^2>` from the adiabatic form with phase
/// `∫_0^t w_k(t') dt'`, `w_k^2(t) = k^2 + m_eff^2(t)`. Each step predicts
/// `m_eff^2` with the previous value and corrects once (Heun).
pub fn quasi_adiabatic_evolve(spec: &QuenchSpec, config: &EvolutionConfig) -> Result<EffectiveMassTrace> {
    spec.validate()?;
    let m0_sq = initial_effective_mass_on_grid(spec, &config.grid)?.m_eff_sq_0;
    if !(m0_sq > 0.0) {
        return Err(domain("quasi_adiabatic_evolve", format!("m_eff^2(0+) = {m0_sq:.6} <= 0; the approximation does not apply")));
    }
    config.validate(spec, m0_sq)?;
    let modes = QaModes::new(spec, &config.grid, m0_sq);
    let n = modes.k2.len();
    let m_sq = spec.m * spec.m;
    let half_lambda = 0.5 * spec.lambda;
    let dt = config.dt;
    let steps = config.steps();
    let mut phase = vec![0.0; n];
    let mut w_now = modes.w_init.clone();
    let mut trial_phase = vec![0.0; n];
    let mut w_next = vec![0.0; n];
    let mut trace = EffectiveMassTrace {
        times: vec![0.0],
        m_eff_sq: vec![m0_sq],
        sigma: vec![m0_sq - m_sq],
        energy: Vec::new(),
        c_of_t: vec![modes.c_reg(&w_now, &phase)],
        max_wronskian_deviation: 0.0,
        probes: Vec::new(),
        dt,
    };
    let mut m_now = m0_sq;
    let freq = |m: f64, out: &mut [f64], t: f64| -> Result<()> {
        for i in 0..n {
            let w2 = modes.k2[i] + m;
            if !(w2 > 0.0) {
                return Err(QuenchError::Blowup { mode: i, time: t });
            }
            out[i] = w2.sqrt();
        }
        Ok(())
    };
    for step in 0..steps {
        let t = (step + 1) as f64 * dt;
        let mut m_guess = m_now;
        let mut c = 0.0;
        for _ in 0..2 {
            freq(m_guess, &mut w_next, t)?;
            for i in 0..n {
                trial_phase[i] = phase[i] + 0.5 * dt * (w_now[i] + w_next[i]);
            }
            c = modes.c_reg(&w_next, &trial_phase);
            m_guess = m_sq + half_lambda * c;
            if !m_guess.is_finite() {
                return Err(QuenchError::Blowup { mode: 0, time: t });
            }
        }
        freq(m_guess, &mut w_next, t)?;
        std::mem::swap(&mut phase, &mut trial_phase);
        std::mem::swap(&mut w_now, &mut w_next);
        m_now = m_guess;
        if step + 1 == steps || (step + 1) % config.record_stride == 0 {
            trace.times.push(t);
            trace.m_eff_sq.push(m_now);
            trace.sigma.push(m_now - m_sq);
            trace.c_of_t.push(c);
        }
    }
    Ok(trace)
}

/// Integrand of the quasi-adiabatic stationary equation,
/// `(w(0) - w0)^2 / (4 w0 w(0) w*) + (w - w*) / (2 w w*)`.
fn qa_integrand(k: f64, spec: &QuenchSpec, m_eff_sq_0: f64, m_star: f64) -> f64 {
    let w0 = omega(k, spec.m0);
    let wi = (k * k + m_eff_sq_0).sqrt();
    let ws = omega(k, m_star);
    let w = omega(k, spec.m);
    let d = (m_eff_sq_0 - spec.m0 * spec.m0) / (wi + w0);
    d * d / (4.0 * w0 * wi * ws) + (spec.m - m_star) * (spec.m + m_star) / (2.0 * w * ws * (w + ws))
}

fn qa_solve<F: Fn(f64) -> f64>(spec: &QuenchSpec, integral: F) -> Result<GapSolveResult> {
    let (m, m0) = (spec.m, spec.m0);
    let scale = m0 * m0;
    let g = |u: f64| {
        let ms = u.sqrt() * m0;
        (ms * ms - m * m - 0.5 * spec.lambda * integral(ms)) / scale
    };
    let lo = if m > 0.0 { (m / m0).powi(2) } else { 1e-300 };
    let g_lo = g(lo);
    let (u, iterations) = if g_lo >= 0.0 {
        (lo, 0)
    } else {
        let (a, b) = expand_upward(&g, lo, lo + lo.max(1.0), 200, "quasi-adiabatic stationary equation")?;
        let r = brent(&g, a, b, 1e-15 * b, 300)?;
        (r.x, r.iterations)
    };
    let residual = g(u).abs();
    if !(residual < GAP_RESIDUAL_TOL) {
        return Err(QuenchError::NoConvergence { iterations, residual });
    }
    let m_star = (u.sqrt() * m0).max(m);
    Ok(GapSolveResult {
        m_star,
        sigma_star: (m_star * m_star - m * m).max(0.0),
        residual,
        branch: GapBranch::Generic,
        iterations,
    })
}

fn qa_trivial(spec: &QuenchSpec) -> Option<GapSolveResult> {
    (spec.lambda == 0.0 || spec.m == spec.m0).then_some(GapSolveResult {
        m_star: spec.m,
        sigma_star: 0.0,
        residual: 0.0,
        branch: GapBranch::NoQuench,
        iterations: 0,
    })
}

/// Stationary value of the quasi-adiabatic evolution,
/// `m*_qa^2 = m^2 + (λ/2) Σ_k [(w_k(0)^2 + w0k^2) / (4 w0k w*_k w_k(0)) - 1/(2 w_k)]`,
/// integrated without cutoff in d = 1, 2 and up to `Λ` in d = 3.
pub fn quasi_adiabatic_stationary(spec: &QuenchSpec) -> Result<GapSolveResult> {
    spec.validate()?;
    if let Some(r) = qa_trivial(spec) {
        return Ok(r);
    }
    let m0_sq = initial_effective_mass(spec)?.m_eff_sq_0;
    if !(m0_sq > 0.0) {
        return Err(domain("quasi_adiabatic_stationary", format!("m_eff^2(0+) = {m0_sq:.6} <= 0")));
    }
    let d = spec.d;
    let tol = QuadTolerance { abs: 0.0, rel: 1e-12, max_segments: 4000 };
    let cutoff = spec.effective_cutoff()?;
    let integral = |ms: f64| {
        let f = |k: f64| d.radial_measure(k) * qa_integrand(k, spec, m0_sq, ms);
        let marks = [spec.m.min(ms), spec.m.max(ms), spec.m0];
        let v = match d {
            Dim::Three => integrate(f, 0.0, cutoff, tol),
            _ => integrate_half_line(f, spec.m0.max(ms).max(spec.m), &marks, tol),
        };
        d.angular_factor() * v.unwrap_or(f64::NAN)
    };
    qa_solve(spec, integral)
}

/// [`quasi_adiabatic_stationary`] with the momentum integral on `grid`.
pub fn quasi_adiabatic_stationary_on_grid(spec: &QuenchSpec, grid: &MomentumGrid) -> Result<GapSolveResult> {
    spec.validate()?;
    if let Some(r) = qa_trivial(spec) {
        return Ok(r);
    }
    let m0_sq = initial_effective_mass_on_grid(spec, grid)?.m_eff_sq_0;
    if !(m0_sq > 0.0) {
        return Err(domain("quasi_adiabatic_stationary", format!("m_eff^2(0+) = {m0_sq:.6} <= 0")));
    }
    qa_solve(spec, |ms| radial_integrate(grid, |k| qa_integrand(k, spec, m0_sq, ms)).unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteFit {
    pub m_inf: f64,
    pub decay_exponent: f64,
    /// `Ω` in `cos(2 Ω t + φ)`.
    pub frequency: f64,
    pub amplitude: f64,
    pub rms_residual: f64,
}

struct Linear {
    coef: [f64; 3],
    ssr: f64,
}

/// Least squares for `c0 + c1 t^-p cos(2Ωt) + c2 t^-p sin(2Ωt)`.
fn linear_fit(t: &[f64], y: &[f64], p: f64, om: f64) -> Option<Linear> {
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    let rows: Vec<[f64; 3]> = t
        .iter()
        .map(|&t| {
            let env = t.powf(-p);
            let (s, c) = (2.0 * om * t).sin_cos();
            [1.0, env * c, env * s]
        })
        .collect();
    for (r, &v) in rows.iter().zip(y) {
        for i in 0..3 {
            aty[i] += r[i] * v;
            for j in 0..3 {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    let coef = solve3(ata, aty)?;
    let ssr = rows
        .iter()
        .zip(y)
        .map(|(r, &v)| {
            let e = v - (coef[0] * r[0] + coef[1] * r[1] + coef[2] * r[2]);
            e * e
        })
        .sum();
    Some(Linear { coef, ssr })
}

fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for c in col..3 {
                m[row][c] -= f * m[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|c| m[row][c] * x[c]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Minimal Nelder-Mead in two variables. Returns the best point, its value
/// and whether the simplex converged.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, x0: [f64; 2], step: [f64; 2], tol: f64, max_iter: usize) -> ([f64; 2], f64, bool) {
    let mut simplex = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut vals = simplex.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = idx.map(|i| simplex[i]);
        vals = idx.map(|i| vals[i]);
        let spread = (vals[2] - vals[0]).abs();
        let size = (0..2).map(|c| (simplex[1][c] - simplex[0][c]).abs().max((simplex[2][c] - simplex[0][c]).abs())).fold(0.0, f64::max);
        let scale = simplex[0][0].abs().max(simplex[0][1].abs()).max(1.0);
        if size < 1e-10 * scale || (spread <= tol * vals[0].abs() && size < 1e-6 * scale) {
            return (simplex[0], vals[0], true);
        }
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let refl = lerp(centroid, simplex[2], -1.0);
        let fr = f(refl);
        if fr < vals[0] {
            let exp = lerp(centroid, simplex[2], -2.0);
            let fe = f(exp);
            if fe < fr {
                (simplex[2], vals[2]) = (exp, fe);
            } else {
                (simplex[2], vals[2]) = (refl, fr);
            }
        } else if fr < vals[1] {
            (simplex[2], vals[2]) = (refl, fr);
        } else {
            let contr = if fr < vals[2] { lerp(centroid, refl, 0.5) } else { lerp(centroid, simplex[2], 0.5) };
            let fc = f(contr);
            if fc < vals[2].min(fr) {
                (simplex[2], vals[2]) = (contr, fc);
            } else {
                for i in 1..3 {
                    simplex[i] = lerp(simplex[0], simplex[i], 0.5);
                    vals[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("three vertices");
    (simplex[best], vals[best], false)
}

/// Fit `y(t) ≈ m_inf^2 + A t^-p cos(2Ωt + φ)` on `window`: linear parameters
/// are projected out, `(p, Ω)` come from a scan refined by Nelder-Mead.
pub fn fit_series(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<AsymptoteFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid("window", format!("need 0 < start < end, got ({lo}, {hi})")));
    }
    let (t, y): (Vec<f64>, Vec<f64>) =
        times.iter().zip(values).filter(|(&t, _)| t >= lo && t <= hi).map(|(&t, &v)| (t, v)).unzip();
    if t.len() < 16 {
        return Err(invalid("window", format!("only {} samples inside ({lo}, {hi})", t.len())));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if !(mean > 0.0) {
        return Err(QuenchError::FitFailed { reason: format!("window mean {mean:e} is not a positive mass square"), residual: spread });
    }
    if spread <= 1e-12 * mean {
        return Err(QuenchError::FitFailed { reason: "no oscillation in the window".into(), residual: spread });
    }
    let ssr = |x: [f64; 2]| {
        if !(x[0] > -0.5 && x[0] < 6.0 && x[1] > 0.0) {
            return f64::INFINITY;
        }
        linear_fit(&t, &y, x[0], x[1]).map_or(f64::INFINITY, |l| l.ssr)
    };
    let om0 = mean.sqrt();
    let mut best = ([0.5, om0], f64::INFINITY);
    for &p in &[0.25, 0.5, 1.0, 1.5] {
        for i in 0..=400 {
            let om = om0 * (0.5 + i as f64 / 400.0);
            let v = ssr([p, om]);
            if v < best.1 {
                best = ([p, om], v);
            }
        }
    }
    let (x, _, converged) = nelder_mead(ssr, best.0, [0.05, 0.002 * om0], 1e-13, 4000);
    let lin = linear_fit(&t, &y, x[0], x[1])
        .ok_or_else(|| QuenchError::FitFailed { reason: "singular least-squares system".into(), residual: f64::NAN })?;
    let rms = (lin.ssr / t.len() as f64).sqrt();
    if !converged {
        return Err(QuenchError::FitFailed { reason: "Nelder-Mead did not converge".into(), residual: rms });
    }
    let amplitude = lin.coef[1].hypot(lin.coef[2]);
    if lin.coef[0] <= 0.0 {
        return Err(QuenchError::FitFailed { reason: "fitted asymptote is not positive".into(), residual: rms });
    }
    if amplitude * lo.powf(-x[0]) <= 1e-10 * lin.coef[0] {
        return Err(QuenchError::FitFailed { reason: "oscillation amplitude vanishes".into(), residual: rms });
    }
    Ok(AsymptoteFit { m_inf: lin.coef[0].sqrt(), decay_exponent: x[0], frequency: x[1], amplitude, rms_residual: rms })
}

pub fn fit_asymptote(trace: &EffectiveMassTrace, window: (f64, f64)) -> Result<AsymptoteFit> {
    fit_series(&trace.times, &trace.m_eff_sq, window)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzComparison {
    pub sigma_numeric: f64,
    pub sigma_ansatz: f64,
    /// `None` when the quasi-adiabatic approximation does not apply
    /// (`m_eff^2(0+) <= 0`).
    pub sigma_qa: Option<f64>,
    pub relative_gap: f64,
    pub fit: Option<AsymptoteFit>,
    pub energy_drift: f64,
    pub max_wronskian_deviation: f64,
    /// First sample time after which `m_eff^2 > 0` throughout.
    pub positive_from: Option<f64>,
}

/// Run the exact evolution, fit its asymptote on `window` (default: second
/// half of the run), and compare `Σ∞` with the gap equation and the
/// quasi-adiabatic stationary value on the same grid.
pub fn compare_ansatz(spec: &QuenchSpec, config: &EvolutionConfig, window: Option<(f64, f64)>) -> Result<AnsatzComparison> {
    spec.validate()?;
    if spec.lambda == 0.0 {
        return Ok(AnsatzComparison {
            sigma_numeric: 0.0,
            sigma_ansatz: 0.0,
            sigma_qa: Some(0.0),
            relative_gap: 0.0,
            fit: None,
            energy_drift: 0.0,
            max_wronskian_deviation: 0.0,
            positive_from: Some(0.0),
        });
    }
    let trace = self_consistent_evolve(spec, config)?;
    let window = window.unwrap_or((0.5 * config.t_max, config.t_max));
    let fit = fit_asymptote(&trace, window)?;
    let m_sq = spec.m * spec.m;
    let sigma_numeric = fit.m_inf * fit.m_inf - m_sq;
    let sigma_ansatz = solve_m_star_on_grid(spec, &config.grid)?.sigma_star;
    let sigma_qa = match quasi_adiabatic_stationary_on_grid(spec, &config.grid) {
        Ok(r) => Some(r.sigma_star),
        Err(QuenchError::Domain { .. }) => None,
        Err(e) => return Err(e),
    };
    let relative_gap = if sigma_ansatz != 0.0 { (sigma_numeric - sigma_ansatz).abs() / sigma_ansatz.abs() } else { sigma_numeric.abs() };
    Ok(AnsatzComparison {
        sigma_numeric,
        sigma_ansatz,
        sigma_qa,
        relative_gap,
        fit: Some(fit),
        energy_drift: conserved_energy(&trace).max_relative_drift,
        max_wronskian_deviation: trace.max_wronskian_deviation,
        positive_from: trace.positive_from(),
    })
}
