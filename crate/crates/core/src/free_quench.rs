//! Free-field mass quench: single-mode propagator, real-space transforms,
//! deep-quench closed forms, horizon structure, late-time envelopes and the
//! massless one-dimensional vertex correlator.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{omega, Dim, QuenchSpec};
use crate::error::{domain, invalid, Result};
use crate::grid::{radial_integrate, MomentumGrid};

/// Pre- and post-quench frequencies of one momentum mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModePair {
    pub omega0: f64,
    pub omega: f64,
}

impl ModePair {
    pub fn new(omega0: f64, omega: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(invalid("omega0", format!("must be finite and > 0, got {omega0}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(invalid("omega", format!("must be finite and > 0, got {omega}")));
        }
        Ok(ModePair { omega0, omega })
    }

    pub fn from_spec(k: f64, spec: &QuenchSpec) -> Result<Self> {
        ModePair::new(spec.omega0(k), spec.omega(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexParams {
    pub q: f64,
    pub m0: f64,
}

/// Which momentum-space integrand `real_space_propagator` transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealSpaceMode {
    /// The exact mode propagator.
    Full,
    /// The deep-quench integrand `m0 (1 - cos 2 w t) / (4 w^2)`.
    DeepQuench,
}

/// Two-time quench propagator of one mode,
/// `(w - w0)^2/(4 w^2 w0) cos w(t1 - t2) + (w^2 - w0^2)/(4 w^2 w0) cos w(t1 + t2)
///  + exp(-i w |t1 - t2|) / (2 w)`.
///
/// The real part is evaluated as the algebraically equal
/// `cos(w t1) cos(w t2) / (2 w0) + w0 sin(w t1) sin(w t2) / (2 w^2)`, which
/// avoids the cancellation between the first two terms when `w0 >> w`.
pub fn quench_mode_propagator(t1: f64, t2: f64, pair: ModePair) -> Complex64 {
    let ModePair { omega0: w0, omega: w } = pair;
    let tau = (t1 - t2).abs();
    if w == w0 {
        return Complex64::from_polar(0.5 / w, -w * tau);
    }
    let (s1, c1) = (w * t1).sin_cos();
    let (s2, c2) = (w * t2).sin_cos();
    let re = 0.5 * (c1 * c2) / w0 + 0.5 * w0 * (s1 * s2) / (w * w);
    Complex64::new(re, -(w * tau).sin() / (2.0 * w))
}

/// Equal-time value `cos^2(w t)/(2 w0) + w0 sin^2(w t)/(2 w^2)`, the same as
/// the mode propagator at `t1 = t2 = t` but regular as `w -> 0`.
pub fn equal_time_mode(t: f64, omega0: f64, omega: f64) -> f64 {
    let c = (omega * t).cos();
    let s_over_w = sin_over(omega, t);
    0.5 * c * c / omega0 + 0.5 * omega0 * s_over_w * s_over_w
}

/// `sin(w t) / w`, continuous at `w = 0`.
fn sin_over(w: f64, t: f64) -> f64 {
    let x = w * t;
    if x.abs() < 1e-4 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / w
    }
}

/// Time-independent part: `(w0 - w)^2 / (4 w0 w^2) + 1 / (2 w)`.
pub fn stationary_mode_part(pair: ModePair) -> f64 {
    let ModePair { omega0: w0, omega: w } = pair;
    (w0 - w) * (w0 - w) / (4.0 * w0 * w * w) + 0.5 / w
}

/// Angular kernel of the d-dimensional Fourier transform of a radial
/// function.
pub fn radial_kernel(d: Dim, k: f64, r: f64) -> f64 {
    let x = k * r;
    match d {
        Dim::One => x.cos(),
        Dim::Two => libm::j0(x),
        Dim::Three => {
            if x.abs() < 1e-4 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        }
    }
}

fn deep_integrand(m0: f64, w: f64, t: f64) -> f64 {
    // m0 (1 - cos 2wt) / (4 w^2) = m0 sin^2(wt) / (2 w^2)
    let s = sin_over(w, t);
    0.5 * m0 * s * s
}

/// Real part of the real-space quench propagator, the radial quadrature of
/// the mode propagator against the d-dimensional kernel. Unequal times are
/// supported only in one dimension and only for the full integrand.
///
/// Logs a warning when doubling the grid changes the result by more than
/// `1e-4` relative.
pub fn real_space_propagator(
    r: f64,
    t1: f64,
    t2: f64,
    spec: &QuenchSpec,
    grid: &MomentumGrid,
    mode: RealSpaceMode,
) -> Result<f64> {
    spec.validate()?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid("r", format!("must be finite and >= 0, got {r}")));
    }
    if !(t1 >= 0.0 && t2 >= 0.0 && t1.is_finite() && t2.is_finite()) {
        return Err(invalid("t", format!("times must be finite and >= 0, got ({t1}, {t2})")));
    }
    if grid.dim() != spec.d {
        return Err(invalid("grid", format!("grid is {}-dimensional, spec is {}-dimensional", grid.dim(), spec.d)));
    }
    if t1 != t2 && (spec.d != Dim::One || mode == RealSpaceMode::DeepQuench) {
        return Err(domain("real_space_propagator", "unequal times are supported only for the full integrand in d = 1"));
    }
    if mode == RealSpaceMode::Full && spec.d == Dim::One && spec.m == 0.0 {
        return Err(domain(
            "real_space_propagator",
            "massless post-quench mass in d = 1 is infrared divergent; use the vertex correlator",
        ));
    }
    let value = transform(r, t1, t2, spec, grid, mode)?;
    let fine = transform(r, t1, t2, spec, &grid.refined()?, mode)?;
    let err = (fine - value).abs();
    if err > 1e-4 * fine.abs() {
        log::warn!(
            "real-space propagator at r = {r}, t = ({t1}, {t2}): grid doubling changes the value by {err:e} (value {value:e})"
        );
    }
    Ok(value)
}

fn transform(r: f64, t1: f64, t2: f64, spec: &QuenchSpec, grid: &MomentumGrid, mode: RealSpaceMode) -> Result<f64> {
    let d = spec.d;
    let (m0, m) = (spec.m0, spec.m);
    match mode {
        RealSpaceMode::DeepQuench => {
            radial_integrate(grid, |k| radial_kernel(d, k, r) * deep_integrand(m0, omega(k, m), t1))
        }
        RealSpaceMode::Full if t1 == t2 => {
            radial_integrate(grid, |k| radial_kernel(d, k, r) * equal_time_mode(t1, omega(k, m0), omega(k, m)))
        }
        RealSpaceMode::Full => radial_integrate(grid, |k| {
            let pair = ModePair { omega0: omega(k, m0), omega: omega(k, m) };
            radial_kernel(d, k, r) * quench_mode_propagator(t1, t2, pair).re
        }),
    }
}

/// `r < 2t`. The light-cone boundary itself counts as outside.
pub fn horizon_indicator(r: f64, t: f64) -> bool {
    r < 2.0 * t
}

/// Exact deep-quench propagator for a massless post-quench theory. At
/// `r = 2t` the inside-horizon limit is returned.
pub fn deep_quench_closed_form(r: f64, t: f64, d: Dim, m0: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0 && t.is_finite() && t >= 0.0) {
        return Err(invalid("r, t", format!("must be finite and >= 0, got ({r}, {t})")));
    }
    if !(m0.is_finite() && m0 > 0.0) {
        return Err(invalid("m0", format!("must be finite and > 0, got {m0}")));
    }
    if r > 2.0 * t {
        return Ok(0.0);
    }
    match d {
        Dim::One => Ok(m0 * (2.0 * t - r) / 8.0),
        Dim::Two => {
            if r == 0.0 {
                return Err(domain("deep_quench_closed_form", "d = 2 closed form diverges at r = 0"));
            }
            let root = ((2.0 * t - r) * (2.0 * t + r)).max(0.0).sqrt();
            Ok(m0 / (8.0 * PI) * ((2.0 * t + root) / r).ln())
        }
        Dim::Three => {
            if r == 0.0 {
                return Err(domain("deep_quench_closed_form", "d = 3 closed form diverges at r = 0"));
            }
            Ok(m0 / (16.0 * PI * r))
        }
    }
}

/// Late-time description of the equal-time real-space propagator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    /// Large-distance form of the stationary part,
    /// `(m0/4) m^{(d-3)/2} e^{-m r} / (2 (2 pi)^{(d-1)/2} r^{(d-1)/2})`.
    pub stationary: f64,
    /// Stationary-phase amplitude of the `cos 2mt` term at `r = 0`,
    /// `|m^2 - m0^2| / (4 m^2 m0) (m / (4 pi t))^{d/2}`.
    pub oscillation_amplitude: f64,
    pub oscillation_frequency: f64,
    pub decay_power: f64,
}

pub fn large_time_envelope(r: f64, t: f64, spec: &QuenchSpec) -> Result<Envelope> {
    spec.validate()?;
    let (m0, m) = (spec.m0, spec.m);
    if m == 0.0 {
        return Err(domain("large_time_envelope", "requires a massive post-quench theory"));
    }
    if !(t > 0.0) {
        return Err(invalid("t", format!("must be > 0, got {t}")));
    }
    let dd = spec.d.get() as f64;
    if spec.d != Dim::One && !(r > 0.0) {
        return Err(invalid("r", "the stationary envelope needs r > 0 for d > 1"));
    }
    let stationary = 0.25 * m0 * m.powf(0.5 * (dd - 3.0)) * (-m * r).exp()
        / (2.0 * (2.0 * PI).powf(0.5 * (dd - 1.0)) * r.powf(0.5 * (dd - 1.0)));
    let oscillation_amplitude =
        (m * m - m0 * m0).abs() / (4.0 * m * m * m0) * (m / (4.0 * PI * t)).powf(0.5 * dd);
    Ok(Envelope { stationary, oscillation_amplitude, oscillation_frequency: 2.0 * m, decay_power: 0.5 * dd })
}

/// Vertex-operator correlator after a deep quench to a massless 1d theory.
pub fn vertex_correlator(r: f64, t: f64, vp: VertexParams) -> f64 {
    let q2 = vp.q * vp.q;
    if r > 2.0 * t {
        (-q2 * vp.m0 * t / 4.0).exp()
    } else {
        (-q2 * vp.m0 * r / 8.0).exp()
    }
}

/// `exp(-q^2 (C(0, t) - C(r, t)))` built from the d = 1 deep-quench closed
/// form.
pub fn vertex_from_propagator(r: f64, t: f64, vp: VertexParams) -> Result<f64> {
    let c0 = deep_quench_closed_form(0.0, t, Dim::One, vp.m0)?;
    let cr = deep_quench_closed_form(r, t, Dim::One, vp.m0)?;
    Ok((-vp.q * vp.q * (c0 - cr)).exp())
}
