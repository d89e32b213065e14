//! Hartree-Fock statics: the function `h_d`, ground-state counterterms, the
//! effective mass right after the quench, and the gap equation for the
//! asymptotic effective mass `m*`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{omega, Dim, QuenchSpec};
use crate::eff_temp::f_d_closed;
use crate::error::{domain, invalid, QuenchError, Result};
use crate::grid::{radial_integrate, MomentumGrid};
use crate::quad::{integrate, integrate_half_line, QuadTolerance};
use crate::roots::{brent, expand_upward};

pub const GAP_RESIDUAL_TOL: f64 = 1e-8;

/// `m*` of the massless two-dimensional theory at infinite coupling, in
/// units of `m0`.
pub const MSTAR_2D_STRONG: f64 = 0.24954;

const TOL: QuadTolerance = QuadTolerance { abs: 0.0, rel: 1e-12, max_segments: 4000 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapBranch {
    Generic,
    /// d = 1 with `m = 0`: `m* = 0` for every coupling.
    Massless1dLimit,
    /// No self-energy: `lambda = 0` or `m = m0`, so `m* = m`.
    NoQuench,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSolveResult {
    pub m_star: f64,
    pub sigma_star: f64,
    /// `|m*^2 - m^2 - Sigma(m*)|` in units `m0 = 1`.
    pub residual: f64,
    pub branch: GapBranch,
    pub iterations: usize,
}

impl GapSolveResult {
    fn exact(m: f64, branch: GapBranch) -> Self {
        GapSolveResult { m_star: m, sigma_star: 0.0, residual: 0.0, branch, iterations: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialMassResult {
    pub m_eff_sq_0: f64,
    pub stable: bool,
}

/// `∫_0^Λ k^2 (1/(2 sqrt(k^2+a^2)) - 1/(2 sqrt(k^2+b^2))) dk` without the
/// `Λ^2` cancellation.
fn h3_between(a: f64, b: f64, cutoff: f64) -> f64 {
    let ra = cutoff.hypot(a);
    let rb = cutoff.hypot(b);
    let quad = cutoff * (a - b) * (a + b) / (ra + rb);
    let la = if a == 0.0 { 0.0 } else { a * a * (cutoff / a).asinh() };
    let lb = if b == 0.0 { 0.0 } else { b * b * (cutoff / b).asinh() };
    0.25 * (quad - la + lb)
}

fn check_h_args(s: f64, d: Dim, cutoff: Option<f64>) -> Result<Option<f64>> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid("s", format!("must be finite and >= 0, got {s}")));
    }
    if d == Dim::One && s == 0.0 {
        return Err(domain("h_1", "log s diverges at s = 0"));
    }
    match (d, cutoff) {
        (Dim::Three, None) => Err(invalid("cutoff", "h_3 requires an explicit cutoff")),
        (_, Some(c)) if !(c.is_finite() && c > 0.0) => Err(invalid("cutoff", format!("must be finite and > 0, got {c}"))),
        (_, c) => Ok(c),
    }
}

/// The printed closed forms: `ln(s)/2`, `(s-1)/2`, and the leading-log
/// `(s^2-1) ln(Λ)/4` in three dimensions (`Λ` in units of the integrand's
/// unit mass).
pub fn h_d(s: f64, d: Dim, cutoff: Option<f64>) -> Result<f64> {
    let cutoff = check_h_args(s, d, cutoff)?;
    Ok(match d {
        Dim::One => 0.5 * s.ln(),
        Dim::Two => 0.5 * (s - 1.0),
        Dim::Three => 0.25 * (s * s - 1.0) * cutoff.expect("checked").ln(),
    })
}

/// Exact `h_d`: continuum values in d = 1, 2 and the finite-cutoff integral
/// in d = 3.
pub fn h_d_exact(s: f64, d: Dim, cutoff: Option<f64>) -> Result<f64> {
    let cutoff = check_h_args(s, d, cutoff)?;
    match d {
        Dim::Three => Ok(h3_between(1.0, s, cutoff.expect("checked"))),
        _ => h_d(s, d, cutoff),
    }
}

/// `h_d` by adaptive quadrature of its defining integral.
pub fn h_d_quadrature(s: f64, d: Dim, cutoff: Option<f64>) -> Result<f64> {
    let cutoff = check_h_args(s, d, cutoff)?;
    let c = (s - 1.0) * (s + 1.0);
    let integrand = |k: f64| {
        let a = k.hypot(1.0);
        let b = k.hypot(s);
        // 1/(2a) - 1/(2b) = (b^2 - a^2) / (2ab(a+b))
        d.radial_measure(k) * c / (2.0 * a * b * (a + b))
    };
    let inner = [s.min(1.0), s.max(1.0)];
    match (d, cutoff) {
        (Dim::Three, Some(l)) => {
            let mut breaks = vec![0.0];
            breaks.extend(inner.iter().copied().filter(|&x| x > 0.0 && x < l));
            breaks.push(l);
            crate::quad::integrate_with_breaks(integrand, &breaks, TOL)
        }
        (_, Some(l)) => integrate(integrand, 0.0, l, TOL),
        (_, None) => integrate_half_line(integrand, s.max(1.0), &inner, TOL),
    }
}

/// Ground-state mass counterterm `(λ/2) ∫ d^dk/(2π)^d 1/(2 sqrt(k^2+m^2))`
/// over `k < Λ`, by quadrature.
pub fn mass_counterterm(mass: f64, coupling: f64, d: Dim, cutoff: f64) -> Result<f64> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(invalid("cutoff", format!("must be finite and > 0, got {cutoff}")));
    }
    if !(mass.is_finite() && mass >= 0.0) {
        return Err(invalid("mass", format!("must be finite and >= 0, got {mass}")));
    }
    if coupling == 0.0 {
        return Ok(0.0);
    }
    if d == Dim::One && mass == 0.0 {
        return Err(domain("mass_counterterm", "massless d = 1 integral diverges at k = 0"));
    }
    let breaks: Vec<f64> = [0.0, mass.min(cutoff), cutoff].into_iter().collect();
    let v = crate::quad::integrate_with_breaks(|k| d.radial_measure(k) / (2.0 * omega(k, mass)), &breaks, TOL)?;
    Ok(0.5 * coupling * d.angular_factor() * v)
}

/// Three-dimensional coupling counterterm `∫ d^3k/(2π)^3 1/(8 (k^2+m^2)^{3/2})`
/// over `k < Λ`, by quadrature.
pub fn coupling_counterterm_3d(mass: f64, cutoff: f64) -> Result<f64> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid("mass", format!("must be finite and > 0 (the integral diverges at k = 0), got {mass}")));
    }
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(invalid("cutoff", format!("must be finite and > 0, got {cutoff}")));
    }
    let breaks = [0.0, mass.min(cutoff), cutoff];
    let v = crate::quad::integrate_with_breaks(
        |k| {
            let w = omega(k, mass);
            k * k / (8.0 * w * w * w)
        },
        &breaks,
        TOL,
    )?;
    Ok(Dim::Three.angular_factor() * v)
}

/// Bare coupling `λ_R / (1 - λ_R δλ)`; errors at or beyond the pole.
pub fn renormalized_coupling(lambda_r: f64, delta_lambda: f64) -> Result<f64> {
    let product = lambda_r * delta_lambda;
    if product >= 1.0 - 1e-9 {
        return Err(QuenchError::LandauPole { product });
    }
    Ok(lambda_r / (1.0 - product))
}

/// `m_eff^2(0+) = m^2 + (λ/2) Ω_d/(2π)^d m0^{d-1} h_d(m/m0)`, with the exact
/// finite-cutoff `h_3` in three dimensions.
pub fn initial_effective_mass(spec: &QuenchSpec) -> Result<InitialMassResult> {
    spec.validate()?;
    let (m0, m, d) = (spec.m0, spec.m, spec.d);
    let m_eff_sq_0 = if spec.lambda == 0.0 {
        m * m
    } else {
        let cutoff = match d {
            Dim::Three => Some(spec.effective_cutoff()? / m0),
            _ => None,
        };
        if d == Dim::One && m == 0.0 {
            return Err(domain("initial_effective_mass", "h_1(0) diverges: massless d = 1 start is unbounded below"));
        }
        let h = h_d_exact(m / m0, d, cutoff)?;
        m * m + 0.5 * spec.lambda * d.angular_factor() * m0.powi(d.get() as i32 - 1) * h
    };
    Ok(InitialMassResult { m_eff_sq_0, stable: m_eff_sq_0 > 0.0 })
}

/// `m_eff^2(0+)` with the momentum integral done on `grid`.
pub fn initial_effective_mass_on_grid(spec: &QuenchSpec, grid: &MomentumGrid) -> Result<InitialMassResult> {
    spec.validate()?;
    if grid.dim() != spec.d {
        return Err(invalid("grid", "grid and spec dimensions differ"));
    }
    let (m0, m) = (spec.m0, spec.m);
    let v = radial_integrate(grid, |k| {
        let w0 = omega(k, m0);
        let w = omega(k, m);
        // 1/(2 w0) - 1/(2 w)
        (m - m0) * (m + m0) / (2.0 * w0 * w * (w0 + w))
    })?;
    let m_eff_sq_0 = m * m + 0.5 * spec.lambda * v;
    Ok(InitialMassResult { m_eff_sq_0, stable: m_eff_sq_0 > 0.0 })
}

/// `Σ(u) / (λ/2 · Ω_d/(2π)^d)` in units `m0 = 1` for `u = (m*/m0)^2`.
fn self_energy_dimless(u: f64, x: f64, d: Dim, cutoff: Option<f64>) -> Result<f64> {
    let ms = u.sqrt();
    let f = if ms == 0.0 {
        match d {
            Dim::Three => 0.125,
            _ => return Err(domain("gap equation", "f_d diverges at m* = 0")),
        }
    } else {
        f_d_closed(ms, d)?
    };
    // H = ∫ k^{d-1} (1/(2 w*) - 1/(2 w)) dk in units m0 = 1
    let h = match d {
        Dim::One => 0.5 * (x / ms).ln(),
        Dim::Two => 0.5 * (x - ms),
        Dim::Three => h3_between(ms, x, cutoff.expect("d = 3 carries a cutoff")),
    };
    Ok(f + h)
}

fn dimless(spec: &QuenchSpec) -> Result<(f64, f64, Option<f64>)> {
    spec.validate()?;
    let x = spec.m / spec.m0;
    let lam = spec.lambda * spec.m0.powi(spec.d.get() as i32 - 3);
    let cutoff = match spec.d {
        Dim::Three => Some(spec.effective_cutoff()? / spec.m0),
        _ => None,
    };
    Ok((x, lam, cutoff))
}

/// Gap-equation residual `m*^2 - m^2 - Σ(m*)` in units `m0 = 1`, continuum
/// form with closed-form `f_d` and exact `h_d`.
pub fn gap_residual(spec: &QuenchSpec, m_star: f64) -> Result<f64> {
    let (x, lam, cutoff) = dimless(spec)?;
    let u = (m_star / spec.m0).powi(2);
    let pref = 0.5 * lam * spec.d.angular_factor();
    Ok(u - x * x - pref * self_energy_dimless(u, x, spec.d, cutoff)?)
}

fn solve_in_u<F: Fn(f64) -> f64>(g: F, lo: f64, what: &'static str) -> Result<(f64, usize)> {
    let g_lo = g(lo);
    if g_lo >= 0.0 {
        return Ok((lo, 0));
    }
    let (a, b) = expand_upward(&g, lo, lo + lo.max(1.0), 200, what)?;
    let root = brent(&g, a, b, 1e-15 * b.max(1e-300), 300)?;
    Ok((root.x, root.iterations))
}

/// Solve `m*^2 = m^2 + (λ/2) Ω_d/(2π)^d [m0^{d-1} f_d(m*/m0) + m*^{d-1} h_d(m/m*)]`
/// on the branch `m* >= m`.
pub fn solve_m_star(spec: &QuenchSpec) -> Result<GapSolveResult> {
    let (x, lam, cutoff) = dimless(spec)?;
    if spec.lambda == 0.0 || spec.m == spec.m0 {
        return Ok(GapSolveResult::exact(spec.m, GapBranch::NoQuench));
    }
    if spec.d == Dim::One && spec.m == 0.0 {
        return Ok(GapSolveResult::exact(0.0, GapBranch::Massless1dLimit));
    }
    let d = spec.d;
    let pref = 0.5 * lam * d.angular_factor();
    let g = |u: f64| u - x * x - pref * self_energy_dimless(u, x, d, cutoff).unwrap_or(f64::NAN);
    let lo = if x > 0.0 { x * x } else { 1e-300 };
    let (u, iterations) = solve_in_u(g, lo, "gap equation")?;
    finish(spec, u, g(u).abs(), iterations)
}

fn finish(spec: &QuenchSpec, u: f64, residual: f64, iterations: usize) -> Result<GapSolveResult> {
    if !(residual < GAP_RESIDUAL_TOL) {
        return Err(QuenchError::NoConvergence { iterations, residual });
    }
    let m_star = (u.sqrt() * spec.m0).max(spec.m);
    let sigma_star = (m_star * m_star - spec.m * spec.m).max(0.0);
    Ok(GapSolveResult { m_star, sigma_star, residual, branch: GapBranch::Generic, iterations })
}

/// Integrand of the gap equation,
/// `(w0 - w*)^2 / (4 w0 w*^2) + (w - w*) / (2 w w*)`.
pub fn gap_integrand(k: f64, m0: f64, m: f64, m_star: f64) -> f64 {
    let w0 = omega(k, m0);
    let w = omega(k, m);
    let ws = omega(k, m_star);
    let a = (m0 - m_star) * (m0 + m_star) / (w0 + ws);
    let b = (m - m_star) * (m + m_star) / (w + ws);
    a * a / (4.0 * w0 * ws * ws) + b / (2.0 * w * ws)
}

/// The gap equation with the momentum integral done on `grid` (cutoff taken
/// from the grid). Used where `m*` is compared against a computation on the
/// same grid.
pub fn solve_m_star_on_grid(spec: &QuenchSpec, grid: &MomentumGrid) -> Result<GapSolveResult> {
    spec.validate()?;
    if grid.dim() != spec.d {
        return Err(invalid("grid", "grid and spec dimensions differ"));
    }
    if spec.lambda == 0.0 || spec.m == spec.m0 {
        return Ok(GapSolveResult::exact(spec.m, GapBranch::NoQuench));
    }
    if spec.d == Dim::One && spec.m == 0.0 {
        return Ok(GapSolveResult::exact(0.0, GapBranch::Massless1dLimit));
    }
    let (m0, m, lambda) = (spec.m0, spec.m, spec.lambda);
    let scale = m0 * m0;
    let g = |u: f64| {
        let ms = u.sqrt() * m0;
        let sigma = radial_integrate(grid, |k| gap_integrand(k, m0, m, ms)).unwrap_or(f64::NAN);
        (ms * ms - m * m - 0.5 * lambda * sigma) / scale
    };
    let lo = if m > 0.0 { (m / m0).powi(2) } else { 1e-300 };
    let (u, iterations) = solve_in_u(g, lo, "gap equation on grid")?;
    finish(spec, u, g(u).abs(), iterations)
}

/// Three-dimensional gap equation with the coupling counterterm subtracted,
/// `+ (m*^2 - m^2) / (4 w^3)` under the integral, integrated without cutoff.
/// Meant for small `λ_R`; needs `m > 0` (the subtraction is infrared
/// divergent at `m = 0`).
pub fn solve_m_star_renormalized_3d(spec: &QuenchSpec) -> Result<GapSolveResult> {
    spec.validate()?;
    if spec.d != Dim::Three {
        return Err(invalid("d", "the renormalized gap equation is three-dimensional"));
    }
    if spec.lambda == 0.0 || spec.m == spec.m0 {
        return Ok(GapSolveResult::exact(spec.m, GapBranch::NoQuench));
    }
    if spec.m == 0.0 {
        return Err(domain("solve_m_star_renormalized_3d", "the counterterm subtraction diverges at k = 0 when m = 0"));
    }
    let x = spec.m / spec.m0;
    let lam = spec.lambda;
    let pref = 0.5 * lam * Dim::Three.angular_factor();
    let g = |u: f64| {
        let ms = u.sqrt();
        let sigma = u - x * x;
        let integrand = |k: f64| {
            let w = omega(k, x);
            k * k * (gap_integrand(k, 1.0, x, ms) + sigma / (4.0 * w * w * w))
        };
        let v = integrate_half_line(integrand, ms.max(1.0), &[x.min(ms), x.max(ms)], TOL).unwrap_or(f64::NAN);
        u - x * x - pref * v
    };
    let (u, iterations) = solve_in_u(g, x * x, "renormalized gap equation")?;
    finish(spec, u, g(u).abs(), iterations)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MStarRegime {
    MasslessSmallLambda,
    Massless1dLimit,
    LargeLambda,
}

/// Printed asymptotic solutions of the gap equation.
pub fn m_star_asymptotic(spec: &QuenchSpec, regime: MStarRegime) -> Result<f64> {
    spec.validate()?;
    let (m0, m, lambda, d) = (spec.m0, spec.m, spec.lambda, spec.d);
    match regime {
        MStarRegime::MasslessSmallLambda => {
            if m != 0.0 {
                return Err(domain("massless_small_lambda", "requires m = 0"));
            }
            match d {
                Dim::One => Ok(0.0),
                Dim::Two => {
                    if !(lambda > 0.0 && lambda < m0) {
                        return Err(domain("massless_small_lambda", "d = 2 form needs 0 < lambda < m0"));
                    }
                    Ok(0.25 * (lambda * m0 * (m0 / lambda).ln() / (2.0 * PI)).sqrt())
                }
                Dim::Three => Ok(m0 * lambda.sqrt() / (4.0 * PI * 2f64.sqrt())),
            }
        }
        MStarRegime::Massless1dLimit => {
            if d != Dim::One {
                return Err(domain("massless_1d_limit", "one-dimensional regime"));
            }
            if m == 0.0 {
                return Ok(0.0);
            }
            if !(m < 0.2 * m0) || lambda == 0.0 {
                return Err(domain("massless_1d_limit", "needs lambda > 0 and m/m0 < 0.2"));
            }
            let denom = 2.0 * (m0 / m).ln() + 1.0 - 16.0 * PI * PI * m * m / (lambda * m0 * m0);
            if !(denom > 0.0) {
                return Err(domain("massless_1d_limit", "coupling too small for the limiting form"));
            }
            Ok(m0 * PI / 2.0 / denom)
        }
        MStarRegime::LargeLambda => match d {
            Dim::One if m >= m0 => Ok(m * m / (2.0 * m0)),
            Dim::Two if m == 0.0 => Ok(MSTAR_2D_STRONG * m0),
            Dim::Two if m >= m0 => Ok(4.0 * m / PI),
            Dim::Three => Err(domain("large_lambda", "the d = 3 large-coupling limit depends on the cutoff")),
            _ => Err(domain("large_lambda", "printed forms hold for m >= m0")),
        },
    }
}
