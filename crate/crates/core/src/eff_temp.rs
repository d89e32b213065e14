//! Average effective temperature: the quench integral `f_d`, the thermal
//! integral `g_d`, their closed forms and asymptotics, and the matching
//! equation `x^{d-1} g_d(x y) = f_d(x)` for `y = beta m0`, `x = m / m0`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::domain::{Dim, Extent, QuenchSpec};
use crate::error::{domain, invalid, Result};
use crate::quad::{integrate_half_line, QuadTolerance};
use crate::roots::{brent, scan_geometric};

/// Below this mass ratio the d = 1 quench integral is returned in closed
/// form and flagged.
pub const F1_SMALL_S: f64 = 1e-6;

const TOL: QuadTolerance = QuadTolerance { abs: 0.0, rel: 1e-13, max_segments: 4000 };

/// Which column of the asymptotics tables to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Small,
    NearOne,
    Large,
}

fn check_s(s: f64, what: &'static str) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(invalid(what, format!("must be finite and > 0, got {s}")));
    }
    Ok(())
}

/// Quench integral
/// `f_d(s) = ∫_0^∞ k^{d-1} (sqrt(k^2+1) - sqrt(k^2+s^2))^2 / (4 sqrt(k^2+1) (k^2+s^2)) dk`
/// by adaptive quadrature.
pub fn f_d(s: f64, d: Dim) -> Result<f64> {
    f_d_flagged(s, d).map(|(v, _)| v)
}

/// `f_d` together with a flag that is set when the d = 1 closed form was
/// used in place of quadrature (`s < 1e-6`, where the integrand is a spike
/// of width `s`).
pub fn f_d_flagged(s: f64, d: Dim) -> Result<(f64, bool)> {
    check_s(s, "s")?;
    if s == 1.0 {
        return Ok((0.0, false));
    }
    if d == Dim::One && s < F1_SMALL_S {
        log::warn!("f_1({s:e}): mass ratio below {F1_SMALL_S:e}, using the closed form");
        return Ok((f_d_closed(s, d)?, true));
    }
    let c = (1.0 - s) * (1.0 + s);
    let integrand = |k: f64| {
        let w0 = k.hypot(1.0);
        let w = k.hypot(s);
        let diff = c / (w0 + w);
        d.radial_measure(k) * diff * diff / (4.0 * w0 * w * w)
    };
    let scale = s.max(1.0);
    Ok((integrate_half_line(integrand, scale, &[s.min(1.0)], TOL)?, false))
}

/// Exact `f_d`, valid for all `s > 0`: the arccos form for one side of
/// `s = 1` and its arcosh continuation for the other.
pub fn f_d_closed(s: f64, d: Dim) -> Result<f64> {
    check_s(s, "s")?;
    if s == 1.0 {
        return Ok(0.0);
    }
    let v = match d {
        Dim::One => {
            if s < 1.0 {
                2.0 * s.ln() + (1.0 - s * s).sqrt() / s * s.acos()
            } else {
                2.0 * s.ln() - (s * s - 1.0).sqrt() / s * s.acosh()
            }
        }
        Dim::Two => {
            if s > 1.0 {
                2.0 * (s - 1.0) - (s * s - 1.0).sqrt() * (1.0 / s).acos()
            } else {
                2.0 * (s - 1.0) + (1.0 - s * s).sqrt() * (1.0 / s).acosh()
            }
        }
        Dim::Three => {
            let base = 0.5 * (1.0 - s * s) - s * s * s.ln();
            if s < 1.0 {
                base - s * (1.0 - s * s).sqrt() * s.acos()
            } else {
                base + s * (s * s - 1.0).sqrt() * s.acosh()
            }
        }
    };
    Ok(0.25 * v)
}

/// Asymptotic forms of `f_d` near `s = 0`, `s = 1` and for large `s`.
pub fn f_d_asymptotic(s: f64, d: Dim, regime: Regime) -> Result<f64> {
    check_s(s, "s")?;
    let v = match (d, regime) {
        (Dim::One, Regime::Small) => (PI / (2.0 * s) + 2.0 * s.ln()) / 4.0,
        (Dim::One, Regime::NearOne) => (s - 1.0).powi(2) / 6.0,
        (Dim::One, Regime::Large) => s.ln() / 4.0,
        (Dim::Two, Regime::Small) => -s.ln() / 4.0,
        (Dim::Two, Regime::NearOne) => (s - 1.0).powi(2) / 12.0,
        (Dim::Two, Regime::Large) => (1.0 - PI / 4.0) * s / 2.0,
        (Dim::Three, Regime::Small) => (1.0 - PI * s) / 8.0,
        (Dim::Three, Regime::NearOne) => (s - 1.0).powi(2) / 12.0,
        (Dim::Three, Regime::Large) => (LN_2 - 0.5) * s * s / 4.0,
    };
    Ok(v)
}

/// Thermal integral `g_d(s) = ∫_0^∞ k^{d-1} / (sqrt(k^2+1) (e^{s sqrt(k^2+1)} - 1)) dk`.
pub fn g_d(s: f64, d: Dim) -> Result<f64> {
    check_s(s, "s")?;
    let integrand = |k: f64| {
        let w = k.hypot(1.0);
        let x = s * w;
        if x > 700.0 {
            0.0
        } else {
            d.radial_measure(k) / (w * x.exp_m1())
        }
    };
    // Bose factor cuts off at k ~ 1/s for small s and at k ~ s^{-1/2} for
    // large s.
    let scale = (1.0 / s).max(1.0);
    let knee = (1.0 / s).sqrt();
    integrate_half_line(integrand, scale, &[knee, 1.0], TOL)
}

/// Exact `g_2(s) = -ln(1 - e^{-s}) / s`; no closed form exists in d = 1, 3.
pub fn g_d_closed(s: f64, d: Dim) -> Result<f64> {
    check_s(s, "s")?;
    match d {
        Dim::Two => Ok(-(-(-s).exp()).ln_1p() / s),
        _ => Err(domain("g_d_closed", format!("no exact entry for d = {d}"))),
    }
}

/// Small- and large-`s` forms of `g_d`.
pub fn g_d_asymptotic(s: f64, d: Dim, regime: Regime) -> Result<f64> {
    check_s(s, "s")?;
    let v = match (d, regime) {
        (_, Regime::NearOne) => return Err(domain("g_d_asymptotic", "the thermal table has no s ~ 1 column")),
        (Dim::One, Regime::Small) => PI / (2.0 * s) + s.ln() / 2.0,
        (Dim::One, Regime::Large) => (-s).exp() * (PI / (2.0 * s)).sqrt(),
        (Dim::Two, Regime::Small) => -s.ln() / s,
        (Dim::Two, Regime::Large) => (-s).exp() / s,
        (Dim::Three, Regime::Small) => PI * PI / (6.0 * s * s) * (1.0 - 3.0 * s / PI),
        (Dim::Three, Regime::Large) => (-s).exp() * (PI / 2.0).sqrt() * s.powf(-1.5),
    };
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSolveResult {
    /// Average effective inverse temperature in physical units.
    pub beta_bar: Extent,
    /// Relative residual `|x^{d-1} g_d(x y) - f_d(x)| / f_d(x)` at the root.
    pub residual: f64,
    pub iterations: usize,
    /// Final bracket in `y = beta m0`.
    pub bracket: (f64, f64),
    /// `m / m0`.
    pub x: f64,
    /// `beta m0`.
    pub y: Extent,
}

pub const BETA_RESIDUAL_TOL: f64 = 1e-8;

/// Solve the average-temperature matching equation.
pub fn solve_average_beta(spec: &QuenchSpec) -> Result<BetaSolveResult> {
    spec.validate()?;
    if spec.m == 0.0 {
        return Err(invalid("m", "the average temperature needs a massive post-quench theory"));
    }
    let x = spec.m / spec.m0;
    if x == 1.0 {
        return Ok(BetaSolveResult {
            beta_bar: Extent::Infinite,
            residual: 0.0,
            iterations: 0,
            bracket: (f64::INFINITY, f64::INFINITY),
            x,
            y: Extent::Infinite,
        });
    }
    let d = spec.d;
    let target = f_d_closed(x, d)?;
    let xp = x.powi(d.get() as i32 - 1);
    let objective = |y: f64| (xp * g_d(x * y, d).unwrap_or(f64::NAN) - target) / target;
    let (lo, hi) = scan_geometric(objective, 1e-3, 1e3, 120, "average-temperature matching function")?;
    let root = brent(objective, lo, hi, 1e-12, 200)?;
    let residual = objective(root.x).abs();
    if !(residual < BETA_RESIDUAL_TOL) {
        return Err(crate::error::QuenchError::NoConvergence { iterations: root.iterations, residual });
    }
    Ok(BetaSolveResult {
        beta_bar: Extent::Finite(root.x / spec.m0),
        residual,
        iterations: root.iterations,
        bracket: root.bracket,
        x,
        y: Extent::Finite(root.x),
    })
}

/// Small-`m/m0` expansions of the average inverse temperature (physical
/// units): `4/m0 + 32 ln2 m / (pi m0^2)` in d = 1,
/// `(4/m0)(1 + (3 ln2 - 2)/ln(m/m0))` in d = 2 and
/// `(2 pi/sqrt 3 - pi (2 - pi/sqrt 3) m/m0) / m0` in d = 3.
/// Refuses `m/m0 >= 0.2`.
pub fn beta_expansion(spec: &QuenchSpec) -> Result<f64> {
    spec.validate()?;
    let (m0, x) = (spec.m0, spec.m / spec.m0);
    if x >= 0.2 {
        return Err(domain("beta_expansion", format!("valid only for m/m0 < 0.2, got {x}")));
    }
    let y = match spec.d {
        Dim::One => 4.0 + 32.0 * LN_2 * x / PI,
        Dim::Two => {
            if x == 0.0 {
                4.0
            } else {
                4.0 * (1.0 + (3.0 * LN_2 - 2.0) / x.ln())
            }
        }
        Dim::Three => 2.0 * PI / 3f64.sqrt() - PI * (2.0 - PI / 3f64.sqrt()) * x,
    };
    Ok(y / m0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMS: [Dim; 3] = [Dim::One, Dim::Two, Dim::Three];

    #[test]
    fn vanishes_at_equal_masses() {
        for d in DIMS {
            assert_eq!(f_d(1.0, d).unwrap(), 0.0);
            assert_eq!(f_d_closed(1.0, d).unwrap(), 0.0);
        }
    }

    #[test]
    fn f1_half() {
        let oracle = (2.0 * 0.5f64.ln() + 0.75f64.sqrt() / 0.5 * 0.5f64.acos()) / 4.0;
        assert!((f_d_closed(0.5, Dim::One).unwrap() - oracle).abs() < 1e-15);
        assert!((f_d(0.5, Dim::One).unwrap() - oracle).abs() < 1e-12 * oracle);
        assert!((oracle - 0.10688).abs() < 1e-5);
    }

    #[test]
    fn quadrature_matches_closed_forms_both_sides() {
        for d in DIMS {
            for &s in &[0.003, 0.2, 0.7, 0.999, 1.001, 1.5, 4.0, 90.0] {
                let q = f_d(s, d).unwrap();
                let c = f_d_closed(s, d).unwrap();
                assert!((q - c).abs() <= 1e-9 * c, "d={d} s={s}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn tiny_ratio_is_flagged() {
        let (v, flagged) = f_d_flagged(1e-8, Dim::One).unwrap();
        assert!(flagged);
        assert!((v / (PI / 8e-8) - 1.0) < 1e-6);
        assert!(!f_d_flagged(1e-8, Dim::Three).unwrap().1);
    }

    #[test]
    fn large_s_coefficients() {
        let s = 1e6;
        let r2 = f_d_closed(s, Dim::Two).unwrap() / s;
        assert!((r2 - (1.0 - PI / 4.0) / 2.0).abs() < 1e-5);
        let r3 = f_d_closed(s, Dim::Three).unwrap() / (s * s);
        assert!((r3 - (LN_2 - 0.5) / 4.0).abs() < 1e-6);
    }

    #[test]
    fn g2_exact() {
        assert!((g_d_closed(1.0, Dim::Two).unwrap() + (1.0 - (-1f64).exp()).ln()).abs() < 1e-15);
        assert!((g_d_closed(1.0, Dim::Two).unwrap() - 0.45868).abs() < 1e-5);
        for &s in &[0.1, 1.0, 10.0] {
            let q = g_d(s, Dim::Two).unwrap();
            let c = g_d_closed(s, Dim::Two).unwrap();
            assert!((q - c).abs() < 1e-8 * c, "s={s}");
        }
        assert!(g_d_closed(1.0, Dim::One).is_err());
    }

    #[test]
    fn thermal_asymptotics() {
        let r = g_d(20.0, Dim::One).unwrap() / g_d_asymptotic(20.0, Dim::One, Regime::Large).unwrap();
        assert!((r - 1.0).abs() < 0.02);
        let r = g_d(1e-3, Dim::Three).unwrap() / g_d_asymptotic(1e-3, Dim::Three, Regime::Small).unwrap();
        assert!((r - 1.0).abs() < 1e-5);
        assert!(g_d_asymptotic(1.0, Dim::One, Regime::NearOne).is_err());
    }

    #[test]
    fn thermal_integral_decreases() {
        for d in DIMS {
            let mut prev = f64::INFINITY;
            for i in 0..40 {
                let s = 1e-3 * 1.4f64.powi(i);
                let v = g_d(s, d).unwrap();
                assert!(v > 0.0 && v < prev);
                prev = v;
            }
        }
        assert!(g_d(0.0, Dim::One).is_err());
    }

    #[test]
    fn no_quench_gives_infinite_beta() {
        let r = solve_average_beta(&QuenchSpec::new(Dim::One, 1.0, 1.0)).unwrap();
        assert!(r.beta_bar.is_infinite());
        assert!(solve_average_beta(&QuenchSpec::new(Dim::One, 1.0, 0.0)).is_err());
    }

    #[test]
    fn solver_residual_and_determinism() {
        for d in DIMS {
            for &x in &[0.01, 0.4, 2.5] {
                let spec = QuenchSpec::new(d, 1.0, x);
                let a = solve_average_beta(&spec).unwrap();
                let b = solve_average_beta(&spec).unwrap();
                assert_eq!(a, b);
                assert!(a.residual < BETA_RESIDUAL_TOL);
                let y = a.y.finite().unwrap();
                let lhs = x.powi(d.get() as i32 - 1) * g_d(x * y, d).unwrap();
                assert!((lhs / f_d(x, d).unwrap() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn physical_units_rescale() {
        let a = solve_average_beta(&QuenchSpec::new(Dim::Three, 1.0, 0.3)).unwrap();
        let b = solve_average_beta(&QuenchSpec::new(Dim::Three, 2.0, 0.6)).unwrap();
        let (ba, bb) = (a.beta_bar.finite().unwrap(), b.beta_bar.finite().unwrap());
        assert!((ba - 2.0 * bb).abs() < 1e-9 * ba);
    }

    #[test]
    fn expansions() {
        let v = beta_expansion(&QuenchSpec::new(Dim::Two, 1.0, 0.01)).unwrap();
        assert!((v - 4.0 * (1.0 + (3.0 * LN_2 - 2.0) / 0.01f64.ln())).abs() < 1e-14);
        let v = beta_expansion(&QuenchSpec::new(Dim::Three, 1.0, 0.1)).unwrap();
        assert!((v - (3.6276 - 0.0584967)).abs() < 1e-4);
        assert_eq!(beta_expansion(&QuenchSpec::new(Dim::One, 2.0, 0.0)).unwrap(), 2.0);
        assert!(beta_expansion(&QuenchSpec::new(Dim::One, 1.0, 0.3)).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn quench_integral_non_negative(s in 0.01..50.0f64) {
            for d in DIMS {
                let v = f_d(s, d).unwrap();
                proptest::prop_assert!(v > 0.0 || s == 1.0);
            }
        }
    }
}
