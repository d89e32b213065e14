//! Slab and thermal (Matsubara) propagators in the mixed (k, time)
//! representation, the matching of a quench to a slab of momentum-dependent
//! thickness, and the per-mode effective temperature.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{omega, Extent, QuenchSpec};
use crate::error::{invalid, Result};
use crate::free_quench::{quench_mode_propagator, ModePair};

/// Beyond this value of `w L` (or `beta w`) the boundary terms are below
/// `e^-700` and the Feynman limit is returned.
const EXP_LIMIT: f64 = 700.0;

/// Boundary condition on the faces `tau = +-L/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Field vanishes (alternating image charges).
    Dirichlet,
    /// Normal derivative vanishes (equal image charges).
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabGeometry {
    pub l: Extent,
    pub boundary: Boundary,
}

impl SlabGeometry {
    pub fn dirichlet(l: f64) -> Result<Self> {
        Self::new(l, Boundary::Dirichlet)
    }

    pub fn new(l: f64, boundary: Boundary) -> Result<Self> {
        if !(l > 0.0) || l.is_nan() {
            return Err(invalid("L", format!("slab thickness must be > 0, got {l}")));
        }
        let l = if l.is_finite() { Extent::Finite(l) } else { Extent::Infinite };
        Ok(SlabGeometry { l, boundary })
    }

    fn sign(self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => -1.0,
            Boundary::Neumann => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub beta: Extent,
}

impl ThermalState {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || beta.is_nan() {
            return Err(invalid("beta", format!("must be > 0, got {beta}")));
        }
        let beta = if beta.is_finite() { Extent::Finite(beta) } else { Extent::Infinite };
        Ok(ThermalState { beta })
    }

    pub fn zero_temperature() -> Self {
        ThermalState { beta: Extent::Infinite }
    }
}

fn check_mode(k: f64, mass: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 0.0 && mass.is_finite() && mass >= 0.0) {
        return Err(invalid("k, mass", format!("must be finite and >= 0, got ({k}, {mass})")));
    }
    let w = omega(k, mass);
    if w == 0.0 {
        return Err(invalid("k, mass", "the zero mode of a massless field has no propagator"));
    }
    Ok(w)
}

fn feynman(w: f64, t1: f64, t2: f64) -> Complex64 {
    Complex64::from_polar(0.5 / w, -w * (t1 - t2).abs())
}

/// Real-time slab propagator
/// `cos w(t1 - t2) / (w (e^{2wL} - 1)) -+ e^{wL} cos w(t1 + t2) / (w (e^{2wL} - 1))
///  + e^{-i w |t1 - t2|} / (2w)`, minus for Dirichlet, plus for Neumann faces.
pub fn slab_mode_propagator(t1: f64, t2: f64, k: f64, mass: f64, geom: SlabGeometry) -> Result<Complex64> {
    let w = check_mode(k, mass)?;
    let base = feynman(w, t1, t2);
    let l = match geom.l {
        Extent::Finite(l) if w * l <= EXP_LIMIT => l,
        _ => return Ok(base),
    };
    let a = 1.0 / (w * (2.0 * w * l).exp_m1());
    let b = 0.5 / (w * (w * l).sinh());
    let re = a * (w * (t1 - t2)).cos() + geom.sign() * b * (w * (t1 + t2)).cos();
    Ok(base + re)
}

/// Euclidean slab Green's function for `tau1, tau2` in `[-L/2, L/2]`,
/// written with non-positive exponents only.
pub fn slab_mode_euclidean(tau1: f64, tau2: f64, k: f64, mass: f64, geom: SlabGeometry) -> Result<f64> {
    let w = check_mode(k, mass)?;
    let dist = (tau1 - tau2).abs();
    let l = match geom.l {
        Extent::Finite(l) => l,
        Extent::Infinite => return Ok((-w * dist).exp() / (2.0 * w)),
    };
    let s = tau1 + tau2;
    let images = (-w * dist).exp() + (w * (dist - 2.0 * l)).exp();
    let mirror = (w * (s - l)).exp() + (-w * (s + l)).exp();
    Ok((images + geom.sign() * mirror) / (-2.0 * w * (-2.0 * w * l).exp_m1()))
}

/// `(2 / w_k) artanh(min(w_k, w0_k) / max(w_k, w0_k))`; infinite without a
/// quench.
pub fn matched_slab_thickness(k: f64, spec: &QuenchSpec) -> Result<Extent> {
    spec.validate()?;
    half_beta(spec.omega0(k), spec.omega(k))
}

fn half_beta(w0: f64, w: f64) -> Result<Extent> {
    if w == w0 {
        return Ok(Extent::Infinite);
    }
    if w == 0.0 {
        return Ok(Extent::Finite(2.0 / w0));
    }
    let rho = w.min(w0) / w.max(w0);
    let l = if rho < 1e-8 { 2.0 / w.max(w0) * (1.0 + rho * rho / 3.0) } else { 2.0 * rho.atanh() / w };
    Ok(Extent::Finite(l))
}

/// The slab that reproduces the quench propagator of mode `k`: Dirichlet
/// faces when the mode softens (`w < w0`), Neumann faces when it stiffens.
pub fn matched_slab_geometry(k: f64, spec: &QuenchSpec) -> Result<SlabGeometry> {
    let l = matched_slab_thickness(k, spec)?;
    let boundary = if spec.omega(k) < spec.omega0(k) { Boundary::Dirichlet } else { Boundary::Neumann };
    Ok(SlabGeometry { l, boundary })
}

/// Real-time thermal propagator `(e^{-i w |t1 - t2|} + 2 cos w(t1 - t2) / (e^{beta w} - 1)) / (2w)`.
pub fn thermal_mode_propagator(t1: f64, t2: f64, k: f64, mass: f64, th: ThermalState) -> Result<Complex64> {
    let w = check_mode(k, mass)?;
    let base = feynman(w, t1, t2);
    match th.beta {
        Extent::Finite(beta) if beta * w <= EXP_LIMIT => {
            Ok(base + (w * (t1 - t2)).cos() / (w * (beta * w).exp_m1()))
        }
        _ => Ok(base),
    }
}

/// Euclidean thermal propagator, periodic in `tau1 - tau2` with period beta.
pub fn thermal_mode_euclidean(tau1: f64, tau2: f64, k: f64, mass: f64, th: ThermalState) -> Result<f64> {
    let w = check_mode(k, mass)?;
    match th.beta {
        Extent::Finite(beta) => {
            let x = (tau1 - tau2).rem_euclid(beta);
            let num = (-w * x).exp() + (-w * (beta - x)).exp();
            Ok(num / (-2.0 * w * (-beta * w).exp_m1()))
        }
        Extent::Infinite => Ok((-w * (tau1 - tau2).abs()).exp() / (2.0 * w)),
    }
}

/// Per-mode effective inverse temperature
/// `(4 / w_k) artanh(min(w_k, w0_k) / max(w_k, w0_k))`.
pub fn beta_eff_mode(k: f64, spec: &QuenchSpec) -> Result<Extent> {
    let l = matched_slab_thickness(k, spec)?;
    let beta = match half_beta(spec.omega0(k), spec.omega(k))? {
        Extent::Finite(h) => Extent::Finite(2.0 * h),
        Extent::Infinite => Extent::Infinite,
    };
    match (beta, l) {
        (Extent::Finite(b), Extent::Finite(l)) => assert_eq!(b, 2.0 * l),
        (b, l) => assert_eq!(b, l),
    }
    Ok(beta)
}

/// Largest `|C_q - G_slab|` over the sampled time pairs, the slab taken at
/// the matched thickness and boundary.
pub fn verify_quench_slab_identity(k: f64, spec: &QuenchSpec, samples: &[(f64, f64)]) -> Result<f64> {
    let geom = matched_slab_geometry(k, spec)?;
    let pair = ModePair::from_spec(k, spec)?;
    let mut worst = 0.0f64;
    for &(t1, t2) in samples {
        let q = quench_mode_propagator(t1, t2, pair);
        let s = slab_mode_propagator(t1, t2, k, spec.m, geom)?;
        worst = worst.max((q - s).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Dim;

    #[test]
    fn matched_thickness_example() {
        let spec = QuenchSpec::new(Dim::One, 5.0, 1.0);
        let l = matched_slab_thickness(1.0, &spec).unwrap().finite().unwrap();
        let oracle = 2.0 / 2f64.sqrt() * (2f64.sqrt() / 26f64.sqrt()).atanh();
        assert!((l - oracle).abs() < 1e-15);
        assert!((l - 0.402_780_821).abs() < 1e-8);
        let b = beta_eff_mode(1.0, &spec).unwrap().finite().unwrap();
        assert!((b - 0.805_561_642).abs() < 1e-8);
        assert!(matched_slab_thickness(1.0, &QuenchSpec::new(Dim::One, 2.0, 2.0)).unwrap().is_infinite());
        assert!(beta_eff_mode(0.3, &QuenchSpec::new(Dim::Two, 2.0, 2.0)).unwrap().is_infinite());
    }

    #[test]
    fn deep_quench_thickness() {
        let spec = QuenchSpec::new(Dim::One, 1e6, 1.0);
        let l = matched_slab_thickness(0.5, &spec).unwrap().finite().unwrap();
        assert!((l * 1e6 / 2.0 - 1.0).abs() < 1e-6);
        let b = beta_eff_mode(0.5, &spec).unwrap().finite().unwrap();
        assert!((b * 1e6 / 4.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identity_for_worked_example() {
        let spec = QuenchSpec::new(Dim::One, 5.0, 1.0);
        let pair = ModePair::from_spec(1.0, &spec).unwrap();
        let geom = matched_slab_geometry(1.0, &spec).unwrap();
        let q = quench_mode_propagator(0.7, 0.3, pair);
        let s = slab_mode_propagator(0.7, 0.3, 1.0, 1.0, geom).unwrap();
        assert!((q - s).norm() < 1e-12);
    }

    #[test]
    fn stiffening_mode_needs_neumann_faces() {
        let spec = QuenchSpec::new(Dim::One, 1.0, 3.0);
        let k = 0.4;
        let geom = matched_slab_geometry(k, &spec).unwrap();
        assert_eq!(geom.boundary, Boundary::Neumann);
        let samples = [(0.0, 0.0), (1.0, 2.5), (3.3, 0.2)];
        assert!(verify_quench_slab_identity(k, &spec, &samples).unwrap() < 1e-12);
        let dirichlet = SlabGeometry { boundary: Boundary::Dirichlet, ..geom };
        let q = quench_mode_propagator(0.0, 0.0, ModePair::from_spec(k, &spec).unwrap());
        let s = slab_mode_propagator(0.0, 0.0, k, 3.0, dirichlet).unwrap();
        assert!((q - s).norm() > 1e-2);
    }

    #[test]
    fn no_quench_identity_is_trivial() {
        let spec = QuenchSpec::new(Dim::Three, 1.5, 1.5);
        assert_eq!(verify_quench_slab_identity(0.7, &spec, &[(0.1, 4.0), (2.0, 2.0)]).unwrap(), 0.0);
    }

    #[test]
    fn infinite_slab_and_zero_temperature() {
        let big = SlabGeometry::dirichlet(1e6).unwrap();
        let v = slab_mode_propagator(1.0, 3.0, 0.5, 1.0, big).unwrap();
        let w = omega(0.5, 1.0);
        assert!((v - Complex64::from_polar(0.5 / w, -2.0 * w)).norm() < 1e-12);
        let th = thermal_mode_propagator(1.0, 3.0, 0.5, 1.0, ThermalState::new(1e6).unwrap()).unwrap();
        assert!((th - Complex64::from_polar(0.5 / w, -2.0 * w)).norm() < 1e-12);
        assert!(ThermalState::new(0.0).is_err());
        assert!(ThermalState::new(-1.0).is_err());
    }

    #[test]
    fn thermal_equal_time_is_coth() {
        for &(k, m, beta) in &[(0.0, 1.0, 0.3), (2.0, 0.5, 4.0), (1.0, 1.0, 40.0)] {
            let w: f64 = omega(k, m);
            let v = thermal_mode_propagator(2.0, 2.0, k, m, ThermalState::new(beta).unwrap()).unwrap();
            let coth = 1.0 / (0.5 * beta * w).tanh();
            assert!((v.re - coth / (2.0 * w)).abs() < 1e-12 * v.re);
        }
    }

    #[test]
    fn euclidean_boundaries_and_periodicity() {
        let (k, m, l) = (0.8, 1.3, 2.1);
        let dir = SlabGeometry::dirichlet(l).unwrap();
        for &tau in &[-0.9, 0.0, 0.4, 1.05] {
            assert!(slab_mode_euclidean(l / 2.0, tau, k, m, dir).unwrap().abs() < 1e-12);
            assert!(slab_mode_euclidean(tau, -l / 2.0, k, m, dir).unwrap().abs() < 1e-12);
        }
        let neu = SlabGeometry::new(l, Boundary::Neumann).unwrap();
        let h = 1e-5;
        let g = |x: f64| slab_mode_euclidean(x, 0.3, k, m, neu).unwrap();
        let slope = (g(l / 2.0) - g(l / 2.0 - h)) / h;
        assert!(slope.abs() < 1e-4);
        let th = ThermalState::new(1.7).unwrap();
        for &(t1, t2) in &[(0.2, 0.9), (-3.0, 1.0), (0.0, 0.0)] {
            let a = thermal_mode_euclidean(t1, t2, k, m, th).unwrap();
            let b = thermal_mode_euclidean(t1 + 1.7, t2, k, m, th).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matched_slab_time_zero_matches_euclidean_continuation() {
        // At t1 = t2 = 0 the real-time slab form equals the Euclidean one at
        // tau1 = tau2 = 0.
        let geom = SlabGeometry::dirichlet(0.9).unwrap();
        let re = slab_mode_propagator(0.0, 0.0, 0.5, 1.0, geom).unwrap();
        let eu = slab_mode_euclidean(0.0, 0.0, 0.5, 1.0, geom).unwrap();
        assert!((re.re - eu).abs() < 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn identity_holds(k in 0.0..5.0f64, m0 in 0.1..5.0f64, m in 0.1..5.0f64, t1 in 0.0..10.0f64, t2 in 0.0..10.0f64) {
            let spec = QuenchSpec::new(Dim::Two, m0, m);
            let dev = verify_quench_slab_identity(k, &spec, &[(t1, t2)]).unwrap();
            proptest::prop_assert!(dev < 1e-12, "deviation {}", dev);
        }

        #[test]
        fn softening_modes_get_hotter_with_k(m0 in 0.1..10.0f64, x in 0.01..0.99f64, k in 0.0..50.0f64, dk in 1e-3..10.0f64) {
            let spec = QuenchSpec::new(Dim::Two, m0, x * m0);
            let lo = beta_eff_mode(k, &spec).unwrap().finite().unwrap();
            let hi = beta_eff_mode(k + dk, &spec).unwrap().finite().unwrap();
            proptest::prop_assert!(hi < lo);
        }

        #[test]
        fn beta_is_twice_thickness(k in 0.0..20.0f64, m0 in 0.1..5.0f64, m in 0.0..5.0f64) {
            let spec = QuenchSpec::new(Dim::One, m0, m);
            if let (Extent::Finite(b), Extent::Finite(l)) = (beta_eff_mode(k, &spec).unwrap(), matched_slab_thickness(k, &spec).unwrap()) {
                proptest::prop_assert_eq!(b, 2.0 * l);
            }
        }
    }
}
