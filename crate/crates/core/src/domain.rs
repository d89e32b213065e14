//! Shared domain types: the quench parameters, spatial dimension and the
//! relativistic dispersion relation.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QuenchError, Result};

/// Spatial dimension of the field theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Dim {
    One,
    Two,
    Three,
}

impl Dim {
    pub fn get(self) -> u32 {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Total solid angle divided by `(2 pi)^d`, the prefactor turning a
    /// radial integral `∫ k^{d-1} dk` into `∫ d^d k / (2 pi)^d`.
    pub fn angular_factor(self) -> f64 {
        match self {
            Dim::One => 1.0 / PI,
            Dim::Two => 1.0 / (2.0 * PI),
            Dim::Three => 1.0 / (2.0 * PI * PI),
        }
    }

    /// `k^{d-1}`
    pub fn radial_measure(self, k: f64) -> f64 {
        match self {
            Dim::One => 1.0,
            Dim::Two => k,
            Dim::Three => k * k,
        }
    }
}

impl TryFrom<u32> for Dim {
    type Error = QuenchError;

    fn try_from(d: u32) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(invalid("d", format!("dimension must be 1, 2 or 3, got {other}"))),
        }
    }
}

impl From<Dim> for u32 {
    fn from(d: Dim) -> u32 {
        d.get()
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// `omega_k = sqrt(k^2 + mass^2)`.
#[inline]
pub fn omega(k: f64, mass: f64) -> f64 {
    k.hypot(mass)
}

/// A composite quench: mass `m0 -> m` and coupling `lambda0 -> lambda` at
/// `t = 0`, in `d` spatial dimensions with excitation speed fixed to 1.
///
/// Masses are the renormalized ones. `cutoff` is the UV momentum cutoff; it
/// is mandatory in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchSpec {
    pub d: Dim,
    pub m0: f64,
    pub m: f64,
    #[serde(default)]
    pub lambda0: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub cutoff: Option<f64>,
}

impl QuenchSpec {
    /// Free mass quench with no cutoff set.
    pub fn new(d: Dim, m0: f64, m: f64) -> Self {
        QuenchSpec { d, m0, m, lambda0: 0.0, lambda: 0.0, cutoff: None }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m0.is_finite() && self.m0 > 0.0) {
            return Err(invalid("m0", format!("must be finite and > 0, got {}", self.m0)));
        }
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(invalid("m", format!("must be finite and >= 0, got {}", self.m)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid("lambda", format!("must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.lambda0.is_finite() && self.lambda0 >= 0.0) {
            return Err(invalid("lambda0", format!("must be finite and >= 0, got {}", self.lambda0)));
        }
        if let Some(cutoff) = self.cutoff {
            let floor = self.m0.max(self.m);
            if !(cutoff.is_finite() && cutoff > floor) {
                return Err(invalid(
                    "cutoff",
                    format!("must be finite and exceed max(m0, m) = {floor}, got {cutoff}"),
                ));
            }
        }
        Ok(())
    }

    /// The cutoff to use for momentum grids: the explicit one, or `100 m0`
    /// (raised above `m` when needed) in one and two dimensions.
    pub fn effective_cutoff(&self) -> Result<f64> {
        match (self.cutoff, self.d) {
            (Some(c), _) => Ok(c),
            (None, Dim::Three) => Err(invalid("cutoff", "required in three dimensions")),
            (None, _) => Ok(100.0 * self.m0.max(self.m)),
        }
    }

    pub fn omega0(&self, k: f64) -> f64 {
        omega(k, self.m0)
    }

    pub fn omega(&self, k: f64) -> f64 {
        omega(k, self.m)
    }

    pub fn is_quench(&self) -> bool {
        self.m != self.m0
    }
}

/// A length or inverse temperature that may be infinite (no quench, zero
/// temperature). Kept as a tag so infinities never enter arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extent {
    Finite(f64),
    Infinite,
}

impl Extent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extent::Finite(v) => Some(v),
            Extent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extent::Infinite)
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(v) => write!(f, "{v}"),
            Extent::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorKind {
    QuenchMode,
    QuenchRealSpace,
    DeepQuench,
    Slab,
    Thermal,
    Vertex,
}

/// Evaluation point of a propagator. Mode-space kinds use `Mode`, real-space
/// kinds use `Space`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleArgs {
    Mode { t1: f64, t2: f64, k: f64 },
    Space { r: f64, t: f64 },
}

/// A labelled propagator value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSample {
    pub kind: PropagatorKind,
    pub args: SampleArgs,
    pub value: Complex64,
}

impl PropagatorSample {
    pub fn mode(kind: PropagatorKind, t1: f64, t2: f64, k: f64, value: Complex64) -> Self {
        PropagatorSample { kind, args: SampleArgs::Mode { t1, t2, k }, value }
    }

    /// Real-space samples are equal-time and carry an exactly real value.
    pub fn space(kind: PropagatorKind, r: f64, t: f64, value: f64) -> Self {
        PropagatorSample { kind, args: SampleArgs::Space { r, t }, value: Complex64::new(value, 0.0) }
    }
}
