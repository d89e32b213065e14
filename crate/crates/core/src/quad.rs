//! Quadrature building blocks: fixed Gauss-Legendre panel rules, compensated
//! summation and a globally adaptive Gauss-Kronrod integrator for the
//! dimensionless reference integrals.

use crate::error::{QuenchError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) const GL2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];

pub(crate) const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

/// Neumaier-compensated running sum. Order of `add` calls fixes the result.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// 15-point Kronrod abscissae (positive half) and weights; every odd index is
// also a 7-point Gauss node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    if !value.is_finite() {
        return Err(QuenchError::NonFinite { index: 0, k: center });
    }
    let error = ((kronrod - gauss) * half).abs();
    Ok(Segment { a, b, value, error })
}

/// Tolerances for [`integrate`] and [`integrate_half_line`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        QuadTolerance { abs: 1e-14, rel: 1e-12, max_segments: 4000 }
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`
/// with initial breakpoints. Deterministic: the segment with the largest
/// error estimate is always bisected next, ties broken by position.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: QuadTolerance) -> Result<f64> {
    let mut segs = Vec::with_capacity(tol.max_segments + breaks.len());
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            segs.push(gk15(&f, w[0], w[1])?);
        }
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if err <= tol.abs.max(tol.rel * total.abs()) || segs.len() >= tol.max_segments {
            if segs.len() >= tol.max_segments && err > 1e3 * tol.abs.max(tol.rel * total.abs()) {
                log::warn!("adaptive quadrature hit the segment limit with error {err:e}");
            }
            let mut sum = CompensatedSum::new();
            segs.sort_by(|x, y| x.a.total_cmp(&y.a));
            for s in &segs {
                sum.add(s.value);
            }
            return Ok(sum.value());
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error).then(y.a.total_cmp(&x.a)))
            .expect("at least one segment");
        let worst = segs.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        segs.push(gk15(&f, worst.a, mid)?);
        segs.push(gk15(&f, mid, worst.b)?);
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: QuadTolerance) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// `∫_0^∞ f(k) dk`. The range `[0, scale]` is integrated directly (split at
/// the given interior breakpoints), the tail through `k = scale / u`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, scale: f64, interior: &[f64], tol: QuadTolerance) -> Result<f64> {
    let mut breaks = vec![0.0];
    breaks.extend(interior.iter().copied().filter(|&x| x > 0.0 && x < scale));
    breaks.push(scale);
    breaks.sort_by(f64::total_cmp);
    let head = integrate_with_breaks(&f, &breaks, tol)?;
    let tail = integrate(
        |u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                let k = scale / u;
                f(k) * scale / (u * u)
            }
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok(head + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        let cubic = |x: f64| 4.0 * x * x * x - 3.0 * x * x + 2.0 * x - 1.0;
        let exact = -2.0 - 2.0; // ∫_{-1}^{1}
        let gl2: f64 = GL2.iter().map(|&(x, w)| w * cubic(x)).sum();
        assert!((gl2 - exact).abs() < 1e-14);
        let septic = |x: f64| x.powi(6) + x.powi(7);
        let gl4: f64 = GL4.iter().map(|&(x, w)| w * septic(x)).sum();
        assert!((gl4 - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-13).abs() < 1e-24);
    }

    #[test]
    fn adaptive_finite_and_half_line() {
        let v = integrate(|x: f64| x.sin(), 0.0, PI, QuadTolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate_half_line(|k: f64| 1.0 / (1.0 + k * k), 1.0, &[], QuadTolerance::default()).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12);
        let v = integrate_half_line(|k: f64| (-k).exp(), 1.0, &[], QuadTolerance::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
