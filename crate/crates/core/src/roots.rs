//! Bracketed scalar root finding.

use crate::error::{QuenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// Brent's method on a sign-changing bracket `[lo, hi]`. Stops when the
/// bracket is narrower than `xtol` (absolute plus `4 eps |x|`) or `f(x) == 0`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<Root> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() || !fb.is_finite() {
        return Err(QuenchError::NoBracket { what: "objective (non-finite endpoint)", lo, hi });
    }
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0, bracket: (a, a) });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0, bracket: (b, b) });
    }
    if fa.signum() == fb.signum() {
        return Err(QuenchError::NoBracket { what: "objective", lo, hi });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            let bracket = if b < c { (b, c) } else { (c, b) };
            return Ok(Root { x: b, fx: fb, iterations: iter, bracket });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(QuenchError::NoConvergence { iterations: iter, residual: fb });
        }
    }
    Err(QuenchError::NoConvergence { iterations: max_iter, residual: fb })
}

/// Scan a geometric ladder of `steps + 1` points on `[lo, hi]` (both > 0) and
/// return the first adjacent pair with a sign change of `f`.
pub fn scan_geometric<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, steps: usize, what: &'static str) -> Result<(f64, f64)> {
    let ratio = (hi / lo).powf(1.0 / steps as f64);
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=steps {
        let x1 = if i == steps { hi } else { lo * ratio.powi(i as i32) };
        let f1 = f(x1);
        if f0 == 0.0 {
            return Ok((x0, x0));
        }
        if f0.is_finite() && f1.is_finite() && f0.signum() != f1.signum() {
            return Ok((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    Err(QuenchError::NoBracket { what, lo, hi })
}

/// Starting from `lo` where `f(lo)` has one sign, double the distance to the
/// upper end until the sign flips.
pub fn expand_upward<F: FnMut(f64) -> f64>(mut f: F, lo: f64, first_hi: f64, max_doublings: usize, what: &'static str) -> Result<(f64, f64)> {
    let f_lo = f(lo);
    let mut width = first_hi - lo;
    let mut hi = first_hi;
    for _ in 0..max_doublings {
        let f_hi = f(hi);
        if f_hi.is_finite() && (f_hi == 0.0 || f_hi.signum() != f_lo.signum()) {
            return Ok((lo, hi));
        }
        width *= 2.0;
        hi = lo + width;
    }
    Err(QuenchError::NoBracket { what, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_simple_roots() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 100).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-13);
        let r = brent(|x: f64| x.cos() - x, 0.0, 1.0, 1e-14, 100).unwrap();
        assert!((r.x - 0.739_085_133_215_160_6).abs() < 1e-13);
        assert!(r.iterations < 20);
    }

    #[test]
    fn brent_rejects_non_bracket() {
        assert!(matches!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50), Err(QuenchError::NoBracket { .. })));
    }

    #[test]
    fn scans_and_expansions() {
        let (a, b) = scan_geometric(|y| 10.0 - y, 1e-3, 1e3, 60, "test").unwrap();
        assert!(a < 10.0 && b > 10.0);
        let (a, b) = expand_upward(|u| u - 37.0, 1.0, 2.0, 20, "test").unwrap();
        assert!(a < 37.0 && b >= 37.0);
    }
}
