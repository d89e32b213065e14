use std::fmt;
use std::str::FromStr;

/// A parameter range `start:end:n` (linear) or `start:end:log:n`
/// (geometric). Both endpoints are included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub log: bool,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / last;
                if i + 1 == self.points {
                    self.end
                } else if self.log {
                    (self.start.ln() + f * (self.end.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.end - self.start)
                }
            })
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let (a, b, log, n) = match parts.as_slice() {
            [a, b, n] => (a, b, false, n),
            [a, b, "log", n] => (a, b, true, n),
            _ => return Err(format!("expected start:end:n or start:end:log:n, got `{s}`")),
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        let start = num(a)?;
        let end = num(b)?;
        let points: usize = n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?;
        if points == 0 {
            return Err("a sweep needs at least one point".into());
        }
        if !(start.is_finite() && end.is_finite()) {
            return Err("sweep endpoints must be finite".into());
        }
        if log && !(start > 0.0 && end > 0.0) {
            return Err("log sweeps need positive endpoints".into());
        }
        Ok(Sweep { start, end, points, log })
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log {
            write!(f, "{}:{}:log:{}", self.start, self.end, self.points)
        } else {
            write!(f, "{}:{}:{}", self.start, self.end, self.points)
        }
    }
}

/// `start:end` time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window(pub f64, pub f64);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected start:end, got `{s}`"))?;
        let a: f64 = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
        let b: f64 = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
        if !(a >= 0.0 && b > a) {
            return Err(format!("need 0 <= start < end, got {a}:{b}"));
        }
        Ok(Window(a, b))
    }
}
