//! Exponent geometry on the `(1/r, 1/s)` square.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

/// A pair `(1/r, 1/s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub x: f64,
    pub y: f64,
}

impl ExponentPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// From Lebesgue exponents; `f64::INFINITY` maps to 0.
    pub fn from_exponents(r: f64, s: f64) -> Self {
        Self { x: 1.0 / r, y: 1.0 / s }
    }

    pub fn sigma(&self) -> f64 {
        self.x - self.y
    }

    pub fn r(&self) -> f64 {
        1.0 / self.x
    }

    pub fn s(&self) -> f64 {
        1.0 / self.y
    }

    /// `(x, y) -> (1 - y, 1 - x)`, the exponents of the adjoint.
    pub fn dual(&self) -> Self {
        Self { x: 1.0 - self.y, y: 1.0 - self.x }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Outcome of the admissibility check; `reason` lists every violated clause.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub ok: bool,
    pub reason: String,
}

/// `2/(n+1) <= sigma <= 2/n` and `2n/(n-1+2n sigma) < r < 2n/(n+1)`.
pub fn admissible(n: usize, r: f64, s: f64) -> Admissibility {
    let nf = n as f64;
    let sigma = 1.0 / r - 1.0 / s;
    let mut violated = Vec::new();
    if !(r > 1.0 && r.is_finite() && s > 1.0) {
        violated.push("r, s must lie in (1, inf)".to_string());
    }
    if sigma < 2.0 / (nf + 1.0) - EPS {
        violated.push("σ ≥ 2/(n+1) violated".to_string());
    }
    if sigma > 2.0 / nf + EPS {
        violated.push("σ ≤ 2/n violated".to_string());
    }
    let lo = 2.0 * nf / (nf - 1.0 + 2.0 * nf * sigma);
    if !(r > lo * (1.0 + EPS)) {
        violated.push("r > 2n/(n−1+2nσ) violated (strict)".to_string());
    }
    let hi = 2.0 * nf / (nf + 1.0);
    if !(r < hi * (1.0 - EPS)) {
        violated.push("r < 2n/(n+1) violated (strict)".to_string());
    }
    Admissibility { ok: violated.is_empty(), reason: violated.join("; ") }
}

pub fn sigma_range(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (2.0 / (nf + 1.0), 2.0 / nf)
}

fn check_sigma(n: usize, sigma: f64) -> Result<()> {
    let (lo, hi) = sigma_range(n);
    if !(sigma >= lo - EPS && sigma <= hi + EPS) {
        return Err(Error::SigmaRange { sigma, lo, hi });
    }
    Ok(())
}

/// The endpoint `((n+1)/(2n), (n+1-2n sigma)/(2n))` of the admissible segment and its dual.
pub fn segment_endpoints(n: usize, sigma: f64) -> Result<(ExponentPoint, ExponentPoint)> {
    check_sigma(n, sigma)?;
    let nf = n as f64;
    let e = ExponentPoint::new((nf + 1.0) / (2.0 * nf), (nf + 1.0 - 2.0 * nf * sigma) / (2.0 * nf));
    Ok((e, e.dual()))
}

/// Midpoint of the open admissible interval in `1/r`, which lies on the line of duality.
pub fn default_r(n: usize, sigma: f64) -> Result<f64> {
    let (a, b) = segment_endpoints(n, sigma)?;
    Ok(2.0 / (a.x + b.x))
}

/// `P`, where the `sigma`-line meets the oscillatory segment `s = (n+1)/(n-1) r'`, and
/// `Q = (sigma, 0)`.
pub fn stein_point(n: usize, sigma: f64) -> Result<(ExponentPoint, ExponentPoint)> {
    check_sigma(n, sigma)?;
    let nf = n as f64;
    let p = ExponentPoint::new(
        (nf + 1.0) * sigma / (2.0 * nf) + (nf - 1.0) / (2.0 * nf),
        -(nf - 1.0) * sigma / (2.0 * nf) + (nf - 1.0) / (2.0 * nf),
    );
    Ok((p, ExponentPoint::new(sigma, 0.0)))
}

/// Residual of `1/s = (n-1)/(n+1) (1 - 1/r)`.
pub fn stein_line_residual(n: usize, p: &ExponentPoint) -> f64 {
    let nf = n as f64;
    p.y - (nf - 1.0) / (nf + 1.0) * (1.0 - p.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialPoints {
    pub a: ExponentPoint,
    pub b: ExponentPoint,
    pub c: ExponentPoint,
    pub d: ExponentPoint,
}

pub fn special_points(n: usize) -> Result<SpecialPoints> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be at least 2")));
    }
    let nf = n as f64;
    Ok(SpecialPoints {
        a: ExponentPoint::new(0.5, (nf - 1.0) / (2.0 * (nf + 1.0))),
        b: ExponentPoint::new(1.0, 0.0),
        c: ExponentPoint::new((nf + 1.0) / (2.0 * nf), (nf - 1.0).powi(2) / (2.0 * nf * (nf + 1.0))),
        d: ExponentPoint::new((nf + 1.0) / (2.0 * nf), 0.0),
    })
}

/// Growth exponents `(n sigma - 1, n sigma - 2)` for the projector and the resolvent.
pub fn predicted_exponents(n: usize, sigma: f64) -> (f64, f64) {
    let nf = n as f64;
    (nf * sigma - 1.0, nf * sigma - 2.0)
}

/// Decay rate at `P` and growth rate at `Q` of the dyadic piece norms in `j`:
/// `(( n+1) sigma / 2 - 1, (n+1)/2 - n sigma)`.
pub fn piece_rates(n: usize, sigma: f64) -> (f64, f64) {
    let nf = n as f64;
    ((nf + 1.0) * sigma / 2.0 - 1.0, (nf + 1.0) / 2.0 - nf * sigma)
}

/// `name,x,y` rows for the marked points of the exponent diagrams, plus `P`, `Q` and the
/// segment endpoints for each `sigma` given.
pub fn figure_csv(n: usize, sigmas: &[f64]) -> Result<String> {
    let sp = special_points(n)?;
    let mut out = String::from("name,x,y\n");
    for (name, p) in [("A", sp.a), ("B", sp.b), ("C", sp.c), ("D", sp.d)] {
        let _ = writeln!(out, "{name},{:.15},{:.15}", p.x, p.y);
    }
    for &sigma in sigmas {
        let (e, ed) = segment_endpoints(n, sigma)?;
        let (p, q) = stein_point(n, sigma)?;
        for (name, pt) in [("E", e), ("E*", ed), ("P", p), ("Q", q)] {
            let _ = writeln!(out, "{name}(sigma={sigma:.6}),{:.15},{:.15}", pt.x, pt.y);
        }
    }
    Ok(out)
}
