//! Summing dyadic pieces that grow geometrically at one exponent pair and decay at another:
//! the interpolated exponent, the split index, and an empirical restricted weak-type check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::ExponentPoint;
use crate::fit::fit_intercept;
use crate::operators::ZonalOperator;
use crate::sphere::{cap, weak_values};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationData {
    /// `(1/p1, 1/q1)`, where `||T_j|| <= m1 2^{beta1 j}`.
    pub growth: ExponentPoint,
    /// `(1/p2, 1/q2)`, where `||T_j|| <= m2 2^{-beta2 j}`.
    pub decay: ExponentPoint,
    pub m1: f64,
    pub m2: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// `beta2 / (beta1 + beta2)`.
    pub theta: f64,
    /// `theta * growth + (1 - theta) * decay`.
    pub target: ExponentPoint,
}

fn check_point(p: &ExponentPoint) -> Result<()> {
    let ok = |v: f64| (0.0..=1.0).contains(&v);
    if !(ok(p.x) && ok(p.y)) {
        return Err(Error::InvalidExponent(format!("({}, {}) is not a pair of reciprocal exponents", p.x, p.y)));
    }
    Ok(())
}

pub fn make_interp(growth: ExponentPoint, decay: ExponentPoint, m1: f64, m2: f64, beta1: f64, beta2: f64) -> Result<InterpolationData> {
    check_point(&growth)?;
    check_point(&decay)?;
    if !(beta1 > 0.0 && beta2 > 0.0 && beta1.is_finite() && beta2.is_finite()) {
        return Err(Error::Invalid(format!("rates must be positive, got beta1 = {beta1}, beta2 = {beta2}")));
    }
    if !(m1 > 0.0 && m2 > 0.0 && m1.is_finite() && m2.is_finite()) {
        return Err(Error::Invalid(format!("constants must be positive, got M1 = {m1}, M2 = {m2}")));
    }
    let theta = beta2 / (beta1 + beta2);
    let target = ExponentPoint::new(
        theta * growth.x + (1.0 - theta) * decay.x,
        theta * growth.y + (1.0 - theta) * decay.y,
    );
    Ok(InterpolationData { growth, decay, m1, m2, beta1, beta2, theta, target })
}

impl InterpolationData {
    /// `M1^theta M2^{1-theta}`.
    pub fn geometric_constant(&self) -> f64 {
        self.m1.powf(self.theta) * self.m2.powf(1.0 - self.theta)
    }

    pub fn growth_bound(&self, j: usize) -> f64 {
        self.m1 * 2f64.powf(self.beta1 * j as f64)
    }

    pub fn decay_bound(&self, j: usize) -> f64 {
        self.m2 * 2f64.powf(-self.beta2 * j as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Split,
    TailOnly,
}

impl Branch {
    pub fn tag(&self) -> &'static str {
        match self {
            Branch::Split => "split",
            Branch::TailOnly => "tail-only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Split {
    pub rho: u32,
    pub branch: Branch,
    /// `(M1/M2 muE^{1/p2 - 1/p1} muA^{1/q2' - 1/q1'})^{1/(beta1 + beta2)}`.
    pub quantity: f64,
}

/// The balancing index: `2^rho < quantity <= 2^{rho+1}` when the quantity exceeds 1, and
/// `rho = 0` otherwise.
pub fn optimal_split(data: &InterpolationData, mu_e: f64, mu_a: f64) -> Split {
    // 1/q2' - 1/q1' = (1 - 1/q2) - (1 - 1/q1)
    let log2q = (data.m1.log2() - data.m2.log2()
        + (data.decay.x - data.growth.x) * mu_e.log2()
        + (data.growth.y - data.decay.y) * mu_a.log2())
        / (data.beta1 + data.beta2);
    let quantity = log2q.exp2();
    if !(quantity > 1.0) {
        return Split { rho: 0, branch: Branch::TailOnly, quantity };
    }
    if quantity.is_infinite() {
        let rho = (log2q.ceil() - 1.0).max(0.0) as u32;
        return Split { rho, branch: Branch::Split, quantity };
    }
    let mut rho = (quantity.log2().ceil() - 1.0).max(0.0) as i32;
    while 2f64.powi(rho + 1) < quantity {
        rho += 1;
    }
    while rho > 0 && 2f64.powi(rho) >= quantity {
        rho -= 1;
    }
    Split { rho: rho as u32, branch: Branch::Split, quantity }
}

/// Fits `M1`, `M2` as least-squares intercepts of `log2 ||T_j||` with the rates held fixed.
pub fn fit_constants(js: &[usize], growth_norms: &[f64], decay_norms: &[f64], beta1: f64, beta2: f64) -> Result<(f64, f64)> {
    let x: Vec<f64> = js.iter().map(|&j| j as f64).collect();
    let g: Vec<f64> = growth_norms.iter().map(|v| v.log2()).collect();
    let d: Vec<f64> = decay_norms.iter().map(|v| v.log2()).collect();
    let m1 = fit_intercept(&x, &g, beta1)?.intercept.exp2();
    let m2 = fit_intercept(&x, &d, -beta2)?.intercept.exp2();
    Ok((m1, m2))
}

/// A piece with its measured norms at the two endpoints.
#[derive(Debug, Clone)]
pub struct MeasuredPiece {
    pub j: usize,
    pub op: ZonalOperator,
    pub growth_norm: f64,
    pub decay_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapReport {
    pub theta0: f64,
    /// Grid measure of the cap.
    pub measure: f64,
    /// Weak `L^q` quasinorm of `sum_j T_j 1_E` at the target `q`.
    pub weak: f64,
    pub threshold: f64,
    /// `mu(A)` for `A = {|T 1_E| >= threshold}`.
    pub level_measure: f64,
    /// `weak / (M1^theta M2^{1-theta} mu(E)^{1/p})`.
    pub normalized: f64,
    pub rho: u32,
    pub branch: Branch,
    /// Pieces `j <= rho` bounded at the growth endpoint, as a bound on `|<T 1_E, 1_A>|`.
    pub finite_part: f64,
    /// Pieces `j > rho` bounded at the decay endpoint.
    pub tail_part: f64,
    /// `(finite_part + tail_part) / mu(A)^{1/q'}`, a bound for `weak` from the model norms.
    pub split_bound: f64,
    /// The same two-term estimate with each piece's measured norms.
    pub measured_split_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub j: usize,
    pub endpoint: &'static str,
    pub measured: f64,
    pub model: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    pub data: InterpolationData,
    pub c_obs: f64,
    pub caps: Vec<CapReport>,
    /// Pieces whose measured norm exceeds twice the fitted model bound.
    pub violations: Vec<Violation>,
}

/// Evaluates `sum_j T_j 1_E` on cap indicators `E = {theta <= theta0}` and compares its weak
/// norm at the target exponent with `M1^theta M2^{1-theta} mu(E)^{1/p}`.
pub fn certify_restricted_weak(pieces: &[MeasuredPiece], data: &InterpolationData, caps: &[f64]) -> Result<Certification> {
    let first = pieces.first().ok_or_else(|| Error::Invalid("no pieces to certify".into()))?;
    if caps.is_empty() {
        return Err(Error::Invalid("no caps given".into()));
    }
    let grid = first.op.grid().clone();
    if pieces.iter().any(|p| p.op.grid().points() != grid.points()) {
        return Err(Error::InvalidGrid("pieces live on different grids".into()));
    }
    let q = data.target.s();
    let scale = data.geometric_constant();
    let reports = caps
        .par_iter()
        .map(|&theta0| -> Result<CapReport> {
            let e = cap(&grid, theta0)?;
            if e.grid_measure == 0.0 {
                return Err(Error::Invalid(format!("cap of angle {theta0} contains no grid node")));
            }
            let mut total = vec![num_complex::Complex64::new(0.0, 0.0); grid.points()];
            for p in pieces {
                for (t, v) in total.iter_mut().zip(p.op.apply_values(&e.function.values)) {
                    *t += v;
                }
            }
            let weak = weak_values(&grid.weights, &total, q);
            let mu_e = e.grid_measure;
            let mu_a = weak.level_measure;
            let split = optimal_split(data, mu_e, mu_a.max(f64::MIN_POSITIVE));
            let growth_factor = mu_e.powf(data.growth.x) * mu_a.powf(1.0 - data.growth.y);
            let decay_factor = mu_e.powf(data.decay.x) * mu_a.powf(1.0 - data.decay.y);
            let (mut finite_part, mut tail_part, mut measured) = (0.0, 0.0, 0.0);
            for p in pieces {
                if p.j as u32 <= split.rho {
                    finite_part += data.growth_bound(p.j) * growth_factor;
                    measured += p.growth_norm * growth_factor;
                } else {
                    tail_part += data.decay_bound(p.j) * decay_factor;
                    measured += p.decay_norm * decay_factor;
                }
            }
            let dual = mu_a.powf(1.0 - 1.0 / q);
            let (split_bound, measured_split_bound) =
                if dual > 0.0 { ((finite_part + tail_part) / dual, measured / dual) } else { (0.0, 0.0) };
            Ok(CapReport {
                theta0,
                measure: mu_e,
                weak: weak.value,
                threshold: weak.threshold,
                level_measure: mu_a,
                normalized: weak.value / (scale * mu_e.powf(data.target.x)),
                rho: split.rho,
                branch: split.branch,
                finite_part,
                tail_part,
                split_bound,
                measured_split_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let c_obs = reports.iter().map(|r| r.normalized).fold(0.0, f64::max);
    let mut violations = Vec::new();
    for p in pieces {
        for (endpoint, measured, model) in
            [("growth", p.growth_norm, data.growth_bound(p.j)), ("decay", p.decay_norm, data.decay_bound(p.j))]
        {
            if measured > 2.0 * model {
                violations.push(Violation { j: p.j, endpoint, measured, model });
            }
        }
    }
    Ok(Certification { data: *data, c_obs, caps: reports, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{segment_endpoints, stein_point};

    fn pt(x: f64, y: f64) -> ExponentPoint {
        ExponentPoint::new(x, y)
    }

    #[test]
    fn theta_and_target() {
        let d = make_interp(pt(0.6, 0.0), pt(0.8, 0.3), 1.0, 1.0, 0.4, 0.4).unwrap();
        assert_eq!(d.theta, 0.5);
        let (p, q) = stein_point(3, 0.6).unwrap();
        let d = make_interp(q, p, 1.0, 1.0, 0.2, 0.2).unwrap();
        let (e, _) = segment_endpoints(3, 0.6).unwrap();
        assert!((d.target.x - 2.0 / 3.0).abs() < 1e-12 && (d.target.y - 1.0 / 15.0).abs() < 1e-12);
        assert!(d.target.distance(&e) < 1e-12);
        let ex = make_interp(pt(0.5, 0.25), pt(1.0, 0.0), 1.0, 1.0, 0.5, 1.0).unwrap();
        assert!((ex.theta - 2.0 / 3.0).abs() < 1e-15);
        assert!((ex.target.x - 2.0 / 3.0).abs() < 1e-12 && (ex.target.y - 1.0 / 6.0).abs() < 1e-12);
        assert!(make_interp(q, p, 1.0, 1.0, 0.0, 0.2).is_err());
        assert!(make_interp(q, p, -1.0, 1.0, 0.2, 0.2).is_err());
    }

    #[test]
    fn split_examples() {
        let g = pt(0.6, 0.0);
        let d = make_interp(g, pt(0.8, 0.2), 1.0, 1.0, 1.0, 1.0).unwrap();
        let s = optimal_split(&d, 1.0, 1.0);
        assert_eq!((s.rho, s.branch), (0, Branch::TailOnly));
        assert_eq!(s.quantity, 1.0);
        let d = make_interp(g, pt(0.8, 0.2), 16.0, 1.0, 1.0, 1.0).unwrap();
        let s = optimal_split(&d, 1.0, 1.0);
        assert_eq!((s.rho, s.branch, s.quantity), (1, Branch::Split, 4.0));
        let d = make_interp(g, pt(0.8, 0.2), 0.5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(optimal_split(&d, 1.0, 1.0).branch, Branch::TailOnly);
        assert_eq!(Branch::TailOnly.tag(), "tail-only");
    }

    #[test]
    fn constants_fit() {
        let js = [1, 2, 3, 4];
        let g: Vec<f64> = js.iter().map(|&j| 3.0 * 2f64.powf(0.2 * j as f64)).collect();
        let d: Vec<f64> = js.iter().map(|&j| 5.0 * 2f64.powf(-0.3 * j as f64)).collect();
        let (m1, m2) = fit_constants(&js, &g, &d, 0.2, 0.3).unwrap();
        assert!((m1 - 3.0).abs() < 1e-12 && (m2 - 5.0).abs() < 1e-12);
    }
}
