//! Gauss–Jacobi rules and a composite Gauss–Legendre integrator.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Nodes (descending in `x`) and weights of a Gauss rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Returns `(P_N, P_{N-1})` of the Jacobi family at `x`.
fn jacobi_pair(n: usize, alpha: f64, beta: f64, x: f64) -> (f64, f64) {
    let ab = alpha + beta;
    let mut p1 = (alpha - beta + (2.0 + ab) * x) / 2.0;
    let mut p2 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        let temp = 2.0 * jf + ab;
        let a = 2.0 * jf * (jf + ab) * (temp - 2.0);
        let b = (temp - 1.0) * (alpha * alpha - beta * beta + temp * (temp - 2.0) * x);
        let c = 2.0 * (jf - 1.0 + alpha) * (jf - 1.0 + beta) * temp;
        p1 = (b * p2 - c * p3) / a;
    }
    (p1, p2)
}

/// Gauss–Jacobi rule for the weight `(1 - x)^alpha (1 + x)^beta`, exact for polynomials of
/// degree `2 * points - 1`.
pub fn gauss_jacobi(points: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if points == 0 {
        return Err(Error::Quadrature("rule needs at least one node".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::Quadrature(format!("Jacobi parameters ({alpha}, {beta}) must exceed -1")));
    }
    let n = points;
    let nf = n as f64;
    let ab = alpha + beta;
    let symmetric = alpha == beta;
    let solve = if symmetric { n.div_ceil(2) } else { n };

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=solve {
        let theta = (i as f64 + alpha / 2.0 - 0.25) * PI / (nf + (ab + 1.0) / 2.0);
        let mut x = theta.cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p1, p2) = jacobi_pair(n, alpha, beta, x);
            let temp = 2.0 * nf + ab;
            let pp = (nf * (alpha - beta - temp * x) * p1 + 2.0 * (nf + alpha) * (nf + beta) * p2)
                / (temp * (1.0 - x * x));
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1e-3) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Quadrature(format!("Newton iteration stalled at node {i} of {n}")));
        }
        nodes.push(x);
        weights.push(christoffel_weight(n, alpha, beta, x));
    }
    if symmetric {
        if n % 2 == 1 {
            nodes[solve - 1] = 0.0;
        }
        let mirror = if n % 2 == 1 { solve - 1 } else { solve };
        for i in (0..mirror).rev() {
            nodes.push(-nodes[i]);
            weights.push(weights[i]);
        }
    }
    let ordered = nodes.windows(2).all(|w| w[0] > w[1]);
    let inside = nodes.iter().all(|x| x.abs() < 1.0);
    let positive = weights.iter().all(|w| *w > 0.0 && w.is_finite());
    if !(ordered && inside && positive) {
        return Err(Error::Quadrature(format!(
            "Gauss–Jacobi({alpha}, {beta}) with {n} nodes failed validation"
        )));
    }
    Ok(GaussRule { nodes, weights })
}

/// Recurrence coefficients `(a_k, b_k)` of the orthonormal Jacobi polynomials:
/// `x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`.
fn jacobi_recurrence(k: usize, alpha: f64, beta: f64) -> (f64, f64) {
    let ab = alpha + beta;
    let kf = k as f64;
    let a = if k == 0 {
        (beta - alpha) / (ab + 2.0)
    } else {
        (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
    };
    let b = match k {
        0 => 0.0,
        1 => (4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt(),
        _ => {
            let s = 2.0 * kf + ab;
            (4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
        }
    };
    (a, b)
}

/// `w = 1 / sum_{k<n} p_k(x)^2` with orthonormal `p_k`.
fn christoffel_weight(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    let mu0 = 2f64.powf(alpha + beta + 1.0) * (ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(alpha + beta + 2.0)).exp();
    let mut prev = 0.0;
    let mut cur = 1.0 / mu0.sqrt();
    let mut sum = cur * cur;
    for k in 0..n.saturating_sub(1) {
        let (a, b) = jacobi_recurrence(k, alpha, beta);
        let (_, b_next) = jacobi_recurrence(k + 1, alpha, beta);
        let next = ((x - a) * cur - b * prev) / b_next;
        prev = cur;
        cur = next;
        sum += cur * cur;
    }
    1.0 / sum
}

pub fn gauss_legendre(points: usize) -> Result<GaussRule> {
    gauss_jacobi(points, 0.0, 0.0)
}

/// Composite Gauss–Legendre quadrature of a complex integrand on `[a, b]`.
pub struct CompositeRule {
    rule: GaussRule,
}

impl CompositeRule {
    pub fn new(order: usize) -> Result<Self> {
        Ok(Self { rule: gauss_legendre(order)? })
    }

    pub fn integrate<F>(&self, f: &F, a: f64, b: f64, panels: usize) -> Complex64
    where
        F: Fn(f64) -> Complex64,
    {
        let h = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + h / 2.0;
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                acc += f(mid + h / 2.0 * x) * *w;
            }
            total += acc * (h / 2.0);
        }
        total
    }

    /// Doubles the panel count until two successive estimates agree to `tol` (relative, with
    /// an absolute floor of `abs_floor`).
    pub fn integrate_refined<F>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        initial_panels: usize,
        tol: f64,
        abs_floor: f64,
    ) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        let mut panels = initial_panels.max(1);
        let mut prev = self.integrate(f, a, b, panels);
        for _ in 0..12 {
            panels *= 2;
            let cur = self.integrate(f, a, b, panels);
            if (cur - prev).norm() <= tol * cur.norm() + abs_floor {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::Quadrature(format!(
            "composite rule on [{a}, {b}] did not settle after {panels} panels"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::beta::beta as beta_fn;

    fn moment(alpha: f64, beta: f64) -> f64 {
        2f64.powf(alpha + beta + 1.0) * beta_fn(alpha + 1.0, beta + 1.0)
    }

    #[test]
    fn legendre_small_rules() {
        let r = gauss_legendre(2).unwrap();
        assert_relative_eq!(r.nodes[0], 1.0 / 3f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(r.weights[0], 1.0, max_relative = 1e-14);
        let r = gauss_legendre(3).unwrap();
        assert_eq!(r.nodes[1], 0.0);
        assert_relative_eq!(r.weights[1], 8.0 / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn moments_and_exactness() {
        for &(a, b) in &[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0), (-0.5, -0.5), (1.5, 1.5), (2.0, 2.0), (0.5, 0.0), (1.0, 0.0)] {
            for &n in &[1usize, 2, 7, 64, 513, 2048] {
                let r = gauss_jacobi(n, a, b).unwrap();
                let s: f64 = r.weights.iter().sum();
                assert_relative_eq!(s, moment(a, b), max_relative = 1e-12);
                // x^{2n-2} (even, degree <= 2n-1) against the exact moment via Beta functions
                // only checked for the symmetric weights.
                if a == b && n <= 64 {
                    let d = 2 * n - 2;
                    let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(d as i32)).sum();
                    // int x^d (1-x^2)^a dx = B((d+1)/2, a+1)
                    let want = beta_fn((d as f64 + 1.0) / 2.0, a + 1.0);
                    assert_relative_eq!(got, want, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn large_rule_is_ordered() {
        let r = gauss_jacobi(5000, 0.5, 0.5).unwrap();
        assert!(r.nodes.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn composite_oscillatory() {
        let rule = CompositeRule::new(16).unwrap();
        // int_0^10 e^{i 30 t} dt
        let f = |t: f64| Complex64::new(0.0, 30.0 * t).exp();
        let got = rule.integrate_refined(&f, 0.0, 10.0, 8, 1e-12, 1e-15).unwrap();
        let want = (Complex64::new(0.0, 300.0).exp() - 1.0) / Complex64::new(0.0, 30.0);
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        assert!(gauss_jacobi(0, 0.0, 0.0).is_err());
        assert!(gauss_jacobi(4, -1.0, 0.0).is_err());
    }
}
