//! The resolvent `(zeta - P^2)^{-1}` of the shifted Laplacian, `P^2 Y_k = lambda_k^2 Y_k`,
//! with `zeta = (lam + i mu)^2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;
use crate::specfun::{KernelKind, SphereSpec, ZonalKernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventParams {
    pub lam: f64,
    pub mu: f64,
    pub zeta: Complex64,
}

impl ResolventParams {
    pub fn new(lam: f64, mu: f64) -> Result<Self> {
        if !(lam >= 1.0 && lam.is_finite()) {
            return Err(Error::Domain(format!("lam = {lam} must be a finite number >= 1")));
        }
        if !(mu.abs() >= 1.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("|mu| = {} must be a finite number >= 1", mu.abs())));
        }
        Ok(Self { lam, mu, zeta: Complex64::new(lam, mu).powi(2) })
    }

    fn sign(&self) -> f64 {
        self.mu.signum()
    }

    /// `sgn(mu) / (i (lam + i mu))`, the factor in front of the time integral.
    fn prefactor(&self) -> Complex64 {
        self.sign() / (Complex64::i() * Complex64::new(self.lam, self.mu))
    }

    /// `e^{i sgn(mu) lam t} e^{-|mu| t} cos(tau t)`.
    fn wave(&self, tau: f64, t: f64) -> Complex64 {
        Complex64::new(-self.mu.abs() * t, self.sign() * self.lam * t).exp() * (tau * t).cos()
    }

    fn oscillation_panels(&self, tau: f64, length: f64) -> usize {
        (length * (self.lam + tau + self.mu.abs()) / std::f64::consts::PI).ceil() as usize + 4
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tau = {tau} must be finite and >= 0")));
    }
    Ok(())
}

/// `m(tau) = 1 / (zeta - tau^2)`.
pub fn resolvent_multiplier(params: &ResolventParams, tau: f64) -> Result<Complex64> {
    check_tau(tau)?;
    let d = params.zeta - tau * tau;
    if d.norm() < 1e-12 {
        return Err(Error::Pole(d.norm()));
    }
    Ok(1.0 / d)
}

/// The same multiplier from its representation as a damped wave-time integral on
/// `[0, T]`, `e^{-|mu| T} < 1e-16`.
pub fn resolvent_multiplier_integral(params: &ResolventParams, tau: f64) -> Result<Complex64> {
    check_tau(tau)?;
    let rule = CompositeRule::new(16)?;
    let t_max = 37.0 / params.mu.abs();
    let f = |t: f64| params.wave(tau, t);
    let integral = rule.integrate_refined(&f, 0.0, t_max, params.oscillation_panels(tau, t_max), 1e-11, 1e-16)?;
    Ok(params.prefactor() * integral)
}

fn mollifier(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth even cutoff: 1 on `|t| <= 1/2`, 0 on `|t| >= 1`.
pub fn cutoff(t: f64) -> f64 {
    let a = t.abs();
    let inner = mollifier(1.0 - a);
    let outer = mollifier(a - 0.5);
    if inner + outer == 0.0 {
        return 0.0;
    }
    inner / (inner + outer)
}

/// The part of the time integral away from `t = 0`, weighted by `1 - cutoff(t)`.
pub fn tail_multiplier(params: &ResolventParams, tau: f64) -> Result<Complex64> {
    check_tau(tau)?;
    let rule = CompositeRule::new(16)?;
    let t_max = (32.3 / params.mu.abs()).max(2.0);
    let f = |t: f64| params.wave(tau, t) * (1.0 - cutoff(t));
    // The cutoff's transition lives on [1/2, 1]; beyond it the integrand is analytic.
    let ramp = rule.integrate_refined(&f, 0.5, 1.0, params.oscillation_panels(tau, 0.5) + 8, 1e-10, 1e-18)?;
    let rest = rule.integrate_refined(&f, 1.0, t_max, params.oscillation_panels(tau, t_max - 1.0), 1e-10, 1e-18)?;
    Ok(params.prefactor() * (ramp + rest))
}

/// `max(ceil(4 lam), ceil(lam) + 40)`.
pub fn default_kmax(lam: f64) -> usize {
    ((4.0 * lam).ceil() as usize).max(lam.ceil() as usize + 40)
}

#[derive(Debug, Clone)]
pub struct ResolventKernel {
    pub params: ResolventParams,
    pub kernel: ZonalKernel,
    pub kmax: usize,
    /// `sup_{k > kmax} |m(lambda_k)| / sup_k |m(lambda_k)|`: the `L^2` size of the discarded
    /// part relative to the whole operator.
    pub tail_ratio: f64,
}

/// Multipliers `m(lambda_k)` for `k <= kmax` (default [`default_kmax`]).
pub fn resolvent_kernel(spec: &SphereSpec, params: &ResolventParams, kmax: Option<usize>) -> Result<ResolventKernel> {
    let kmax = kmax.unwrap_or_else(|| default_kmax(params.lam));
    let coeffs = (0..=kmax)
        .map(|k| resolvent_multiplier(params, spec.eigenvalue(k)))
        .collect::<Result<Vec<_>>>()?;
    let sup = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    // |zeta - tau^2| increases for tau^2 > lam^2 - mu^2, so the first discarded degree
    // carries the largest discarded multiplier.
    let first_dropped = resolvent_multiplier(params, spec.eigenvalue(kmax + 1))?.norm();
    let tail_ratio = if spec.eigenvalue(kmax + 1).powi(2) > params.lam.powi(2) - params.mu.powi(2) {
        first_dropped / sup
    } else {
        1.0
    };
    if (kmax as f64) < 4.0 * params.lam {
        return Err(Error::TailDominance { kmax, lam: params.lam, tail_ratio });
    }
    let kernel = ZonalKernel::new(*spec, coeffs, KernelKind::Resolvent { lam: params.lam, mu: params.mu });
    Ok(ResolventKernel { params: *params, kernel, kmax, tail_ratio })
}

/// Multipliers `zeta - lambda_k^2`, the inverse of the resolvent on degrees `k <= kmax`.
pub fn shifted_operator_kernel(spec: &SphereSpec, zeta: Complex64, kmax: usize) -> ZonalKernel {
    let coeffs = (0..=kmax).map(|k| zeta - spec.eigenvalue(k).powi(2)).collect();
    ZonalKernel::new(*spec, coeffs, KernelKind::ShiftedOperator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::apply_kernel;
    use crate::sphere::{default_grid, lp_norm, ZonalFunction};
    use approx::assert_relative_eq;

    fn s3() -> SphereSpec {
        SphereSpec::new(3).unwrap()
    }

    #[test]
    fn closed_form_example() {
        let p = ResolventParams::new(2.0, 1.0).unwrap();
        assert_eq!(p.zeta, Complex64::new(3.0, 4.0));
        let m = resolvent_multiplier(&p, 1.0).unwrap();
        assert!((m - Complex64::new(0.1, -0.2)).norm() < 1e-15);
        let far = resolvent_multiplier(&p, 1e4).unwrap().norm() * 1e8;
        assert_relative_eq!(far, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn invalid_params() {
        assert!(ResolventParams::new(0.5, 1.0).is_err());
        assert!(ResolventParams::new(2.0, 0.5).is_err());
        let p = ResolventParams::new(2.0, 1.0).unwrap();
        assert!(resolvent_multiplier(&p, -1.0).is_err());
    }

    /// Adaptive Simpson on the real and imaginary parts separately.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = (a + b) / 2.0;
            let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        // Split into many short intervals so the recursion resolves every oscillation.
        let pieces = 256;
        let h = (b - a) / pieces as f64;
        (0..pieces)
            .map(|i| {
                let (lo, hi) = (a + h * i as f64, a + h * (i + 1) as f64);
                let (fa, fm, fb) = (f(lo), f((lo + hi) / 2.0), f(hi));
                step(f, lo, hi, fa, fm, fb, (hi - lo) / 6.0 * (fa + 4.0 * fm + fb), tol / pieces as f64, 40)
            })
            .sum()
    }

    #[test]
    fn integral_matches_closed_form() {
        let p = ResolventParams::new(16.0, 1.0).unwrap();
        let closed = resolvent_multiplier(&p, 16.0).unwrap();
        let numeric = resolvent_multiplier_integral(&p, 16.0).unwrap();
        assert!(((numeric.norm() - closed.norm()) / closed.norm()).abs() < 1e-6);
        let re = simpson(&|t| p.wave(16.0, t).re, 0.0, 40.0, 1e-12);
        let im = simpson(&|t| p.wave(16.0, t).im, 0.0, 40.0, 1e-12);
        let oracle = p.prefactor() * Complex64::new(re, im);
        assert!(((oracle.norm() - closed.norm()) / closed.norm()).abs() < 1e-6);
        let q = ResolventParams::new(4.0, -2.0).unwrap();
        for tau in [0.0, 1.0, 3.5, 8.0] {
            let a = resolvent_multiplier(&q, tau).unwrap();
            let b = resolvent_multiplier_integral(&q, tau).unwrap();
            assert!((a - b).norm() < 1e-9 * a.norm());
        }
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(-0.5), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert_eq!(cutoff(-2.0), 0.0);
        assert_relative_eq!(cutoff(0.75), 0.5, max_relative = 1e-14);
        assert_eq!(cutoff(0.6), cutoff(-0.6));
    }

    #[test]
    fn tail_examples() {
        let p = ResolventParams::new(16.0, 1.0).unwrap();
        let peak = tail_multiplier(&p, 16.0).unwrap().norm();
        assert!(peak * 16.0 < 1.0);
        let off = tail_multiplier(&p, 32.0).unwrap().norm() * 16.0 * 17f64.powi(3);
        assert!(off.is_finite() && off < 1e3, "{off}");
        let q = ResolventParams::new(8.0, 1.0).unwrap();
        assert!(tail_multiplier(&q, 0.0).unwrap().norm().is_finite());
    }

    #[test]
    fn kernel_and_inverse() {
        let spec = s3();
        let p = ResolventParams::new(8.0, 1.0).unwrap();
        let rk = resolvent_kernel(&spec, &p, None).unwrap();
        assert_eq!(rk.kmax, 48);
        assert!(rk.tail_ratio < 1.0);
        let shifted = shifted_operator_kernel(&spec, p.zeta, rk.kmax);
        for (a, b) in rk.kernel.coeffs.iter().zip(&shifted.coeffs) {
            assert!((a * b - 1.0).norm() < 1e-15);
        }
        let grid = default_grid(&spec, rk.kmax).unwrap();
        let z8 = ZonalFunction::zonal_harmonic(grid.clone(), 8).unwrap();
        let out = apply_kernel(&rk.kernel, &z8).unwrap();
        let ratio = lp_norm(&out, 2.0).unwrap() / lp_norm(&z8, 2.0).unwrap();
        assert_relative_eq!(ratio, 1.0 / (p.zeta - 81.0).norm(), max_relative = 1e-10);
        assert!(matches!(resolvent_kernel(&spec, &p, Some(20)), Err(Error::TailDominance { kmax: 20, .. })));
    }
}
