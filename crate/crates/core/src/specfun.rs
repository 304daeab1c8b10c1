//! Gegenbauer polynomials, zonal projector kernels and constants of the round sphere.
//!
//! The degree-`k` projector `H_k` onto spherical harmonics acts by convolution with the
//! zonal kernel `Z_k(<x, y>)`, where
//!
//! ```text
//! Z_k(t) = (2k + n - 1) / ((n - 1) vol(S^n)) * C_k^{(n-1)/2}(t)
//! ```
//!
//! This normalization is the one that makes `H_k` idempotent, so `Z_k(1) = N(n, k) / vol(S^n)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// The sphere `S^n` together with the constants every other module needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub n: usize,
    /// `vol(S^n) = 2 pi^{(n+1)/2} / Gamma((n+1)/2)`.
    pub volume: f64,
    /// Gegenbauer index `(n - 1) / 2`.
    pub nu: f64,
}

impl SphereSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("sphere dimension n = {n} must be at least 2")));
        }
        Ok(Self { n, volume: sphere_volume(n), nu: (n as f64 - 1.0) / 2.0 })
    }

    /// Volume of the equatorial sphere `S^{n-1}`, the Jacobian factor of the zonal reduction.
    pub fn boundary_volume(&self) -> f64 {
        sphere_volume(self.n - 1)
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        eigenvalue(self, k)
    }
}

/// `vol(S^m)` for `m >= 0`.
pub fn sphere_volume(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

fn check_domain(alpha: f64, t: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("Gegenbauer index alpha = {alpha} must be positive")));
    }
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(format!("argument t = {t} outside [-1, 1]")));
    }
    Ok(())
}

/// `C_k^alpha(t)` by the forward three-term recurrence.
pub fn gegenbauer(k: usize, alpha: f64, t: f64) -> Result<f64> {
    check_domain(alpha, t)?;
    Ok(gegenbauer_unchecked(k, alpha, t))
}

fn gegenbauer_unchecked(k: usize, alpha: f64, t: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * alpha * t;
    for m in 2..=k {
        let mf = m as f64;
        let next = (2.0 * t * (mf + alpha - 1.0) * cur - (mf + 2.0 * alpha - 2.0) * prev) / mf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `C_0^alpha(t), ..., C_kmax^alpha(t)`.
pub fn gegenbauer_table(kmax: usize, alpha: f64, t: f64) -> Result<Vec<f64>> {
    check_domain(alpha, t)?;
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax == 0 {
        return Ok(out);
    }
    out.push(2.0 * alpha * t);
    for m in 2..=kmax {
        let mf = m as f64;
        let next =
            (2.0 * t * (mf + alpha - 1.0) * out[m - 1] - (mf + 2.0 * alpha - 2.0) * out[m - 2]) / mf;
        out.push(next);
    }
    Ok(out)
}

/// Dimension `N(n, k)` of the degree-`k` spherical harmonics on `S^n`.
///
/// Uses `N = (2k + n - 1) * binom(k + n - 2, k) / (n - 1)` in checked 128-bit arithmetic.
pub fn harmonic_dim(spec: &SphereSpec, k: usize) -> Result<u64> {
    let n = spec.n as u128;
    let k128 = k as u128;
    let overflow = || Error::Overflow(format!("N(n = {}, k = {k})", spec.n));
    // binom(k + n - 2, n - 2), built incrementally so every intermediate is an integer.
    let mut binom: u128 = 1;
    for i in 1..=(n - 2) {
        binom = binom.checked_mul(k128 + i).ok_or_else(overflow)? / i;
    }
    let num = binom.checked_mul(2 * k128 + n - 1).ok_or_else(overflow)?;
    debug_assert_eq!(num % (n - 1), 0);
    u64::try_from(num / (n - 1)).map_err(|_| overflow())
}

/// `lambda_k = k + (n - 1)/2`, the eigenvalue of the square root of the shifted Laplacian.
pub fn eigenvalue(spec: &SphereSpec, k: usize) -> f64 {
    k as f64 + (spec.n as f64 - 1.0) / 2.0
}

/// Normalization `c_{n,k}` with `Z_k = c_{n,k} C_k^{(n-1)/2}`.
pub fn zonal_normalization(spec: &SphereSpec, k: usize) -> f64 {
    (2.0 * k as f64 + spec.n as f64 - 1.0) / ((spec.n as f64 - 1.0) * spec.volume)
}

/// The projector kernel `Z_k(t)`.
pub fn zonal_value(spec: &SphereSpec, k: usize, t: f64) -> Result<f64> {
    Ok(zonal_normalization(spec, k) * gegenbauer(k, spec.nu, t)?)
}

/// `Z_0(t), ..., Z_kmax(t)`.
pub fn zonal_table(spec: &SphereSpec, kmax: usize, t: f64) -> Result<Vec<f64>> {
    let mut out = gegenbauer_table(kmax, spec.nu, t)?;
    for (k, v) in out.iter_mut().enumerate() {
        *v *= zonal_normalization(spec, k);
    }
    Ok(out)
}

/// `Z_k(1) = N(n, k) / vol(S^n)` in floating point; valid for any `k`.
pub fn zonal_diagonal(spec: &SphereSpec, k: usize) -> f64 {
    // C_k^nu(1) = Gamma(k + 2 nu) / (Gamma(2 nu) k!)
    let two_nu = 2.0 * spec.nu;
    let c1 = (ln_gamma(k as f64 + two_nu) - ln_gamma(two_nu) - ln_gamma(k as f64 + 1.0)).exp();
    zonal_normalization(spec, k) * c1
}

/// Where a [`ZonalKernel`] came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelKind {
    Projector { k: usize },
    DyadicPiece { k: usize, j: usize },
    Resolvent { lam: f64, mu: f64 },
    ShiftedOperator,
    Custom(String),
}

/// A convolution kernel on `S^n` diagonal in the harmonic decomposition.
///
/// `coeffs[k]` is the multiplier on degree-`k` harmonics; pointwise the kernel is
/// `K(t) = sum_k coeffs[k] Z_k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalKernel {
    pub sphere: SphereSpec,
    pub coeffs: Vec<Complex64>,
    pub kind: KernelKind,
}

impl ZonalKernel {
    pub fn new(sphere: SphereSpec, coeffs: Vec<Complex64>, kind: KernelKind) -> Self {
        Self { sphere, coeffs, kind }
    }

    /// The projector `H_k`: unit coordinate sequence.
    pub fn projector(sphere: SphereSpec, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self { sphere, coeffs, kind: KernelKind::Projector { k } }
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// `sup_k |m_k|`, the `L^2 -> L^2` norm of the operator.
    pub fn multiplier_sup(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn value(&self, t: f64) -> Result<Complex64> {
        let table = zonal_table(&self.sphere, self.max_degree(), t)?;
        Ok(self.coeffs.iter().zip(&table).map(|(m, z)| m * z).sum())
    }
}
