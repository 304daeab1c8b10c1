//! Dyadic decomposition of the projector kernel in the geodesic distance.
//!
//! Piece `j >= 1` is `Z_k(cos theta) beta(lambda_k 2^{-j} d(theta))` and piece 0 is what is
//! left near the pole. The profile `beta` is supported in `(1/4, 1)`, so piece `j` lives on
//! `2^{j-2} / lambda_k < d(theta) < 2^j / lambda_k`.
//!
//! `d` is the geodesic distance `theta` up to `3 pi / 4` and then levels off smoothly, flat
//! before the antipode. A cutoff in `theta` itself would leave a conical singularity at the
//! antipode, and the spectral coefficients of the pieces would decay only algebraically.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use super::norms::{norm_lower, AscentOptions};
use super::ZonalOperator;
use crate::error::{Error, Result};
use crate::exponents::ExponentPoint;
use crate::fit::{fit_line, LineFit};
use crate::specfun::{zonal_value, KernelKind, SphereSpec, ZonalKernel};
use crate::quadrature::{gauss_legendre, GaussRule};
use crate::sphere::{analyze, default_grid, lp_values, make_grid, synthesize, ZonalGrid};

const FOLD_START: f64 = 0.75 * PI;
const FOLD_END: f64 = 11.0 * PI / 12.0;

fn mollifier(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step from 0 at `x <= 0` to 1 at `x >= 1`.
fn smooth_step(x: f64) -> f64 {
    let (a, b) = (mollifier(x), mollifier(1.0 - x));
    a / (a + b)
}

fn fold_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(48).expect("48-point Gauss-Legendre rule"))
}

/// Distance used by the cutoffs: `theta` on `[0, 3 pi / 4]`, with derivative
/// `1 - step` on the fold and constant after it.
pub fn folded_distance(theta: f64) -> f64 {
    if theta <= FOLD_START {
        return theta;
    }
    let width = FOLD_END - FOLD_START;
    let hi = theta.min(FOLD_END);
    let half = (hi - FOLD_START) / 2.0;
    let rule = fold_rule();
    let integral: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| {
            let s = FOLD_START + half * (1.0 + x);
            w * (1.0 - smooth_step((s - FOLD_START) / width))
        })
        .sum();
    FOLD_START + half * integral
}

/// Smooth bump supported in `(1/4, 1)`, symmetric in `log2 t` about `t = 1/2`.
pub fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let u = t.log2() + 1.0;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// `beta(t) = bump(t) / sum_j bump(2^{-j} t)`, so that `sum_{j in Z} beta(2^{-j} t) = 1`
/// for every `t > 0`.
pub fn profile(t: f64) -> f64 {
    let b = bump(t);
    if b == 0.0 {
        return 0.0;
    }
    let base = t.log2().floor() as i32;
    let den: f64 = (base - 1..=base + 3).map(|j| bump(t * 2f64.powi(-j))).sum();
    b / den
}

/// `J = ceil(log2(pi lambda_k)) + 1`.
pub fn piece_count(spec: &SphereSpec, k: usize) -> usize {
    (PI * spec.eigenvalue(k)).log2().ceil() as usize + 1
}

fn pointwise(spec: &SphereSpec, k: usize, j: usize, count: usize, theta: f64) -> Result<f64> {
    let lam = spec.eigenvalue(k);
    let z = zonal_value(spec, k, theta.cos())?;
    let d = folded_distance(theta);
    if j >= 1 {
        return Ok(z * profile(lam * d * 2f64.powi(-(j as i32))));
    }
    let covered: f64 = (1..=count).map(|i| profile(lam * d * 2f64.powi(-(i as i32)))).sum();
    Ok(z * (1.0 - covered))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicOptions {
    /// Spectral truncation degree is `k + ceil(degree_factor * lambda_k)`.
    pub degree_factor: f64,
    /// The analysis grid has `oversample * L + 64` nodes.
    pub oversample: usize,
}

impl Default for DyadicOptions {
    fn default() -> Self {
        Self { degree_factor: 6.0, oversample: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct DyadicPiece {
    pub k: usize,
    pub j: usize,
    /// Range of the folded distance outside which the piece vanishes.
    pub support: (f64, f64),
    /// Spectral multipliers up to the truncation degree.
    pub kernel: ZonalKernel,
    count: usize,
}

impl DyadicPiece {
    /// The piece's kernel at angle `theta`, from its defining formula.
    pub fn value(&self, theta: f64) -> Result<f64> {
        pointwise(&self.kernel.sphere, self.k, self.j, self.count, theta)
    }
}

#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub spec: SphereSpec,
    pub k: usize,
    pub lambda: f64,
    /// Largest piece index `J`.
    pub count: usize,
    /// Spectral truncation degree.
    pub degree: usize,
    /// Pieces `j = 0..=count`.
    pub pieces: Vec<DyadicPiece>,
}

impl DyadicDecomposition {
    /// The standard grid for this decomposition, exact up to `degree`.
    pub fn work_grid(&self) -> Result<Arc<ZonalGrid>> {
        default_grid(&self.spec, self.degree)
    }

    pub fn operators(&self, grid: &Arc<ZonalGrid>) -> Result<Vec<ZonalOperator>> {
        self.pieces.iter().map(|p| ZonalOperator::new(p.kernel.clone(), grid.clone())).collect()
    }

    /// Largest relative `L^2` gap on `grid` between a truncated piece and its defining
    /// formula, measured against `||Z_k||_2`.
    pub fn truncation_error(&self, grid: &ZonalGrid) -> Result<f64> {
        let scale = grid.zonal_diag(self.k).sqrt();
        let mut worst: f64 = 0.0;
        for piece in &self.pieces {
            let synth = synthesize(grid, &piece.kernel.coeffs);
            let mut diff = Vec::with_capacity(synth.len());
            for (v, th) in synth.iter().zip(&grid.theta) {
                diff.push(Complex64::new(v.re - piece.value(*th)?, v.im));
            }
            worst = worst.max(lp_values(&grid.weights, &diff, 2.0) / scale);
        }
        Ok(worst)
    }

    /// Pieces used for slope fits: `1 <= j < J` and support ending before the fold.
    pub fn usable(&self) -> Vec<usize> {
        usable_pieces(self.lambda, self.count)
    }
}

pub fn usable_pieces(lambda: f64, count: usize) -> Vec<usize> {
    (1..count).filter(|&j| 2f64.powi(j as i32) / lambda <= FOLD_START).collect()
}

pub fn dyadic_decompose(spec: &SphereSpec, k: usize) -> Result<DyadicDecomposition> {
    dyadic_decompose_with(spec, k, &DyadicOptions::default())
}

pub fn dyadic_decompose_with(spec: &SphereSpec, k: usize, opts: &DyadicOptions) -> Result<DyadicDecomposition> {
    if k < 1 {
        return Err(Error::Domain("dyadic decomposition needs k >= 1".into()));
    }
    let lambda = spec.eigenvalue(k);
    let count = piece_count(spec, k);
    let degree = k + (opts.degree_factor * lambda).ceil() as usize;
    let fine = make_grid(spec, opts.oversample * degree + 64, degree)?;
    let mut pieces = Vec::with_capacity(count + 1);
    let mut rest = vec![Complex64::new(0.0, 0.0); degree + 1];
    rest[k] = Complex64::new(1.0, 0.0);
    for j in 1..=count {
        let values = fine
            .theta
            .iter()
            .map(|th| pointwise(spec, k, j, count, *th).map(|v| Complex64::new(v, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        let coeffs = analyze(&fine, &values, degree);
        for (r, c) in rest.iter_mut().zip(&coeffs) {
            *r -= c;
        }
        let support = (2f64.powi(j as i32 - 2) / lambda, 2f64.powi(j as i32) / lambda);
        pieces.push(DyadicPiece {
            k,
            j,
            support,
            kernel: ZonalKernel::new(*spec, coeffs, KernelKind::DyadicPiece { k, j }),
            count,
        });
    }
    // Piece 0 takes the remaining multipliers, so the pieces sum to H_k exactly.
    pieces.insert(
        0,
        DyadicPiece {
            k,
            j: 0,
            support: (0.0, 1.0 / lambda),
            kernel: ZonalKernel::new(*spec, rest, KernelKind::DyadicPiece { k, j: 0 }),
            count,
        },
    );
    Ok(DyadicDecomposition { spec: *spec, k, lambda, count, degree, pieces })
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceSlopes {
    pub usable: Vec<usize>,
    /// Lower bounds for the usable pieces at `P` and `Q`, in the order of `usable`.
    pub norms_p: Vec<f64>,
    pub norms_q: Vec<f64>,
    /// Fits of `log2 ||T_j||` against `j`.
    pub fit_p: LineFit,
    pub fit_q: LineFit,
}

/// Measures every usable piece at `P` and `Q` and fits `log2` norms against `j`.
pub fn piece_norm_slopes(
    decomp: &DyadicDecomposition,
    p: ExponentPoint,
    q: ExponentPoint,
    opts: &AscentOptions,
) -> Result<PieceSlopes> {
    let usable = decomp.usable();
    if usable.len() < 3 {
        return Err(Error::DegenerateFit(format!("only {} usable dyadic pieces for k = {}", usable.len(), decomp.k)));
    }
    let grid = decomp.work_grid()?;
    let mut norms_p = Vec::new();
    let mut norms_q = Vec::new();
    for &j in &usable {
        let op = ZonalOperator::new(decomp.pieces[j].kernel.clone(), grid.clone())?;
        let ascent = AscentOptions { scale: Some(decomp.pieces[j].support.0), ..opts.clone() };
        norms_p.push(norm_lower(&op, p.r(), p.s(), &ascent)?.ratio);
        norms_q.push(norm_lower(&op, q.r(), q.s(), &ascent)?.ratio);
    }
    let x: Vec<f64> = usable.iter().map(|&j| j as f64).collect();
    let fit_p = fit_line(&x, &norms_p.iter().map(|v| v.log2()).collect::<Vec<_>>())?;
    let fit_q = fit_line(&x, &norms_q.iter().map(|v| v.log2()).collect::<Vec<_>>())?;
    Ok(PieceSlopes { usable, norms_p, norms_q, fit_p, fit_q })
}
