//! Mixed `(L^r, L^s)` norm estimates for zonal operators on a grid.
//!
//! The lower bound is a nonlinear power ascent over zonal inputs; every iterate is an
//! explicit witness. The upper bound interpolates log-convexly between norms that are
//! computable exactly for the discretized operator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ZonalOperator;
use crate::error::{Error, Result};
use crate::exponents::ExponentPoint;
use crate::specfun::KernelKind;
use crate::sphere::{lp_values, support_measure, ZonalFunction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StartKind {
    Random { index: usize },
    Cap { theta0: f64 },
    Harmonic { degree: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOptions {
    /// Number of seeded random starts; caps and the dominant harmonic are always added.
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the relative gain of one step drops below this.
    pub tol: f64,
    /// Smallest cap angle; defaults to `1 / lambda` at the degree with the largest multiplier.
    pub scale: Option<f64>,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { restarts: 8, seed: 1, max_iter: 500, tol: 1e-9, scale: None }
    }
}

#[derive(Debug, Clone)]
pub struct LowerBound {
    pub ratio: f64,
    /// Normalized in `L^r`.
    pub witness: ZonalFunction,
    pub start: StartKind,
    /// Accepted steps of the winning start.
    pub iterations: usize,
    /// Number of starts tried.
    pub restarts: usize,
    pub converged: bool,
    /// Ratio after each accepted step of the winning start.
    pub trace: Vec<f64>,
}

struct Run {
    ratio: f64,
    values: Vec<Complex64>,
    start: StartKind,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn check_exponents(r: f64, s: f64) -> Result<()> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidExponent(format!("r = {r} must lie in [1, inf)")));
    }
    if !(s > 1.0) {
        return Err(Error::InvalidExponent(format!("s = {s} must lie in (1, inf]")));
    }
    Ok(())
}

fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// The unit vector of `L^{p'}` that norms `g`: `int g h = ||g||_p`.
fn norming_direction(weights: &[f64], g: &[Complex64], p: f64) -> Vec<Complex64> {
    let norm = lp_values(weights, g, p);
    let mut h = vec![ZERO; g.len()];
    if norm == 0.0 {
        return h;
    }
    if p.is_infinite() {
        let (i, v) = g.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
        h[i] = (g[i] / v).conj() / weights[i];
        return h;
    }
    for (hi, gi) in h.iter_mut().zip(g) {
        let a = gi.norm();
        if a > 0.0 {
            *hi = (gi / a).conj() * (a / norm).powf(p - 1.0);
        }
    }
    h
}

fn ascend(op: &ZonalOperator, r: f64, s: f64, start: StartKind, f0: Vec<Complex64>, opts: &AscentOptions) -> Option<Run> {
    let w = &op.grid().weights;
    let r_dual = conjugate_exponent(r);
    let n0 = lp_values(w, &f0, r);
    if n0 == 0.0 || !n0.is_finite() {
        return None;
    }
    let mut f: Vec<Complex64> = f0.iter().map(|v| v / n0).collect();
    let mut g = op.apply_values(&f);
    let mut ratio = lp_values(w, &g, s) / lp_values(w, &f, r);
    let mut trace = vec![ratio];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if ratio == 0.0 {
            converged = true;
            break;
        }
        // The reduced matrix is symmetric, so the bilinear transpose of K is K itself.
        let h = norming_direction(w, &g, s);
        let u = op.apply_values(&h);
        let f_new = norming_direction(w, &u, r_dual);
        let g_new = op.apply_values(&f_new);
        let ratio_new = lp_values(w, &g_new, s) / lp_values(w, &f_new, r);
        if !(ratio_new >= ratio) {
            converged = true;
            break;
        }
        let gain = ratio_new - ratio;
        f = f_new;
        g = g_new;
        ratio = ratio_new;
        trace.push(ratio);
        iterations += 1;
        if gain <= opts.tol * ratio {
            converged = true;
            break;
        }
    }
    Some(Run { ratio, values: f, start, iterations, converged, trace })
}

fn starts(op: &ZonalOperator, opts: &AscentOptions) -> Vec<(StartKind, Vec<Complex64>)> {
    let grid = op.grid();
    let kernel = op.kernel();
    let dominant = kernel
        .coeffs
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (l, m)| if m.norm() > acc.1 { (l, m.norm()) } else { acc })
        .0;
    let scale = opts.scale.unwrap_or(1.0 / kernel.sphere.eigenvalue(dominant));
    let mut out = Vec::new();
    for index in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(index as u64));
        let values = (0..grid.points()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        out.push((StartKind::Random { index }, values));
    }
    for factor in [1.0, 4.0, 16.0] {
        let theta0 = (scale * factor).clamp(grid.theta[0], std::f64::consts::PI);
        let values = grid.theta.iter().map(|th| Complex64::new(if *th <= theta0 { 1.0 } else { 0.0 }, 0.0)).collect();
        out.push((StartKind::Cap { theta0 }, values));
    }
    let values = grid.zonal_row(dominant).iter().map(|z| Complex64::new(*z, 0.0)).collect();
    out.push((StartKind::Harmonic { degree: dominant }, values));
    out
}

/// Lower bound for `||K||_{L^r -> L^s}` over zonal inputs, with `1 <= r < inf` and
/// `1 < s <= inf`. Starts run in parallel and are merged in a fixed order; near-ties keep
/// the witness with the smaller support.
pub fn norm_lower(op: &ZonalOperator, r: f64, s: f64, opts: &AscentOptions) -> Result<LowerBound> {
    check_exponents(r, s)?;
    let candidates = starts(op, opts);
    let restarts = candidates.len();
    let runs: Vec<Option<Run>> =
        candidates.into_par_iter().map(|(kind, f0)| ascend(op, r, s, kind, f0, opts)).collect();
    let w = &op.grid().weights;
    let mut best: Option<(Run, f64)> = None;
    for run in runs.into_iter().flatten() {
        let support = support_measure(w, &run.values, 1e-3);
        best = match best {
            None => Some((run, support)),
            Some((b, bs)) => {
                let tie = (run.ratio - b.ratio).abs() <= 1e-9 * b.ratio.max(run.ratio);
                if (!tie && run.ratio > b.ratio) || (tie && support < bs) {
                    Some((run, support))
                } else {
                    Some((b, bs))
                }
            }
        };
    }
    let grid = op.grid().clone();
    match best {
        Some((run, _)) => Ok(LowerBound {
            ratio: run.ratio,
            witness: ZonalFunction::new(grid, run.values)?,
            start: run.start,
            iterations: run.iterations,
            restarts,
            converged: run.converged,
            trace: run.trace,
        }),
        None => {
            let c = Complex64::new(grid.total_measure().powf(-1.0 / r), 0.0);
            Ok(LowerBound {
                ratio: 0.0,
                witness: ZonalFunction::constant(grid, c),
                start: StartKind::Random { index: 0 },
                iterations: 0,
                restarts,
                converged: true,
                trace: vec![0.0],
            })
        }
    }
}

/// Exact norms of the discretized operator at the four corners of the region
/// `0 <= 1/s <= 1/r <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anchors {
    /// `(1, 0)`: `max |A_ij|`.
    pub one_inf: f64,
    /// `(1, 1)`: largest weighted column mass.
    pub one_one: f64,
    /// `(0, 0)`: largest weighted row mass.
    pub inf_inf: f64,
    /// `(1/2, 1/2)`: `max |m_l|`.
    pub two_two: f64,
}

impl Anchors {
    pub fn compute(op: &ZonalOperator) -> Self {
        let w = &op.grid().weights;
        let rows = op.reduced_matrix();
        let n = w.len();
        let mut one_inf: f64 = 0.0;
        let mut inf_inf: f64 = 0.0;
        let mut columns = vec![0.0; n];
        for (i, row) in rows.iter().enumerate() {
            let mut mass = 0.0;
            for (j, a) in row.iter().enumerate() {
                let m = a.norm();
                one_inf = one_inf.max(m);
                mass += w[j] * m;
                columns[j] += w[i] * m;
            }
            inf_inf = inf_inf.max(mass);
        }
        let one_one = columns.into_iter().fold(0.0, f64::max);
        Self { one_inf, one_one, inf_inf, two_two: op.kernel().multiplier_sup() }
    }

    fn positions() -> [(f64, f64); 4] {
        [(1.0, 0.0), (1.0, 1.0), (0.0, 0.0), (0.5, 0.5)]
    }

    fn values(&self) -> [f64; 4] {
        [self.one_inf, self.one_one, self.inf_inf, self.two_two]
    }

    /// `prod N_i^{w_i}`, skipping zero weights.
    pub fn combine(&self, weights: &[f64; 4]) -> f64 {
        let mut log = 0.0;
        for (w, v) in weights.iter().zip(self.values()) {
            if *w > 0.0 {
                if v == 0.0 {
                    return 0.0;
                }
                log += w * v.ln();
            }
        }
        log.exp()
    }

    /// Minimum of [`Anchors::combine`] over all convex decompositions of `point`.
    pub fn interpolate(&self, point: ExponentPoint) -> Result<UpperBound> {
        const TOL: f64 = 1e-12;
        let (x, y) = (point.x, point.y);
        if !(y >= -TOL && y <= x + TOL && x <= 1.0 + TOL) {
            return Err(Error::OutsideHull { x, y });
        }
        let pos = Self::positions();
        let mut best: Option<UpperBound> = None;
        for (a, b, c) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
            let (pa, pb, pc) = (pos[a], pos[b], pos[c]);
            let det = (pb.0 - pa.0) * (pc.1 - pa.1) - (pc.0 - pa.0) * (pb.1 - pa.1);
            if det.abs() < 1e-14 {
                continue;
            }
            let lb = ((x - pa.0) * (pc.1 - pa.1) - (pc.0 - pa.0) * (y - pa.1)) / det;
            let lc = ((pb.0 - pa.0) * (y - pa.1) - (x - pa.0) * (pb.1 - pa.1)) / det;
            let la = 1.0 - lb - lc;
            if la < -TOL || lb < -TOL || lc < -TOL {
                continue;
            }
            let mut weights = [0.0; 4];
            weights[a] = la.max(0.0);
            weights[b] = lb.max(0.0);
            weights[c] = lc.max(0.0);
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            let value = self.combine(&weights);
            if best.as_ref().is_none_or(|u| value < u.value) {
                best = Some(UpperBound { value, weights, anchors: *self });
            }
        }
        best.ok_or(Error::OutsideHull { x, y })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: f64,
    /// Convex weights on the anchors `(1,0), (1,1), (0,0), (1/2,1/2)`.
    pub weights: [f64; 4],
    pub anchors: Anchors,
}

/// Upper bound for the discretized operator by log-convex interpolation of the anchors.
pub fn norm_upper(op: &ZonalOperator, r: f64, s: f64) -> Result<UpperBound> {
    if !(r >= 1.0 && s >= 1.0) {
        return Err(Error::InvalidExponent(format!("(r, s) = ({r}, {s}) must be >= 1")));
    }
    Anchors::compute(op).interpolate(ExponentPoint::from_exponents(r, s))
}

#[derive(Debug, Clone)]
pub struct NormCertificate {
    pub exponents: ExponentPoint,
    pub lower: f64,
    pub witness: ZonalFunction,
    pub upper: f64,
    pub upper_weights: [f64; 4],
    pub anchors: Anchors,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub converged: bool,
    pub start: StartKind,
    pub kind: KernelKind,
}

/// Flat record of a certificate for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub n: usize,
    pub k_or_zeta: String,
    pub r: f64,
    pub s: f64,
    pub lower: f64,
    pub upper: f64,
    pub witness_grid: String,
    pub seed: u64,
    pub iterations: usize,
}

impl NormCertificate {
    /// Recomputes `||K w||_s / ||w||_r` for the stored witness.
    pub fn witness_ratio(&self, op: &ZonalOperator) -> f64 {
        let w = &self.witness.grid.weights;
        let out = op.apply_values(&self.witness.values);
        lp_values(w, &out, self.exponents.s()) / lp_values(w, &self.witness.values, self.exponents.r())
    }

    pub fn record(&self) -> CertificateRecord {
        let k_or_zeta = match &self.kind {
            KernelKind::Projector { k } => format!("k={k}"),
            KernelKind::DyadicPiece { k, j } => format!("k={k},j={j}"),
            KernelKind::Resolvent { lam, mu } => {
                let z = Complex64::new(*lam, *mu).powi(2);
                format!("zeta={}{:+}i", z.re, z.im)
            }
            KernelKind::ShiftedOperator => "shifted".to_string(),
            KernelKind::Custom(s) => s.clone(),
        };
        CertificateRecord {
            n: self.witness.grid.sphere.n,
            k_or_zeta,
            r: self.exponents.r(),
            s: self.exponents.s(),
            lower: self.lower,
            upper: self.upper,
            witness_grid: self.witness.grid.rule(),
            seed: self.seed,
            iterations: self.iterations,
        }
    }
}

/// Both bounds at `(r, s)`.
pub fn certify(op: &ZonalOperator, r: f64, s: f64, opts: &AscentOptions) -> Result<NormCertificate> {
    let lower = norm_lower(op, r, s, opts)?;
    let upper = norm_upper(op, r, s)?;
    Ok(NormCertificate {
        exponents: ExponentPoint::from_exponents(r, s),
        lower: lower.ratio,
        witness: lower.witness,
        upper: upper.value,
        upper_weights: upper.weights,
        anchors: upper.anchors,
        iterations: lower.iterations,
        restarts: lower.restarts,
        seed: opts.seed,
        converged: lower.converged,
        start: lower.start,
        kind: op.kernel().kind.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{SphereSpec, ZonalKernel};
    use crate::sphere::{default_grid, make_grid};
    use approx::assert_relative_eq;

    fn projector(k: usize, points: usize) -> ZonalOperator {
        let spec = SphereSpec::new(3).unwrap();
        let grid = make_grid(&spec, points, k.max(1)).unwrap();
        ZonalOperator::new(ZonalKernel::projector(spec, k), grid).unwrap()
    }

    #[test]
    fn l2_norm_of_projectors() {
        for k in [0, 1, 5, 12] {
            let op = projector(k, 4 * k + 16);
            let lb = norm_lower(&op, 2.0, 2.0, &AscentOptions::default()).unwrap();
            assert_relative_eq!(lb.ratio, 1.0, max_relative = 1e-6);
            let ub = norm_upper(&op, 2.0, 2.0).unwrap();
            assert!(ub.value <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn mean_operator() {
        let op = projector(0, 16);
        let vol = 2.0 * std::f64::consts::PI.powi(2);
        for (r, s) in [(1.25, 5.0), (1.5, 3.0), (1.2, 6.0)] {
            let sigma = 1.0 / r - 1.0 / s;
            let lb = norm_lower(&op, r, s, &AscentOptions::default()).unwrap();
            assert_relative_eq!(lb.ratio, vol.powf(-sigma), max_relative = 1e-9);
        }
        let a = Anchors::compute(&op);
        assert_relative_eq!(a.one_inf, 1.0 / vol, max_relative = 1e-12);
        let ub = norm_upper(&op, 1.0, f64::INFINITY).unwrap();
        assert_relative_eq!(ub.value, 1.0 / vol, max_relative = 1e-12);
    }

    #[test]
    fn ascent_is_monotone_and_witness_reproduces() {
        let op = projector(8, 48);
        let cert = certify(&op, 1.25, 5.0, &AscentOptions::default()).unwrap();
        let lb = norm_lower(&op, 1.25, 5.0, &AscentOptions::default()).unwrap();
        assert!(lb.trace.windows(2).all(|w| w[1] >= w[0]));
        assert_relative_eq!(cert.witness_ratio(&op), cert.lower, max_relative = 1e-12);
        assert!(cert.lower <= cert.upper * (1.0 + 1e-6));
        let rec = cert.record();
        assert_eq!(rec.k_or_zeta, "k=8");
        assert_eq!(rec.witness_grid, "gauss-jacobi[48]");
    }

    /// Dense oracle: the same ascent written against the explicit reduced matrix.
    fn dense_ascent(a: &[Vec<f64>], w: &[f64], r: f64, s: f64, f0: &[f64]) -> f64 {
        let apply = |f: &[f64]| -> Vec<f64> {
            a.iter().map(|row| row.iter().zip(w).zip(f).map(|((a, w), f)| a * w * f).sum()).collect()
        };
        let norm = |f: &[f64], p: f64| -> f64 { f.iter().zip(w).map(|(f, w)| w * f.abs().powf(p)).sum::<f64>().powf(1.0 / p) };
        let dual = |g: &[f64], p: f64| -> Vec<f64> {
            let n = norm(g, p);
            g.iter().map(|g| g.signum() * (g.abs() / n).powf(p - 1.0)).collect()
        };
        let rp = r / (r - 1.0);
        let mut f: Vec<f64> = f0.iter().map(|v| v / norm(f0, r)).collect();
        let mut ratio = norm(&apply(&f), s);
        for _ in 0..2000 {
            let h = dual(&apply(&f), s);
            f = dual(&apply(&h), rp);
            let next = norm(&apply(&f), s) / norm(&f, r);
            if next - ratio < 1e-13 * next {
                ratio = ratio.max(next);
                break;
            }
            ratio = next;
        }
        ratio
    }

    #[test]
    fn dense_oracle_h8() {
        let spec = SphereSpec::new(3).unwrap();
        let grid = make_grid(&spec, 64, 8).unwrap();
        let op = ZonalOperator::new(ZonalKernel::projector(spec, 8), grid.clone()).unwrap();
        let a: Vec<Vec<f64>> = op.reduced_matrix().iter().map(|row| row.iter().map(|z| z.re).collect()).collect();
        let (r, s) = (1.25, 5.0);
        let opts = AscentOptions::default();
        let lb = norm_lower(&op, r, s, &opts).unwrap();
        let ub = norm_upper(&op, r, s).unwrap();
        let mut oracle: f64 = 0.0;
        for (_, f0) in starts(&op, &opts) {
            let f0: Vec<f64> = f0.iter().map(|z| z.re).collect();
            oracle = oracle.max(dense_ascent(&a, &grid.weights, r, s, &f0));
        }
        assert!(lb.ratio <= ub.value * (1.0 + 1e-6));
        assert_relative_eq!(lb.ratio, oracle, max_relative = 1e-6);
    }

    #[test]
    fn upper_matches_lattice_oracle() {
        let spec = SphereSpec::new(3).unwrap();
        let grid = default_grid(&spec, 8).unwrap();
        let op = ZonalOperator::new(ZonalKernel::projector(spec, 8), grid).unwrap();
        let (x, y) = (2.0 / 3.0, 1.0 / 15.0);
        let ub = norm_upper(&op, 1.0 / x, 1.0 / y).unwrap();
        // Decompositions form a one-parameter family: w0 = x - y, w3 = 2 (y - w1),
        // w2 = 1 - w0 - w1 - w3. Scan w1 on 200^2 points.
        let a = ub.anchors;
        let mut oracle = f64::INFINITY;
        let steps = 200 * 200;
        for i in 0..=steps {
            let w1 = y * i as f64 / steps as f64;
            let w = [x - y, w1, 1.0 - (x - y) - w1 - 2.0 * (y - w1), 2.0 * (y - w1)];
            if w.iter().all(|v| *v >= 0.0) {
                oracle = oracle.min(a.combine(&w));
            }
        }
        assert!(ub.value <= oracle * (1.0 + 1e-12));
        assert_relative_eq!(ub.value, oracle, max_relative = 1e-3);
        let lb = norm_lower(&op, 1.0 / x, 1.0 / y, &AscentOptions::default()).unwrap();
        assert!(ub.value.is_finite() && ub.value >= lb.ratio);
    }

    #[test]
    fn outside_hull_rejected() {
        let op = projector(2, 24);
        assert!(matches!(norm_upper(&op, 2.0, 1.5), Err(Error::OutsideHull { .. })));
        assert!(norm_lower(&op, 0.5, 2.0, &AscentOptions::default()).is_err());
    }

    #[test]
    fn duality_symmetry() {
        let op = projector(10, 56);
        let opts = AscentOptions::default();
        let (r, s) = (1.25, 3.0);
        let a = norm_lower(&op, r, s, &opts).unwrap().ratio;
        let b = norm_lower(&op, s / (s - 1.0), r / (r - 1.0), &opts).unwrap().ratio;
        assert!((a / b - 1.0).abs() < 0.02, "{a} vs {b}");
    }
}
