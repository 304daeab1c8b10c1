//! Experiment runners shared by the command-line tool and the acceptance suite.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{admissible, default_r, figure_csv, piece_rates, sigma_range, special_points, stein_point, ExponentPoint};
use crate::fit::{fit_line, LineFit};
use crate::interpolation::{certify_restricted_weak, fit_constants, make_interp, Certification, MeasuredPiece};
use crate::operators::{
    certify, default_kmax, dyadic_decompose, envelope_check, norm_lower, resolvent_kernel, resolvent_multiplier,
    resolvent_multiplier_integral, tail_multiplier, AscentOptions, CertificateRecord, Envelope, ResolventParams,
    ZonalOperator,
};
use crate::specfun::{SphereSpec, ZonalKernel};
use crate::sphere::{default_grid, make_grid, ZonalGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ProjScaling,
    ResolventScaling,
    DyadicCertify,
    Envelope,
    MultiplierCheck,
    ExponentMap,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ProjScaling => "proj-scaling",
            Command::ResolventScaling => "resolvent-scaling",
            Command::DyadicCertify => "dyadic-certify",
            Command::Envelope => "envelope",
            Command::MultiplierCheck => "multiplier-check",
            Command::ExponentMap => "exponent-map",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Command::ProjScaling,
            Command::ResolventScaling,
            Command::DyadicCertify,
            Command::Envelope,
            Command::MultiplierCheck,
            Command::ExponentMap,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| Error::Parse(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub sigma: f64,
    /// Defaults to the midpoint of the admissible range in `1/r`.
    pub r: Option<f64>,
    pub k: Vec<usize>,
    pub lambda: Vec<f64>,
    pub mu: f64,
    /// Defaults to `4 * max_degree + 16` per run.
    pub grid_points: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(command: Command, n: usize, sigma: f64) -> Self {
        Self {
            command,
            n,
            sigma,
            r: None,
            k: vec![4, 8, 16, 32],
            lambda: vec![8.0, 16.0, 32.0],
            mu: 1.0,
            grid_points: None,
            restarts: 8,
            seed: 1,
        }
    }

    pub fn ascent(&self) -> AscentOptions {
        AscentOptions { restarts: self.restarts, seed: self.seed, ..Default::default() }
    }

    /// Checks the sphere and exponents and returns the effective `(r, s)`.
    pub fn validate(&self) -> Result<(f64, f64)> {
        if self.n < 2 {
            return Err(Error::Invalid(format!("n = {} must be at least 2", self.n)));
        }
        let (lo, hi) = sigma_range(self.n);
        if !(self.sigma >= lo - 1e-12 && self.sigma <= hi + 1e-12) {
            return Err(Error::Inadmissible(format!("σ = {} outside [2/(n+1), 2/n] = [{lo}, {hi}]", self.sigma)));
        }
        let r = match self.r {
            Some(r) => r,
            None => default_r(self.n, self.sigma)?,
        };
        let y = 1.0 / r - self.sigma;
        let s = if y > 0.0 { 1.0 / y } else { f64::INFINITY };
        let verdict = admissible(self.n, r, s);
        if !verdict.ok {
            return Err(Error::Inadmissible(verdict.reason));
        }
        if self.restarts == 0 && matches!(self.command, Command::ProjScaling | Command::ResolventScaling | Command::DyadicCertify) {
            return Err(Error::Invalid("restarts must be positive".into()));
        }
        Ok((r, s))
    }

    fn grid(&self, spec: &SphereSpec, degree: usize) -> Result<std::sync::Arc<ZonalGrid>> {
        match self.grid_points {
            Some(points) => make_grid(spec, points, degree),
            None => default_grid(spec, degree),
        }
    }
}

/// The configuration as actually run, defaults filled in.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub command: Command,
    pub n: usize,
    pub sigma: f64,
    pub r: f64,
    pub s: f64,
    pub k: Vec<usize>,
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub grid_points: Option<usize>,
    pub grid_rule: String,
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    /// `k` or `lam`.
    pub parameter: f64,
    pub r: f64,
    pub s: f64,
    pub lower: f64,
    pub upper: f64,
    pub predicted: f64,
    pub converged: bool,
    pub tail_ratio: Option<f64>,
    pub certificate: CertificateRecord,
}

/// Ordinary least squares of `ln lower` against `ln parameter`.
pub fn fit_slope(rows: &[(f64, f64)]) -> Result<LineFit> {
    if rows.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 rows, got {}", rows.len())));
    }
    if rows.iter().any(|(p, v)| !(*p > 0.0 && *v > 0.0)) {
        return Err(Error::DegenerateFit("parameters and values must be positive".into()));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    fit_line(&x, &y)
}

fn need<T>(list: &[T], name: &str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Invalid(format!("the {name} list is empty")));
    }
    Ok(())
}

pub fn projector_scaling(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    let (r, s) = cfg.validate()?;
    need(&cfg.k, "k")?;
    let spec = SphereSpec::new(cfg.n)?;
    let exponent = cfg.n as f64 * cfg.sigma - 1.0;
    cfg.k
        .par_iter()
        .map(|&k| {
            let op = ZonalOperator::new(ZonalKernel::projector(spec, k), cfg.grid(&spec, k)?)?;
            let cert = certify(&op, r, s, &cfg.ascent())?;
            Ok(ScalingRow {
                parameter: k as f64,
                r,
                s,
                lower: cert.lower,
                upper: cert.upper,
                predicted: (k as f64).powf(exponent),
                converged: cert.converged,
                tail_ratio: None,
                certificate: cert.record(),
            })
        })
        .collect()
}

pub fn resolvent_scaling(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    let (r, s) = cfg.validate()?;
    need(&cfg.lambda, "lambda")?;
    let spec = SphereSpec::new(cfg.n)?;
    let exponent = cfg.n as f64 * cfg.sigma - 2.0;
    cfg.lambda
        .par_iter()
        .map(|&lam| {
            let params = ResolventParams::new(lam, cfg.mu)?;
            let rk = resolvent_kernel(&spec, &params, None)?;
            let op = ZonalOperator::new(rk.kernel, cfg.grid(&spec, rk.kmax)?)?;
            let cert = certify(&op, r, s, &cfg.ascent())?;
            Ok(ScalingRow {
                parameter: lam,
                r,
                s,
                lower: cert.lower,
                upper: cert.upper,
                predicted: lam.powf(exponent),
                converged: cert.converged,
                tail_ratio: Some(rk.tail_ratio),
                certificate: cert.record(),
            })
        })
        .collect()
}

/// Endpoints and rates for summing the dyadic pieces at exponent gap `sigma`: growth at
/// `Q`, decay at `P`; when the decay rate vanishes (`sigma = 2/(n+1)`) the pair `A`, `B`
/// with rates `1/2` and `(n-1)/2` is used instead. At `sigma = 2/n` the growth rate
/// vanishes and there is nothing to sum geometrically.
pub fn certification_endpoints(n: usize, sigma: f64) -> Result<(ExponentPoint, ExponentPoint, f64, f64)> {
    let (decay_rate, growth_rate) = piece_rates(n, sigma);
    if growth_rate <= 1e-9 {
        return Err(Error::Inadmissible(format!(
            "dyadic summation needs a positive growth rate at Q, got {growth_rate:e} at σ = {sigma}"
        )));
    }
    if decay_rate > 1e-9 {
        let (p, q) = stein_point(n, sigma)?;
        return Ok((q, p, growth_rate, decay_rate));
    }
    let sp = special_points(n)?;
    Ok((sp.a, sp.b, 0.5, (n as f64 - 1.0) / 2.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct DyadicRun {
    pub k: usize,
    pub lambda: f64,
    pub count: usize,
    pub degree: usize,
    pub usable: Vec<usize>,
    pub growth_point: ExponentPoint,
    pub decay_point: ExponentPoint,
    /// Lower bounds for pieces `j = 1..=count`.
    pub growth_norms: Vec<f64>,
    pub decay_norms: Vec<f64>,
    /// Free fits of `log2` norms against `j` over the usable pieces.
    pub growth_fit: LineFit,
    pub decay_fit: LineFit,
    pub certification: Certification,
}

pub fn dyadic_run(spec: &SphereSpec, k: usize, sigma: f64, opts: &AscentOptions, grid_points: Option<usize>) -> Result<DyadicRun> {
    let decomp = dyadic_decompose(spec, k)?;
    let grid = match grid_points {
        Some(points) => make_grid(spec, points, decomp.degree)?,
        None => decomp.work_grid()?,
    };
    let ops = decomp.operators(&grid)?;
    let (growth_point, decay_point, beta1, beta2) = certification_endpoints(spec.n, sigma)?;
    let measured = (1..=decomp.count)
        .into_par_iter()
        .map(|j| -> Result<(f64, f64)> {
            let ascent = AscentOptions { scale: Some(decomp.pieces[j].support.0), ..opts.clone() };
            let g = norm_lower(&ops[j], growth_point.r(), growth_point.s(), &ascent)?.ratio;
            let d = norm_lower(&ops[j], decay_point.r(), decay_point.s(), &ascent)?.ratio;
            Ok((g, d))
        })
        .collect::<Result<Vec<_>>>()?;
    let growth_norms: Vec<f64> = measured.iter().map(|m| m.0).collect();
    let decay_norms: Vec<f64> = measured.iter().map(|m| m.1).collect();
    let usable = decomp.usable();
    if usable.len() < 3 {
        return Err(Error::DegenerateFit(format!("only {} usable dyadic pieces for k = {k}", usable.len())));
    }
    let x: Vec<f64> = usable.iter().map(|&j| j as f64).collect();
    let pick = |v: &[f64]| usable.iter().map(|&j| v[j - 1]).collect::<Vec<f64>>();
    let (ug, ud) = (pick(&growth_norms), pick(&decay_norms));
    let growth_fit = fit_line(&x, &ug.iter().map(|v| v.log2()).collect::<Vec<_>>())?;
    let decay_fit = fit_line(&x, &ud.iter().map(|v| v.log2()).collect::<Vec<_>>())?;
    let (m1, m2) = fit_constants(&usable, &ug, &ud, beta1, beta2)?;
    let data = make_interp(growth_point, decay_point, m1, m2, beta1, beta2)?;
    let pieces: Vec<MeasuredPiece> = (1..=decomp.count)
        .map(|j| MeasuredPiece {
            j,
            op: ops[j].clone(),
            growth_norm: growth_norms[j - 1],
            decay_norm: decay_norms[j - 1],
        })
        .collect();
    let caps = [1.0 / decomp.lambda, 0.125, 0.5];
    let certification = certify_restricted_weak(&pieces, &data, &caps)?;
    Ok(DyadicRun {
        k,
        lambda: decomp.lambda,
        count: decomp.count,
        degree: decomp.degree,
        usable,
        growth_point,
        decay_point,
        growth_norms,
        decay_norms,
        growth_fit,
        decay_fit,
        certification,
    })
}

pub fn dyadic_certify(cfg: &ExperimentConfig) -> Result<Vec<DyadicRun>> {
    cfg.validate()?;
    need(&cfg.k, "k")?;
    let spec = SphereSpec::new(cfg.n)?;
    cfg.k.iter().map(|&k| dyadic_run(&spec, k, cfg.sigma, &cfg.ascent(), cfg.grid_points)).collect()
}

pub fn envelopes(cfg: &ExperimentConfig) -> Result<Vec<Envelope>> {
    cfg.validate()?;
    need(&cfg.k, "k")?;
    let spec = SphereSpec::new(cfg.n)?;
    cfg.k.par_iter().map(|&k| envelope_check(&spec, k)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplierRow {
    pub lambda: f64,
    pub mu: f64,
    pub tau: f64,
    pub closed: Complex64,
    pub integral: Complex64,
    /// `| |closed| - |integral| | / |closed|`.
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub lambda: f64,
    pub mu: f64,
    /// `sup_tau |m_tail(tau)| lam (1 + |lam - tau|)^3` over `tau in [0, 4 lam]`.
    pub scaled_sup: f64,
    pub argmax: f64,
    /// `|m_tail(lam)| lam`.
    pub peak: f64,
}

/// Closed form against the time integral at 5 points of `[1, 2 lam]`.
pub fn multiplier_rows(lam: f64, mu: f64) -> Result<Vec<MultiplierRow>> {
    let params = ResolventParams::new(lam, mu)?;
    (0..5)
        .map(|i| {
            let tau = 1.0 + (2.0 * lam - 1.0) * i as f64 / 4.0;
            let closed = resolvent_multiplier(&params, tau)?;
            let integral = resolvent_multiplier_integral(&params, tau)?;
            Ok(MultiplierRow { lambda: lam, mu, tau, closed, integral, rel_error: (closed.norm() - integral.norm()).abs() / closed.norm() })
        })
        .collect()
}

pub fn tail_row(lam: f64, mu: f64) -> Result<TailRow> {
    let params = ResolventParams::new(lam, mu)?;
    let samples = 400;
    let scaled = (0..=samples)
        .into_par_iter()
        .map(|i| {
            let tau = 4.0 * lam * i as f64 / samples as f64;
            Ok((tail_multiplier(&params, tau)?.norm() * lam * (1.0 + (lam - tau).abs()).powi(3), tau))
        })
        .collect::<Result<Vec<_>>>()?;
    let (scaled_sup, argmax) = scaled.into_iter().fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    let peak = tail_multiplier(&params, lam)?.norm() * lam;
    Ok(TailRow { lambda: lam, mu, scaled_sup, argmax, peak })
}

pub fn multiplier_check(cfg: &ExperimentConfig) -> Result<(Vec<MultiplierRow>, Vec<TailRow>)> {
    cfg.validate()?;
    need(&cfg.lambda, "lambda")?;
    let mut rows = Vec::new();
    let mut tails = Vec::new();
    for &lam in &cfg.lambda {
        rows.extend(multiplier_rows(lam, cfg.mu)?);
        tails.push(tail_row(lam, cfg.mu)?);
    }
    Ok((rows, tails))
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: EffectiveConfig,
    pub rows: serde_json::Value,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    #[serde(skip)]
    pub csv: String,
}

fn e(v: f64) -> String {
    format!("{v:.14e}")
}

fn scaling_csv(header: &str, rows: &[ScalingRow], mu: Option<f64>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        let lead = match mu {
            Some(mu) => format!("{},{}", e(row.parameter), e(mu)),
            None => format!("{}", row.parameter as usize),
        };
        let _ = write!(out, "{lead},{},{},{},{},{}", e(row.r), e(row.s), e(row.lower), e(row.upper), e(row.predicted));
        if let Some(t) = row.tail_ratio {
            let _ = write!(out, ",{}", e(t));
        }
        out.push('\n');
    }
    out
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|err| Error::Invalid(format!("serialization failed: {err}")))
}

/// Runs one command. The CSV text is deterministic given the configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let (r, s) = cfg.validate()?;
    let spec = SphereSpec::new(cfg.n)?;
    let config = EffectiveConfig {
        command: cfg.command,
        n: cfg.n,
        sigma: cfg.sigma,
        r,
        s,
        k: cfg.k.clone(),
        lambda: cfg.lambda.clone(),
        mu: cfg.mu,
        grid_points: cfg.grid_points,
        grid_rule: match cfg.grid_points {
            Some(p) => format!("{p} nodes"),
            None => "4*max_degree+16 nodes".into(),
        },
        restarts: cfg.restarts,
        seed: cfg.seed,
    };
    let mut report = Report { config, rows: serde_json::Value::Null, slope: None, intercept: None, residual: None, csv: String::new() };
    let set_fit = |report: &mut Report, pairs: Vec<(f64, f64)>| {
        if let Ok(fit) = fit_slope(&pairs) {
            report.slope = Some(fit.slope);
            report.intercept = Some(fit.intercept);
            report.residual = Some(fit.residual);
        }
    };
    match cfg.command {
        Command::ProjScaling => {
            let rows = projector_scaling(cfg)?;
            report.csv = scaling_csv("k,r,s,lower,upper,predicted", &rows, None);
            set_fit(&mut report, rows.iter().map(|r| (r.parameter, r.lower)).collect());
            report.rows = to_json(&rows)?;
        }
        Command::ResolventScaling => {
            let rows = resolvent_scaling(cfg)?;
            report.csv = scaling_csv("lambda,mu,r,s,lower,upper,predicted,tail_ratio", &rows, Some(cfg.mu));
            set_fit(&mut report, rows.iter().map(|r| (r.parameter, r.lower)).collect());
            report.rows = to_json(&rows)?;
        }
        Command::DyadicCertify => {
            let runs = dyadic_certify(cfg)?;
            let mut csv = String::from("k,j,growth_norm,decay_norm,usable\n");
            for run in &runs {
                for j in 1..=run.count {
                    let _ = writeln!(
                        csv,
                        "{},{j},{},{},{}",
                        run.k,
                        e(run.growth_norms[j - 1]),
                        e(run.decay_norms[j - 1]),
                        run.usable.contains(&j)
                    );
                }
            }
            report.csv = csv;
            report.rows = to_json(&runs)?;
        }
        Command::Envelope => {
            let rows = envelopes(cfg)?;
            let mut csv = String::from("k,c_flat,c_osc,c_antipodal,global\n");
            for env in &rows {
                let _ = writeln!(csv, "{},{},{},{},{}", env.k, e(env.c_flat), e(env.c_osc), e(env.c_antipodal), e(env.global));
            }
            report.csv = csv;
            report.rows = to_json(&rows)?;
        }
        Command::MultiplierCheck => {
            let (rows, tails) = multiplier_check(cfg)?;
            let mut csv = String::from("lambda,mu,tau,closed_re,closed_im,integral_re,integral_im,rel_error\n");
            for row in &rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    e(row.lambda),
                    e(row.mu),
                    e(row.tau),
                    e(row.closed.re),
                    e(row.closed.im),
                    e(row.integral.re),
                    e(row.integral.im),
                    e(row.rel_error)
                );
            }
            report.csv = csv;
            report.rows = serde_json::json!({ "samples": to_json(&rows)?, "tails": to_json(&tails)? });
        }
        Command::ExponentMap => {
            report.csv = figure_csv(cfg.n, &[cfg.sigma])?;
            let kmax = default_kmax(cfg.lambda.iter().cloned().fold(1.0, f64::max));
            report.rows = serde_json::json!({
                "special_points": to_json(&special_points(spec.n)?)?,
                "stein_point": to_json(&stein_point(spec.n, cfg.sigma)?)?,
                "default_kmax": kmax,
            });
        }
    }
    Ok(report)
}

/// Exit status for an error: 2 for rejected configurations, 3 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Inadmissible(_) | Error::SigmaRange { .. } | Error::InvalidExponent(_) | Error::Invalid(_) | Error::Parse(_) => 2,
        _ => 3,
    }
}
