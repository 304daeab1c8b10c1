use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{zonal_diagonal, zonal_value, SphereSpec};

/// Observed constants in the size bounds for `Z_k(cos theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub k: usize,
    /// `max_{theta <= 1/lambda} |Z_k| / k^{n-1}`.
    pub c_flat: f64,
    /// `max |Z_k| theta^{(n-1)/2} / lambda^{(n-1)/2}` on `[1/lambda, 3 pi / 4]`.
    pub c_osc: f64,
    /// The same with `pi - theta` on `[pi/4, pi - 1/lambda]`.
    pub c_antipodal: f64,
    /// `max |Z_k| / k^{n-1}` over the whole sphere.
    pub global: f64,
}

fn sweep(lo: f64, hi: f64, samples: usize, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut best: f64 = 0.0;
    for i in 0..=samples {
        let th = lo + (hi - lo) * i as f64 / samples as f64;
        best = best.max(f(th)?);
    }
    Ok(best)
}

pub fn envelope_check(spec: &SphereSpec, k: usize) -> Result<Envelope> {
    if k < 4 {
        return Err(Error::Domain(format!("envelope check needs k >= 4, got {k}")));
    }
    let lam = spec.eigenvalue(k);
    let half = (spec.n as f64 - 1.0) / 2.0;
    let kn = (k as f64).powi(spec.n as i32 - 1);
    let z = |th: f64| -> Result<f64> { Ok(zonal_value(spec, k, th.cos())?.abs()) };
    // Resolve every oscillation with tens of samples.
    let samples = 64 * (k + 1) + 1000;
    let c_flat = sweep(0.0, 1.0 / lam, 1000, |th| Ok(z(th)? / kn))?;
    let c_osc = sweep(1.0 / lam, 0.75 * PI, samples, |th| Ok(z(th)? * (th / lam).powf(half)))?;
    let c_antipodal = sweep(0.25 * PI, PI - 1.0 / lam, samples, |th| Ok(z(th)? * ((PI - th) / lam).powf(half)))?;
    Ok(Envelope { k, c_flat, c_osc, c_antipodal, global: zonal_diagonal(spec, k) / kn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parity_mirror_and_uniformity() {
        let spec = SphereSpec::new(3).unwrap();
        let envs: Vec<Envelope> = [8, 16, 32, 64].iter().map(|&k| envelope_check(&spec, k).unwrap()).collect();
        for e in &envs {
            assert_relative_eq!(e.c_osc, e.c_antipodal, max_relative = 1e-3);
            assert!(e.c_flat <= e.global * (1.0 + 1e-12));
        }
        let osc: Vec<f64> = envs.iter().map(|e| e.c_osc).collect();
        let spread = osc.iter().cloned().fold(0.0, f64::max) / osc.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 2.0);
        assert!(envelope_check(&spec, 3).is_err());
    }
}
