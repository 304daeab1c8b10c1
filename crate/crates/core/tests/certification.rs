use num_complex::Complex64;

use spherelab::exponents::stein_point;
use spherelab::interpolation::{certify_restricted_weak, make_interp, MeasuredPiece};
use spherelab::operators::{dyadic_decompose, norm_lower, AscentOptions};
use spherelab::specfun::SphereSpec;
use spherelab::sphere::{cap, weak_lq, ZonalFunction};

#[test]
fn single_piece_is_tight() {
    let spec = SphereSpec::new(3).unwrap();
    let d = dyadic_decompose(&spec, 16).unwrap();
    let grid = d.work_grid().unwrap();
    let ops = d.operators(&grid).unwrap();
    let (p, q) = stein_point(3, 0.6).unwrap();
    let j = 5;
    let opts = AscentOptions { restarts: 4, scale: Some(d.pieces[j].support.0), ..Default::default() };
    let growth = norm_lower(&ops[j], q.r(), q.s(), &opts).unwrap().ratio;
    let decay = norm_lower(&ops[j], p.r(), p.s(), &opts).unwrap().ratio;
    let (b1, b2) = (0.2, 0.2);
    let m1 = growth / 2f64.powf(b1 * j as f64);
    let m2 = decay * 2f64.powf(b2 * j as f64);
    let data = make_interp(q, p, m1, m2, b1, b2).unwrap();
    let piece = MeasuredPiece { j, op: ops[j].clone(), growth_norm: growth, decay_norm: decay };
    let cert = certify_restricted_weak(&[piece], &data, &[1.0 / d.lambda, 0.125, 0.5]).unwrap();
    assert!(cert.c_obs > 0.0 && cert.c_obs <= 1.02, "C_obs = {}", cert.c_obs);
    assert!(cert.violations.is_empty());
}

#[test]
fn whole_sphere_is_annihilated() {
    let spec = SphereSpec::new(3).unwrap();
    let d = dyadic_decompose(&spec, 8).unwrap();
    let grid = d.work_grid().unwrap();
    let ops = d.operators(&grid).unwrap();
    let assemble = |theta0: f64| {
        let e = cap(&grid, theta0).unwrap();
        let mut total = vec![Complex64::new(0.0, 0.0); grid.points()];
        for op in &ops {
            for (t, v) in total.iter_mut().zip(op.apply_values(&e.function.values)) {
                *t += v;
            }
        }
        weak_lq(&ZonalFunction::new(grid.clone(), total).unwrap(), 3.0).unwrap().value
    };
    let whole = assemble(std::f64::consts::PI);
    let half = assemble(0.5);
    assert!(whole < 1e-10 * half, "whole {whole}, half {half}");
}
