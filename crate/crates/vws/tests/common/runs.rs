//! Trajectory runs shared by the dynamics tests and the acceptance report.

use super::zcs::Zcs;
use vws::dynamics::{Model, Params, State, Stepper, TimeStep};
use vws::samples;
use vws::spectral::{FilterSpec, SurfaceField};

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sup-norm distance between the generalized stepper with `ω = 0` and the
/// classical solver over `T = 0.5`, checked after every step.
pub fn irrotational_mismatch() -> f64 {
    let (eps, mu, nx, nz, dt) = (0.5, 0.5, 32, 17, 0.01);
    let mut p = Params { eps, mu, nx, nz, time_step: TimeStep::Fixed(dt), filter: FilterSpec::none(), ..Params::default() };
    p.tol.krylov = 1e-13;
    let model = Model::new(p).unwrap();
    let g = model.grid.clone();
    let mut s = State::rest(&g);
    s.zeta = SurfaceField::from_fn(&g, |x| 0.02 * x.cos() + 0.005 * (2.0 * x).sin());
    s.psi = SurfaceField::from_fn(&g, |x| 0.03 * x.sin() - 0.01 * (3.0 * x).cos());
    let oracle = Zcs::new(nx, nz, eps, mu);
    assert!(max_diff(&oracle.x, g.x()) < 1e-15 && max_diff(&oracle.z, g.z()) < 1e-15);

    let mut stepper = Stepper::new(model, &s).unwrap();
    let (mut zeta, mut psi) = (s.zeta.values.clone(), s.psi.remove_mean().values);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        stepper.advance(Some(dt)).unwrap();
        (zeta, psi) = oracle.rk4(&zeta, &psi, dt);
        let st = stepper.state();
        worst = worst.max(max_diff(&st.zeta.values, &zeta)).max(max_diff(&st.psi.values, &psi));
        assert_eq!(st.omega.max_abs(), 0.0);
    }
    assert!((stepper.state().t - 0.5).abs() < 1e-12);
    worst
}

/// Largest post-projection divergence over 1000 steps with cleaning every
/// step, and the final vorticity size.
pub fn divergence_run() -> (f64, f64) {
    let p = Params { eps: 0.3, mu: 0.3, nx: 64, nz: 17, time_step: TimeStep::Fixed(0.005), clean_every: 1, ..Params::default() };
    let model = Model::new(p).unwrap();
    let s0 = samples::state(&model, 21, 0.1).unwrap();
    let mut stepper = Stepper::new(model, &s0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        worst = worst.max(stepper.advance(None).unwrap().div);
    }
    (worst, stepper.state().omega.max_abs())
}

/// Relative energy drift over `t_end` at fixed step `dt` for a smooth
/// rotational state at the reference resolution.
pub fn energy_drift(dt: f64, t_end: f64) -> f64 {
    let mut p = Params { time_step: TimeStep::Fixed(dt), ..Params::default() };
    p.tol.krylov = 1e-12;
    let model = Model::new(p).unwrap();
    let s0 = samples::state(&model, 5, 0.1).unwrap();
    let mut stepper = Stepper::new(model, &s0).unwrap();
    let h0 = stepper.model.energy_parts(stepper.state(), stepper.evaluation()).total;
    stepper.run_until(t_end, |_, _| Ok(())).unwrap();
    let h1 = stepper.model.energy_parts(stepper.state(), stepper.evaluation()).total;
    ((h1 - h0) / h0).abs()
}
