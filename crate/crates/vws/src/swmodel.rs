//! Nonlinear shallow water equations with the vorticity correction `Q`, the
//! reductions of a full state to shallow-water variables and the μ-sweep
//! that compares both models.
//!
//! In one horizontal dimension with a transverse velocity component:
//!
//! ```text
//! ∂tζ  + ∂x(h V̄x) = 0
//! ∂tV̄  + ε V̄x ∂xV̄ + (∂xζ, 0) = 0
//! ∂tQ  + ε V̄x ∂xQ + ε Qx ∂xV̄ = 0
//! V̲ ≈ V̄ − √μ Q
//! ```

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::divcurl::DivCurlSolution;
use crate::dynamics::{Evaluation, Model, Params, State, Stepper, TimeStep};
use crate::error::{Result, VwsError};
use crate::geometry::GeometryCache;
use crate::spectral::{Grid, SurfaceField, VectorVolumeField, VolumeField};

/// A pair of surface fields: x and y components.
pub type Pair = (SurfaceField, SurfaceField);

#[derive(Clone, Debug, PartialEq)]
pub struct SWState {
    pub t: f64,
    pub zeta: SurfaceField,
    pub vbar: Pair,
    pub q: Pair,
}

#[derive(Clone, Debug)]
pub struct SWTendency {
    pub zeta: SurfaceField,
    pub vbar: Pair,
    pub q: Pair,
}

impl SWState {
    pub fn constant(grid: &Grid, zeta: f64, vbar: (f64, f64), q: (f64, f64)) -> Self {
        let c = |v| SurfaceField::constant(grid.nx(), v);
        Self { t: 0.0, zeta: c(zeta), vbar: (c(vbar.0), c(vbar.1)), q: (c(q.0), c(q.1)) }
    }

    pub fn is_finite(&self) -> bool {
        [&self.zeta, &self.vbar.0, &self.vbar.1, &self.q.0, &self.q.1].iter().all(|f| f.is_finite())
    }

    fn axpy(&self, s: f64, d: &SWTendency) -> Self {
        Self {
            t: self.t + s,
            zeta: self.zeta.axpy(s, &d.zeta),
            vbar: (self.vbar.0.axpy(s, &d.vbar.0), self.vbar.1.axpy(s, &d.vbar.1)),
            q: (self.q.0.axpy(s, &d.q.0), self.q.1.axpy(s, &d.q.1)),
        }
    }
}

fn check_depth(s: &SWState, p: &Params) -> Result<SurfaceField> {
    let h = s.zeta.map(|z| 1.0 + p.eps * z);
    let min_depth = h.min();
    if min_depth < p.h_min {
        return Err(VwsError::DepthVanishes { min_depth, h_min: p.h_min });
    }
    Ok(h)
}

/// `(∂tζ, ∂tV̄)` of the nonlinear shallow water system, filtered.
pub fn nsw_rhs(grid: &Grid, s: &SWState, p: &Params) -> Result<(SurfaceField, Pair)> {
    let h = check_depth(s, p)?;
    let (vx, vy) = &s.vbar;
    let dzeta = grid.dx(&h.mul(vx)).scale(-1.0);
    let dvx = vx.mul(&grid.dx(vx)).scale(-p.eps).sub(&grid.dx(&s.zeta));
    let dvy = vx.mul(&grid.dx(vy)).scale(-p.eps);
    let f = |v: SurfaceField| grid.filter_surface(&v, &p.filter);
    Ok((f(dzeta), (f(dvx), f(dvy))))
}

/// `∂tQ = −ε V̄x ∂xQ − ε Qx ∂xV̄`, filtered.
pub fn q_rhs(grid: &Grid, s: &SWState, p: &Params) -> Pair {
    let (vx, vy) = &s.vbar;
    let (qx, qy) = &s.q;
    let f = |v: SurfaceField| grid.filter_surface(&v, &p.filter);
    let dqx = vx.mul(&grid.dx(qx)).add(&qx.mul(&grid.dx(vx))).scale(-p.eps);
    let dqy = vx.mul(&grid.dx(qy)).add(&qx.mul(&grid.dx(vy))).scale(-p.eps);
    (f(dqx), f(dqy))
}

fn sw_tendency(grid: &Grid, s: &SWState, p: &Params) -> Result<SWTendency> {
    let (zeta, vbar) = nsw_rhs(grid, s, p)?;
    Ok(SWTendency { zeta, vbar, q: q_rhs(grid, s, p) })
}

/// Characteristic-speed time step `cfl · Δx / max(ε|V̄x| + √h)`.
pub fn sw_cfl_dt(grid: &Grid, s: &SWState, p: &Params, cfl: f64) -> f64 {
    let speed = s
        .zeta
        .values
        .iter()
        .zip(&s.vbar.0.values)
        .map(|(z, v)| p.eps * v.abs() + (1.0 + p.eps * z).max(0.0).sqrt())
        .fold(0.0, f64::max);
    cfl * grid.dx_spacing() / speed.max(f64::MIN_POSITIVE)
}

/// One RK4 step of the shallow water system with the Q transport.
pub fn sw_step(grid: &Grid, s: &SWState, p: &Params, dt: f64) -> Result<SWState> {
    let k1 = sw_tendency(grid, s, p)?;
    let k2 = sw_tendency(grid, &s.axpy(0.5 * dt, &k1), p)?;
    let k3 = sw_tendency(grid, &s.axpy(0.5 * dt, &k2), p)?;
    let k4 = sw_tendency(grid, &s.axpy(dt, &k3), p)?;
    let mut out = s.axpy(dt / 6.0, &k1).axpy(dt / 3.0, &k2).axpy(dt / 3.0, &k3).axpy(dt / 6.0, &k4);
    out.t = s.t + dt;
    if !out.is_finite() {
        return Err(VwsError::NonFinite(format!("shallow water state at t = {}", out.t)));
    }
    check_depth(&out, p)?;
    Ok(out)
}

/// Integrates to `t_end` with the configured step rule, landing on it exactly.
pub fn sw_run(grid: &Grid, s: &SWState, p: &Params, t_end: f64) -> Result<SWState> {
    let mut s = s.clone();
    while s.t < t_end - 1e-12 * t_end.abs().max(1.0) {
        let dt = match p.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(c) => sw_cfl_dt(grid, &s, p, c),
        };
        s = sw_step(grid, &s, p, dt.min(t_end - s.t))?;
    }
    Ok(s)
}

/// `∫(ζ² + h|V̄|²)/2`, conserved by smooth solutions when ε = 1.
pub fn nsw_energy(grid: &Grid, s: &SWState, eps: f64) -> f64 {
    let h = s.zeta.map(|z| 1.0 + eps * z);
    let v2 = s.vbar.0.mul(&s.vbar.0).add(&s.vbar.1.mul(&s.vbar.1));
    0.5 * grid.surface_integral(&s.zeta.mul(&s.zeta).add(&h.mul(&v2)))
}

/// `V̄ − √μ Q`.
pub fn reconstruct_surface_velocity(s: &SWState, mu: f64) -> Pair {
    let sm = mu.sqrt();
    (s.vbar.0.axpy(-sm, &s.q.0), s.vbar.1.axpy(-sm, &s.q.1))
}

/// `V̄ = (1/h) ∫ J V dz` for the horizontal components of a reconstruction.
pub fn depth_average(sol: &DivCurlSolution, geo: &GeometryCache) -> Pair {
    let g = &geo.grid;
    let avg = |f: &VolumeField| g.column_integral(&f.mul(&geo.jac)).zip_map(&geo.h, |a, h| a / h);
    (avg(&sol.velocity.x), avg(&sol.velocity.y))
}

/// `(ω_h)^⊥ = (−ω₂, ω₁)`.
fn horizontal_perp(omega: &VectorVolumeField) -> (VolumeField, VolumeField) {
    (omega.y.scale(-1.0), omega.x.clone())
}

/// `∫_z^ζ f dZ'` in physical depth for every grid point.
fn integral_to_surface(geo: &GeometryCache, f: &VolumeField) -> VolumeField {
    geo.grid.integrate_down(&f.mul(&geo.jac))
}

/// `Q = (1/h) ∫_{-1}^ζ ∫_{z'}^ζ (ω_h)^⊥`, both integrals in physical depth.
pub fn q_from_vorticity(omega: &VectorVolumeField, geo: &GeometryCache) -> Pair {
    let g = &geo.grid;
    let (px, py) = horizontal_perp(omega);
    let q = |f: &VolumeField| {
        let inner = integral_to_surface(geo, f);
        g.column_integral(&inner.mul(&geo.jac)).zip_map(&geo.h, |a, h| a / h)
    };
    (q(&px), q(&py))
}

/// Shallow-water data of a full state: `(ζ, V̄, Q)`.
pub fn reduce_state(s: &State, ev: &Evaluation) -> SWState {
    SWState {
        t: s.t,
        zeta: s.zeta.clone(),
        vbar: depth_average(&ev.sol, &ev.geo),
        q: q_from_vorticity(&s.omega, &ev.geo),
    }
}

/// Residuals of the velocity structure, in the `U^μ = (√μV, w)` scaling.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct StructureReport {
    /// `max |√μ V − √μ V̄ − μ(∫_z^ζ (ω_h)^⊥ − Q)|`.
    pub horizontal: f64,
    /// `max |w + μ (1+Z) ∂x²ψ|`.
    pub vertical: f64,
}

impl StructureReport {
    pub fn max(&self) -> f64 {
        self.horizontal.max(self.vertical)
    }
}

/// Compares a reconstructed velocity with its shallow-water structure.
pub fn structure_check(s: &State, ev: &Evaluation) -> StructureReport {
    let geo = &ev.geo;
    let g = &geo.grid;
    let (mu, sm) = (geo.mu, geo.sqrt_mu);
    let (vbx, vby) = depth_average(&ev.sol, geo);
    let (qx, qy) = q_from_vorticity(&s.omega, geo);
    let (px, py) = horizontal_perp(&s.omega);
    let u = &ev.sol.velocity;
    let horizontal = |v: &VolumeField, vbar: &SurfaceField, perp: &VolumeField, q: &SurfaceField| -> f64 {
        let model = VolumeField::from_surface(g, vbar)
            .add(&integral_to_surface(geo, perp).sub(&VolumeField::from_surface(g, q)).scale(sm));
        v.sub(&model).max_abs() * sm
    };
    let hx = horizontal(&u.x, &vbx, &px, &qx);
    let hy = horizontal(&u.y, &vby, &py, &qy);
    let psi_xx = g.dx_n(&s.psi, 2);
    let depth = VolumeField::from_fn(g, |_, z| 1.0 + z).mul_surface(&geo.h);
    let w_model = depth.mul_surface(&psi_xx).scale(-mu);
    StructureReport { horizontal: hx.max(hy), vertical: u.z.sub(&w_model).max_abs() }
}

/// Settings of the shallow-water justification sweep.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct JustifyConfig {
    pub eps: f64,
    pub mus: Vec<f64>,
    pub t_end: f64,
    /// Amplitude of the initial elevation `a cos(mode x)`.
    pub amplitude: f64,
    pub mode: u32,
    /// Constant horizontal vorticity `ω⁰ = (shear, 0, 0)`.
    pub shear: f64,
    pub lx: f64,
    pub nx: usize,
    pub nz: usize,
    pub dt: f64,
    /// Repeat every full run at doubled resolution and halved step to
    /// estimate its own discretization error.
    pub self_check: bool,
}

impl Default for JustifyConfig {
    fn default() -> Self {
        Self {
            eps: 1.0,
            mus: vec![0.04, 0.01, 0.0025],
            t_end: 0.5,
            amplitude: 0.05,
            mode: 1,
            shear: 1.0,
            lx: std::f64::consts::TAU,
            nx: 32,
            nz: 13,
            dt: 0.01,
            self_check: true,
        }
    }
}

impl JustifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mus.is_empty() || self.mus.iter().any(|m| !(*m > 0.0 && *m <= 1.0)) {
            return Err(VwsError::Config("mus must be a non-empty list in (0, 1]".into()));
        }
        if !(self.t_end > 0.0 && self.dt > 0.0 && self.amplitude.is_finite() && self.shear.is_finite()) {
            return Err(VwsError::Config("t_end and dt must be positive and the data finite".into()));
        }
        self.params(self.mus[0], 1).validate()
    }

    fn params(&self, mu: f64, refine: usize) -> Params {
        Params {
            eps: self.eps,
            mu,
            lx: self.lx,
            nx: self.nx * refine,
            nz: (self.nz - 1) * refine + 1,
            time_step: TimeStep::Fixed(self.dt / refine as f64),
            ..Params::default()
        }
    }

    /// `(a cos(mode x), 0, (shear, 0, 0))`.
    pub fn initial_state(&self, grid: &Grid) -> State {
        let k = self.mode as f64 * std::f64::consts::TAU / self.lx;
        let mut s = State::rest(grid);
        s.zeta = SurfaceField::from_fn(grid, |x| self.amplitude * (k * x).cos());
        s.omega.x = VolumeField::constant(grid, self.shear);
        s
    }
}

/// Errors of the shallow-water model against the full model at one μ.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct JustifyRow {
    pub mu: f64,
    pub err_zeta: f64,
    pub err_vbar: f64,
    pub err_usurf_uncorrected: f64,
    pub err_usurf_corrected: f64,
    /// Largest structure residual over the initial and final full states.
    pub structure: f64,
    /// Difference between the full runs at base and doubled resolution.
    pub self_error: Option<f64>,
    pub runtime_s: f64,
}

fn max_pair(a: &Pair, b: &Pair) -> f64 {
    a.0.sub(&b.0).max_abs().max(a.1.sub(&b.1).max_abs())
}

fn surface_velocity(ev: &Evaluation) -> Pair {
    (ev.sol.velocity.x.surface(), ev.sol.velocity.y.surface())
}

struct FullRun {
    state: State,
    eval: Evaluation,
    structure: f64,
}

fn run_full(cfg: &JustifyConfig, mu: f64, refine: usize) -> Result<(FullRun, SWState)> {
    let model = Model::new(cfg.params(mu, refine))?;
    let initial = cfg.initial_state(&model.grid);
    let mut stepper = Stepper::new(model, &initial)?;
    let sw0 = reduce_state(stepper.state(), stepper.evaluation());
    let s0 = structure_check(stepper.state(), stepper.evaluation()).max();
    stepper.run_until(cfg.t_end, |_, _| Ok(()))?;
    let eval = stepper.evaluation().clone();
    let state = stepper.state().clone();
    let structure = s0.max(structure_check(&state, &eval).max());
    Ok((FullRun { state, eval, structure }, sw0))
}

/// Samples a finer-grid surface field on the coarse grid (every `r`-th point).
fn restrict(f: &SurfaceField, r: usize) -> SurfaceField {
    SurfaceField::new(f.values.iter().step_by(r).copied().collect())
}

/// Runs the full model and the shallow-water model for one μ and compares
/// them at `t_end`.
pub fn justify_one(cfg: &JustifyConfig, mu: f64) -> Result<JustifyRow> {
    let start = Instant::now();
    let (full, sw0) = run_full(cfg, mu, 1)?;
    let params = cfg.params(mu, 1);
    let grid = Arc::clone(&full.eval.geo.grid);
    let sw = sw_run(&grid, &sw0, &params, cfg.t_end)?;
    let reduced = reduce_state(&full.state, &full.eval);
    let surf = surface_velocity(&full.eval);
    let corrected = reconstruct_surface_velocity(&sw, mu);
    let mut row = JustifyRow {
        mu,
        err_zeta: full.state.zeta.sub(&sw.zeta).max_abs(),
        err_vbar: max_pair(&reduced.vbar, &sw.vbar),
        err_usurf_uncorrected: max_pair(&surf, &sw.vbar),
        err_usurf_corrected: max_pair(&surf, &corrected),
        structure: full.structure,
        self_error: None,
        runtime_s: 0.0,
    };
    if cfg.self_check {
        let (fine, _) = run_full(cfg, mu, 2)?;
        let fr = reduce_state(&fine.state, &fine.eval);
        let fs = surface_velocity(&fine.eval);
        let r = |p: &Pair| (restrict(&p.0, 2), restrict(&p.1, 2));
        let e = restrict(&fine.state.zeta, 2)
            .sub(&full.state.zeta)
            .max_abs()
            .max(max_pair(&r(&fr.vbar), &reduced.vbar))
            .max(max_pair(&r(&fs), &surf));
        row.self_error = Some(e);
    }
    row.runtime_s = start.elapsed().as_secs_f64();
    Ok(row)
}

/// Ratios between consecutive entries of a μ-sweep and a log-log slope.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct JustifySummary {
    pub ratio_zeta: Vec<f64>,
    pub ratio_vbar: Vec<f64>,
    pub ratio_uncorrected: Vec<f64>,
    pub ratio_corrected: Vec<f64>,
    /// Least-squares slope of log(structure residual) against log μ.
    pub structure_slope: f64,
    /// Largest self-discretization error over the smallest model error.
    pub self_error_fraction: Option<f64>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn summarize(rows: &[JustifyRow]) -> JustifySummary {
    let ratios = |f: fn(&JustifyRow) -> f64| rows.windows(2).map(|w| f(&w[0]) / f(&w[1])).collect::<Vec<_>>();
    let mus: Vec<f64> = rows.iter().map(|r| r.mu).collect();
    let st: Vec<f64> = rows.iter().map(|r| r.structure).collect();
    let smallest = rows
        .iter()
        .flat_map(|r| [r.err_zeta, r.err_vbar, r.err_usurf_uncorrected, r.err_usurf_corrected])
        .fold(f64::INFINITY, f64::min);
    let self_max = rows.iter().filter_map(|r| r.self_error).fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
    JustifySummary {
        ratio_zeta: ratios(|r| r.err_zeta),
        ratio_vbar: ratios(|r| r.err_vbar),
        ratio_uncorrected: ratios(|r| r.err_usurf_uncorrected),
        ratio_corrected: ratios(|r| r.err_usurf_corrected),
        structure_slope: if rows.len() >= 2 { loglog_slope(&mus, &st) } else { f64::NAN },
        self_error_fraction: self_max.map(|e| e / smallest),
    }
}

/// The whole sweep, one μ after another.
pub fn justification_harness(cfg: &JustifyConfig) -> Result<(Vec<JustifyRow>, JustifySummary)> {
    cfg.validate()?;
    let rows = cfg.mus.iter().map(|&mu| justify_one(cfg, mu)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(&rows);
    Ok((rows, summary))
}
