//! Time evolution of the dimensionless water-waves system with vorticity.
//!
//! The unknowns are the surface elevation `ζ`, the trace `ψ` of the velocity
//! potential part, and the vorticity `ω` on the straightened strip. Each
//! right-hand-side evaluation reconstructs the velocity with
//! [`DivCurlSolver`], then evaluates
//!
//! ```text
//! ∂tζ = G
//! ∂tψ = −ζ − (ε/2)|U∥|² + (ε/2μ)(1 + ε²μ ζx²) w̲² + ε ∂x⁻¹((ω̲·N^μ) V̲_y)
//! ∂tω = −ε V_x ∂xω − (ε/μ) 𝕒 ∂zω + (ε/μ)(ω₁ √μ ∂x^σ + ω₃ ∂z^σ) U^μ
//! ```
//!
//! where `G = −∂x ∫ J V_x dz` and `𝕒` is the vertical advection coefficient
//! in straightened coordinates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::divcurl::{divergence_residual, Checks, DivCurlSolution, DivCurlSolver, Tolerances, TransverseGauge};
use crate::error::{Result, VwsError};
use crate::geometry::{good_unknown, GeometryCache};
use crate::spectral::{FilterSpec, Grid, SurfaceField, VectorVolumeField, VolumeField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    Fixed(f64),
    /// CFL number applied to the gravity-wave, horizontal-advection and
    /// vertical-advection limits.
    Cfl(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub eps: f64,
    pub mu: f64,
    pub lx: f64,
    pub nx: usize,
    pub nz: usize,
    pub time_step: TimeStep,
    pub filter: FilterSpec,
    pub tol: Tolerances,
    pub h_min: f64,
    /// Floor for the Rayleigh–Taylor coefficient.
    pub a_min: f64,
    pub n_energy: u32,
    pub clean_every: usize,
    pub gauge: TransverseGauge,
    /// Upper bounds of the admissible parameter box.
    pub eps_max: f64,
    pub mu_max: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            eps: 0.1,
            mu: 0.25,
            lx: 2.0 * std::f64::consts::PI,
            nx: 64,
            nz: 17,
            time_step: TimeStep::Cfl(0.5),
            filter: FilterSpec::default(),
            tol: Tolerances::default(),
            h_min: 0.05,
            a_min: 0.05,
            n_energy: 3,
            clean_every: 1,
            gauge: TransverseGauge::ZeroMomentum,
            eps_max: 1.0,
            mu_max: 1.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(VwsError::InvalidParams(m));
        if !(self.eps > 0.0 && self.eps <= self.eps_max) {
            return bad(format!("eps = {} must lie in (0, {}]", self.eps, self.eps_max));
        }
        if !(self.mu > 0.0 && self.mu <= self.mu_max) {
            return bad(format!("mu = {} must lie in (0, {}]", self.mu, self.mu_max));
        }
        if self.nx < 8 || !self.nx.is_multiple_of(2) || self.nz < 5 {
            return Err(VwsError::InvalidGrid(format!(
                "nx = {} must be even and >= 8, nz = {} must be >= 5",
                self.nx, self.nz
            )));
        }
        if !(self.lx > 0.0 && self.lx.is_finite()) {
            return Err(VwsError::InvalidGrid(format!("Lx = {} must be positive", self.lx)));
        }
        match self.time_step {
            TimeStep::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => return bad(format!("dt = {dt} must be positive")),
            TimeStep::Cfl(c) if !(c > 0.0 && c.is_finite()) => return bad(format!("CFL = {c} must be positive")),
            _ => {}
        }
        let t = &self.tol;
        if !(t.krylov > 0.0 && t.div > 0.0 && t.mean > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.h_min > 0.0 && self.h_min < 1.0) {
            return bad(format!("h_min = {} must lie in (0, 1)", self.h_min));
        }
        if !self.a_min.is_finite() {
            return bad("a_min must be finite".into());
        }
        if self.n_energy < 1 {
            return bad("n_energy must be at least 1".into());
        }
        if self.clean_every < 1 {
            return bad("clean_every must be at least 1".into());
        }
        if !(self.filter.alpha >= 0.0) {
            return bad("filter strength must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub zeta: SurfaceField,
    pub psi: SurfaceField,
    pub omega: VectorVolumeField,
}

impl State {
    pub fn rest(grid: &Grid) -> Self {
        Self {
            t: 0.0,
            zeta: SurfaceField::zeros(grid.nx()),
            psi: SurfaceField::zeros(grid.nx()),
            omega: VectorVolumeField::zeros(grid),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.zeta.is_finite() && self.psi.is_finite() && self.omega.is_finite()
    }

    /// `self + s·d` (time unchanged).
    pub fn axpy(&self, s: f64, d: &Tendency) -> Self {
        Self {
            t: self.t,
            zeta: self.zeta.axpy(s, &d.zeta),
            psi: self.psi.axpy(s, &d.psi),
            omega: self.omega.axpy(s, &d.omega),
        }
    }
}

/// Time derivatives of the three unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendency {
    pub zeta: SurfaceField,
    pub psi: SurfaceField,
    pub omega: VectorVolumeField,
}

impl Tendency {
    pub fn max_abs(&self) -> f64 {
        self.zeta.max_abs().max(self.psi.max_abs()).max(self.omega.max_abs())
    }
    pub fn sub(&self, o: &Self) -> Self {
        Self { zeta: self.zeta.sub(&o.zeta), psi: self.psi.sub(&o.psi), omega: self.omega.sub(&o.omega) }
    }
}

/// Surface quantities entering the ψ-equation. `w̲` and `V̲_x` are obtained
/// from `G` and `∂xψ`, which are the exact inversions of
/// `U∥·e_x = V̲_x + ε w̲ ζx = ∂xψ` and `G = w̲/μ − ε ζx V̲_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceKinematics {
    pub dn: SurfaceField,
    pub psi_x: SurfaceField,
    pub w: SurfaceField,
    pub vx: SurfaceField,
    pub vy: SurfaceField,
    /// `ω̲·N^μ`.
    pub vorticity_flux: SurfaceField,
}

/// Potential, kinetic and total energy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub potential: f64,
    pub kinetic: f64,
    pub total: f64,
}

/// Terms of the energy norm `ℰᴺ`, each already carrying its factor ½.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    pub zeta: f64,
    pub p_psi: f64,
    pub good_unknowns: f64,
    pub omega: f64,
    pub bottom_flux: f64,
    pub hamiltonian: EnergyParts,
    pub min_h: f64,
    /// Minimum of the Rayleigh–Taylor coefficient when known.
    pub min_a: Option<f64>,
}

/// Everything derived from one state in one reconstruction.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub geo: GeometryCache,
    pub sol: DivCurlSolution,
    pub surface: SurfaceKinematics,
}

/// A grid, the parameters and a div-curl solver bundled together.
#[derive(Debug)]
pub struct Model {
    pub params: Params,
    pub grid: Arc<Grid>,
    pub solver: DivCurlSolver,
}

impl Model {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        let grid = Arc::new(Grid::new(params.nx, params.nz, params.lx)?);
        let solver = DivCurlSolver::new(grid.clone(), params.mu, params.tol, params.gauge)?;
        Ok(Self { params, grid, solver })
    }

    pub fn geometry(&self, zeta: &SurfaceField) -> Result<GeometryCache> {
        GeometryCache::new(self.grid.clone(), zeta, self.params.eps, self.params.mu, self.params.h_min)
    }

    pub fn check_state(&self, s: &State) -> Result<()> {
        self.grid.check_surface(&s.zeta)?;
        self.grid.check_surface(&s.psi)?;
        for c in s.omega.components() {
            self.grid.check_volume(c)?;
        }
        if !s.is_finite() {
            return Err(VwsError::NonFinite("state".into()));
        }
        Ok(())
    }

    pub fn evaluate(&self, s: &State, checks: Checks) -> Result<Evaluation> {
        self.check_state(s)?;
        let geo = self.geometry(&s.zeta)?;
        let sol = self.solver.reconstruct_with(&geo, &s.psi, &s.omega, checks)?;
        let surface = self.surface_kinematics(&geo, &s.psi, &s.omega, &sol);
        Ok(Evaluation { geo, sol, surface })
    }

    pub fn surface_kinematics(
        &self,
        geo: &GeometryCache,
        psi: &SurfaceField,
        omega: &VectorVolumeField,
        sol: &DivCurlSolution,
    ) -> SurfaceKinematics {
        let (eps, mu) = (self.params.eps, self.params.mu);
        let psi_x = self.grid.dx(psi);
        let zx = &geo.zeta_x;
        let dn = sol.dn.clone();
        let mut w = SurfaceField::zeros(self.grid.nx());
        let mut vx = SurfaceField::zeros(self.grid.nx());
        for i in 0..w.len() {
            let z = zx.values[i];
            w.values[i] = mu * (dn.values[i] + eps * z * psi_x.values[i]) / (1.0 + eps * eps * mu * z * z);
            vx.values[i] = psi_x.values[i] - eps * z * w.values[i];
        }
        SurfaceKinematics {
            dn,
            psi_x,
            w,
            vx,
            vy: sol.surface.vy.clone(),
            vorticity_flux: geo.surface_normal_flux(omega),
        }
    }

    /// Unfiltered right-hand side for a reconstructed state.
    pub fn raw_rhs(&self, s: &State, ev: &Evaluation) -> Tendency {
        let (eps, mu) = (self.params.eps, self.params.mu);
        let g = &self.grid;
        let k = &ev.surface;
        let zx = &ev.geo.zeta_x;
        let mut dpsi = SurfaceField::zeros(g.nx());
        for i in 0..dpsi.len() {
            let (px, vy, w, z) = (k.psi_x.values[i], k.vy.values[i], k.w.values[i], zx.values[i]);
            dpsi.values[i] = -s.zeta.values[i] - 0.5 * eps * (px * px + vy * vy)
                + 0.5 * eps / mu * (1.0 + eps * eps * mu * z * z) * w * w;
        }
        let coupling = k.vorticity_flux.mul(&k.vy);
        let dpsi = dpsi.add(&g.inv_dx(&coupling).scale(eps)).remove_mean();
        let domega = self.advect_vorticity(&s.omega, &ev.geo, &ev.sol);
        Tendency { zeta: k.dn.clone(), psi: dpsi, omega: domega }
    }

    fn filter(&self, t: Tendency) -> Tendency {
        let f = &self.params.filter;
        if f.is_identity() {
            return t;
        }
        let g = &self.grid;
        Tendency {
            zeta: g.filter_surface(&t.zeta, f),
            psi: g.filter_surface(&t.psi, f),
            omega: t.omega.map_components(|c| g.filter_volume(c, f)),
        }
    }

    /// Filtered right-hand side; intermediate stages are reconstructed leniently.
    pub fn rhs(&self, s: &State) -> Result<Tendency> {
        let ev = self.evaluate(s, Checks::Lenient)?;
        Ok(self.filter(self.raw_rhs(s, &ev)))
    }

    /// `𝕒 = (w − μ ∂xσ V_x − μ(1+z) G) / J`.
    pub fn vertical_advection_coeff(&self, geo: &GeometryCache, sol: &DivCurlSolution) -> VolumeField {
        let mu = self.params.mu;
        let u = &sol.velocity;
        let one_plus_z = VolumeField::from_fn(&self.grid, |_, z| 1.0 + z);
        let gterm = one_plus_z.mul_surface(&sol.dn).scale(mu);
        let mut a = u.z.sub(&geo.sigma_x.mul(&u.x).scale(mu)).sub(&gterm);
        for (v, j) in a.values.iter_mut().zip(&geo.jac.values) {
            *v /= j;
        }
        a
    }

    /// `−ε V_x ∂xω − (ε/μ) 𝕒 ∂zω + (ε/μ)(ω₁ √μ ∂x^σ + ω₃ ∂z^σ) U^μ`.
    pub fn advect_vorticity(&self, omega: &VectorVolumeField, geo: &GeometryCache, sol: &DivCurlSolution) -> VectorVolumeField {
        let g = &self.grid;
        if omega.max_abs() == 0.0 {
            return VectorVolumeField::zeros(g);
        }
        let (eps, mu) = (self.params.eps, self.params.mu);
        let a = self.vertical_advection_coeff(geo, sol);
        let vx = &sol.velocity.x;
        let umu = geo.velocity_to_mu(&sol.velocity);
        let s1 = omega.x.scale(geo.sqrt_mu);
        let transport = |w: &VolumeField| -> VolumeField {
            let wx = g.dx_volume(w);
            let wz = g.dz_volume(w);
            let mut out = VolumeField::zeros(g);
            for n in 0..out.values.len() {
                out.values[n] = -eps * vx.values[n] * wx.values[n] - eps / mu * a.values[n] * wz.values[n];
            }
            out
        };
        let stretch = |c: &VolumeField| -> VolumeField {
            let cx = geo.dx_sigma(c);
            let cz = geo.dz_sigma(c);
            let mut out = VolumeField::zeros(g);
            for n in 0..out.values.len() {
                out.values[n] = eps / mu * (s1.values[n] * cx.values[n] + omega.z.values[n] * cz.values[n]);
            }
            out
        };
        VectorVolumeField::new(
            transport(&omega.x).add(&stretch(&umu.x)),
            transport(&omega.y).add(&stretch(&umu.y)),
            transport(&omega.z).add(&stretch(&umu.z)),
        )
    }

    /// Time step allowed by the CFL condition at the given state.
    pub fn cfl_dt(&self, cfl: f64, ev: &Evaluation) -> f64 {
        let g = &self.grid;
        let (eps, mu) = (self.params.eps, self.params.mu);
        let sm = mu.sqrt();
        let cg = g
            .k()
            .iter()
            .filter(|k| **k != 0.0)
            .map(|k| {
                let k = k.abs();
                ((k * (sm * k).tanh() / sm).sqrt()) / k
            })
            .fold(0.0, f64::max);
        let dx = g.dx_spacing();
        let mut dt = dx / cg;
        let u = &ev.sol.velocity;
        let vmax = u.x.zip_map(&u.y, |a, b| a.hypot(b)).max_abs();
        if vmax > 0.0 {
            dt = dt.min(dx / (eps * vmax));
        }
        let amax = self.vertical_advection_coeff(&ev.geo, &ev.sol).max_abs();
        if amax > 0.0 {
            dt = dt.min(mu * g.dz_min() / (eps * amax));
        }
        cfl * dt
    }

    /// One classical RK4 step; `first` is the evaluation of `s` if already known.
    pub fn rk4(&self, s: &State, dt: f64, first: Option<&Evaluation>) -> Result<State> {
        let k1 = match first {
            Some(ev) => self.filter(self.raw_rhs(s, ev)),
            None => self.rhs(s)?,
        };
        let k2 = self.rhs(&s.axpy(0.5 * dt, &k1))?;
        let k3 = self.rhs(&s.axpy(0.5 * dt, &k2))?;
        let k4 = self.rhs(&s.axpy(dt, &k3))?;
        let mut out = s.axpy(dt / 6.0, &k1).axpy(dt / 3.0, &k2).axpy(dt / 3.0, &k3).axpy(dt / 6.0, &k4);
        out.t = s.t + dt;
        if !out.is_finite() {
            return Err(VwsError::NonFinite(format!("state after the step to t = {}", out.t)));
        }
        Ok(out)
    }

    /// RK4 step followed, when `project` is set, by the divergence cleaning of ω.
    pub fn step(&self, s: &State, dt: f64, project: bool) -> Result<State> {
        let mut out = self.rk4(s, dt, None)?;
        if project {
            let geo = self.geometry(&out.zeta)?;
            out.omega = self.solver.project_div_free(&geo, &out.omega)?;
        }
        Ok(out)
    }

    /// Projects the vorticity of an initial state onto divergence-free fields.
    pub fn prepare(&self, s: &State) -> Result<State> {
        self.check_state(s)?;
        let geo = self.geometry(&s.zeta)?;
        let mut out = s.clone();
        out.psi = s.psi.remove_mean();
        out.omega = self.solver.project_div_free(&geo, &s.omega)?;
        Ok(out)
    }

    pub fn energy_parts(&self, s: &State, ev: &Evaluation) -> EnergyParts {
        let g = &self.grid;
        let mu = self.params.mu;
        let u = &ev.sol.velocity;
        let potential = 0.5 * g.surface_integral(&s.zeta.mul(&s.zeta));
        let density = u.x.mul(&u.x).add(&u.y.mul(&u.y)).add(&u.z.mul(&u.z).scale(1.0 / mu));
        let kinetic = 0.5 * ev.geo.volume_integral(&density);
        EnergyParts { potential, kinetic, total: potential + kinetic }
    }

    /// The energy norm `ℰᴺ` with its breakdown.
    pub fn energy_norm(&self, s: &State, ev: &Evaluation) -> Result<EnergyReport> {
        let g = &self.grid;
        let p = &self.params;
        let n = p.n_energy;
        let sm = p.mu.sqrt();
        let sq = |f: &SurfaceField| g.surface_integral(&f.mul(f));
        let sobolev = |f: &SurfaceField, order: u32| (0..=order).map(|m| sq(&g.dx_n(f, m))).sum::<f64>();
        let proj = |f: &SurfaceField| -> SurfaceField {
            g.apply_multiplier(f, |k| num_complex::Complex64::new(k.abs() / (1.0 + sm * k.abs()).sqrt(), 0.0), 1.0)
                .expect("finite symbol")
        };
        let zeta = 0.5 * sobolev(&s.zeta, n);
        let p_psi = 0.5 * sobolev(&proj(&s.psi), 3);
        let good_unknowns = 0.5
            * (1..=n)
                .map(|a| sq(&proj(&good_unknown(g, &s.psi, &s.zeta, &ev.surface.w, a, p.eps))))
                .sum::<f64>();
        // Mixed derivatives ∂x^a ∂z^b of every component, a + b ≤ N − 1.
        let mut omega = 0.0;
        for c in s.omega.components() {
            let mut dz_b = c.clone();
            for b in 0..n {
                let mut d = dz_b.clone();
                for a in 0..(n - b) {
                    omega += g.strip_integral(&d.mul(&d));
                    if a + 1 < n - b {
                        d = g.dx_volume(&d);
                    }
                }
                dz_b = g.dz_volume(&dz_b);
            }
        }
        omega *= 0.5;
        let flux = s.omega.z.bottom();
        let mean = flux.mean();
        let tol = p.tol.mean * flux.max_abs().max(s.omega.max_abs()).max(1.0);
        if mean.abs() > tol {
            return Err(VwsError::MeanNotZero { what: "bottom vorticity flux".into(), mean, tol });
        }
        let h0 = g.apply_multiplier(
            &flux.remove_mean(),
            |k| {
                let k = k.abs();
                num_complex::Complex64::new(if k == 0.0 { f64::NAN } else { (1.0 + sm * k).sqrt() / k }, 0.0)
            },
            1.0,
        )?;
        let bottom_flux = 0.5 * sq(&h0);
        Ok(EnergyReport {
            total: zeta + p_psi + good_unknowns + omega + bottom_flux,
            zeta,
            p_psi,
            good_unknowns,
            omega,
            bottom_flux,
            hamiltonian: self.energy_parts(s, ev),
            min_h: ev.geo.h.min(),
            min_a: None,
        })
    }
}

/// `𝔞 = 1 + ε((w̲ − w̲_prev)/dt + ε V̲_x ∂x w̲)`. The time difference is
/// backward when `w` is the newer trace and forward when it is the older one;
/// in both cases `w` and `vx` belong to the state the coefficient is
/// reported for.
pub fn rayleigh_taylor(
    grid: &Grid,
    eps: f64,
    w: &SurfaceField,
    vx: &SurfaceField,
    dw_dt: &SurfaceField,
) -> SurfaceField {
    let wx = grid.dx(w);
    let mut a = SurfaceField::zeros(grid.nx());
    for i in 0..a.len() {
        a.values[i] = 1.0 + eps * (dw_dt.values[i] + eps * vx.values[i] * wx.values[i]);
    }
    a
}

/// Information about one completed step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    /// Minimum of the Rayleigh–Taylor coefficient at the new state, from the
    /// backward difference over this step.
    pub min_a: f64,
    pub div: f64,
}

/// Driver that owns the current state and its reconstruction.
#[derive(Debug)]
pub struct Stepper {
    pub model: Model,
    state: State,
    eval: Evaluation,
    steps: usize,
    prev_w: Option<SurfaceField>,
}

impl Stepper {
    /// Projects the initial vorticity and reconstructs the initial state.
    pub fn new(model: Model, initial: &State) -> Result<Self> {
        let state = model.prepare(initial)?;
        let eval = model.evaluate(&state, Checks::Lenient)?;
        Ok(Self { model, state, eval, steps: 0, prev_w: None })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn evaluation(&self) -> &Evaluation {
        &self.eval
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Surface vertical velocity of the previous state, once a step was taken.
    pub fn previous_w(&self) -> Option<&SurfaceField> {
        self.prev_w.as_ref()
    }

    /// Step size the configured rule selects at the current state.
    pub fn next_dt(&self) -> f64 {
        match self.model.params.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(c) => self.model.cfl_dt(c, &self.eval),
        }
    }

    /// Advances by `dt` (or the configured step) and checks the monitors.
    pub fn advance(&mut self, dt: Option<f64>) -> Result<StepInfo> {
        let dt = dt.unwrap_or_else(|| self.next_dt());
        let m = &self.model;
        let mut next = m.rk4(&self.state, dt, Some(&self.eval))?;
        let steps = self.steps + 1;
        if steps.is_multiple_of(m.params.clean_every) {
            let geo = m.geometry(&next.zeta)?;
            next.omega = m.solver.project_div_free(&geo, &next.omega)?;
        }
        let eval = m.evaluate(&next, Checks::Lenient)?;
        let dw = eval.surface.w.sub(&self.eval.surface.w).scale(1.0 / dt);
        let a = rayleigh_taylor(&m.grid, m.params.eps, &eval.surface.w, &eval.surface.vx, &dw);
        let min_a = a.min();
        let div = divergence_residual(&eval.geo, &next.omega);
        self.prev_w = Some(std::mem::replace(&mut self.eval, eval).surface.w);
        self.state = next;
        self.steps = steps;
        if min_a < m.params.a_min {
            return Err(VwsError::RayleighTaylorViolated { min_a, a_min: m.params.a_min, t: self.state.t });
        }
        Ok(StepInfo { dt, min_a, div })
    }

    /// Integrates to `t_end`, shortening the last step to land on it exactly.
    pub fn run_until(&mut self, t_end: f64, mut on_step: impl FnMut(&Stepper, &StepInfo) -> Result<()>) -> Result<()> {
        while self.state.t < t_end - 1e-12 * t_end.abs().max(1.0) {
            let dt = self.next_dt().min(t_end - self.state.t);
            let info = self.advance(Some(dt))?;
            on_step(self, &info)?;
        }
        Ok(())
    }
}
